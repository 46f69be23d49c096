#include "crossconf/random.hpp"

namespace crossconf {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Engine RandomSource::engine(Substream purpose) const {
  const std::uint64_t a = mix64(seed_);
  const std::uint64_t b = mix64(a ^ mix64(stream_id_ + 0x632be59bd9b4e019ULL));
  const std::uint64_t c = mix64(b ^ static_cast<std::uint64_t>(purpose));
  std::seed_seq seq{static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(c >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  return Engine(seq);
}

double uniform_open(Engine& engine) {
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  double v = 0.0;
  do {
    v = dist(engine);
  } while (v <= 0.0 || v >= 1.0);
  return v;
}

RandomDraws draw_randomization(const RandomSource& rng) {
  Engine engine = rng.engine(Substream::randomization);
  return draw_randomization(engine);
}

RandomDraws draw_randomization(Engine& engine) {
  RandomDraws draws{};
  draws.tau = uniform_open(engine);
  draws.u = uniform_open(engine);
  return draws;
}

}  // namespace crossconf
