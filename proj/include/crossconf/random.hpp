#pragma once

#include <cstdint>
#include <random>

namespace crossconf {

/// Named consumers of randomness. Each gets its own engine derived from the
/// master seed, so adding draws for one purpose never shifts another.
enum class Substream : std::uint64_t {
  folds = 1,
  randomization = 2,
  data = 3,
  split = 4,
  sampling = 5,
};

using Engine = std::mt19937_64;

/// Seeded source of independent streams. `stream_id` separates trials; the
/// substream tag separates purposes within a trial.
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed, std::uint64_t stream_id = 0)
      : seed_(seed), stream_id_(stream_id) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  /// Fresh engine for one purpose; calling twice returns identical sequences.
  Engine engine(Substream purpose) const;

  /// Same master seed, different stream.
  RandomSource with_stream(std::uint64_t stream_id) const { return RandomSource(seed_, stream_id); }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
};

/// Uniform draw on the open interval (0, 1).
double uniform_open(Engine& engine);

/// The auxiliary uniforms of the randomized procedures: tau smooths the fold
/// p-values (shared across folds), u scales the averaged p-value.
struct RandomDraws {
  double tau;
  double u;
};

/// One (tau, u) pair from the randomization substream of `rng`.
RandomDraws draw_randomization(const RandomSource& rng);
/// Next (tau, u) pair from an engine already dedicated to randomization.
RandomDraws draw_randomization(Engine& engine);

/// splitmix64 finalizer, exposed for deriving stream ids.
std::uint64_t mix64(std::uint64_t x);

}  // namespace crossconf
