#include "crossconf/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <thread>

#include "crossconf/errors.hpp"

namespace crossconf {
namespace {

constexpr std::size_t kKeptFailures = 5;

bool needs_split(const std::vector<Method>& methods) {
  return std::any_of(methods.begin(), methods.end(),
                     [](Method m) { return m == Method::split || m == Method::split_2alpha; });
}

TrialResult score_set(Method method, const PredictionSet& set, double y, std::size_t p, std::size_t trial,
                      double alpha_used) {
  return TrialResult{method, p, trial, set.contains(y), set.width(), set.components(), alpha_used};
}

void record_failure(AggregateReport& report, const std::string& what) {
  ++report.failed_trials;
  if (report.failures.size() < kKeptFailures) report.failures.push_back(what);
}

}  // namespace

void SimulationConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidConfiguration("alpha must lie in (0, 1)");
  if (reps == 0) throw InvalidConfiguration("reps must be at least 1");
  if (methods.empty()) throw InvalidConfiguration("no methods requested");
  if (p_list.empty()) throw InvalidConfiguration("p list is empty");
  if (std::find(p_list.begin(), p_list.end(), std::size_t{0}) != p_list.end()) {
    throw InvalidConfiguration("p must be at least 1");
  }
  if (K == 0 || K > n) throw InvalidConfiguration("K must satisfy 1 <= K <= n");
  if (std::find(methods.begin(), methods.end(), Method::split_2alpha) != methods.end() && alpha >= 0.5) {
    throw InvalidConfiguration("split-2alpha needs alpha < 0.5");
  }
  if (needs_split(methods) && n < 2) throw InvalidConfiguration("split methods need n >= 2");
  if (fold_mode == FoldMode::varying_size && n % K != 0) {
    for (Method m : methods) {
      if (m == Method::e_cross || m == Method::eu_cross) {
        throw InvalidConfiguration(method_name(m) + " requires equal fold sizes; only u-cross is valid with varying folds");
      }
    }
  }
}

SimulatedInstance simulate_instance(std::size_t n, std::size_t p, const RandomSource& rng) {
  if (n == 0 || p == 0) throw InvalidConfiguration("simulation needs n >= 1 and p >= 1");
  Engine engine = rng.engine(Substream::data);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto pp = static_cast<Eigen::Index>(p);
  const auto nn = static_cast<Eigen::Index>(n);

  Eigen::VectorXd beta(pp);
  double norm = 0.0;
  do {
    for (Eigen::Index j = 0; j < pp; ++j) beta(j) = normal(engine);
    norm = beta.norm();
  } while (norm == 0.0);
  beta *= std::sqrt(10.0) / norm;

  Eigen::MatrixXd x(nn, pp);
  Eigen::VectorXd y(nn);
  for (Eigen::Index i = 0; i < nn; ++i) {
    for (Eigen::Index j = 0; j < pp; ++j) x(i, j) = normal(engine);
    y(i) = x.row(i).dot(beta) + normal(engine);
  }
  Eigen::RowVectorXd test_x(pp);
  for (Eigen::Index j = 0; j < pp; ++j) test_x(j) = normal(engine);
  const double test_y = test_x.dot(beta) + normal(engine);
  return SimulatedInstance{Dataset(std::move(x), std::move(y)), std::move(test_x), test_y, std::move(beta)};
}

std::uint64_t trial_stream(std::size_t p, std::size_t trial) {
  return (static_cast<std::uint64_t>(p) << 32) | static_cast<std::uint64_t>(trial);
}

std::vector<TrialResult> run_trial(const SimulationConfig& cfg, std::size_t p, std::size_t trial) {
  const RandomSource rng(cfg.seed, trial_stream(p, trial));
  const SimulatedInstance inst = simulate_instance(cfg.n, p, rng);
  const FoldAssignment folds = assign_folds(cfg.n, cfg.K, cfg.fold_mode, rng);
  const CvScores cv = compute_cv_scores(inst.data, folds, cfg.score);
  const CalibratedQuery query(cv, inst.test_x);
  const RandomDraws draws = draw_randomization(rng);

  std::optional<SplitState> split;
  if (needs_split(cfg.methods)) split = fit_split(inst.data, cfg.score, rng);

  const MethodConfig mc{cfg.alpha, cfg.methods, cfg.pvalues, cfg.hull};
  const auto sets = predict_sets(query, split ? &*split : nullptr, inst.test_x, mc, draws);

  std::vector<TrialResult> out;
  out.reserve(sets.size());
  for (const auto& [method, set] : sets) {
    out.push_back(score_set(method, set, inst.test_y, p, trial,
                            alpha_used(method, cfg.alpha, cfg.K, folds.used_points())));
  }
  return out;
}

AggregateReport aggregate(const std::vector<TrialResult>& results, const std::vector<std::size_t>& p_order,
                          const std::vector<Method>& methods) {
  struct Bucket {
    std::set<std::size_t> trials;
    std::size_t covered = 0;
    std::size_t count = 0;
    std::vector<double> finite;
    std::size_t infinite = 0;
    double alpha_used = 0.0;
  };
  std::map<std::pair<std::size_t, Method>, Bucket> buckets;
  for (const TrialResult& r : results) {
    Bucket& b = buckets[{r.p, r.method}];
    b.trials.insert(r.trial);
    ++b.count;
    if (r.covered) ++b.covered;
    if (std::isfinite(r.width)) {
      b.finite.push_back(r.width);
    } else {
      ++b.infinite;
    }
    b.alpha_used = r.alpha_used;
  }

  const double nan = std::numeric_limits<double>::quiet_NaN();
  AggregateReport report;
  for (std::size_t p : p_order) {
    for (Method m : methods) {
      auto it = buckets.find({p, m});
      if (it == buckets.end()) continue;
      Bucket& b = it->second;
      AggregateRow row{m, p, b.trials.size(), b.count, nan, nan, nan, nan, nan, nan, b.infinite, b.alpha_used};
      row.coverage = static_cast<double>(b.covered) / static_cast<double>(b.count);
      if (!b.finite.empty()) {
        std::vector<double>& w = b.finite;
        std::sort(w.begin(), w.end());
        const double count = static_cast<double>(w.size());
        double sum = 0.0;
        for (double v : w) sum += v;
        row.mean_width = sum / count;
        double ss = 0.0;
        for (double v : w) ss += (v - row.mean_width) * (v - row.mean_width);
        row.sd_width = w.size() > 1 ? std::sqrt(ss / (count - 1.0)) : 0.0;
        const std::size_t mid = w.size() / 2;
        row.median_width = w.size() % 2 == 1 ? w[mid] : 0.5 * (w[mid - 1] + w[mid]);
        row.min_width = w.front();
        row.max_width = w.back();
      }
      report.rows.push_back(row);
    }
  }
  return report;
}

void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& task) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, std::max<std::size_t>(count, 1));
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        task(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  // Lowest failing index wins so the surfaced error is schedule-independent.
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

namespace {

struct TaskOutcome {
  std::vector<TrialResult> results;
  std::optional<std::string> failure;
};

template <typename Fn>
TaskOutcome guarded(Fn&& fn) {
  TaskOutcome out;
  try {
    out.results = fn();
  } catch (const NumericalFailure& e) {
    out.failure = e.what();
  } catch (const InvalidData& e) {
    out.failure = e.what();
  }
  return out;
}

AggregateReport collect(std::vector<TaskOutcome>& outcomes, const std::vector<std::size_t>& p_order,
                        const std::vector<Method>& methods) {
  std::vector<TrialResult> all;
  std::vector<std::string> failures;
  for (TaskOutcome& o : outcomes) {
    if (o.failure) {
      failures.push_back(*o.failure);
      continue;
    }
    all.insert(all.end(), o.results.begin(), o.results.end());
  }
  AggregateReport report = aggregate(all, p_order, methods);
  for (const auto& f : failures) record_failure(report, f);
  return report;
}

}  // namespace

AggregateReport run_simulation(const SimulationConfig& cfg) {
  cfg.validate();
  const std::size_t tasks = cfg.p_list.size() * cfg.reps;
  std::vector<TaskOutcome> outcomes(tasks);
  parallel_for(tasks, cfg.threads, [&](std::size_t i) {
    const std::size_t p = cfg.p_list[i / cfg.reps];
    const std::size_t trial = i % cfg.reps;
    outcomes[i] = guarded([&] { return run_trial(cfg, p, trial); });
  });
  return collect(outcomes, cfg.p_list, cfg.methods);
}

std::vector<TrialResult> real_data_trial(const Dataset& data, std::size_t train_size, std::size_t test_size,
                                         std::size_t trial, const SimulationConfig& cfg) {
  const RandomSource rng(cfg.seed, trial);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Engine sampler = rng.engine(Substream::sampling);
  std::shuffle(order.begin(), order.end(), sampler);
  std::vector<std::size_t> train(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(train_size));
  std::vector<std::size_t> test(order.begin() + static_cast<std::ptrdiff_t>(train_size),
                                order.begin() + static_cast<std::ptrdiff_t>(train_size + test_size));
  std::sort(train.begin(), train.end());

  const Dataset train_data(data.feature_rows(train), data.response_rows(train));
  const FoldAssignment folds = assign_folds(train_size, cfg.K, cfg.fold_mode, rng);
  const CvScores cv = compute_cv_scores(train_data, folds, cfg.score);
  std::optional<SplitState> split;
  if (needs_split(cfg.methods)) split = fit_split(train_data, cfg.score, rng);

  const MethodConfig mc{cfg.alpha, cfg.methods, cfg.pvalues, cfg.hull};
  const std::size_t p = data.dimension();
  Engine randomizer = rng.engine(Substream::randomization);
  std::vector<TrialResult> out;
  out.reserve(test_size * cfg.methods.size());
  for (std::size_t j : test) {
    const auto row = static_cast<Eigen::Index>(j);
    const Eigen::RowVectorXd x = data.features().row(row);
    const double y = data.responses()(row);
    const CalibratedQuery query(cv, x);
    const RandomDraws draws = draw_randomization(randomizer);
    for (const auto& [method, set] : predict_sets(query, split ? &*split : nullptr, x, mc, draws)) {
      out.push_back(score_set(method, set, y, p, trial, alpha_used(method, cfg.alpha, cfg.K, folds.used_points())));
    }
  }
  return out;
}

AggregateReport run_real_data(const Dataset& data, std::size_t train_size, std::size_t test_size, std::size_t trials,
                              const SimulationConfig& cfg) {
  if (trials == 0) throw InvalidConfiguration("trials must be at least 1");
  if (test_size == 0) throw InvalidConfiguration("test size must be at least 1");
  if (train_size + test_size > data.size()) {
    throw InvalidConfiguration("train size + test size exceeds the number of rows");
  }
  SimulationConfig checked = cfg;
  checked.n = train_size;
  checked.p_list = {data.dimension()};
  checked.reps = trials;
  checked.validate();

  std::vector<TaskOutcome> outcomes(trials);
  parallel_for(trials, cfg.threads, [&](std::size_t t) {
    outcomes[t] = guarded([&] { return real_data_trial(data, train_size, test_size, t, checked); });
  });
  return collect(outcomes, checked.p_list, cfg.methods);
}

}  // namespace crossconf
