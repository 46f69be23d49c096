#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "crossconf/data.hpp"
#include "crossconf/random.hpp"
#include "crossconf/scores.hpp"
#include "crossconf/sets.hpp"

namespace crossconf {

struct SimulationConfig {
  std::size_t n = 100;
  std::vector<std::size_t> p_list{20};
  double alpha = 0.1;
  std::size_t K = 5;
  std::size_t reps = 1000;
  ScoreFunctionSpec score;
  std::vector<Method> methods;
  std::uint64_t seed = 0;
  FoldMode fold_mode = FoldMode::equal_size;
  PValueKind pvalues = PValueKind::deterministic;
  bool hull = false;
  /// Worker count; 0 means one per hardware thread. Never affects results.
  std::size_t threads = 0;

  /// Throws InvalidConfiguration on out-of-range fields.
  void validate() const;
};

/// One replication of the linear-Gaussian design: X ~ N(0, I_p),
/// beta = sqrt(10) u with u uniform on the unit sphere, Y | X ~ N(X beta, 1).
struct SimulatedInstance {
  Dataset data;
  Eigen::RowVectorXd test_x;
  double test_y;
  Eigen::VectorXd beta;
};

/// Draws beta, the n training pairs and one test pair from the data substream.
SimulatedInstance simulate_instance(std::size_t n, std::size_t p, const RandomSource& rng);

/// Stream id of simulation trial `trial` at dimension p.
std::uint64_t trial_stream(std::size_t p, std::size_t trial);

struct TrialResult {
  Method method;
  std::size_t p;
  std::size_t trial;
  bool covered;
  double width;  // +inf for unbounded sets
  std::size_t n_components;
  double alpha_used;
};

/// Every configured method on one simulated replication. All methods share
/// the data, folds, split and (tau, U).
std::vector<TrialResult> run_trial(const SimulationConfig& cfg, std::size_t p, std::size_t trial);

struct AggregateRow {
  Method method;
  std::size_t p;
  std::size_t reps;         // trials that produced a result
  std::size_t evaluations;  // test points scored (equals reps in simulations)
  double coverage;
  double mean_width;  // over finite widths; NaN when none are finite
  double sd_width;
  double median_width;
  double min_width;
  double max_width;
  std::size_t n_infinite;
  double alpha_used;
};

struct AggregateReport {
  std::vector<AggregateRow> rows;  // ordered by p, then method as configured
  std::size_t failed_trials = 0;
  std::vector<std::string> failures;  // first few failure messages
};

/// Groups results by (method, p) in the order given by `p_order` and `methods`.
AggregateReport aggregate(const std::vector<TrialResult>& results, const std::vector<std::size_t>& p_order,
                          const std::vector<Method>& methods);

/// Runs cfg.reps trials per p across a worker pool. Trials that throw
/// NumericalFailure or InvalidData are counted in failed_trials.
AggregateReport run_simulation(const SimulationConfig& cfg);

/// Repeated random train/test splits of a fixed dataset. Per trial, train_size
/// and test_size rows are sampled without replacement; every test row gets
/// its own (tau, U). Coverage and width aggregate over all test rows.
AggregateReport run_real_data(const Dataset& data, std::size_t train_size, std::size_t test_size, std::size_t trials,
                              const SimulationConfig& cfg);

/// Per-test-row results of run_real_data's trials, before aggregation.
std::vector<TrialResult> real_data_trial(const Dataset& data, std::size_t train_size, std::size_t test_size,
                                         std::size_t trial, const SimulationConfig& cfg);

/// Runs `count` independent tasks on `threads` workers (0 = hardware threads).
/// Task i writes only to its own output slot, so results never depend on
/// scheduling.
void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& task);

}  // namespace crossconf
