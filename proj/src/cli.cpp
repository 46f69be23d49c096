#include "crossconf/cli.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cmath>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

#include <json.hpp>

#include "crossconf/combiners.hpp"
#include "crossconf/csv.hpp"
#include "crossconf/errors.hpp"
#include "crossconf/experiments.hpp"
#include "crossconf/report.hpp"
#include "crossconf/sets.hpp"

namespace crossconf {
namespace {

constexpr const char* kDefaultMethods = "mod,e-mod,u-mod,eu-mod,cross";

std::size_t parse_count(std::string_view text, std::string_view what) {
  std::size_t v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw InvalidConfiguration("bad " + std::string(what) + " '" + std::string(text) + "'");
  }
  return v;
}

// Flags shared by the subcommands that build prediction sets.
struct MethodFlags {
  double alpha = 0.1;
  std::size_t k = 5;
  std::string methods = kDefaultMethods;
  std::optional<std::uint64_t> seed;
  bool entropy = false;
  std::size_t threads = 0;
  std::string out;
  bool hull = false;
  std::string fold_mode = "equal";
  std::string score = "residual";
  std::string regressor = "ols";
  bool standardize = false;
  bool smoothed = false;
};

void add_method_flags(CLI::App& cmd, MethodFlags& f) {
  cmd.add_option("--alpha", f.alpha, "Miscoverage level in (0, 1)")->capture_default_str();
  cmd.add_option("--k", f.k, "Number of folds K")->capture_default_str();
  cmd.add_option("--methods", f.methods,
                 "Comma list of mod,e-mod,u-mod,eu-mod,cross,e-cross,u-cross,eu-cross,split,split-2alpha,cv-plus")
      ->capture_default_str();
  cmd.add_option("--seed", f.seed, "Master seed")->envname("CROSSCONF_SEED");
  cmd.add_flag("--entropy", f.entropy, "Draw the seed from the system entropy source (logged in the report)");
  cmd.add_option("--threads", f.threads, "Worker threads (0 = all cores)")->capture_default_str();
  cmd.add_option("--out", f.out, "Output path; simulate and run write <out>.csv plus a <out>.json mirror");
  cmd.add_flag("--hull", f.hull, "Report the convex hull of each set");
  cmd.add_option("--fold-mode", f.fold_mode, "equal or varying")->check(CLI::IsMember({"equal", "varying"}))
      ->capture_default_str();
  cmd.add_option("--score", f.score, "Nonconformity score")->check(CLI::IsMember({"residual"}))
      ->capture_default_str();
  cmd.add_option("--regressor", f.regressor, "ols | ridge:<lambda> | knn:<k> | const:<value>")
      ->capture_default_str();
  cmd.add_flag("--standardize", f.standardize, "z-score features inside every fit");
  cmd.add_flag("--smoothed", f.smoothed, "Use tau-smoothed fold p-values");
}

struct Resolved {
  std::uint64_t seed;
  std::string seed_source;
  ScoreFunctionSpec score;
  std::vector<Method> methods;
  FoldMode fold_mode;
  PValueKind pvalues;
};

Resolved resolve(const MethodFlags& f) {
  Resolved r{};
  if (f.seed) {
    r.seed = *f.seed;
    r.seed_source = "flag";
  } else if (f.entropy) {
    std::random_device rd;
    r.seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    r.seed_source = "entropy";
  } else {
    throw InvalidConfiguration("no seed: pass --seed, set CROSSCONF_SEED, or opt in to --entropy");
  }
  r.score.regressor = RegressorSpec::parse(f.regressor);
  r.score.regressor.standardize = f.standardize;
  r.methods = parse_methods(f.methods);
  r.fold_mode = parse_fold_mode(f.fold_mode);
  r.pvalues = f.smoothed ? PValueKind::smoothed : PValueKind::deterministic;
  return r;
}

SimulationConfig make_config(const MethodFlags& f, const Resolved& r) {
  SimulationConfig cfg;
  cfg.alpha = f.alpha;
  cfg.K = f.k;
  cfg.score = r.score;
  cfg.methods = r.methods;
  cfg.seed = r.seed;
  cfg.fold_mode = r.fold_mode;
  cfg.pvalues = r.pvalues;
  cfg.hull = f.hull;
  cfg.threads = f.threads;
  return cfg;
}

std::string join_methods(const std::vector<Method>& methods) {
  std::string s;
  for (Method m : methods) {
    if (!s.empty()) s += ',';
    s += method_name(m);
  }
  return s;
}

std::string join_counts(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t x : v) {
    if (!s.empty()) s += ' ';
    s += std::to_string(x);
  }
  return s;
}

ReportMetadata base_metadata(const std::string& command, const MethodFlags& f, const Resolved& r) {
  return {
      {"command", command},
      {"alpha", format_number(f.alpha)},
      {"k", std::to_string(f.k)},
      {"methods", join_methods(r.methods)},
      {"seed", std::to_string(r.seed)},
      {"seed_source", r.seed_source},
      {"fold_mode", to_string(r.fold_mode)},
      {"pvalue_order", "fold-index"},
      {"score", f.score},
      {"regressor", r.score.regressor.to_string()},
      {"standardize", f.standardize ? "true" : "false"},
      {"pvalues", f.smoothed ? "smoothed" : "deterministic"},
      {"hull", f.hull ? "true" : "false"},
  };
}

// Warn when the fold p-value grid cannot drop to alpha, or split's level exceeds one.
void warn_uninformative(const MethodFlags& f, const std::vector<Method>& methods, std::size_t n, std::ostream& err) {
  if (f.k == 0 || f.k > n) return;
  const std::size_t m = n / f.k;
  if (!informative(f.alpha, m)) {
    err << "warning: 1 >= alpha*(m+1) with fold size m=" << m << " and alpha=" << format_number(f.alpha)
        << "; fold p-value sets may equal the whole line\n";
  }
  for (Method meth : methods) {
    if (meth != Method::split && meth != Method::split_2alpha) continue;
    const double a = alpha_used(meth, f.alpha, f.k, n);
    const std::size_t cal = n - n / 2;
    if (a < 1.0 && conformal_level(a, cal) > 1.0) {
      err << "warning: " << method_name(meth) << " quantile level exceeds 1 with " << cal
          << " calibration points; the set is the whole line\n";
    }
  }
}

void emit_report(const AggregateReport& report, const ReportMetadata& meta, const std::string& out_path,
                 std::ostream& out, std::ostream& err) {
  const std::string csv = format_csv(report, meta);
  if (out_path.empty()) {
    out << csv;
  } else {
    std::filesystem::path csv_path(out_path);
    std::filesystem::path json_path(out_path);
    if (csv_path.extension() == ".csv") {
      json_path.replace_extension(".json");
    } else {
      csv_path += ".csv";
      json_path += ".json";
    }
    write_atomic(csv_path, csv);
    write_atomic(json_path, format_json(report, meta));
    out << "wrote " << csv_path.string() << " and " << json_path.string() << '\n';
  }
  if (report.failed_trials > 0) {
    err << "warning: " << report.failed_trials << " trial(s) failed and were skipped";
    if (!report.failures.empty()) err << " (first: " << report.failures.front() << ")";
    err << '\n';
  }
}

int cmd_simulate(const MethodFlags& f, std::size_t n, const std::string& p_text, std::size_t reps, std::ostream& out,
                 std::ostream& err) {
  const Resolved r = resolve(f);
  SimulationConfig cfg = make_config(f, r);
  cfg.n = n;
  cfg.p_list = parse_count_list(p_text);
  cfg.reps = reps;
  cfg.validate();
  warn_uninformative(f, r.methods, n, err);

  ReportMetadata meta = base_metadata("simulate", f, r);
  meta.insert(meta.begin() + 1, {"n", std::to_string(n)});
  meta.insert(meta.begin() + 2, {"p", join_counts(cfg.p_list)});
  meta.insert(meta.begin() + 3, {"reps", std::to_string(reps)});
  emit_report(run_simulation(cfg), meta, f.out, out, err);
  return kExitOk;
}

int cmd_run(const MethodFlags& f, const std::string& data_path, const std::string& target, std::size_t train_size,
            std::size_t test_size, std::size_t trials, std::ostream& out, std::ostream& err) {
  const Resolved r = resolve(f);
  const LabeledDataset labeled = dataset_from_table(read_csv_file(data_path), target);
  const std::size_t n = labeled.data.size();
  if (train_size == 0) train_size = n / 2;
  if (test_size == 0) {
    if (train_size >= n) throw InvalidConfiguration("train size leaves no rows for testing");
    test_size = n - train_size;
  }
  SimulationConfig cfg = make_config(f, r);
  warn_uninformative(f, r.methods, train_size, err);

  ReportMetadata meta = base_metadata("run", f, r);
  meta.insert(meta.begin() + 1, {"data", data_path});
  meta.insert(meta.begin() + 2, {"target", target});
  meta.insert(meta.begin() + 3, {"train_size", std::to_string(train_size)});
  meta.insert(meta.begin() + 4, {"test_size", std::to_string(test_size)});
  meta.insert(meta.begin() + 5, {"trials", std::to_string(trials)});
  emit_report(run_real_data(labeled.data, train_size, test_size, trials, cfg), meta, f.out, out, err);
  return kExitOk;
}

int cmd_predict(const MethodFlags& f, const std::string& data_path, const std::string& query_path,
                const std::string& target, std::ostream& out, std::ostream& err) {
  const Resolved r = resolve(f);
  const LabeledDataset labeled = dataset_from_table(read_csv_file(data_path), target);
  const QueryRows query = query_from_table(read_csv_file(query_path), labeled.feature_names, target);
  const Dataset& data = labeled.data;
  const std::size_t n = data.size();
  if (f.k == 0 || f.k > n) throw InvalidConfiguration("K must satisfy 1 <= K <= n");
  warn_uninformative(f, r.methods, n, err);

  const RandomSource rng(r.seed);
  const FoldAssignment folds = assign_folds(n, f.k, r.fold_mode, rng);
  const CvScores cv = compute_cv_scores(data, folds, r.score);
  std::optional<SplitState> split;
  for (Method m : r.methods) {
    if ((m == Method::split || m == Method::split_2alpha) && !split) split = fit_split(data, r.score, rng);
  }
  const MethodConfig mc{f.alpha, r.methods, r.pvalues, f.hull};
  Engine randomizer = rng.engine(Substream::randomization);

  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  for (const auto& [key, value] : base_metadata("predict", f, r)) config[key] = value;
  config["data"] = data_path;
  config["query"] = query_path;
  config["target"] = target;
  config["n"] = std::to_string(n);

  nlohmann::ordered_json predictions = nlohmann::ordered_json::array();
  for (Eigen::Index row = 0; row < query.features.rows(); ++row) {
    const Eigen::RowVectorXd x = query.features.row(row);
    const CalibratedQuery cq(cv, x);
    const RandomDraws draws = draw_randomization(randomizer);
    nlohmann::ordered_json entry;
    entry["row"] = row;
    nlohmann::ordered_json sets = nlohmann::ordered_json::object();
    for (const auto& [method, set] : predict_sets(cq, split ? &*split : nullptr, x, mc, draws)) {
      nlohmann::ordered_json item;
      item["set"] = nlohmann::ordered_json::parse(to_json(set));
      item["width"] = std::isfinite(set.width()) ? nlohmann::ordered_json(set.width()) : "inf";
      item["n_components"] = set.components();
      item["alpha_used"] = alpha_used(method, f.alpha, f.k, folds.used_points());
      if (query.responses) item["covered"] = set.contains((*query.responses)(row));
      if (set.is_whole_line()) err << "warning: row " << row << ' ' << method_name(method) << " set is the whole line\n";
      sets[method_name(method)] = std::move(item);
    }
    entry["sets"] = std::move(sets);
    predictions.push_back(std::move(entry));
  }
  nlohmann::ordered_json doc;
  doc["config"] = std::move(config);
  doc["predictions"] = std::move(predictions);
  const std::string text = doc.dump(2) + "\n";
  if (f.out.empty()) {
    out << text;
  } else {
    write_atomic(f.out, text);
    out << "wrote " << f.out << '\n';
  }
  return kExitOk;
}

std::vector<std::size_t> resolve_k_list(const std::string& text, std::size_t n) {
  std::vector<std::size_t> ks;
  std::stringstream ss(text);
  std::string token;
  while (std::getline(ss, token, ',')) {
    if (token.empty()) continue;
    std::size_t k = 0;
    if (token == "n") {
      k = n;
    } else if (token == "sqrt") {
      k = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n))));
    } else {
      k = parse_count(token, "K");
    }
    if (k >= 1 && k <= n && std::find(ks.begin(), ks.end(), k) == ks.end()) ks.push_back(k);
  }
  return ks;
}

int cmd_bounds(double alpha, const std::string& k_text, const std::string& n_text, const std::string& out_path,
               std::ostream& out) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidConfiguration("alpha must lie in (0, 1)");
  const std::vector<std::size_t> ns = parse_count_list(n_text);
  std::ostringstream csv;
  csv << "# command=bounds\n# alpha=" << format_number(alpha) << "\n# k=" << k_text << "\n# n=" << n_text << '\n';
  csv << "K,n,bound_small_K,bound_large_K,combined,floor\n";
  for (std::size_t n : ns) {
    if (n == 0) throw InvalidConfiguration("n must be at least 1");
    const double floor = 1.0 - 2.0 * alpha - 2.0 / std::sqrt(static_cast<double>(n));
    for (std::size_t k : resolve_k_list(k_text, n)) {
      const CoverageBounds b = coverage_bounds(alpha, k, n);
      csv << k << ',' << n << ',' << format_number(b.small_k) << ',' << format_number(b.large_k) << ','
          << format_number(b.combined) << ',' << format_number(floor) << '\n';
    }
  }
  if (out_path.empty()) {
    out << csv.str();
  } else {
    write_atomic(out_path, csv.str());
    out << "wrote " << out_path << '\n';
  }
  return kExitOk;
}

}  // namespace

std::vector<std::size_t> parse_count_list(std::string_view text) {
  std::vector<std::size_t> out;
  if (text.find(':') != std::string_view::npos) {
    const auto c1 = text.find(':');
    const auto c2 = text.find(':', c1 + 1);
    if (c2 == std::string_view::npos) throw InvalidConfiguration("range must be start:stop:step");
    const std::size_t start = parse_count(text.substr(0, c1), "range start");
    const std::size_t stop = parse_count(text.substr(c1 + 1, c2 - c1 - 1), "range stop");
    const std::size_t step = parse_count(text.substr(c2 + 1), "range step");
    if (step == 0) throw InvalidConfiguration("range step must be positive");
    if (start > stop) throw InvalidConfiguration("range start exceeds stop");
    for (std::size_t v = start; v <= stop; v += step) out.push_back(v);
    return out;
  }
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    const auto token = text.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
    if (!token.empty()) out.push_back(parse_count(token, "count"));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  if (out.empty()) throw InvalidConfiguration("empty count list");
  return out;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cross-conformal prediction sets and coverage experiments", "crossconf"};
  app.require_subcommand(1);

  MethodFlags sim_flags;
  std::size_t sim_n = 100;
  std::string sim_p = "20";
  std::size_t sim_reps = 1000;
  auto* simulate = app.add_subcommand("simulate", "Monte-Carlo study on the linear-Gaussian design");
  simulate->add_option("--n", sim_n, "Training size")->capture_default_str();
  simulate->add_option("--p", sim_p, "Covariate counts: start:stop:step or a comma list")->capture_default_str();
  simulate->add_option("--reps", sim_reps, "Replications per p")->capture_default_str();
  add_method_flags(*simulate, sim_flags);

  MethodFlags run_flags;
  std::string run_data;
  std::string run_target;
  std::size_t run_train = 0;
  std::size_t run_test = 0;
  std::size_t run_trials = 20;
  auto* run = app.add_subcommand("run", "Repeated random train/test splits of a CSV dataset");
  run->add_option("--data", run_data, "CSV file with a header row")->required();
  run->add_option("--target", run_target, "Response column")->required();
  run->add_option("--train-size", run_train, "Training rows per trial (default n/2)");
  run->add_option("--test-size", run_test, "Test rows per trial (default: the rest)");
  run->add_option("--trials", run_trials, "Number of random splits")->capture_default_str();
  add_method_flags(*run, run_flags);

  MethodFlags pred_flags;
  std::string pred_data;
  std::string pred_query;
  std::string pred_target;
  auto* predict = app.add_subcommand("predict", "Prediction sets for query rows");
  predict->add_option("--data", pred_data, "Training CSV")->required();
  predict->add_option("--query", pred_query, "Query CSV with the same feature columns")->required();
  predict->add_option("--target", pred_target, "Response column")->required();
  add_method_flags(*predict, pred_flags);

  double b_alpha = 0.1;
  std::string b_k = "2,5,10,sqrt,n";
  std::string b_n = "10:10000:1";
  std::string b_out;
  auto* bounds = app.add_subcommand("bounds", "Cross-conformal coverage lower bounds");
  bounds->add_option("--alpha", b_alpha, "Miscoverage level")->capture_default_str();
  bounds->add_option("--k", b_k, "Comma list of K; 'n' and 'sqrt' are resolved per n")->capture_default_str();
  bounds->add_option("--n", b_n, "n values: start:stop:step or a comma list")->capture_default_str();
  bounds->add_option("--out", b_out, "CSV output path");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(sim_flags, sim_n, sim_p, sim_reps, out, err);
    if (run->parsed()) {
      return cmd_run(run_flags, run_data, run_target, run_train, run_test, run_trials, out, err);
    }
    if (predict->parsed()) return cmd_predict(pred_flags, pred_data, pred_query, pred_target, out, err);
    return cmd_bounds(b_alpha, b_k, b_n, b_out, out);
  } catch (const InvalidConfiguration& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const InvalidData& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const NumericalFailure& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
}

}  // namespace crossconf
