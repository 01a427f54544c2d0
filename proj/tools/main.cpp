// Command-line front end: fit penalized robust regressions on CSV data,
// run replication studies, screen columns, and generate synthetic inputs.
//
// Exit codes: 0 success, 1 usage problem, 2 data problem, 3 numeric failure.
// Every artifact is written atomically and embeds the seed plus the fully
// resolved configuration (JSON artifacts inline, CSV artifacts through a
// .meta.json sidecar). No artifact contains a timestamp, so identical
// invocations produce byte-identical files.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "esreg/errors.hpp"
#include "esreg/estimator.hpp"
#include "esreg/io.hpp"
#include "esreg/loss.hpp"
#include "esreg/propensity.hpp"
#include "esreg/simulation.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

// ---------------------------------------------------------------------------
// configuration plumbing

// Pre-scan for --config so file values can serve as option defaults; the
// actual flags then take precedence simply by being parsed afterwards.
json load_config_file(int argc, char** argv) {
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--config") {
      const std::string path = argv[i + 1];
      std::ifstream in(path);
      if (!in) throw esreg::DataError("cannot open config file '" + path + "'");
      try {
        json j;
        in >> j;
        return j;
      } catch (const std::exception& e) {
        throw esreg::DataError("cannot parse config file '" + path + "': " + e.what());
      }
    }
  }
  return json::object();
}

struct ConfigView {
  json j;
  double number(const std::string& key, double dflt) const {
    return j.contains(key) ? j.at(key).get<double>() : dflt;
  }
  long integer(const std::string& key, long dflt) const {
    return j.contains(key) ? j.at(key).get<long>() : dflt;
  }
  std::uint64_t uinteger(const std::string& key, std::uint64_t dflt) const {
    return j.contains(key) ? j.at(key).get<std::uint64_t>() : dflt;
  }
  std::string text(const std::string& key, const std::string& dflt) const {
    return j.contains(key) ? j.at(key).get<std::string>() : dflt;
  }
  std::vector<double> numbers(const std::string& key, std::vector<double> dflt) const {
    if (!j.contains(key)) return dflt;
    return j.at(key).get<std::vector<double>>();
  }
  std::vector<std::string> texts(const std::string& key,
                                 std::vector<std::string> dflt) const {
    if (!j.contains(key)) return dflt;
    return j.at(key).get<std::vector<std::string>>();
  }
};

// Optimizer and selection settings shared by fit and simulate.
struct CommonFitFlags {
  double step_size = 0.5;
  long max_iters = 2000;
  double grad_tol = 1e-6;
  double atan_u = 0.005;
  double en_rule = 1.0;
  double clip_floor = 0.05;
  double hbic_min = 1e-3;
  double hbic_max = 1e1;
  long hbic_size = 30;
  std::vector<double> hbic_grid;  // explicit grid from the config file, if any

  void load_defaults(const ConfigView& cfg) {
    step_size = cfg.number("step_size", step_size);
    max_iters = cfg.integer("max_iters", max_iters);
    grad_tol = cfg.number("grad_tol", grad_tol);
    atan_u = cfg.number("atan_u", atan_u);
    en_rule = cfg.number("en_rule", en_rule);
    clip_floor = cfg.number("clip_floor", clip_floor);
    hbic_grid = cfg.numbers("hbic_grid", {});
  }

  void add_flags(CLI::App* cmd) {
    cmd->add_option("--step-size", step_size, "Optimizer nominal step size");
    cmd->add_option("--max-iters", max_iters, "Optimizer iteration cap");
    cmd->add_option("--grad-tol", grad_tol, "Convergence tolerance on the gradient norm");
    cmd->add_option("--atan-u", atan_u, "Shape parameter of the atan penalty");
    cmd->add_option("--en-rule", en_rule, "Scale on the dimension factor of the model score");
    cmd->add_option("--clip-floor", clip_floor, "Lower clip for completeness probabilities");
    cmd->add_option("--hbic-min", hbic_min, "Smallest penalty level in the selection grid");
    cmd->add_option("--hbic-max", hbic_max, "Largest penalty level in the selection grid");
    cmd->add_option("--hbic-size", hbic_size, "Number of levels in the selection grid");
  }

  std::vector<double> grid() const {
    if (!hbic_grid.empty()) return hbic_grid;
    if (hbic_size < 1) throw std::invalid_argument("--hbic-size must be positive");
    if (!(hbic_min > 0.0) || !(hbic_max >= hbic_min))
      throw std::invalid_argument("the selection grid bounds must satisfy 0 < min <= max");
    std::vector<double> g(static_cast<std::size_t>(hbic_size));
    if (hbic_size == 1) {
      g[0] = hbic_min;
      return g;
    }
    const double lo = std::log(hbic_min);
    const double hi = std::log(hbic_max);
    for (long i = 0; i < hbic_size; ++i)
      g[static_cast<std::size_t>(i)] =
          std::exp(lo + (hi - lo) * static_cast<double>(i) /
                            static_cast<double>(hbic_size - 1));
    return g;
  }

  esreg::FitConfig fit_config(double h, esreg::Condition condition,
                              std::uint64_t seed) const {
    esreg::FitConfig fc;
    fc.h = h;
    fc.condition = condition;
    fc.optimizer.step_size = step_size;
    fc.optimizer.max_iters = static_cast<int>(max_iters);
    fc.optimizer.grad_tol = grad_tol;
    fc.atan_u = atan_u;
    fc.en_rule = en_rule;
    fc.hbic_grid = grid();
    fc.seed = static_cast<std::int64_t>(seed);
    return fc;
  }

  json to_json() const {
    json j;
    j["step_size"] = step_size;
    j["max_iters"] = max_iters;
    j["grad_tol"] = grad_tol;
    j["atan_u"] = atan_u;
    j["en_rule"] = en_rule;
    j["clip_floor"] = clip_floor;
    j["hbic_grid"] = grid();
    return j;
  }
};

// ---------------------------------------------------------------------------
// small output helpers

std::string json_text(const json& j) { return j.dump(2) + "\n"; }

void write_with_meta(const std::string& path, const std::string& contents,
                     const json& meta) {
  esreg::atomic_write_file(path, contents);
  esreg::atomic_write_file(path + ".meta.json", json_text(meta));
}

std::string config_footer(const json& config) {
  std::ostringstream os;
  os << "\n## Configuration\n\n```json\n" << config.dump(2) << "\n```\n";
  return os.str();
}

std::vector<esreg::PenaltyFamily> parse_penalties(const std::vector<std::string>& names) {
  std::vector<esreg::PenaltyFamily> fams;
  for (const auto& s : names) fams.push_back(esreg::penalty_from_string(s));
  if (fams.empty()) throw std::invalid_argument("at least one penalty family is required");
  return fams;
}

// ---------------------------------------------------------------------------
// fit subcommand

struct FitArgs {
  std::string input;
  std::string response = "y";
  std::string na_token = "NA";
  std::string condition = "full";
  std::vector<std::string> penalties = {"lasso", "scad", "mcp", "atan"};
  std::vector<double> h_values = {0.1, 1.0, 10.0};
  std::uint64_t seed = 1;
  long screen_k = 0;         // 0 = no screening
  long screen_subsample = 0; // 0 = all columns
  long cv_folds = 5;         // 0 = skip the out-of-sample summary
  std::string out_dir;
  CommonFitFlags common;
};

json fit_args_json(const FitArgs& a) {
  json j;
  j["command"] = "fit";
  j["input"] = a.input;
  j["response"] = a.response;
  j["na_token"] = a.na_token;
  j["condition"] = a.condition;
  j["penalty"] = a.penalties;
  j["h"] = a.h_values;
  j["seed"] = a.seed;
  j["screen_k"] = a.screen_k;
  j["screen_subsample"] = a.screen_subsample;
  j["cv_folds"] = a.cv_folds;
  j["out_dir"] = a.out_dir;
  j.update(a.common.to_json());
  return j;
}

// Mean per-row out-of-sample loss under the condition's residual, averaged
// over cross-validation folds. This is a fit-quality proxy, not a bias
// estimate: without the true coefficients only predictive loss is available.
double cv_mean_loss(const esreg::Dataset& data, esreg::PenaltyFamily fam,
                    const CommonFitFlags& common, double h,
                    esreg::Condition condition, long folds, std::uint64_t seed,
                    std::vector<std::string>& warnings) {
  const auto n = static_cast<long>(data.n_rows());
  if (folds < 2 || folds > n)
    throw std::invalid_argument("cross-validation folds must lie in [2, n]");

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  esreg::Rng rng(esreg::child_seed(seed, 0x5e1ec7f01dULL));
  for (long i = n - 1; i > 0; --i) {
    const auto pick = static_cast<long>(rng.next_u64() % static_cast<std::uint64_t>(i + 1));
    std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(pick)]);
  }

  double loss_sum = 0.0;
  long rows_scored = 0;
  for (long fold = 0; fold < folds; ++fold) {
    std::vector<int> train, test;
    for (long i = 0; i < n; ++i) {
      if (i % folds == fold) {
        test.push_back(order[static_cast<std::size_t>(i)]);
      } else {
        train.push_back(order[static_cast<std::size_t>(i)]);
      }
    }
    try {
      const esreg::Dataset train_data = data.subset_rows(train);
      const esreg::PropensityWeights w =
          esreg::uses_ipw(condition)
              ? esreg::estimate_propensity(train_data, common.clip_floor)
              : esreg::PropensityWeights::unit(train_data.n_rows());
      esreg::FitConfig fc = common.fit_config(h, condition, seed);
      esreg::PenaltySpec family;
      family.family = fam;
      family.u = fc.atan_u;
      const esreg::EstimateResult fit = esreg::select_f(train_data, w, family, fc);

      const esreg::Dataset test_data = data.subset_rows(test);
      for (Eigen::Index i = 0; i < test_data.n_rows(); ++i) {
        if (!test_data.is_complete(i)) continue;
        double r;
        if (esreg::uses_orthogonal_residual(condition)) {
          r = esreg::orthogonal_residual(test_data.responses()(i),
                                         test_data.design().row(i).transpose(),
                                         fit.omega_hat);
        } else {
          r = test_data.responses()(i) - test_data.design().row(i).dot(fit.omega_hat);
        }
        loss_sum += esreg::exp_sq_loss(r, h);
        ++rows_scored;
      }
    } catch (const std::exception& e) {
      warnings.push_back("fold " + std::to_string(fold + 1) + " skipped: " + e.what());
    }
  }
  if (rows_scored == 0) {
    warnings.push_back("no out-of-sample rows could be scored");
    return std::numeric_limits<double>::quiet_NaN();
  }
  return loss_sum / static_cast<double>(rows_scored);
}

int run_fit(const FitArgs& args) {
  const esreg::Condition condition = esreg::condition_from_string(args.condition);
  const auto families = parse_penalties(args.penalties);
  if (args.h_values.empty()) throw std::invalid_argument("at least one h value is required");
  for (double h : args.h_values) {
    if (!(h > 0.0)) throw std::invalid_argument("h values must be positive");
  }
  if (args.out_dir.empty()) throw std::invalid_argument("--out-dir is required");

  const esreg::Dataset full = esreg::ingest_csv(args.input, args.response, args.na_token);

  // Optional correlation screening down to a handful of columns.
  esreg::Dataset data = full;
  json screening = json::object();
  if (args.screen_k > 0) {
    const long subsample = args.screen_subsample > 0
                               ? args.screen_subsample
                               : static_cast<long>(full.n_cols());
    esreg::Rng rng(args.seed);
    const esreg::ScreeningResult sel =
        esreg::screen_columns(full, static_cast<int>(args.screen_k), subsample, rng);
    data = full.subset_columns(sel.columns);
    screening["columns"] = sel.names;
    screening["abs_correlations"] = sel.abs_correlations;
    screening["subsample_size"] = subsample;
    screening["warnings"] = sel.warnings;
  }

  const esreg::PropensityWeights weights =
      esreg::uses_ipw(condition)
          ? esreg::estimate_propensity(data, args.common.clip_floor)
          : esreg::PropensityWeights::unit(data.n_rows());

  const json config = fit_args_json(args);
  json results = json::array();

  struct SummaryRow {
    std::string penalty;
    double h;
    double cv_loss;
    std::size_t size;
    double f_selected;
    std::vector<std::pair<std::string, double>> top;
  };
  std::vector<SummaryRow> summary;

  for (const auto fam : families) {
    for (const double h : args.h_values) {
      esreg::FitConfig fc = args.common.fit_config(h, condition, args.seed);
      esreg::PenaltySpec family;
      family.family = fam;
      family.u = fc.atan_u;
      const esreg::EstimateResult fit = esreg::select_f(data, weights, family, fc);

      json entry;
      entry["penalty"] = esreg::to_string(fam);
      entry["h"] = h;
      entry["f_selected"] = fit.f_selected;
      entry["hbic"] = std::isfinite(fit.hbic) ? json(fit.hbic) : json("-inf");
      entry["objective"] = fit.objective;
      entry["iterations"] = fit.iterations;
      entry["converged"] = fit.converged;
      entry["perfect_fit"] = fit.perfect_fit;
      entry["final_grad_norm"] = fit.final_grad_norm;
      entry["clipped_probabilities"] = weights.clipped_count;

      json active = json::array();
      std::vector<std::pair<std::string, double>> coefs;
      for (const int k : fit.active_set) {
        json c;
        c["column"] = data.column_names()[static_cast<std::size_t>(k)];
        c["coefficient"] = fit.omega_hat(k);
        active.push_back(c);
        coefs.emplace_back(data.column_names()[static_cast<std::size_t>(k)],
                           fit.omega_hat(k));
      }
      entry["active"] = active;
      json zv = json::array();
      for (const int k : fit.zero_variance_columns)
        zv.push_back(data.column_names()[static_cast<std::size_t>(k)]);
      entry["zero_variance_columns"] = zv;

      std::vector<std::string> cv_warnings;
      double cv = std::numeric_limits<double>::quiet_NaN();
      if (args.cv_folds > 0) {
        cv = cv_mean_loss(data, fam, args.common, h, condition, args.cv_folds,
                          args.seed, cv_warnings);
        entry["cv_mean_loss"] = std::isnan(cv) ? json(nullptr) : json(cv);
        entry["cv_warnings"] = cv_warnings;
      }
      results.push_back(entry);

      std::stable_sort(coefs.begin(), coefs.end(),
                       [](const auto& a, const auto& b) {
                         return std::fabs(a.second) > std::fabs(b.second);
                       });
      if (coefs.size() > 5) coefs.resize(5);
      summary.push_back({esreg::to_string(fam), h, cv, fit.active_set.size(),
                         fit.f_selected, std::move(coefs)});
    }
  }

  fs::create_directories(args.out_dir);
  const fs::path out(args.out_dir);

  json results_doc;
  results_doc["config"] = config;
  if (!screening.empty()) results_doc["screening"] = screening;
  results_doc["results"] = results;
  esreg::atomic_write_file((out / "fit_results.json").string(), json_text(results_doc));

  {
    std::ostringstream os;
    os << "# Selected features\n\n";
    os << "Columns with the largest selected coefficients per method"
          " (at most five shown; the full sets are in fit_results.json).\n\n";
    os << "| penalty | h | size | top columns (coefficient) |\n";
    os << "|---|---|---|---|\n";
    for (const auto& row : summary) {
      os << "| " << row.penalty << " | " << esreg::format_double(row.h) << " | "
         << row.size << " | ";
      for (std::size_t i = 0; i < row.top.size(); ++i) {
        if (i) os << ", ";
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.4g", row.top[i].second);
        os << row.top[i].first << " (" << buf << ")";
      }
      os << " |\n";
    }
    os << config_footer(config);
    esreg::atomic_write_file((out / "selected_features.md").string(), os.str());
  }

  {
    std::ostringstream csv;
    csv << "penalty,h,cv_mean_loss,active_size,f_selected\n";
    for (const auto& row : summary) {
      csv << row.penalty << ',' << esreg::format_double(row.h) << ','
          << esreg::format_double(row.cv_loss) << ',' << row.size << ','
          << esreg::format_double(row.f_selected) << '\n';
    }
    json meta;
    meta["config"] = config;
    write_with_meta((out / "summary.csv").string(), csv.str(), meta);

    std::ostringstream md;
    md << "# Fit summary\n\n";
    md << "`cv_mean_loss` is the mean out-of-sample loss over " << args.cv_folds
       << "-fold splits (a fit-quality proxy; smaller is better)."
          " `active_size` is the number of selected columns.\n\n";
    md << "| penalty | h | cv mean loss | size | selected level |\n";
    md << "|---|---|---|---|---|\n";
    for (const auto& row : summary) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.5g", row.cv_loss);
      md << "| " << row.penalty << " | " << esreg::format_double(row.h) << " | "
         << buf << " | " << row.size << " | "
         << esreg::format_double(row.f_selected) << " |\n";
    }
    md << config_footer(config);
    esreg::atomic_write_file((out / "summary.md").string(), md.str());
  }
  return 0;
}

// ---------------------------------------------------------------------------
// simulate subcommand

struct SimArgs {
  long n = 100;
  long d = 300;
  std::vector<std::string> correlation = {"corr"};
  std::vector<std::string> error_dist = {"normal"};
  std::vector<std::string> penalties = {"atan"};
  std::vector<std::string> conditions = {"full"};
  std::vector<double> h_values = {0.1};
  long replications = 300;
  std::uint64_t seed = 1;
  double me_variance = 0.3;
  double noise_scale = 1.0;
  long threads = 0;
  double miss_intercept = 1.0;
  double miss_coef_y = 2.0;
  double miss_coef_x3 = -2.0;
  double miss_coef_x5 = 4.0;
  std::string out_dir;
  CommonFitFlags common;
};

json sim_args_json(const SimArgs& a) {
  json j;
  j["command"] = "simulate";
  j["n"] = a.n;
  j["d"] = a.d;
  j["correlation"] = a.correlation;
  j["error_dist"] = a.error_dist;
  j["penalty"] = a.penalties;
  j["condition"] = a.conditions;
  j["h"] = a.h_values;
  j["replications"] = a.replications;
  j["seed"] = a.seed;
  j["me_variance"] = a.me_variance;
  j["noise_scale"] = a.noise_scale;
  j["threads"] = a.threads;
  j["missingness"] = {{"intercept", a.miss_intercept},
                      {"coef_y", a.miss_coef_y},
                      {"coef_x3", a.miss_coef_x3},
                      {"coef_x5", a.miss_coef_x5}};
  j["out_dir"] = a.out_dir;
  j.update(a.common.to_json());
  return j;
}

int run_simulate(const SimArgs& args) {
  if (args.out_dir.empty()) throw std::invalid_argument("--out-dir is required");
  if (args.h_values.empty()) throw std::invalid_argument("at least one h value is required");

  std::vector<esreg::MonteCarloReport> reports;
  std::uint64_t cell = 0;
  for (const auto& corr_name : args.correlation) {
    for (const auto& err_name : args.error_dist) {
      for (const auto& cond_name : args.conditions) {
        for (const auto& pen_name : args.penalties) {
          for (const double h : args.h_values) {
            esreg::SimulationScenario sc;
            sc.n = args.n;
            sc.d = args.d;
            sc.correlation = esreg::correlation_from_string(corr_name);
            sc.error_dist = esreg::error_dist_from_string(err_name);
            sc.condition = esreg::condition_from_string(cond_name);
            sc.penalty = esreg::penalty_from_string(pen_name);
            sc.h = h;
            sc.me_variance = args.me_variance;
            sc.noise_scale = args.noise_scale;
            sc.replications = args.replications;
            // Each grid cell draws from its own reproducible stream.
            sc.seed = esreg::child_seed(args.seed, cell++);
            sc.missingness.intercept = args.miss_intercept;
            sc.missingness.coef_y = args.miss_coef_y;
            sc.missingness.coef_x3 = args.miss_coef_x3;
            sc.missingness.coef_x5 = args.miss_coef_x5;
            sc.clip_floor = args.common.clip_floor;
            sc.threads = static_cast<int>(args.threads);
            sc.fit = args.common.fit_config(h, sc.condition, sc.seed);
            reports.push_back(esreg::run_monte_carlo(sc));
          }
        }
      }
    }
  }

  fs::create_directories(args.out_dir);
  const fs::path out(args.out_dir);
  const json config = sim_args_json(args);

  std::ostringstream csv;
  csv << esreg::report_csv_header() << '\n';
  for (const auto& rep : reports) csv << esreg::report_csv_row(rep) << '\n';
  json meta;
  meta["config"] = config;
  write_with_meta((out / "report.csv").string(), csv.str(), meta);

  std::string md = esreg::report_markdown(reports);
  md += config_footer(config);
  esreg::atomic_write_file((out / "report.md").string(), md);
  return 0;
}

// ---------------------------------------------------------------------------
// screen subcommand

struct ScreenArgs {
  std::string input;
  std::string response = "y";
  std::string na_token = "NA";
  long k = 5;
  long subsample = 0;  // 0 = all columns
  std::uint64_t seed = 1;
  std::string out;
};

int run_screen(const ScreenArgs& args) {
  if (args.out.empty()) throw std::invalid_argument("--out is required");
  const esreg::Dataset data = esreg::ingest_csv(args.input, args.response, args.na_token);
  const long subsample =
      args.subsample > 0 ? args.subsample : static_cast<long>(data.n_cols());
  esreg::Rng rng(args.seed);
  const esreg::ScreeningResult sel =
      esreg::screen_columns(data, static_cast<int>(args.k), subsample, rng);

  json config;
  config["command"] = "screen";
  config["input"] = args.input;
  config["response"] = args.response;
  config["na_token"] = args.na_token;
  config["k"] = args.k;
  config["subsample"] = subsample;
  config["seed"] = args.seed;
  config["out"] = args.out;

  json doc;
  doc["config"] = config;
  doc["columns"] = sel.names;
  doc["column_indices"] = sel.columns;
  doc["abs_correlations"] = sel.abs_correlations;
  doc["warnings"] = sel.warnings;
  esreg::atomic_write_file(args.out, json_text(doc));
  return 0;
}

// ---------------------------------------------------------------------------
// synth subcommand

struct SynthArgs {
  std::string out;
  long rows = 98;
  long cols = 3000;
  long signal_cols = 5;
  long missing_cols = 3;
  double noise_sd = 1.0;
  std::string response_name = "y";
  std::string na_token = "NA";
  std::uint64_t seed = 1;
};

int run_synth(const SynthArgs& args) {
  if (args.out.empty()) throw std::invalid_argument("--out is required");
  if (args.rows < 2) throw std::invalid_argument("--rows must be at least 2");
  if (args.cols < 1) throw std::invalid_argument("--cols must be at least 1");
  if (args.signal_cols < 0 || args.signal_cols > args.cols)
    throw std::invalid_argument("--signal-cols must lie in [0, cols]");
  if (args.missing_cols < 0 || args.missing_cols > args.cols)
    throw std::invalid_argument("--missing-cols must lie in [0, cols]");
  if (!(args.noise_sd >= 0.0)) throw std::invalid_argument("--noise-sd must be nonnegative");

  esreg::Rng rng(args.seed);
  const long n = args.rows, d = args.cols;
  Eigen::MatrixXd x(n, d);
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < d; ++j) x(i, j) = rng.normal();

  // Informative columns are spread evenly; coefficients cycle over a fixed
  // palette so the ground truth is easy to eyeball in the sidecar.
  const double palette[] = {1.5, -2.0, 1.0, 2.5, -1.0};
  std::vector<long> signal;
  std::vector<double> coef;
  for (long k = 0; k < args.signal_cols; ++k) {
    signal.push_back((k * d) / std::max<long>(args.signal_cols, 1));
    coef.push_back(palette[static_cast<std::size_t>(k % 5)]);
  }
  Eigen::VectorXd y(n);
  for (long i = 0; i < n; ++i) {
    double v = 0.0;
    for (std::size_t k = 0; k < signal.size(); ++k) v += coef[k] * x(i, signal[k]);
    y(i) = v + args.noise_sd * rng.normal();
  }

  // Holes appear in a random set of columns, more likely on rows with a
  // large response, so the missingness depends on observables only.
  std::vector<long> pool(static_cast<std::size_t>(d));
  std::iota(pool.begin(), pool.end(), 0);
  for (long j = 0; j < args.missing_cols; ++j) {
    const auto span = static_cast<std::uint64_t>(d - j);
    const auto pick = j + static_cast<long>(rng.next_u64() % span);
    std::swap(pool[static_cast<std::size_t>(j)], pool[static_cast<std::size_t>(pick)]);
  }
  std::vector<long> holed(pool.begin(), pool.begin() + args.missing_cols);
  std::sort(holed.begin(), holed.end());

  std::vector<std::uint8_t> flags(static_cast<std::size_t>(n), 1);
  esreg::AbsentMask absent = esreg::AbsentMask::Constant(n, d, false);
  if (!holed.empty()) {
    for (long i = 0; i < n; ++i) {
      const double eta = 0.5 + 1.2 * y(i);
      const double p = 1.0 / (1.0 + std::exp(-eta));
      if (!rng.bernoulli(p)) {
        flags[static_cast<std::size_t>(i)] = 0;
        for (long c : holed) absent(i, c) = true;
      }
    }
  }
  bool any_hole = false;
  for (auto f : flags) any_hole = any_hole || (f == 0);
  std::vector<int> block;
  if (any_hole)
    for (long c : holed) block.push_back(static_cast<int>(c));

  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(d));
  for (long j = 0; j < d; ++j) names.push_back("g" + std::to_string(j + 1));

  const esreg::Dataset data(y, x, flags, absent, block, names);
  esreg::emit_csv(data, args.out, args.response_name, args.na_token);

  json config;
  config["command"] = "synth";
  config["out"] = args.out;
  config["rows"] = args.rows;
  config["cols"] = args.cols;
  config["signal_cols"] = args.signal_cols;
  config["missing_cols"] = args.missing_cols;
  config["noise_sd"] = args.noise_sd;
  config["response_name"] = args.response_name;
  config["na_token"] = args.na_token;
  config["seed"] = args.seed;
  json truth = json::array();
  for (std::size_t k = 0; k < signal.size(); ++k) {
    json t;
    t["column"] = names[static_cast<std::size_t>(signal[k])];
    t["coefficient"] = coef[k];
    truth.push_back(t);
  }
  json holes = json::array();
  for (long c : holed) holes.push_back(names[static_cast<std::size_t>(c)]);
  json meta;
  meta["config"] = config;
  meta["truth"] = truth;
  meta["holed_columns"] = holes;
  esreg::atomic_write_file(args.out + ".meta.json", json_text(meta));
  return 0;
}

// ---------------------------------------------------------------------------

void report_error(const char* type, const std::string& message, int code) {
  json err;
  err["error"] = {{"type", type}, {"message", message}, {"exit_code", code}};
  std::cerr << err.dump() << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust penalized regression for noisy, incompletely observed data"};
  app.require_subcommand(1);
  // Long-form flags only; freeing -h also lets subcommands use --h.
  app.set_help_flag("--help", "Print help and exit");
  std::string config_path;
  app.add_option("--config", config_path,
                 "JSON file with option defaults (explicit flags win)");

  try {
    const ConfigView cfg{load_config_file(argc, argv)};

    FitArgs fit_args;
    fit_args.input = cfg.text("input", fit_args.input);
    fit_args.response = cfg.text("response", fit_args.response);
    fit_args.na_token = cfg.text("na_token", fit_args.na_token);
    fit_args.condition = cfg.text("condition", fit_args.condition);
    fit_args.penalties = cfg.texts("penalty", fit_args.penalties);
    fit_args.h_values = cfg.numbers("h", fit_args.h_values);
    fit_args.seed = cfg.uinteger("seed", fit_args.seed);
    fit_args.screen_k = cfg.integer("screen_k", fit_args.screen_k);
    fit_args.screen_subsample = cfg.integer("screen_subsample", fit_args.screen_subsample);
    fit_args.cv_folds = cfg.integer("cv_folds", fit_args.cv_folds);
    fit_args.out_dir = cfg.text("out_dir", fit_args.out_dir);
    fit_args.common.load_defaults(cfg);

    CLI::App* fit_cmd = app.add_subcommand(
        "fit", "Fit penalized robust regressions on a CSV dataset");
    fit_cmd->set_help_flag("--help", "Print help and exit");
    auto* fit_input =
        fit_cmd->add_option("--input", fit_args.input, "Input CSV path");
    if (fit_args.input.empty()) fit_input->required();
    fit_cmd->add_option("--response", fit_args.response, "Response column name");
    fit_cmd->add_option("--na-token", fit_args.na_token, "Token marking absent cells");
    fit_cmd->add_option("--condition", fit_args.condition,
                        "Correction mode: full, error_only, missing_only or none");
    fit_cmd->add_option("--penalty", fit_args.penalties,
                        "Penalty families to fit (repeatable)");
    fit_cmd->add_option("--h", fit_args.h_values, "Loss scales to fit (repeatable)");
    fit_cmd->add_option("--seed", fit_args.seed, "Random seed");
    fit_cmd->add_option("--screen-k", fit_args.screen_k,
                        "Keep this many columns by correlation screening (0 = off)");
    fit_cmd->add_option("--screen-subsample", fit_args.screen_subsample,
                        "Columns drawn before screening (0 = all)");
    fit_cmd->add_option("--cv-folds", fit_args.cv_folds,
                        "Folds for the out-of-sample loss summary (0 = skip)");
    auto* fit_out = fit_cmd->add_option("--out-dir", fit_args.out_dir,
                                        "Directory for result artifacts");
    if (fit_args.out_dir.empty()) fit_out->required();
    fit_args.common.add_flags(fit_cmd);

    SimArgs sim_args;
    sim_args.n = cfg.integer("n", sim_args.n);
    sim_args.d = cfg.integer("d", sim_args.d);
    sim_args.correlation = cfg.texts("correlation", sim_args.correlation);
    sim_args.error_dist = cfg.texts("error_dist", sim_args.error_dist);
    sim_args.penalties = cfg.texts("penalty", sim_args.penalties);
    sim_args.conditions = cfg.texts("condition", sim_args.conditions);
    sim_args.h_values = cfg.numbers("h", sim_args.h_values);
    sim_args.replications = cfg.integer("replications", sim_args.replications);
    sim_args.seed = cfg.uinteger("seed", sim_args.seed);
    sim_args.me_variance = cfg.number("me_variance", sim_args.me_variance);
    sim_args.noise_scale = cfg.number("noise_scale", sim_args.noise_scale);
    sim_args.threads = cfg.integer("threads", sim_args.threads);
    if (cfg.j.contains("missingness")) {
      const auto& m = cfg.j.at("missingness");
      if (m.contains("intercept")) sim_args.miss_intercept = m.at("intercept").get<double>();
      if (m.contains("coef_y")) sim_args.miss_coef_y = m.at("coef_y").get<double>();
      if (m.contains("coef_x3")) sim_args.miss_coef_x3 = m.at("coef_x3").get<double>();
      if (m.contains("coef_x5")) sim_args.miss_coef_x5 = m.at("coef_x5").get<double>();
    }
    sim_args.out_dir = cfg.text("out_dir", sim_args.out_dir);
    sim_args.common.load_defaults(cfg);

    CLI::App* sim_cmd = app.add_subcommand(
        "simulate", "Replication study of the estimator on synthetic draws");
    sim_cmd->set_help_flag("--help", "Print help and exit");
    sim_cmd->add_option("--n", sim_args.n, "Rows per replication");
    sim_cmd->add_option("--d", sim_args.d, "Columns per replication");
    sim_cmd->add_option("--correlation", sim_args.correlation,
                        "Design correlation: ind or corr (repeatable)");
    sim_cmd->add_option("--error-dist", sim_args.error_dist,
                        "Response noise: normal, t3 or chisq2 (repeatable)");
    sim_cmd->add_option("--penalty", sim_args.penalties, "Penalty families (repeatable)");
    sim_cmd->add_option("--condition", sim_args.conditions,
                        "Correction modes (repeatable)");
    sim_cmd->add_option("--h", sim_args.h_values, "Loss scales (repeatable)");
    sim_cmd->add_option("--replications", sim_args.replications, "Replications per cell");
    sim_cmd->add_option("--seed", sim_args.seed, "Base random seed");
    sim_cmd->add_option("--me-variance", sim_args.me_variance,
                        "Additive covariate noise variance");
    sim_cmd->add_option("--noise-scale", sim_args.noise_scale,
                        "Multiplier on the response noise draw");
    sim_cmd->add_option("--threads", sim_args.threads,
                        "Worker threads (0 = hardware)");
    sim_cmd->add_option("--miss-intercept", sim_args.miss_intercept,
                        "Missingness model intercept");
    sim_cmd->add_option("--miss-coef-y", sim_args.miss_coef_y,
                        "Missingness model response coefficient");
    sim_cmd->add_option("--miss-coef-x3", sim_args.miss_coef_x3,
                        "Missingness model coefficient on the third column");
    sim_cmd->add_option("--miss-coef-x5", sim_args.miss_coef_x5,
                        "Missingness model coefficient on the fifth column");
    auto* sim_out = sim_cmd->add_option("--out-dir", sim_args.out_dir,
                                        "Directory for report artifacts");
    if (sim_args.out_dir.empty()) sim_out->required();
    sim_args.common.add_flags(sim_cmd);

    ScreenArgs screen_args;
    screen_args.input = cfg.text("input", screen_args.input);
    screen_args.response = cfg.text("response", screen_args.response);
    screen_args.na_token = cfg.text("na_token", screen_args.na_token);
    screen_args.k = cfg.integer("k", screen_args.k);
    screen_args.subsample = cfg.integer("subsample", screen_args.subsample);
    screen_args.seed = cfg.uinteger("seed", screen_args.seed);
    screen_args.out = cfg.text("out", screen_args.out);

    CLI::App* screen_cmd = app.add_subcommand(
        "screen", "Rank columns by absolute correlation with the response");
    screen_cmd->set_help_flag("--help", "Print help and exit");
    auto* screen_input =
        screen_cmd->add_option("--input", screen_args.input, "Input CSV path");
    if (screen_args.input.empty()) screen_input->required();
    screen_cmd->add_option("--response", screen_args.response, "Response column name");
    screen_cmd->add_option("--na-token", screen_args.na_token, "Token marking absent cells");
    screen_cmd->add_option("--k", screen_args.k, "Number of columns to keep");
    screen_cmd->add_option("--subsample", screen_args.subsample,
                           "Columns drawn before ranking (0 = all)");
    screen_cmd->add_option("--seed", screen_args.seed, "Random seed");
    auto* screen_out =
        screen_cmd->add_option("--out", screen_args.out, "Output JSON path");
    if (screen_args.out.empty()) screen_out->required();

    SynthArgs synth_args;
    synth_args.out = cfg.text("out", synth_args.out);
    synth_args.rows = cfg.integer("rows", synth_args.rows);
    synth_args.cols = cfg.integer("cols", synth_args.cols);
    synth_args.signal_cols = cfg.integer("signal_cols", synth_args.signal_cols);
    synth_args.missing_cols = cfg.integer("missing_cols", synth_args.missing_cols);
    synth_args.noise_sd = cfg.number("noise_sd", synth_args.noise_sd);
    synth_args.response_name = cfg.text("response_name", synth_args.response_name);
    synth_args.na_token = cfg.text("na_token", synth_args.na_token);
    synth_args.seed = cfg.uinteger("seed", synth_args.seed);

    CLI::App* synth_cmd = app.add_subcommand(
        "synth", "Generate a synthetic CSV dataset with holes");
    synth_cmd->set_help_flag("--help", "Print help and exit");
    auto* synth_out = synth_cmd->add_option("--out", synth_args.out, "Output CSV path");
    if (synth_args.out.empty()) synth_out->required();
    synth_cmd->add_option("--rows", synth_args.rows, "Number of rows");
    synth_cmd->add_option("--cols", synth_args.cols, "Number of covariate columns");
    synth_cmd->add_option("--signal-cols", synth_args.signal_cols,
                          "Number of informative columns");
    synth_cmd->add_option("--missing-cols", synth_args.missing_cols,
                          "Number of columns that get holes");
    synth_cmd->add_option("--noise-sd", synth_args.noise_sd,
                          "Response noise standard deviation");
    synth_cmd->add_option("--response-name", synth_args.response_name,
                          "Name of the response column");
    synth_cmd->add_option("--na-token", synth_args.na_token, "Token for absent cells");
    synth_cmd->add_option("--seed", synth_args.seed, "Random seed");

    try {
      app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e);
      return code == 0 ? 0 : 1;
    }

    if (fit_cmd->parsed()) return run_fit(fit_args);
    if (sim_cmd->parsed()) return run_simulate(sim_args);
    if (screen_cmd->parsed()) return run_screen(screen_args);
    if (synth_cmd->parsed()) return run_synth(synth_args);
    report_error("usage", "no subcommand given", 1);
    return 1;
  } catch (const std::invalid_argument& e) {
    report_error("usage", e.what(), 1);
    return 1;
  } catch (const esreg::DataError& e) {
    report_error("data", e.what(), 2);
    return 2;
  } catch (const esreg::NumericError& e) {
    report_error("numeric", e.what(), 3);
    return 3;
  } catch (const std::exception& e) {
    report_error("numeric", e.what(), 3);
    return 3;
  }
}
