#include "esreg/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "esreg/errors.hpp"
#include "esreg/io.hpp"
#include "esreg/propensity.hpp"

namespace esreg {

std::string to_string(CorrelationKind k) {
  return k == CorrelationKind::Ind ? "ind" : "corr";
}

CorrelationKind correlation_from_string(const std::string& s) {
  if (s == "ind") return CorrelationKind::Ind;
  if (s == "corr") return CorrelationKind::Corr;
  throw std::invalid_argument("unknown correlation kind '" + s + "' (expected ind or corr)");
}

std::string to_string(ErrorDist e) {
  switch (e) {
    case ErrorDist::Normal01: return "normal";
    case ErrorDist::T3: return "t3";
    case ErrorDist::ChiSq2: return "chisq2";
  }
  throw std::invalid_argument("unknown error distribution");
}

ErrorDist error_dist_from_string(const std::string& s) {
  if (s == "normal") return ErrorDist::Normal01;
  if (s == "t3") return ErrorDist::T3;
  if (s == "chisq2") return ErrorDist::ChiSq2;
  throw std::invalid_argument("unknown error distribution '" + s +
                              "' (expected normal, t3 or chisq2)");
}

double missingness_probability(const MissingnessModel& model, double y, double x3,
                               double x5) {
  const double eta = model.intercept + model.coef_y * y + model.coef_x3 * x3 +
                     model.coef_x5 * x5;
  return 1.0 / (1.0 + std::exp(-eta));
}

void SimulationScenario::validate() const {
  if (n < 2) throw std::invalid_argument("scenario sample size must be at least 2");
  if (d < 7) throw std::invalid_argument("scenario dimension must be at least 7 to host the fixed support");
  if (replications < 1) throw std::invalid_argument("replication count must be positive");
  if (!(me_variance >= 0.0)) throw std::invalid_argument("covariate noise variance must be nonnegative");
  if (!(noise_scale >= 0.0)) throw std::invalid_argument("response noise scale must be nonnegative");
  if (!(h > 0.0)) throw std::invalid_argument("h must be positive");
  if (!(clip_floor > 0.0) || !(clip_floor < 1.0))
    throw std::invalid_argument("clip floor must lie strictly between 0 and 1");
  if (threads < 0) throw std::invalid_argument("thread count must be nonnegative");
  FitConfig probe = fit;
  probe.h = h;
  probe.validate();
}

Coefficients true_omega(long d) {
  if (d < 7) throw std::invalid_argument("dimension must be at least 7");
  Coefficients w = Coefficients::Zero(d);
  w(1) = 1.0;
  w(3) = 2.0;
  w(5) = 4.0;
  return w;
}

CleanSample generate_clean(const SimulationScenario& sc, Rng& rng) {
  const long n = sc.n;
  const long d = sc.d;
  CleanSample out;
  out.x.resize(n, d);

  if (sc.correlation == CorrelationKind::Ind) {
    for (long i = 0; i < n; ++i)
      for (long j = 0; j < d; ++j) out.x(i, j) = rng.normal();
  } else {
    // AR(1) with coefficient 0.5: x_j = 0.5 x_{j-1} + sqrt(0.75) z_j keeps
    // unit marginal variance and lag-k correlation 0.5^k.
    const double carry = 0.5;
    const double fresh = std::sqrt(0.75);
    for (long i = 0; i < n; ++i) {
      double prev = rng.normal();
      out.x(i, 0) = prev;
      for (long j = 1; j < d; ++j) {
        prev = carry * prev + fresh * rng.normal();
        out.x(i, j) = prev;
      }
    }
  }

  out.eps.resize(n);
  for (long i = 0; i < n; ++i) {
    double e = 0.0;
    switch (sc.error_dist) {
      case ErrorDist::Normal01: e = rng.normal(); break;
      case ErrorDist::T3: e = rng.student_t3(); break;
      case ErrorDist::ChiSq2: e = rng.chi_squared2(); break;
    }
    out.eps(i) = sc.noise_scale * e;
  }

  out.omega_true = true_omega(d);
  out.y = out.x * out.omega_true + out.eps;
  return out;
}

Eigen::MatrixXd apply_measurement_error(const Eigen::MatrixXd& x, double me_variance,
                                        Rng& rng) {
  if (!(me_variance >= 0.0))
    throw std::invalid_argument("covariate noise variance must be nonnegative");
  if (me_variance == 0.0) return x;
  Eigen::MatrixXd t = x;
  const double sd = std::sqrt(me_variance);
  for (Eigen::Index i = 0; i < t.rows(); ++i)
    for (Eigen::Index j = 0; j < t.cols(); ++j) t(i, j) += sd * rng.normal();
  return t;
}

Dataset apply_missingness(const Eigen::MatrixXd& noisy_design,
                          const Eigen::VectorXd& y, const Eigen::MatrixXd& clean_x,
                          const MissingnessModel& model, Rng& rng) {
  const Eigen::Index n = noisy_design.rows();
  const Eigen::Index d = noisy_design.cols();
  if (y.size() != n || clean_x.rows() != n || clean_x.cols() != d)
    throw std::invalid_argument("design, response and latent covariates disagree in shape");
  if (d < 5) throw std::invalid_argument("missingness model needs at least five columns");

  const std::vector<int> holes = {0, 2, 4};
  std::vector<std::uint8_t> flags(static_cast<std::size_t>(n), 1);
  AbsentMask absent = AbsentMask::Constant(n, d, false);
  Eigen::MatrixXd design = noisy_design;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double p = missingness_probability(model, y(i), clean_x(i, 2), clean_x(i, 4));
    if (!rng.bernoulli(p)) {
      flags[static_cast<std::size_t>(i)] = 0;
      for (int c : holes) {
        absent(i, c) = true;
        design(i, c) = std::numeric_limits<double>::quiet_NaN();
      }
    }
  }
  return Dataset(y, std::move(design), std::move(flags), std::move(absent), holes);
}

double model_error(const Coefficients& omega_hat, const Coefficients& omega_true) {
  if (omega_hat.size() != omega_true.size())
    throw std::invalid_argument("coefficient vectors differ in length");
  return (omega_hat - omega_true).squaredNorm();
}

namespace {

ReplicationOutcome run_one(const SimulationScenario& sc, long rep) {
  ReplicationOutcome out;
  out.replication = rep;
  try {
    Rng rng(child_seed(sc.seed, static_cast<std::uint64_t>(rep)));
    const CleanSample clean = generate_clean(sc, rng);
    const Eigen::MatrixXd noisy = apply_measurement_error(clean.x, sc.me_variance, rng);
    const Dataset data = apply_missingness(noisy, clean.y, clean.x, sc.missingness, rng);

    const PropensityWeights weights = uses_ipw(sc.condition)
                                          ? estimate_propensity(data, sc.clip_floor)
                                          : PropensityWeights::unit(data.n_rows());

    FitConfig cfg = sc.fit;
    cfg.h = sc.h;
    cfg.condition = sc.condition;
    cfg.seed = static_cast<std::int64_t>(child_seed(sc.seed, static_cast<std::uint64_t>(rep)));

    PenaltySpec family;
    family.family = sc.penalty;
    family.u = cfg.atan_u;

    const EstimateResult res = select_f(data, weights, family, cfg);
    out.error = model_error(res.omega_hat, clean.omega_true);
    out.active_size = static_cast<int>(res.active_set.size());
    int tp = 0;
    for (int k : res.active_set) {
      if (k == 1 || k == 3 || k == 5) ++tp;
    }
    out.true_positives = tp;
    out.f_selected = res.f_selected;
    out.converged = res.converged;
    out.ok = true;
  } catch (const std::exception& e) {
    out.ok = false;
    out.message = e.what();
  }
  return out;
}

}  // namespace

MonteCarloReport run_monte_carlo(const SimulationScenario& sc) {
  sc.validate();
  MonteCarloReport report;
  report.scenario = sc;
  report.outcomes.resize(static_cast<std::size_t>(sc.replications));

  unsigned n_threads = sc.threads > 0
                           ? static_cast<unsigned>(sc.threads)
                           : std::max(1u, std::thread::hardware_concurrency());
  n_threads = std::min<unsigned>(n_threads, static_cast<unsigned>(sc.replications));

  if (n_threads <= 1) {
    for (long r = 0; r < sc.replications; ++r)
      report.outcomes[static_cast<std::size_t>(r)] = run_one(sc, r);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (unsigned t = 0; t < n_threads; ++t) {
      pool.emplace_back([&, t]() {
        for (long r = static_cast<long>(t); r < sc.replications;
             r += static_cast<long>(n_threads)) {
          report.outcomes[static_cast<std::size_t>(r)] = run_one(sc, r);
        }
      });
    }
    for (auto& th : pool) th.join();
  }

  // Aggregate over successful replications only.
  double sum = 0.0, sum2 = 0.0, size_sum = 0.0, tp_sum = 0.0;
  for (const auto& o : report.outcomes) {
    if (!o.ok) {
      ++report.failures;
      continue;
    }
    ++report.completed;
    sum += o.error;
    sum2 += o.error * o.error;
    size_sum += o.active_size;
    tp_sum += o.true_positives;
  }
  const auto m = static_cast<double>(report.completed);
  if (report.completed > 0) {
    report.mean_error = sum / m;
    report.mean_active_size = size_sum / m;
    report.mean_true_positives = tp_sum / m;
    if (report.completed > 1) {
      const double var = std::max(0.0, (sum2 - sum * sum / m) / (m - 1.0));
      report.se_error = std::sqrt(var / m);
    }
  }
  report.valid = report.failures * 10 <= sc.replications;
  return report;
}

std::string report_csv_header() {
  return "n,d,correlation,error_dist,condition,penalty,h,replications,seed,"
         "completed,failures,valid,mean_error,se_error,mean_active_size,"
         "mean_true_positives";
}

std::string report_csv_row(const MonteCarloReport& report) {
  const auto& sc = report.scenario;
  std::ostringstream os;
  os << sc.n << ',' << sc.d << ',' << to_string(sc.correlation) << ','
     << to_string(sc.error_dist) << ',' << to_string(sc.condition) << ','
     << to_string(sc.penalty) << ',' << format_double(sc.h) << ','
     << sc.replications << ',' << sc.seed << ',' << report.completed << ','
     << report.failures << ',' << (report.valid ? 1 : 0) << ','
     << format_double(report.mean_error) << ',' << format_double(report.se_error)
     << ',' << format_double(report.mean_active_size) << ','
     << format_double(report.mean_true_positives);
  return os.str();
}

std::string report_markdown(const std::vector<MonteCarloReport>& reports) {
  std::ostringstream os;
  os << "# Replication study summary\n\n";
  const Condition order[] = {Condition::FullCorrection, Condition::ErrorOnly,
                             Condition::MissingOnly, Condition::NoCorrection};
  for (Condition c : order) {
    bool any = false;
    for (const auto& rep : reports) any = any || rep.scenario.condition == c;
    if (!any) continue;
    os << "## Condition: " << to_string(c) << "\n\n";
    os << "| n | d | correlation | errors | penalty | h | mean error (se) | size | true pos | reps ok |\n";
    os << "|---|---|---|---|---|---|---|---|---|---|\n";
    for (const auto& rep : reports) {
      if (rep.scenario.condition != c) continue;
      const auto& sc = rep.scenario;
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.3f (%.3f)", rep.mean_error, rep.se_error);
      char size_buf[32];
      std::snprintf(size_buf, sizeof size_buf, "%.2f", rep.mean_active_size);
      char tp_buf[32];
      std::snprintf(tp_buf, sizeof tp_buf, "%.2f", rep.mean_true_positives);
      os << "| " << sc.n << " | " << sc.d << " | " << to_string(sc.correlation)
         << " | " << to_string(sc.error_dist) << " | " << to_string(sc.penalty)
         << " | " << format_double(sc.h) << " | " << buf << " | " << size_buf
         << " | " << tp_buf << " | " << rep.completed << "/" << sc.replications;
      if (!rep.valid) os << " (INVALID: too many failures)";
      os << " |\n";
    }
    os << "\n";
  }
  return os.str();
}

}  // namespace esreg
