#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "esreg/estimator.hpp"
#include "esreg/rng.hpp"

namespace esreg {

enum class CorrelationKind { Ind, Corr };   // identity vs AR(1), rho = 0.5
enum class ErrorDist { Normal01, T3, ChiSq2 };

std::string to_string(CorrelationKind k);
CorrelationKind correlation_from_string(const std::string& s);
std::string to_string(ErrorDist e);
ErrorDist error_dist_from_string(const std::string& s);

// Completeness is Bernoulli(logistic(eta)) with
// eta = intercept + coef_y * y + coef_x3 * x[2] + coef_x5 * x[4]
// (0-based columns; the covariates enter through their noisy versions).
// A huge intercept forces a fully complete sample, which tests rely on.
struct MissingnessModel {
  double intercept = 1.0;
  double coef_y = 2.0;
  double coef_x3 = -2.0;
  double coef_x5 = 4.0;
};

double missingness_probability(const MissingnessModel& model, double y,
                               double x3, double x5);

struct SimulationScenario {
  long n = 100;
  long d = 300;
  CorrelationKind correlation = CorrelationKind::Corr;
  ErrorDist error_dist = ErrorDist::Normal01;
  Condition condition = Condition::FullCorrection;
  PenaltyFamily penalty = PenaltyFamily::Atan;
  double h = 0.1;
  double me_variance = 0.3;   // additive covariate noise variance
  double noise_scale = 1.0;   // multiplies the response noise draw
  long replications = 300;
  std::uint64_t seed = 0;
  MissingnessModel missingness;
  double clip_floor = 0.05;
  int threads = 0;            // 0 = hardware concurrency
  FitConfig fit;              // optimizer/selection settings; h and
                              // condition above take precedence

  void validate() const;
};

// The fixed sparse truth: coefficients 1, 2, 4 at 0-based positions 1, 3, 5.
Coefficients true_omega(long d);

struct CleanSample {
  Eigen::MatrixXd x;       // n x d latent covariates
  Eigen::VectorXd y;       // response
  Eigen::VectorXd eps;     // response noise actually added
  Coefficients omega_true;
};

// Draws X (independent or AR(1) with coefficient 0.5), eps from the
// scenario's error law scaled by noise_scale, and y = X omega + eps.
CleanSample generate_clean(const SimulationScenario& sc, Rng& rng);

// t = x + g, g iid N(0, me_variance). me_variance == 0 returns x unchanged.
Eigen::MatrixXd apply_measurement_error(const Eigen::MatrixXd& x,
                                        double me_variance, Rng& rng);

// Draws completeness flags from the model (driven by the supplied clean
// covariate columns 2 and 4) and blanks 0-based columns {0, 2, 4} of the
// noisy design in every incomplete row.
Dataset apply_missingness(const Eigen::MatrixXd& noisy_design,
                          const Eigen::VectorXd& y,
                          const Eigen::MatrixXd& clean_x,
                          const MissingnessModel& model, Rng& rng);

// Squared coefficient distance |omega_hat - omega_true|^2.
double model_error(const Coefficients& omega_hat, const Coefficients& omega_true);

struct ReplicationOutcome {
  long replication = 0;
  bool ok = false;
  double error = 0.0;
  int active_size = 0;
  int true_positives = 0;   // recovered among the 3 true support positions
  double f_selected = 0.0;
  bool converged = false;
  std::string message;      // failure description when !ok
};

struct MonteCarloReport {
  SimulationScenario scenario;
  std::vector<ReplicationOutcome> outcomes;  // one per replication, in order
  long completed = 0;
  long failures = 0;
  bool valid = false;        // failures <= 10% of replications
  double mean_error = 0.0;
  double se_error = 0.0;     // standard error of mean_error
  double mean_active_size = 0.0;
  double mean_true_positives = 0.0;
};

// Runs the full pipeline (draw, corrupt, weight, fit, score) once per
// replication. Replication r uses child_seed(scenario.seed, r), so results
// do not depend on the number of worker threads.
MonteCarloReport run_monte_carlo(const SimulationScenario& sc);

// Stable machine-readable summary: one header plus one row per report.
std::string report_csv_header();
std::string report_csv_row(const MonteCarloReport& report);

// Human-readable summary of a batch of reports, grouped by condition.
std::string report_markdown(const std::vector<MonteCarloReport>& reports);

}  // namespace esreg
