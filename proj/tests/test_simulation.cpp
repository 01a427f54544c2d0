#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>

#include "esreg/simulation.hpp"

using esreg::CleanSample;
using esreg::Condition;
using esreg::CorrelationKind;
using esreg::ErrorDist;
using esreg::MissingnessModel;
using esreg::MonteCarloReport;
using esreg::PenaltyFamily;
using esreg::Rng;
using esreg::SimulationScenario;

namespace {

SimulationScenario base_scenario(long n, long d) {
  SimulationScenario sc;
  sc.n = n;
  sc.d = d;
  sc.replications = 1;
  sc.seed = 42;
  return sc;
}

double column_mean(const Eigen::MatrixXd& x, Eigen::Index j) { return x.col(j).mean(); }

double column_var(const Eigen::MatrixXd& x, Eigen::Index j) {
  const double m = column_mean(x, j);
  return (x.col(j).array() - m).square().sum() / (static_cast<double>(x.rows()) - 1.0);
}

double column_corr(const Eigen::MatrixXd& x, Eigen::Index a, Eigen::Index b) {
  const double ma = column_mean(x, a), mb = column_mean(x, b);
  const auto ca = x.col(a).array() - ma;
  const auto cb = x.col(b).array() - mb;
  return (ca * cb).sum() / std::sqrt(ca.square().sum() * cb.square().sum());
}

}  // namespace

TEST_CASE("fixed sparse truth") {
  const auto w = esreg::true_omega(10);
  CHECK(w.size() == 10);
  CHECK(w(1) == 1.0);
  CHECK(w(3) == 2.0);
  CHECK(w(5) == 4.0);
  CHECK(w.squaredNorm() == 21.0);
  for (Eigen::Index k : {0, 2, 4, 6, 7, 8, 9}) CHECK(w(k) == 0.0);
  CHECK_THROWS_AS(esreg::true_omega(5), std::invalid_argument);
}

TEST_CASE("independent designs have unit variance and no cross correlation") {
  SimulationScenario sc = base_scenario(10000, 8);
  sc.correlation = CorrelationKind::Ind;
  Rng rng(1);
  const CleanSample s = generate_clean(sc, rng);
  const double n = 10000.0;
  const double var_se = std::sqrt(2.0 / (n - 1.0));  // sampling sd of a normal's variance
  const double corr_se = 1.0 / std::sqrt(n);
  for (Eigen::Index j : {0, 3, 7}) {
    CHECK(std::fabs(column_var(s.x, j) - 1.0) <= 3.0 * var_se);
    CHECK(std::fabs(column_mean(s.x, j)) <= 3.0 / std::sqrt(n));
  }
  CHECK(std::fabs(column_corr(s.x, 0, 1)) <= 3.0 * corr_se);
  CHECK(std::fabs(column_corr(s.x, 2, 6)) <= 3.0 * corr_se);
}

TEST_CASE("autoregressive designs decay by halves per lag") {
  SimulationScenario sc = base_scenario(10000, 8);
  sc.correlation = CorrelationKind::Corr;
  Rng rng(2);
  const CleanSample s = generate_clean(sc, rng);
  const double n = 10000.0;
  // Var(corr_hat) ~ (1 - rho^2)^2 / n for an AR pair.
  for (Eigen::Index j : {0, 4}) {
    const double lag1 = column_corr(s.x, j, j + 1);
    CHECK(std::fabs(lag1 - 0.5) <= 3.0 * (1.0 - 0.25) / std::sqrt(n));
    const double lag2 = column_corr(s.x, j, j + 2);
    CHECK(std::fabs(lag2 - 0.25) <= 3.0 * (1.0 - 0.0625) / std::sqrt(n));
    CHECK(std::fabs(column_var(s.x, j) - 1.0) <= 3.0 * std::sqrt(2.0 / (n - 1.0)));
  }
}

TEST_CASE("response noise follows the requested law") {
  const double n = 10000.0;
  {
    SimulationScenario sc = base_scenario(10000, 7);
    sc.error_dist = ErrorDist::Normal01;
    Rng rng(3);
    const CleanSample s = generate_clean(sc, rng);
    CHECK(std::fabs(s.eps.mean()) <= 3.0 / std::sqrt(n));
    const double var = (s.eps.array() - s.eps.mean()).square().sum() / (n - 1.0);
    CHECK(std::fabs(var - 1.0) <= 3.0 * std::sqrt(2.0 / (n - 1.0)));
  }
  {
    SimulationScenario sc = base_scenario(10000, 7);
    sc.error_dist = ErrorDist::T3;
    Rng rng(4);
    const CleanSample s = generate_clean(sc, rng);
    // Mean zero; the sample mean's spread uses the sample sd since the
    // theoretical variance (3) converges slowly for heavy tails.
    const double sd = std::sqrt((s.eps.array() - s.eps.mean()).square().sum() / (n - 1.0));
    CHECK(std::fabs(s.eps.mean()) <= 3.0 * sd / std::sqrt(n));
    // Median of t(3) is zero and is a robust location check.
    Eigen::VectorXd sorted = s.eps;
    std::sort(sorted.data(), sorted.data() + sorted.size());
    CHECK(std::fabs(sorted(5000)) <= 0.1);
  }
  {
    SimulationScenario sc = base_scenario(10000, 7);
    sc.error_dist = ErrorDist::ChiSq2;
    Rng rng(5);
    const CleanSample s = generate_clean(sc, rng);
    // Raw (uncentered): mean 2, variance 4, support on the positive axis.
    CHECK(s.eps.minCoeff() >= 0.0);
    CHECK(std::fabs(s.eps.mean() - 2.0) <= 3.0 * 2.0 / std::sqrt(n));
    const double var = (s.eps.array() - s.eps.mean()).square().sum() / (n - 1.0);
    CHECK(std::fabs(var - 4.0) <= 3.0 * 4.0 * std::sqrt(2.0 / (n - 1.0)) * 2.0);
  }
}

TEST_CASE("the response is exactly linear when the noise scale is zero") {
  SimulationScenario sc = base_scenario(200, 9);
  sc.noise_scale = 0.0;
  Rng rng(6);
  const CleanSample s = generate_clean(sc, rng);
  CHECK(s.eps.norm() == 0.0);
  const Eigen::VectorXd reconstructed = s.x * s.omega_true;
  CHECK((s.y - reconstructed).norm() == 0.0);
}

TEST_CASE("covariate noise has the configured variance and vanishes at zero") {
  Rng rng(7);
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(100, 100);
  const Eigen::MatrixXd t = esreg::apply_measurement_error(x, 0.3, rng);
  const double n = 10000.0;
  const double mean = t.mean();
  const double var = (t.array() - mean).square().sum() / (n - 1.0);
  CHECK(std::fabs(mean) <= 3.0 * std::sqrt(0.3) / std::sqrt(n));
  CHECK(std::fabs(var - 0.3) <= 3.0 * 0.3 * std::sqrt(2.0 / (n - 1.0)));

  Rng rng2(8);
  Eigen::MatrixXd x2(3, 2);
  x2 << 1, 2, 3, 4, 5, 6;
  const Eigen::MatrixXd same = esreg::apply_measurement_error(x2, 0.0, rng2);
  CHECK(std::memcmp(same.data(), x2.data(), sizeof(double) * 6) == 0);
}

TEST_CASE("completeness probability is a logistic in the linear score") {
  MissingnessModel m;  // 1 + 2y - 2 x3 + 4 x5
  // Solve eta = 0 by hand: y chosen so the score cancels.
  CHECK(esreg::missingness_probability(m, -0.5, 0.0, 0.0) == 0.5);
  CHECK(esreg::missingness_probability(m, 0.0, 0.5, 0.0) == 0.5);
  CHECK(esreg::missingness_probability(m, 1.0, 0.0, 0.0) ==
        doctest::Approx(1.0 / (1.0 + std::exp(-3.0))).epsilon(1e-15));
  // Monotone directions: higher y raises completeness, higher x3 lowers it.
  CHECK(esreg::missingness_probability(m, 2.0, 0.0, 0.0) >
        esreg::missingness_probability(m, 1.0, 0.0, 0.0));
  CHECK(esreg::missingness_probability(m, 1.0, 1.0, 0.0) <
        esreg::missingness_probability(m, 1.0, 0.0, 0.0));
}

TEST_CASE("missingness blanks the fixed columns of incomplete rows") {
  SimulationScenario sc = base_scenario(500, 7);
  Rng rng(9);
  const CleanSample s = generate_clean(sc, rng);
  const Eigen::MatrixXd noisy = esreg::apply_measurement_error(s.x, 0.3, rng);
  const esreg::Dataset data = esreg::apply_missingness(noisy, s.y, s.x, sc.missingness, rng);

  CHECK(data.missing_block() == std::vector<int>{0, 2, 4});
  bool saw_incomplete = false;
  for (Eigen::Index i = 0; i < data.n_rows(); ++i) {
    if (data.is_complete(i)) {
      for (Eigen::Index j = 0; j < data.n_cols(); ++j) CHECK(!data.is_absent(i, j));
    } else {
      saw_incomplete = true;
      for (Eigen::Index j = 0; j < data.n_cols(); ++j) {
        const bool should = (j == 0 || j == 2 || j == 4);
        CHECK(data.is_absent(i, j) == should);
      }
      // Observed cells of incomplete rows match the noisy design.
      CHECK(data.design()(i, 1) == noisy(i, 1));
    }
  }
  CHECK(saw_incomplete);

  // An overwhelming intercept makes every row complete.
  SimulationScenario all = sc;
  all.missingness.intercept = 1e9;
  Rng rng2(10);
  const CleanSample s2 = generate_clean(all, rng2);
  const esreg::Dataset complete =
      esreg::apply_missingness(s2.x, s2.y, s2.x, all.missingness, rng2);
  CHECK(complete.complete_count() == complete.n_rows());
}

TEST_CASE("observed completeness tracks the model average") {
  SimulationScenario sc = base_scenario(10000, 7);
  Rng rng(11);
  const CleanSample s = generate_clean(sc, rng);
  const esreg::Dataset data = esreg::apply_missingness(s.x, s.y, s.x, sc.missingness, rng);
  double expected = 0.0, var = 0.0;
  for (Eigen::Index i = 0; i < s.y.size(); ++i) {
    const double p = esreg::missingness_probability(sc.missingness, s.y(i), s.x(i, 2), s.x(i, 4));
    expected += p;
    var += p * (1.0 - p);
  }
  const auto n = static_cast<double>(s.y.size());
  expected /= n;
  const double se = std::sqrt(var) / n;
  const double rate = static_cast<double>(data.complete_count()) / n;
  CHECK(std::fabs(rate - expected) <= 3.0 * se);
}

TEST_CASE("model_error is the squared coefficient distance") {
  Eigen::VectorXd a(3), b(3);
  a << 1, 2, 3;
  b << 1, 2, 3;
  CHECK(esreg::model_error(a, b) == 0.0);
  b << 0, 0, 0;
  CHECK(esreg::model_error(a, b) == 14.0);

  esreg::Rng rng(12);
  Eigen::VectorXd u(300), v(300);
  for (int k = 0; k < 300; ++k) {
    u(k) = rng.normal();
    v(k) = rng.normal();
  }
  double by_hand = 0.0;
  for (int k = 0; k < 300; ++k) by_hand += (u(k) - v(k)) * (u(k) - v(k));
  CHECK(esreg::model_error(u, v) == doctest::Approx(by_hand).epsilon(1e-13));

  Eigen::VectorXd shorter(2);
  CHECK_THROWS_AS(esreg::model_error(shorter, a), std::invalid_argument);

  // The fixed truth used by every replication has squared norm 21.
  CHECK(esreg::true_omega(300).squaredNorm() == 21.0);
}

TEST_CASE("replication batches are deterministic given the seed") {
  SimulationScenario sc = base_scenario(40, 8);
  sc.replications = 3;
  sc.h = 1.0;
  sc.condition = Condition::FullCorrection;
  sc.penalty = PenaltyFamily::Atan;
  sc.seed = 777;
  sc.fit.hbic_grid = {0.05, 0.5};

  const MonteCarloReport a = run_monte_carlo(sc);
  const MonteCarloReport b = run_monte_carlo(sc);
  REQUIRE(a.outcomes.size() == b.outcomes.size());
  for (std::size_t r = 0; r < a.outcomes.size(); ++r) {
    CHECK(a.outcomes[r].ok == b.outcomes[r].ok);
    CHECK(a.outcomes[r].error == b.outcomes[r].error);
    CHECK(a.outcomes[r].active_size == b.outcomes[r].active_size);
    CHECK(a.outcomes[r].f_selected == b.outcomes[r].f_selected);
  }
  CHECK(a.mean_error == b.mean_error);
  CHECK(report_csv_row(a) == report_csv_row(b));
}

TEST_CASE("a clean scenario with no corruption is recovered almost exactly") {
  SimulationScenario sc = base_scenario(60, 8);
  sc.replications = 2;
  sc.h = 1.0;
  sc.noise_scale = 0.0;
  sc.me_variance = 0.0;
  sc.missingness.intercept = 1e9;  // fully observed
  sc.condition = Condition::NoCorrection;
  sc.penalty = PenaltyFamily::Lasso;
  sc.seed = 99;

  const MonteCarloReport rep = run_monte_carlo(sc);
  CHECK(rep.completed == 2);
  CHECK(rep.failures == 0);
  CHECK(rep.valid);
  CHECK(rep.mean_error < 1e-3);
  CHECK(rep.mean_true_positives == 3.0);
}

TEST_CASE("failed replications are counted and invalidate the batch") {
  SimulationScenario sc = base_scenario(30, 7);
  sc.replications = 3;
  sc.h = 1.0;
  sc.condition = Condition::NoCorrection;
  sc.penalty = PenaltyFamily::Lasso;
  sc.missingness.intercept = -1e9;  // nothing is ever complete
  const MonteCarloReport rep = run_monte_carlo(sc);
  CHECK(rep.completed == 0);
  CHECK(rep.failures == 3);
  CHECK(!rep.valid);
  for (const auto& o : rep.outcomes) {
    CHECK(!o.ok);
    CHECK(!o.message.empty());
  }
}

TEST_CASE("summary rows are stable and carry the scenario") {
  CHECK(esreg::report_csv_header() ==
        "n,d,correlation,error_dist,condition,penalty,h,replications,seed,"
        "completed,failures,valid,mean_error,se_error,mean_active_size,"
        "mean_true_positives");
  SimulationScenario sc = base_scenario(30, 7);
  sc.replications = 1;
  sc.h = 0.5;
  sc.penalty = PenaltyFamily::Mcp;
  sc.condition = Condition::MissingOnly;
  sc.fit.hbic_grid = {0.1};
  const MonteCarloReport rep = run_monte_carlo(sc);
  const std::string row = report_csv_row(rep);
  CHECK(row.find("30,7,corr,normal,missing_only,mcp,0.5,1,42,") == 0);
  const std::string md = esreg::report_markdown({rep});
  CHECK(md.find("missing_only") != std::string::npos);
}

TEST_CASE("scenario validation") {
  SimulationScenario sc = base_scenario(30, 7);
  sc.d = 6;
  CHECK_THROWS_AS(sc.validate(), std::invalid_argument);
  sc = base_scenario(1, 7);
  CHECK_THROWS_AS(sc.validate(), std::invalid_argument);
  sc = base_scenario(30, 7);
  sc.me_variance = -0.1;
  CHECK_THROWS_AS(sc.validate(), std::invalid_argument);
  sc = base_scenario(30, 7);
  sc.h = 0.0;
  CHECK_THROWS_AS(sc.validate(), std::invalid_argument);
  sc = base_scenario(30, 7);
  CHECK_NOTHROW(sc.validate());

  // Name round-trips used by the command-line layer.
  CHECK(esreg::correlation_from_string("ind") == CorrelationKind::Ind);
  CHECK(esreg::correlation_from_string("corr") == CorrelationKind::Corr);
  CHECK(esreg::error_dist_from_string("normal") == ErrorDist::Normal01);
  CHECK(esreg::error_dist_from_string("t3") == ErrorDist::T3);
  CHECK(esreg::error_dist_from_string("chisq2") == ErrorDist::ChiSq2);
  CHECK_THROWS_AS(esreg::error_dist_from_string("cauchy"), std::invalid_argument);
  CHECK(esreg::condition_from_string("full") == Condition::FullCorrection);
  CHECK(esreg::condition_from_string("error_only") == Condition::ErrorOnly);
  CHECK(esreg::condition_from_string("missing_only") == Condition::MissingOnly);
  CHECK(esreg::condition_from_string("none") == Condition::NoCorrection);
}
