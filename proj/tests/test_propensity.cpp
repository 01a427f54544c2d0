#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "esreg/dataset.hpp"
#include "esreg/errors.hpp"
#include "esreg/propensity.hpp"
#include "esreg/rng.hpp"

using esreg::Dataset;
using esreg::PropensityWeights;

TEST_CASE("gaussian_product_kernel closed form") {
  Eigen::VectorXd u1(1);
  u1 << 0.0;
  CHECK(esreg::gaussian_product_kernel(u1) ==
        doctest::Approx(0.3989422804014327).epsilon(1e-15));

  Eigen::VectorXd u2(2);
  u2 << 0.0, 0.0;
  CHECK(esreg::gaussian_product_kernel(u2) ==
        doctest::Approx(0.15915494309189535).epsilon(1e-15));

  // Product structure: the q-dim kernel is the product of 1-dim kernels.
  esreg::Rng rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    Eigen::VectorXd u(3);
    for (int k = 0; k < 3; ++k) u(k) = 2.0 * (rng.uniform() - 0.5);
    double prod = 1.0;
    for (int k = 0; k < 3; ++k) {
      Eigen::VectorXd one(1);
      one << u(k);
      prod *= esreg::gaussian_product_kernel(one);
    }
    CHECK(esreg::gaussian_product_kernel(u) == doctest::Approx(prod).epsilon(1e-13));
    // Symmetry under sign flips.
    CHECK(esreg::gaussian_product_kernel(-u) ==
          doctest::Approx(esreg::gaussian_product_kernel(u)).epsilon(1e-15));
  }
}

TEST_CASE("bandwidth_rule closed form") {
  CHECK(esreg::bandwidth_rule(1.0, 1, 3) == 1.0);
  CHECK(esreg::bandwidth_rule(1.0, 100, 1) ==
        doctest::Approx(0.21544346900318839).epsilon(1e-12));
  CHECK(esreg::bandwidth_rule(2.0, 100, 1) ==
        doctest::Approx(0.43088693800637679).epsilon(1e-12));
  CHECK_THROWS_AS(esreg::bandwidth_rule(0.0, 100, 1), std::invalid_argument);
  CHECK_THROWS_AS(esreg::bandwidth_rule(-1.0, 100, 1), std::invalid_argument);
  CHECK_THROWS_AS(esreg::bandwidth_rule(1.0, 0, 1), std::invalid_argument);
}

namespace {

Dataset complete_dataset(const Eigen::VectorXd& y, const Eigen::MatrixXd& x) {
  return Dataset::complete(y, x);
}

// A dataset whose first column is always observed and whose second column
// is absent on rows with flag zero.
Dataset holed_dataset(const Eigen::VectorXd& y, const Eigen::MatrixXd& x,
                      const std::vector<std::uint8_t>& flags) {
  esreg::AbsentMask absent = esreg::AbsentMask::Constant(x.rows(), x.cols(), false);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    if (!flags[static_cast<std::size_t>(i)]) absent(i, 1) = true;
  }
  return Dataset(y, x, flags, absent, {1});
}

}  // namespace

TEST_CASE("estimate_propensity returns exactly one when nothing is missing") {
  esreg::Rng rng(17);
  Eigen::MatrixXd x(8, 3);
  Eigen::VectorXd y(8);
  for (Eigen::Index i = 0; i < 8; ++i) {
    y(i) = rng.normal();
    for (Eigen::Index j = 0; j < 3; ++j) x(i, j) = rng.normal();
  }
  const PropensityWeights w = esreg::estimate_propensity(complete_dataset(y, x), 0.05);
  for (Eigen::Index i = 0; i < 8; ++i) CHECK(w.probs(i) == 1.0);
  CHECK(w.clipped_count == 0);
}

TEST_CASE("two identical conditioning rows with opposite flags average to one half") {
  Eigen::MatrixXd s(2, 2);
  s << 0.4, -1.0, 0.4, -1.0;
  const std::vector<std::uint8_t> flags = {1, 0};
  const PropensityWeights w = esreg::nw_weights(s, flags, 0.7, 1e-6);
  CHECK(w.probs(0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(w.probs(1) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("nw_weights matches a literal kernel-ratio transcription") {
  esreg::Rng rng(29);
  for (int rep = 0; rep < 20; ++rep) {
    const Eigen::Index n = 3 + static_cast<Eigen::Index>(rng.next_u64() % 8);
    const Eigen::Index q = 1 + static_cast<Eigen::Index>(rng.next_u64() % 3);
    Eigen::MatrixXd s(n, q);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < q; ++j) s(i, j) = rng.normal();
    std::vector<std::uint8_t> flags(static_cast<std::size_t>(n));
    bool any = false;
    for (auto& f : flags) {
      f = rng.bernoulli(0.6) ? 1 : 0;
      any = any || f;
    }
    if (!any) flags[0] = 1;
    const double l = 0.3 + rng.uniform();

    const PropensityWeights fast = esreg::nw_weights(s, flags, l, 1e-12);
    for (Eigen::Index i = 0; i < n; ++i) {
      double num = 0.0, den = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        const Eigen::VectorXd u = (s.row(i) - s.row(j)).transpose() / l;
        const double k = esreg::gaussian_product_kernel(u);
        den += k;
        if (flags[static_cast<std::size_t>(j)]) num += k;
      }
      double expected = num / den;
      if (expected < 1e-12) expected = 1e-12;
      CHECK(fast.probs(i) == doctest::Approx(expected).epsilon(1e-12));
    }
  }
}

TEST_CASE("probabilities are convex averages of the flags") {
  esreg::Rng rng(37);
  Eigen::MatrixXd s(12, 2);
  std::vector<std::uint8_t> flags(12);
  for (Eigen::Index i = 0; i < 12; ++i) {
    s(i, 0) = rng.normal();
    s(i, 1) = rng.normal();
    flags[static_cast<std::size_t>(i)] = rng.bernoulli(0.5) ? 1 : 0;
  }
  flags[0] = 1;
  flags[1] = 0;  // both values present, so bounds are 0 and 1
  const PropensityWeights w = esreg::nw_weights(s, flags, 0.8, 1e-12);
  for (Eigen::Index i = 0; i < 12; ++i) {
    CHECK(w.probs(i) >= 1e-12);
    CHECK(w.probs(i) <= 1.0);
  }
}

TEST_CASE("huge bandwidth flattens to the overall completeness rate") {
  esreg::Rng rng(41);
  Eigen::MatrixXd s(10, 2);
  std::vector<std::uint8_t> flags(10);
  int ones = 0;
  for (Eigen::Index i = 0; i < 10; ++i) {
    s(i, 0) = rng.normal();
    s(i, 1) = rng.normal();
    flags[static_cast<std::size_t>(i)] = (i % 3 != 0) ? 1 : 0;
    ones += flags[static_cast<std::size_t>(i)];
  }
  const double rate = ones / 10.0;
  const PropensityWeights w = esreg::nw_weights(s, flags, 1e6, 1e-12);
  for (Eigen::Index i = 0; i < 10; ++i)
    CHECK(std::fabs(w.probs(i) - rate) <= 1e-6);
}

TEST_CASE("tiny bandwidth reproduces each row's own flag") {
  esreg::Rng rng(43);
  Eigen::MatrixXd s(9, 2);
  std::vector<std::uint8_t> flags(9);
  for (Eigen::Index i = 0; i < 9; ++i) {
    s(i, 0) = static_cast<double>(i);  // clearly separated rows
    s(i, 1) = rng.normal();
    flags[static_cast<std::size_t>(i)] = (i % 2 == 0) ? 1 : 0;
  }
  const PropensityWeights w = esreg::nw_weights(s, flags, 1e-6, 1e-12);
  for (Eigen::Index i = 0; i < 9; ++i)
    CHECK(std::fabs(w.probs(i) - flags[static_cast<std::size_t>(i)]) <= 1e-6);
}

TEST_CASE("kernel ratio is invariant under joint scaling of rows and bandwidth") {
  esreg::Rng rng(47);
  Eigen::MatrixXd s(7, 3);
  std::vector<std::uint8_t> flags(7);
  for (Eigen::Index i = 0; i < 7; ++i) {
    for (Eigen::Index j = 0; j < 3; ++j) s(i, j) = rng.normal();
    flags[static_cast<std::size_t>(i)] = rng.bernoulli(0.6) ? 1 : 0;
  }
  flags[0] = 1;
  const double l = 0.9;
  const double c = 37.5;
  const PropensityWeights a = esreg::nw_weights(s, flags, l, 1e-9);
  const PropensityWeights b = esreg::nw_weights(c * s, flags, c * l, 1e-9);
  for (Eigen::Index i = 0; i < 7; ++i)
    CHECK(a.probs(i) == doctest::Approx(b.probs(i)).epsilon(1e-12));
}

TEST_CASE("permuting rows permutes the probabilities") {
  esreg::Rng rng(53);
  const Eigen::Index n = 8;
  Eigen::MatrixXd s(n, 2);
  std::vector<std::uint8_t> flags(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    s(i, 0) = rng.normal();
    s(i, 1) = rng.normal();
    flags[static_cast<std::size_t>(i)] = rng.bernoulli(0.7) ? 1 : 0;
  }
  flags[0] = 1;
  std::vector<int> perm = {3, 1, 7, 0, 5, 2, 6, 4};
  Eigen::MatrixXd sp(n, 2);
  std::vector<std::uint8_t> fp(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    sp.row(i) = s.row(perm[static_cast<std::size_t>(i)]);
    fp[static_cast<std::size_t>(i)] = flags[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])];
  }
  const PropensityWeights w = esreg::nw_weights(s, flags, 0.6, 1e-9);
  const PropensityWeights wp = esreg::nw_weights(sp, fp, 0.6, 1e-9);
  for (Eigen::Index i = 0; i < n; ++i)
    CHECK(wp.probs(i) ==
          doctest::Approx(w.probs(perm[static_cast<std::size_t>(i)])).epsilon(1e-12));
}

TEST_CASE("clipping lifts tiny estimates to the floor and counts them") {
  // Two distant clusters; the lone incomplete row in the far cluster gets an
  // essentially zero estimate before clipping.
  Eigen::MatrixXd s(5, 1);
  s << 0.0, 0.05, -0.05, 0.02, 1000.0;
  const std::vector<std::uint8_t> flags = {1, 1, 1, 1, 0};
  const PropensityWeights w = esreg::nw_weights(s, flags, 0.5, 0.05);
  CHECK(w.clipped_count >= 1);
  for (Eigen::Index i = 0; i < 5; ++i) CHECK(w.probs(i) >= 0.05);
  CHECK(w.probs(4) == 0.05);
}

TEST_CASE("standardization makes the dataset-level estimate scale invariant") {
  esreg::Rng rng(59);
  const Eigen::Index n = 15;
  Eigen::MatrixXd x(n, 2);
  Eigen::VectorXd y(n);
  std::vector<std::uint8_t> flags(static_cast<std::size_t>(n), 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    y(i) = rng.normal();
    x(i, 0) = rng.normal();
    x(i, 1) = rng.normal();
    if (i % 4 == 0) flags[static_cast<std::size_t>(i)] = 0;
  }
  Dataset a = holed_dataset(y, x, flags);
  Eigen::MatrixXd x_scaled = x;
  x_scaled.col(0) *= 250.0;  // rescale the observed column only
  Dataset b = holed_dataset(y, x_scaled, flags);
  const PropensityWeights wa = esreg::estimate_propensity(a, 0.01);
  const PropensityWeights wb = esreg::estimate_propensity(b, 0.01);
  for (Eigen::Index i = 0; i < n; ++i)
    CHECK(wa.probs(i) == doctest::Approx(wb.probs(i)).epsilon(1e-10));
}

TEST_CASE("default bandwidth follows the plug-in rule on the dataset") {
  esreg::Rng rng(61);
  Eigen::MatrixXd x(100, 2);
  Eigen::VectorXd y(100);
  std::vector<std::uint8_t> flags(100, 1);
  for (Eigen::Index i = 0; i < 100; ++i) {
    y(i) = rng.normal();
    x(i, 0) = rng.normal();
    x(i, 1) = rng.normal();
    if (i % 5 == 0) flags[static_cast<std::size_t>(i)] = 0;
  }
  Dataset data = holed_dataset(y, x, flags);
  // One always-observed covariate next to the response: m = 1.
  CHECK(esreg::default_bandwidth(data) ==
        doctest::Approx(0.21544346900318839).epsilon(1e-12));
}

TEST_CASE("degenerate inputs are rejected") {
  Eigen::MatrixXd s(3, 1);
  s << 0.0, 1.0, 2.0;
  const std::vector<std::uint8_t> none = {0, 0, 0};
  CHECK_THROWS_AS(esreg::nw_weights(s, none, 0.5, 0.05), esreg::DataError);
  const std::vector<std::uint8_t> some = {1, 0, 1};
  CHECK_THROWS_AS(esreg::nw_weights(s, some, 0.0, 0.05), std::invalid_argument);
  CHECK_THROWS_AS(esreg::nw_weights(s, some, -1.0, 0.05), std::invalid_argument);
  CHECK_THROWS_AS(esreg::nw_weights(s, some, 0.5, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(esreg::nw_weights(s, some, 0.5, 1.0), std::invalid_argument);
}
