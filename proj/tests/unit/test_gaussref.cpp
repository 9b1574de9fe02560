#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "polaron/error.hpp"
#include "polaron/gaussref.hpp"
#include "polaron/stats.hpp"

using namespace polaron;

namespace {

/// Dense per-coordinate precision of x_1..x_N assembled from the Wiener increments plus
/// 2 x (beta dt^2 sum_{s,t in block} (x_t - x_s)^2) written out pair by pair.
Eigen::MatrixXd dense_precision(const BlockGaussianSpec& s) {
  const int m = static_cast<int>(std::lround(s.block_length / s.dt));
  const int n = m * static_cast<int>(std::lround(s.horizon / s.block_length));
  Eigen::MatrixXd full = Eigen::MatrixXd::Zero(n + 1, n + 1);
  for (int i = 1; i <= n; ++i) {
    full(i, i) += 1.0 / s.dt;
    full(i - 1, i - 1) += 1.0 / s.dt;
    full(i, i - 1) -= 1.0 / s.dt;
    full(i - 1, i) -= 1.0 / s.dt;
  }
  const double c = 2.0 * s.beta * s.dt * s.dt;
  for (int b = 0; b * m < n; ++b)
    for (int p = b * m; p <= (b + 1) * m; ++p)
      for (int q = b * m; q <= (b + 1) * m; ++q) {
        // d/dx d/dx of c (x_p - x_q)^2, summed over ordered pairs.
        full(p, p) += c;
        full(q, q) += c;
        full(p, q) -= c;
        full(q, p) -= c;
      }
  return full.bottomRightCorner(n, n);
}

}  // namespace

TEST_CASE("spec validation") {
  BlockGaussianSpec s{1.0, 1.0, 3.5, 0.25};
  CHECK_THROWS_AS(s.validate(), ValidationError);
  s = {1.0, 1.0, 4.0, 0.3};
  CHECK_THROWS_AS(s.validate(), ValidationError);
  s = {-1.0, 1.0, 4.0, 0.25};
  CHECK_THROWS_AS(s.validate(), ValidationError);
  s = {1.0, 1.0, 4.0, 0.25};
  CHECK_NOTHROW(s.validate());
  CHECK(s.steps() == 16);
}

TEST_CASE("beta = 0 gives the Brownian tridiagonal form") {
  const BlockGaussianSpec s{0.0, 1.0, 2.0, 0.25};
  const PrecisionFactor f(s);
  const auto& P = f.precision();
  for (std::size_t i = 0; i < 8; ++i) {
    CHECK(P.at(i, i) == (i < 7 ? 8.0 : 4.0));
    if (i) CHECK(P.at(i, i - 1) == -4.0);
    for (std::size_t j = 0; j + 1 < i; ++j) CHECK(P.get(i, j) == 0.0);
  }
  CHECK(f.covariance(8, 8) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(f.covariance(3, 6) == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("single-block penalty matrix") {
  const double beta = 3.0, dt = 0.5;
  const auto pen = block_penalty_matrix(beta, dt, 3);
  const double c = 2.0 * beta * dt * dt;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(pen[i * 3 + j] == doctest::Approx(c * ((i == j ? 3.0 : 0.0) - 1.0)));

  // Quadratic form check: x^T pen x = beta dt^2 sum_{s,t} (x_t - x_s)^2.
  const double x[3] = {0.3, -1.1, 2.0};
  double q = 0.0, direct = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      q += x[i] * pen[i * 3 + j] * x[j];
      direct += beta * dt * dt * (x[i] - x[j]) * (x[i] - x[j]);
    }
  CHECK(q == doctest::Approx(direct).epsilon(1e-13));
}

TEST_CASE("banded precision matches the dense assembly") {
  for (double beta : {0.0, 0.7, 50.0}) {
    const BlockGaussianSpec s{beta, 0.5, 2.0, 0.125};
    const PrecisionFactor f(s);
    const Eigen::MatrixXd D = dense_precision(s);
    const auto n = static_cast<std::size_t>(D.rows());
    CHECK(f.precision().bandwidth <= s.steps_per_block());
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) CHECK(f.precision().get(i, j) == doctest::Approx(D(i, j)).epsilon(1e-12));
    CHECK(f.cholesky_residual() <= 1e-8);
    const Eigen::MatrixXd C = D.inverse();
    for (std::size_t i = 1; i <= n; i += 3)
      for (std::size_t j = 1; j <= n; j += 2) CHECK(f.covariance(i, j) == doctest::Approx(C(i - 1, j - 1)).epsilon(1e-9));
  }
}

TEST_CASE("block variance") {
  BlockGaussianSpec s{0.0, 1.0, 4.0, 1.0 / 512.0};
  CHECK(std::abs(block_variance(s).first_block - 1.0) <= 1e-10);
  CHECK(std::abs(block_variance(s).middle_block - 1.0) <= 1e-10);

  double prev = 2.0;
  std::vector<double> lb, lv;
  for (double beta : {1.0, 10.0, 100.0, 1000.0, 10000.0}) {
    s.beta = beta;
    const double v = block_variance(s).first_block;
    CHECK(v < prev);
    prev = v;
    if (beta >= 100.0) {
      lb.push_back(std::log(beta));
      lv.push_back(std::log(v));
    }
  }
  CHECK(ls_slope(lb, lv) == doctest::Approx(-0.5).epsilon(0.2));

  s = {5.0, 0.5, 2.0, 0.125};
  const Eigen::MatrixXd C = dense_precision(s).inverse();
  CHECK(block_variance(s).first_block == doctest::Approx(C(3, 3)).epsilon(1e-10));
}

TEST_CASE("exact sampler reproduces the solve-based covariance") {
  const BlockGaussianSpec s{10.0, 0.5, 1.0, 0.0625};
  const PrecisionFactor f(s);
  const std::size_t n = s.steps(), samples = 100000;
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(n, n), sum2 = Eigen::MatrixXd::Zero(n, n);
  double cross = 0.0, cross2 = 0.0;
  for (std::size_t k = 0; k < samples; ++k) {
    const auto p = sample_exact(f, 2, 1000 + k);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j <= i; ++j) {
        const double v = p.point(i + 1)[0] * p.point(j + 1)[0];
        sum(i, j) += v;
        sum2(i, j) += v * v;
      }
    const double c = p.point(n)[0] * p.point(n)[1];
    cross += c;
    cross2 += c * c;
  }
  const double ns = static_cast<double>(samples);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      const double mean = sum(i, j) / ns;
      const double se = std::sqrt((sum2(i, j) / ns - mean * mean) / ns);
      CHECK(std::abs(mean - f.covariance(i + 1, j + 1)) <= 5.0 * se);
    }
  const double cm = cross / ns;
  CHECK(std::abs(cm) <= 5.0 * std::sqrt((cross2 / ns - cm * cm) / ns));
  CHECK(sample_exact(f, 2, 5) == sample_exact(f, 2, 5));
}

TEST_CASE("within-block spread shrinks with beta") {
  double prev = 1e9;
  for (double beta : {1.0, 100.0, 10000.0}) {
    const BlockGaussianSpec s{beta, 1.0, 2.0, 1.0 / 64.0};
    const PrecisionFactor f(s);
    std::vector<double> sq;
    for (std::uint64_t k = 0; k < 4000; ++k) {
      const auto p = sample_exact(f, 1, k);
      sq.push_back(p.point(64)[0] * p.point(64)[0]);
    }
    const auto e = iid_mean(sq);
    CHECK(std::abs(e.value - block_variance(f).first_block) <= 5.0 * e.std_error);
    CHECK(e.value < prev);
    prev = e.value;
  }
}

TEST_CASE("conditioning on a symmetric path ball raises another ball's mass") {
  const BlockGaussianSpec s{20.0, 0.5, 2.0, 0.0625};
  const PrecisionFactor f(s);
  std::vector<double> z;
  std::vector<double> fa, aa;
  for (std::uint64_t k = 0; k < 40000; ++k) {
    const auto p = sample_exact(f, 1, 77 + k);
    double sup = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) sup = std::max(sup, std::abs(p.point(i)[0]));
    fa.push_back(std::abs(p.point(p.steps())[0]) <= 0.5 ? 1.0 : 0.0);
    aa.push_back(sup <= 0.8 ? 1.0 : 0.0);
  }
  const double mf = iid_mean(fa).value, ma = iid_mean(aa).value;
  for (std::size_t k = 0; k < fa.size(); ++k) z.push_back((fa[k] - mf) * (aa[k] - ma));
  const auto cov = iid_mean(z);
  CHECK(cov.value >= -4.0 * cov.std_error);
}
