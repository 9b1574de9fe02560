#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "../oracles.hpp"
#include "polaron/error.hpp"
#include "polaron/inequalities.hpp"

using namespace polaron;

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double c : v) x[i++] = c;
  return x;
}

Eigen::MatrixXd corr2(double rho) {
  Eigen::MatrixXd c(2, 2);
  c << 1.0, rho, rho, 1.0;
  return c;
}

/// Bivariate normal mass of [-a, a] x [-b, b] by nested Simpson.
double box_mass_2d(double rho, double a, double b) {
  const double s = std::sqrt(1.0 - rho * rho);
  return oracle::simpson(
      [&](double x) {
        const double inner = oracle::phi((b - rho * x) / s) - oracle::phi((-b - rho * x) / s);
        return std::exp(-0.5 * x * x) / std::sqrt(2.0 * oracle::pi) * inner;
      },
      -a, a, 4000);
}

}  // namespace

TEST_CASE("exact Gaussian mass against direct quadrature") {
  CHECK(gaussian_mass_exact(corr2(0.5), {ConvexSet::box(vec({1.0, inf}))}) ==
        doctest::Approx(std::erf(1.0 / std::sqrt(2.0))).epsilon(1e-12));
  for (double rho : {-0.7, 0.0, 0.3, 0.9}) {
    const double m = gaussian_mass_exact(corr2(rho), {ConvexSet::box(vec({1.0, inf})), ConvexSet::box(vec({inf, 0.6}))});
    CHECK(m == doctest::Approx(box_mass_2d(rho, 1.0, 0.6)).epsilon(1e-9));
  }
  Eigen::MatrixXd disc = Eigen::MatrixXd::Identity(2, 2) / 4.0;
  CHECK(gaussian_mass_exact(Eigen::MatrixXd::Identity(2, 2), {ConvexSet::ellipsoid(disc)}) ==
        doctest::Approx(1.0 - std::exp(-2.0)).epsilon(1e-11));
}

TEST_CASE("GCI examples") {
  GaussianInstance indep{Eigen::MatrixXd::Identity(2, 2),
                         {ConvexSet::box(vec({1.0, inf})), ConvexSet::box(vec({inf, 1.0}))}};
  const auto eq = gci_check(indep, 1, GciMethod::exact2d);
  CHECK(std::abs(eq.margin) <= 1e-12);
  CHECK(eq.holds);

  GaussianInstance corr{corr2(0.5), indep.sets};
  const auto pos = gci_check(corr, 1, GciMethod::exact2d);
  CHECK(pos.margin > 1e-3);
  CHECK(pos.rhs == doctest::Approx(box_mass_2d(0.5, 1.0, 1.0)).epsilon(1e-9));

  const auto mc = gci_check(corr, 1, GciMethod::mc, 400000, 4);
  CHECK(mc.holds);
  CHECK(std::abs(mc.margin - pos.margin) <= 5.0 * mc.error);
  CHECK_THROWS_AS(gci_check(GaussianInstance{Eigen::MatrixXd::Identity(3, 3), {ConvexSet::box(vec({1, 1, 1})),
                                                                               ConvexSet::box(vec({1, 1, 1}))}},
                            1, GciMethod::exact2d),
                  ValidationError);
}

TEST_CASE("GCI margin vanishes on independent coordinate blocks") {
  Eigen::MatrixXd cov = Eigen::MatrixXd::Identity(2, 2);
  cov(0, 0) = 2.5;
  cov(1, 1) = 0.4;
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(2, 2);
  q(0, 0) = 0.7;
  GaussianInstance inst{cov, {ConvexSet::ellipsoid(q), ConvexSet::box(vec({inf, 0.3}))}};
  CHECK(std::abs(gci_check(inst, 1, GciMethod::exact2d).margin) <= 1e-10);
}

TEST_CASE("reweighted GCI examples") {
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(2, 2);
  const Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(2, 2);
  const auto A = ConvexSet::box(vec({0.8, 1.5}));

  const auto trivial = reweight_gci_check({corr2(0.3), 0.0, ConvexSet::box(vec({1, 1})), Z, Z, A}, 100000, 1);
  CHECK(trivial.accepted);
  const double muA = gaussian_mass_exact(corr2(0.3), {A});
  CHECK(trivial.mu_neg_g == doctest::Approx(muA).epsilon(1e-12));
  CHECK(trivial.mu_f_exact == doctest::Approx(muA).epsilon(1e-12));
  CHECK(std::abs(trivial.mu_f - muA) <= 5.0 * trivial.mu_f_se);

  // f + g is the box indicator.
  const auto box = reweight_gci_check({I, 1.0, ConvexSet::box(vec({0.3, 0.3})), I, I, A}, 200000, 2);
  CHECK(box.accepted);
  CHECK(box.holds);
  CHECK(box.mu_f_exact - box.mu_neg_g > 0.0);
  CHECK(std::abs(box.mu_f - box.mu_f_exact) <= 5.0 * box.mu_f_se);

  const auto everything = reweight_gci_check({I, 1.0, ConvexSet::box(vec({0.3, 0.3})), I, I,
                                              ConvexSet::box(vec({inf, inf}))},
                                             1000, 3);
  CHECK(everything.mu_f == doctest::Approx(1.0));
  CHECK(everything.mu_neg_g == doctest::Approx(1.0).epsilon(1e-12));

  // Box indicator plus an unbounded quadratic is not quasi-concave: rejected as a precondition failure.
  const auto rejected = reweight_gci_check({I, 1.0, ConvexSet::box(vec({0.3, 0.3})), Z, 0.5 * I, A}, 1000, 4);
  CHECK_FALSE(rejected.accepted);
}

TEST_CASE("Gaussian tail bound") {
  const auto r = tail_bound_check(1, 1.0, 3.0, 400000, 5);
  CHECK(r.exact == doctest::Approx(oracle::normal_two_sided_tail(1.0, 3.0)).epsilon(1e-10));
  CHECK(r.exact == doctest::Approx(0.0027).epsilon(0.01));
  CHECK(std::abs(r.empirical - r.exact) <= 5.0 * r.empirical_se);
  CHECK(r.bound == doctest::Approx(std::exp(-4.5)).epsilon(1e-12));
  CHECK(r.holds);

  const auto tiny = tail_bound_check(2, 0.5, 1e-6, 1000, 6);
  CHECK(tiny.bound >= 1.0);
  CHECK(tiny.holds);
}

TEST_CASE("sup-over-time sequence") {
  for (double l : {1.0, 0.5, 0.25, 0.125, 0.01}) CHECK(sup_stay_probability(l, 1.0) == doctest::Approx(oracle::sup_stay_series(l, 1.0)).epsilon(1e-12));
  const auto s = sup_sequence_check({1.0, 0.5, 0.25, 0.125}, 1.0, 20000, 7);
  CHECK(s.increasing);
  CHECK(s.matches_oracle);
  for (std::size_t k = 0; k < s.l.size(); ++k) {
    CHECK(std::abs(s.mc[k] - s.exact[k]) <= 5.0 * s.mc_se[k] + 1e-3);
    CHECK(s.rate[k] <= 1.0);
  }
}

TEST_CASE("variance inflation") {
  const auto same = variance_inflation_check(2, 1.0, vec({0.5, -0.2}), 1.0);
  CHECK(same.lhs == doctest::Approx(same.rhs).epsilon(1e-14));
  CHECK(same.holds);

  const auto one = variance_inflation_check(1, 2.0, vec({3.0}), 0.5);
  const double lhs = oracle::phi(0.5 - 3.0) - oracle::phi(-0.5 - 3.0);
  const double rhs = oracle::phi((0.5 - 3.0) / std::sqrt(2.0)) - oracle::phi((-0.5 - 3.0) / std::sqrt(2.0));
  CHECK(one.lhs == doctest::Approx(lhs).epsilon(1e-9));
  CHECK(one.rhs == doctest::Approx(rhs).epsilon(1e-9));
  CHECK(one.holds);

  for (double sigma : {1.0, 1.3, 2.0}) {
    const auto c = variance_inflation_check(2, sigma, vec({0.0, 0.0}), 0.8);
    CHECK(c.lhs == doctest::Approx(1.0 - std::exp(-0.32)).epsilon(1e-12));
    CHECK(c.rhs == doctest::Approx(1.0 - std::exp(-0.32 / sigma)).epsilon(1e-12));
    CHECK(c.holds);
  }

  const auto q = variance_inflation_check(3, 1.5, vec({0.4, 1.0, -0.3}), 1.2);
  const auto m = variance_inflation_check(3, 1.5, vec({0.4, 1.0, -0.3}), 1.2, InflationMethod::mc, 200000, 8);
  CHECK(m.holds);
  CHECK(std::abs(m.lhs - q.lhs) <= 5.0 * std::sqrt(q.lhs * (1 - q.lhs) / 200000));
  CHECK(std::abs(m.rhs - q.rhs) <= 5.0 * std::sqrt(q.rhs * (1 - q.rhs) / 200000));
  CHECK_THROWS_AS(variance_inflation_check(1, 2.5, vec({0.0}), 1.0), ValidationError);
}

TEST_CASE("small randomised suites report no violations") {
  const auto g = run_gci_suite(20, 11, 1, 20000);
  CHECK(g.violations == 0);
  CHECK(g.worst_exact_margin >= -1e-8);
  CHECK(std::count(g.csv.begin(), g.csv.end(), '\n') >= 21);
  const auto r = run_reweight_suite(8, 12, 1, 20000);
  CHECK(r.violations == 0);
  const auto t = run_tail_suite(5, 13, 1, 20000);
  CHECK(t.violations == 0);
  CHECK(t.extra_csv.rfind("l,R,mc,mc_se,exact,rate\n", 0) == 0);
  const auto f = run_inflation_suite(10, 14, 1);
  CHECK(f.violations == 0);
  CHECK(f.worst_exact_margin >= 0.0);
  CHECK(run_inflation_suite(10, 14, 1).csv == f.csv);
}
