#include <doctest.h>

#include <array>
#include <cmath>
#include <memory>

#include "../oracles.hpp"
#include "polaron/error.hpp"
#include "polaron/estimators.hpp"
#include "polaron/sampler.hpp"
#include "polaron/stats.hpp"

using namespace polaron;

namespace {

ModelSpec free_model(int d, double T, std::size_t n, double M) {
  ModelSpec m;
  m.d = d;
  m.horizon = T;
  m.steps = n;
  m.endpoint_radius = M;
  return m;
}

ChainConfig chain(std::size_t sweeps, std::size_t thin, std::uint64_t seed) {
  ChainConfig c;
  c.sweeps = sweeps;
  c.thin = thin;
  c.seed = seed;
  return c;
}

}  // namespace

TEST_CASE("free chain reproduces the Wiener midpoint variance") {
  const auto out = mcmc_run(free_model(1, 4.0, 32, INFINITY), chain(40000, 5, 3));
  std::vector<double> sq;
  for (const auto& s : out.samples) sq.push_back(s.midpoint[0] * s.midpoint[0]);
  const auto e = batch_means(sq);
  CHECK(std::abs(e.value - 2.0) <= 5.0 * e.std_error);
  CHECK(e.n_effective <= static_cast<double>(sq.size()));
}

TEST_CASE("identity proposals are always accepted") {
  auto m = free_model(3, 2.0, 16, 1.0);
  m.delta = 2.0;
  m.alpha = 1.0;
  m.pair = std::make_shared<LagKernel>(PairKernel::gaussian_omega1(3), m.dt(), m.steps, 50.0);
  PathChain c(m, chain(10, 1, 1));
  for (int k = 0; k < 20; ++k) {
    c.sweep();
    const auto& p = c.path();
    std::vector<double> same(p.data() + 3 * 4, p.data() + 3 * 9);
    CHECK(c.propose(4, 5, same));
  }
}

TEST_CASE("chain invariants and determinism") {
  auto m = free_model(3, 4.0, 32, 0.8);
  m.delta = 1.0;
  m.alpha = 0.5;
  m.pair = std::make_shared<LagKernel>(PairKernel::gaussian_omega1(3), m.dt(), m.steps, 50.0);
  const auto a = mcmc_run(m, chain(2000, 4, 9));
  for (double r : a.endpoint_radii()) CHECK(r <= 0.8);
  for (const auto* s : {&a.bridge, &a.endpoint, &a.reflect}) {
    CHECK(s->rate() >= 0.0);
    CHECK(s->rate() <= 1.0);
  }
  CHECK(a.reflect.rate() == 1.0);
  CHECK(a.max_recompute_drift <= 1e-9);
  CHECK(a.trace.size() == 2000);
  CHECK(a.samples.size() == 400);
  const auto b = mcmc_run(m, chain(2000, 4, 9));
  CHECK(a.v_series() == b.v_series());
  CHECK(a.w_series() == b.w_series());
}

TEST_CASE("zero acceptance during calibration is a numeric error") {
  auto m = free_model(1, 1.0, 8, 1e-9);
  auto c = chain(100, 1, 1);
  c.mix = {0.0, 1.0, 0.0};
  CHECK_THROWS_AS(mcmc_run(m, c), NumericError);
}

TEST_CASE("invalid chain and model configurations") {
  auto c = chain(10, 1, 1);
  c.burn_in = 10;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = chain(10, 1, 1);
  c.mix = {0.5, 0.5, 0.5};
  CHECK_THROWS_AS(c.validate(), ValidationError);
  auto m = free_model(3, 1.0, 8, 1.0);
  m.alpha = 1.0;
  CHECK_THROWS_AS(m.validate(), ValidationError);
  m = free_model(3, 1.0, 7, 1.0);
  CHECK_THROWS_AS(m.validate(), ValidationError);
  m = free_model(3, 1.0, 8, -1.0);
  CHECK_THROWS_AS(m.validate(), ValidationError);
}

TEST_CASE("detailed balance on a two-step path") {
  // d = 1, N = 2, dt = 1: the state is (x1, x2) with x0 = 0 and |x2| <= M.
  const double delta = 1.5, alpha = 0.8, M = 1.5, width = 0.8;
  auto m = free_model(1, 2.0, 2, M);
  m.delta = delta;
  m.alpha = alpha;
  m.pair = std::make_shared<LagKernel>(PairKernel::gaussian_omega1(1), 1.0, 2, 50.0);

  const auto bin = [&](double x) { return static_cast<int>(std::clamp(std::lround(x / width), -2L, 2L)) + 2; };
  const auto W = [](double r, double t) { return std::sqrt(oracle::pi) / 4.0 * std::exp(-t - r * r / 4.0); };
  const auto V = [](double x) { return std::abs(x) <= 1.0 ? 1.0 : 0.0; };
  const auto density = [&](double x1, double x2) {
    const double x[3] = {0.0, x1, x2}, w[3] = {0.5, 1.0, 0.5};
    double v = 0.0, pair = 0.0;
    for (int i = 0; i < 3; ++i) {
      v += w[i] * V(x[i]);
      for (int j = 0; j < 3; ++j) pair += w[i] * w[j] * W(std::abs(x[i] - x[j]), std::abs(i - j));
    }
    return std::exp(delta * v + alpha * pair - 0.5 * x1 * x1 - 0.5 * (x2 - x1) * (x2 - x1));
  };
  std::array<double, 25> exact{};
  double total = 0.0;
  const int n1 = 4000, n2 = 1500;
  const double h1 = 20.0 / n1, h2 = 2.0 * M / n2;
  for (int i = 0; i < n1; ++i)
    for (int j = 0; j < n2; ++j) {
      const double x1 = -10.0 + (i + 0.5) * h1, x2 = -M + (j + 0.5) * h2;
      const double p = density(x1, x2);
      exact[bin(x1) * 5 + bin(x2)] += p;
      total += p;
    }
  for (auto& p : exact) p /= total;

  PathChain c(m, chain(1, 1, 2024));
  const std::size_t sweeps = 300000;
  std::array<std::vector<double>, 25> ind;
  for (auto& v : ind) v.reserve(sweeps);
  for (std::size_t s = 0; s < 2000; ++s) c.sweep();
  for (std::size_t s = 0; s < sweeps; ++s) {
    c.sweep();
    const int k = bin(c.path().point(1)[0]) * 5 + bin(c.path().point(2)[0]);
    for (int q = 0; q < 25; ++q) ind[q].push_back(q == k ? 1.0 : 0.0);
  }
  for (int q = 0; q < 25; ++q) {
    const auto e = batch_means(ind[q]);
    INFO("cell " << q << " chain " << e.value << " exact " << exact[q]);
    CHECK(std::abs(e.value - exact[q]) <= 5.0 * e.std_error + 1e-4);
  }
}

TEST_CASE("midpoint law is symmetric") {
  auto m = free_model(3, 4.0, 32, 1.0);
  m.delta = 1.0;
  const auto out = mcmc_run(m, chain(20000, 5, 17));
  for (int c = 0; c < 3; ++c) {
    std::vector<double> x;
    for (const auto& s : out.samples) x.push_back(s.midpoint[c]);
    const auto e = batch_means(x);
    CHECK(std::abs(e.value) <= 4.0 * e.std_error);
  }
}

TEST_CASE("reweighting to a nearby delta") {
  auto m = free_model(1, 2.0, 16, 1.0);
  m.delta = 0.2;
  const auto r = reweight_check(m, 0.25, chain(60000, 2, 5));
  CHECK(r.agree);
  CHECK(std::abs(r.reweighted.value - r.direct.value) <= 3.0 * joint_se(r.reweighted, r.direct));
  CHECK(r.ess > 100.0);

  const auto out = mcmc_run(m, chain(4000, 2, 6));
  double ess = 0.0;
  const auto same = reweight_occupation(out, 0.0, &ess);
  CHECK(same.value == doctest::Approx(occupation_fraction(out, 1.0).value).epsilon(1e-12));
  CHECK(ess == doctest::Approx(static_cast<double>(out.samples.size())));
}

TEST_CASE("shifted start lowers the constrained partition function") {
  // log E_z[e^{delta V} 1(|x_T| <= M)] = log P_z(|x_T| <= M) + log E_z[e^{delta V} | |x_T| <= M].
  const double T = 2.0, M = 1.0;
  std::vector<double> grid;
  for (int k = 0; k <= 8; ++k) grid.push_back(0.25 * k);
  std::vector<EstimateWithError> logz;
  for (double z : {0.0, 0.5, 1.0}) {
    auto m = free_model(1, T, 16, M);
    m.start = {z};
    const auto ratio = log_partition_ratio(m, grid, chain(30000, 2, 41), 1);
    const double p = oracle::phi((M - z) / std::sqrt(T)) - oracle::phi((-M - z) / std::sqrt(T));
    logz.push_back({std::log(p) + ratio.value, ratio.std_error, ratio.n_effective});
  }
  for (std::size_t k = 0; k + 1 < logz.size(); ++k) {
    INFO("z index " << k << ": " << logz[k].value << " vs " << logz[k + 1].value);
    CHECK(logz[k + 1].value <= logz[k].value + 3.0 * joint_se(logz[k], logz[k + 1]));
  }
  CHECK(logz[2].value < logz[0].value);
}
