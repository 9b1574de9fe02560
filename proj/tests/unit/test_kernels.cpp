#include <doctest.h>

#include <cmath>
#include <random>

#include "../oracles.hpp"
#include "polaron/error.hpp"
#include "polaron/pair_kernel.hpp"
#include "polaron/potential.hpp"

using namespace polaron;

TEST_CASE("well potential is an indicator of the closed ball") {
  const auto V = ExternalPotential::well(1.0);
  const double origin[3] = {0, 0, 0};
  const double outside[3] = {1.5, 0, 0};
  const double edge[3] = {0.6, 0.8, 0};
  CHECK(V.eval(origin) == 1.0);
  CHECK(V.eval(outside) == 0.0);
  CHECK(V.eval(edge) == 1.0);
}

TEST_CASE("custom table sampled from the well interpolates the plateau") {
  const auto V = ExternalPotential::custom({0.0, 0.25, 0.5, 0.75, 1.0}, {1, 1, 1, 1, 1});
  const double x[1] = {0.5};
  const double y[2] = {0.3, 0.2};
  CHECK(V.eval(x) == 1.0);
  CHECK(V.eval(y) == doctest::Approx(1.0).epsilon(1e-15));
  const double far[1] = {2.0};
  CHECK(V.eval(far) == 0.0);
}

TEST_CASE("potential rejects bad input") {
  const auto V = ExternalPotential::well(1.0);
  const double bad[1] = {std::nan("")};
  CHECK_THROWS_AS(V.eval(bad), ValidationError);
  CHECK_THROWS_AS(ExternalPotential::well(-1.0), ValidationError);
  CHECK_THROWS_AS(ExternalPotential::custom({0.0, 1.0}, {1.0, 2.0}), ValidationError);
  CHECK_THROWS_AS(ExternalPotential::custom({0.1, 1.0}, {1.0, 0.0}), ValidationError);
}

TEST_CASE("gaussian-omega1 d=1 matches the convolution quadrature") {
  const auto W = PairKernel::gaussian_omega1(1);
  CHECK(W.eval(0.0, 0.0) == doctest::Approx(oracle::gaussian_kernel_1d(0.0, 0.0)).epsilon(1e-10));
  CHECK(W.eval(0.0, 0.0) == doctest::Approx(0.443113).epsilon(1e-6));
  CHECK(W.eval(0.0, 1.0) == doctest::Approx(std::exp(-1.0) * std::sqrt(oracle::pi) / 4.0).epsilon(1e-14));
  for (double r : {0.3, 1.0, 2.5, 5.0})
    CHECK(W.eval(r, 0.7) == doctest::Approx(oracle::gaussian_kernel_1d(r, 0.7)).epsilon(1e-9));
}

TEST_CASE("gaussian-omega1 factorises in time") {
  for (int d = 1; d <= 3; ++d) {
    const auto W = PairKernel::gaussian_omega1(d, 1.3);
    for (double r = 0.0; r <= 6.0; r += 0.25)
      for (double t = 0.0; t <= 6.0; t += 0.5) {
        CHECK(std::abs(W.eval(r, t) - W.eval(r, 0.0) * std::exp(-t)) <= 1e-12);
        CHECK(W.eval(r, -t) == W.eval(r, t));
      }
  }
}

TEST_CASE("nelson3d agrees with the direct-space convolution") {
  const auto W = PairKernel::nelson3d(1.0);
  const double w2 = W.eval(0.0, 2.0), w4 = W.eval(0.0, 4.0);
  CHECK(w2 == doctest::Approx(oracle::nelson_direct_origin(2.0)).epsilon(1e-6));
  CHECK(w4 == doctest::Approx(oracle::nelson_direct_origin(4.0)).epsilon(1e-6));
  CHECK(w4 > 0.0);
  CHECK(w2 > w4);
}

TEST_CASE("nelson3d clamps at t_min and rejects negative time") {
  const auto W = PairKernel::nelson3d(1.0, 0.01);
  CHECK(W.eval(0.0, 0.0) == W.eval(0.0, 0.01));
  CHECK(W.eval(0.5, 0.001) == W.eval(0.5, 0.01));
  CHECK_THROWS_AS(W.eval(0.0, -1.0), ValidationError);
}

TEST_CASE("built-in kernels are non-negative and peak at r = 0") {
  const PairKernel kernels[] = {PairKernel::gaussian_omega1(1), PairKernel::gaussian_omega1(3, 0.7),
                                PairKernel::nelson3d(1.0, 0.05)};
  for (const auto& W : kernels) {
    for (double t : {0.0, 0.1, 0.5, 2.0}) {
      const double peak = W.eval(0.0, t);
      double prev = peak;
      for (double r = 0.1; r <= 8.0; r += 0.1) {
        const double w = W.eval(r, t);
        CHECK(w >= 0.0);
        CHECK(w <= peak * (1 + 1e-12));
        CHECK(w <= prev * (1 + 1e-9) + 1e-14);
        prev = w;
      }
    }
  }
}

TEST_CASE("kernel grid interpolation") {
  const auto W = PairKernel::gaussian_omega1(1);
  const KernelGrid grid(W, 8.0, 8.0, 256, 256);
  CHECK(grid.eval(0.0, 0.0) == W.eval(0.0, 0.0));
  CHECK(std::abs(grid.eval(grid.dr() / 2, 0.0) - W.eval(grid.dr() / 2, 0.0)) <= 1e-3);
  CHECK(grid.eval(8.5, 0.0) == 0.0);
  CHECK(grid.eval(1.0, 9.0) == 0.0);
  CHECK(grid.interpolation_error() <= 1e-3);

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 8.0);
  for (int k = 0; k < 2000; ++k) {
    const double r = u(rng), t = u(rng);
    CHECK(std::abs(grid.eval(r, t) - W.eval(r, t)) <= 2.0 * grid.interpolation_error() + 1e-12);
  }
  CHECK_THROWS_AS(KernelGrid(W, 0.0, 1.0, 4, 4), ValidationError);
  CHECK_THROWS_AS(KernelGrid(W, 1.0, -1.0, 4, 4), ValidationError);
}

TEST_CASE("custom-grid kernel reproduces its nodes") {
  std::vector<double> v(5 * 3);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 3; ++j) v[i * 3 + j] = (4.0 - i) * (3.0 - j);
  const auto W = PairKernel::custom_grid(2, 4.0, 2.0, 5, 3, v);
  CHECK(W.eval(1.0, 1.0) == doctest::Approx(6.0));
  CHECK(W.eval(1.5, 0.5) == doctest::Approx(0.5 * (7.5 + 5.0)));
  CHECK(W.eval(1.0, -1.0) == W.eval(1.0, 1.0));
}

TEST_CASE("assumption checks") {
  const auto W = PairKernel::gaussian_omega1(1);
  AssumptionQuery q;
  q.xi = 1e3;
  q.R = 1.0;
  q.l_star = 0.5;
  const auto rep = validate_assumptions(W, q);
  CHECK(rep.b_ok);
  CHECK(rep.a2_monotone_ok);
  CHECK(rep.a2_worst_violation == 0.0);
  CHECK(rep.time_decay_C_I > 0.0);

  q.xi = 1e-6;
  CHECK_FALSE(validate_assumptions(W, q).b_ok);
}

TEST_CASE("assumption (B) is monotone in xi") {
  const PairKernel kernels[] = {PairKernel::gaussian_omega1(1), PairKernel::gaussian_omega1(3, 0.5)};
  for (const auto& W : kernels) {
    AssumptionQuery q;
    q.R = 2.0;
    bool passed = false;
    for (double xi = 1e-3; xi <= 1e4; xi *= 2.0) {
      q.xi = xi;
      const bool ok = validate_assumptions(W, q).b_ok;
      if (passed) CHECK(ok);
      passed = passed || ok;
    }
    CHECK(passed);
  }
}
