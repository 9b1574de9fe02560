#include "polaron/path.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "polaron/error.hpp"

namespace polaron {

DiscretePath::DiscretePath(int d, std::size_t steps, double dt) : d_(d), n_(steps), dt_(dt) {
  require(d >= 1, "path dimension must be positive");
  require(steps >= 1, "path needs at least one step");
  require(std::isfinite(dt) && dt > 0.0, "path step dt must be positive");
  x_.assign((steps + 1) * static_cast<std::size_t>(d), 0.0);
}

double DiscretePath::norm(std::size_t i) const {
  double s = 0.0;
  for (double c : point(i)) s += c * c;
  return std::sqrt(s);
}

void DiscretePath::write_csv(std::ostream& os) const {
  os << "step,t";
  for (int c = 1; c <= d_; ++c) os << ",x_" << c;
  os << '\n';
  char buf[64];
  for (std::size_t i = 0; i <= n_; ++i) {
    os << i;
    std::snprintf(buf, sizeof buf, ",%.17g", static_cast<double>(i) * dt_);
    os << buf;
    for (double c : point(i)) {
      std::snprintf(buf, sizeof buf, ",%.17g", c);
      os << buf;
    }
    os << '\n';
  }
}

void fill_wiener(double* points, int d, std::size_t steps, double dt, NormalSource& normal) {
  const double s = std::sqrt(dt);
  for (std::size_t k = 1; k <= steps; ++k)
    for (int c = 0; c < d; ++c) points[k * d + c] = points[(k - 1) * d + c] + s * normal();
}

void fill_bridge(double* points, int d, std::size_t steps, double dt, NormalSource& normal) {
  const double* end = points + steps * d;
  for (std::size_t k = 1; k < steps; ++k) {
    const double remaining = static_cast<double>(steps - k + 1) * dt;
    const double frac = dt / remaining;
    const double sd = std::sqrt(dt * (remaining - dt) / remaining);
    for (int c = 0; c < d; ++c) {
      const double prev = points[(k - 1) * d + c];
      points[k * d + c] = prev + (end[c] - prev) * frac + sd * normal();
    }
  }
}

DiscretePath sample_wiener(int d, std::size_t steps, double dt, std::uint64_t seed) {
  DiscretePath path(d, steps, dt);
  Rng rng(seed);
  NormalSource normal(rng);
  fill_wiener(path.data(), d, steps, dt, normal);
  return path;
}

DiscretePath sample_bridge(std::span<const double> x_a, std::span<const double> x_b, double duration,
                           std::size_t steps, std::uint64_t seed) {
  require(x_a.size() == x_b.size() && !x_a.empty(), "bridge endpoints must have equal positive dimension");
  require(std::isfinite(duration) && duration > 0.0, "bridge duration must be positive");
  require(steps >= 1, "bridge needs at least one step");
  const int d = static_cast<int>(x_a.size());
  DiscretePath path(d, steps, duration / static_cast<double>(steps));
  std::copy(x_a.begin(), x_a.end(), path.point(0).begin());
  std::copy(x_b.begin(), x_b.end(), path.point(steps).begin());
  Rng rng(seed);
  NormalSource normal(rng);
  fill_bridge(path.data(), d, steps, path.dt(), normal);
  return path;
}

}  // namespace polaron
