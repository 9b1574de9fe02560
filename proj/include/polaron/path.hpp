#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "polaron/random.hpp"

namespace polaron {

/// N+1 points in R^d at times 0, dt, ..., N dt, stored point-major.
class DiscretePath {
 public:
  DiscretePath() = default;
  DiscretePath(int d, std::size_t steps, double dt);

  int dim() const { return d_; }
  std::size_t steps() const { return n_; }
  std::size_t size() const { return n_ + 1; }
  double dt() const { return dt_; }
  double horizon() const { return static_cast<double>(n_) * dt_; }

  std::span<double> point(std::size_t i) { return {&x_[i * d_], static_cast<std::size_t>(d_)}; }
  std::span<const double> point(std::size_t i) const { return {&x_[i * d_], static_cast<std::size_t>(d_)}; }
  double* data() { return x_.data(); }
  const double* data() const { return x_.data(); }
  double norm(std::size_t i) const;

  /// CSV with header step,t,x_1..x_d.
  void write_csv(std::ostream& os) const;

  bool operator==(const DiscretePath&) const = default;

 private:
  int d_ = 1;
  std::size_t n_ = 0;
  double dt_ = 1.0;
  std::vector<double> x_;
};

DiscretePath sample_wiener(int d, std::size_t steps, double dt, std::uint64_t seed);
DiscretePath sample_bridge(std::span<const double> x_a, std::span<const double> x_b, double duration,
                           std::size_t steps, std::uint64_t seed);

/// Overwrites points first+1 .. first+steps with a free Brownian continuation of points[first].
void fill_wiener(double* points, int d, std::size_t steps, double dt, NormalSource& normal);
/// Overwrites the interior points 1 .. steps-1 of points[0..steps] with a Brownian bridge
/// between the (fixed) endpoints points[0] and points[steps].
void fill_bridge(double* points, int d, std::size_t steps, double dt, NormalSource& normal);

}  // namespace polaron
