#pragma once

#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "polaron/pair_kernel.hpp"
#include "polaron/path.hpp"
#include "polaron/potential.hpp"

namespace polaron {

/// Trapezoid quadratures of int V(x_s) ds and of the double time integral of W.
struct ActionValue {
  double v_part = 0.0;
  double w_part = 0.0;
  double total(double delta, double alpha) const { return delta * v_part + alpha * w_part; }
  ActionValue& operator+=(const ActionValue& o) {
    v_part += o.v_part;
    w_part += o.w_part;
    return *this;
  }
};

/// W(r, lag * dt) as a function of squared distance, one profile per lag.
/// The Gaussian family is evaluated in closed form (no interpolation error);
/// other families are tabulated in r with linear interpolation. Beyond the
/// r or t range the weight is 0 and, for r, a coverage miss is counted.
class LagKernel {
 public:
  LagKernel(const PairKernel& kernel, double dt, std::size_t max_lag, double r_max, std::size_t n_r = 2048);
  LagKernel(const KernelGrid& grid, double dt, std::size_t max_lag, std::size_t n_r = 2048);

  double operator()(double r2, std::size_t lag) const {
    if (lag > max_lag_) return 0.0;
    if (closed_form_) return lag_factor_[lag] * std::exp(-r2 * inv_4s2_);
    const double u = std::sqrt(r2) * inv_dr_;
    if (u >= static_cast<double>(n_r_)) {
      if (u > static_cast<double>(n_r_)) misses_.fetch_add(1, std::memory_order_relaxed);
      return u > static_cast<double>(n_r_) ? 0.0 : table_[lag * (n_r_ + 1) + n_r_];
    }
    const std::size_t i = static_cast<std::size_t>(u);
    const double f = u - static_cast<double>(i);
    const double* row = &table_[lag * (n_r_ + 1) + i];
    return row[0] + f * (row[1] - row[0]);
  }

  std::size_t max_lag() const { return max_lag_; }
  double dt() const { return dt_; }
  bool closed_form() const { return closed_form_; }
  std::uint64_t coverage_misses() const { return misses_.load(std::memory_order_relaxed); }

 private:
  double dt_;
  std::size_t max_lag_;
  bool closed_form_ = false;
  std::vector<double> lag_factor_;
  double inv_4s2_ = 0.0;
  std::size_t n_r_ = 0;
  double inv_dr_ = 0.0;
  std::vector<double> table_;
  mutable std::atomic<std::uint64_t> misses_{0};
};

/// Evaluates the path functional and its incremental changes.
class PathAction {
 public:
  /// `pair` may be null, in which case w_part is identically 0.
  PathAction(ExternalPotential potential, std::shared_ptr<const LagKernel> pair);

  ActionValue evaluate(const DiscretePath& path) const;

  /// Change in the action when points first .. first+count-1 are replaced by `proposed`
  /// (count * d values). Costs O(count * N) kernel evaluations; skips W when with_pair is false.
  ActionValue delta(const DiscretePath& path, std::size_t first, std::size_t count,
                    std::span<const double> proposed, bool with_pair = true) const;

  const ExternalPotential& potential() const { return potential_; }
  const LagKernel* pair() const { return pair_.get(); }

 private:
  double row_sum(const double* xi, const DiscretePath& path, std::size_t i, std::size_t j0, std::size_t j1) const;

  ExternalPotential potential_;
  std::shared_ptr<const LagKernel> pair_;
};

/// Trapezoid weight of grid point i on [0, N].
inline double trapezoid_weight(std::size_t i, std::size_t n) { return (i == 0 || i == n) ? 0.5 : 1.0; }

}  // namespace polaron
