#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "polaron/path.hpp"

namespace polaron {

/// Block-quadratic Gaussian comparison measure on paths pinned at x_0 = 0:
/// density ∝ exp(-beta * sum_blocks sum_{s,t in block} |x_t - x_s|^2 dt^2) times Wiener.
struct BlockGaussianSpec {
  double beta = 0.0;
  double block_length = 1.0;
  double horizon = 1.0;
  double dt = 0.1;

  std::size_t steps() const;
  std::size_t steps_per_block() const;
  std::size_t blocks() const;
  void validate() const;
};

/// Symmetric banded matrix in lower-band storage: entry (i, i-k) at band[i * (m+1) + k].
struct BandMatrix {
  std::size_t n = 0;
  std::size_t bandwidth = 0;
  std::vector<double> band;

  BandMatrix() = default;
  BandMatrix(std::size_t n, std::size_t m) : n(n), bandwidth(m), band(n * (m + 1), 0.0) {}
  double& at(std::size_t i, std::size_t j) { return band[i * (bandwidth + 1) + (i - j)]; }
  double at(std::size_t i, std::size_t j) const { return band[i * (bandwidth + 1) + (i - j)]; }
  /// Full symmetric access (0 outside the band).
  double get(std::size_t i, std::size_t j) const;
};

/// Per-coordinate precision of (x_1..x_N) and its banded Cholesky factor P = L L^T.
class PrecisionFactor {
 public:
  explicit PrecisionFactor(const BlockGaussianSpec& spec);

  const BlockGaussianSpec& spec() const { return spec_; }
  const BandMatrix& precision() const { return precision_; }
  const BandMatrix& cholesky() const { return factor_; }
  /// max |L L^T - P| / max |P| over the band.
  double cholesky_residual() const;

  /// Solves L y = b in place.
  void forward(std::span<double> b) const;
  /// Solves L^T y = b in place.
  void backward(std::span<double> b) const;
  /// u^T P^{-1} u for a vector indexed by path points 1..N.
  double quadratic_inverse(std::span<const double> u) const;
  /// Cov(x_i, x_j) for grid indices i, j (0 is the pinned origin).
  double covariance(std::size_t i, std::size_t j) const;

 private:
  BlockGaussianSpec spec_;
  BandMatrix precision_;
  BandMatrix factor_;
};

/// Penalty matrix 2 beta dt^2 (n_b I - J) of one block over its n_b grid points (row-major).
std::vector<double> block_penalty_matrix(double beta, double dt, std::size_t points);

DiscretePath sample_exact(const PrecisionFactor& factor, int d, std::uint64_t seed);

struct BlockVariance {
  double first_block = 0.0;
  double middle_block = 0.0;
};

/// Per-coordinate Var(x_l - x_0) of the first block, plus that of the middle block.
BlockVariance block_variance(const BlockGaussianSpec& spec);
BlockVariance block_variance(const PrecisionFactor& factor);

}  // namespace polaron
