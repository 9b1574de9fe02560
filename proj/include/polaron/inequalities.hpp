#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace polaron {

/// Centred box (infinite half-widths allowed) or centred ellipsoid {x : x^T Q x <= 1}.
struct ConvexSet {
  enum class Kind { box, ellipsoid };
  Kind kind = Kind::box;
  Eigen::VectorXd half_widths;
  Eigen::MatrixXd shape;

  static ConvexSet box(Eigen::VectorXd half_widths);
  static ConvexSet ellipsoid(Eigen::MatrixXd shape);
  bool contains(const Eigen::VectorXd& x) const;
  int dim() const;
};

struct GaussianInstance {
  Eigen::MatrixXd covariance;
  std::vector<ConvexSet> sets;

  int dim() const { return static_cast<int>(covariance.rows()); }
  void validate() const;
};

/// Exact mass of the intersection of `sets` under N(0, cov) for n <= 2 (whitening + adaptive quadrature).
double gaussian_mass_exact(const Eigen::MatrixXd& cov, const std::vector<ConvexSet>& sets);

enum class GciMethod { exact2d, mc };

struct GciResult {
  double lhs = 0.0;  // mu(A) mu(B)
  double rhs = 0.0;  // mu(A ∩ B)
  double margin = 0.0;  // rhs - lhs
  double error = 0.0;  // standard error of the margin (0 for exact2d)
  bool holds = true;
};

/// Sets [0, split) form A and [split, end) form B.
GciResult gci_check(const GaussianInstance& instance, std::size_t split, GciMethod method,
                    std::size_t samples = 200000, std::uint64_t seed = 1);

/// f(x) = c 1_S(x) - x^T F x / 2 and g(x) = x^T G x / 2 on a centred Gaussian base.
struct ReweightInstance {
  Eigen::MatrixXd covariance;
  double c = 1.0;
  ConvexSet S;
  Eigen::MatrixXd F;
  Eigen::MatrixXd G;
  ConvexSet A;
};

struct ReweightGciResult {
  bool accepted = false;  // f + g passed the quasi-concavity probe
  double mu_f = 0.0;  // mu^{(f)}(A) by importance Monte Carlo
  double mu_f_se = 0.0;
  double mu_f_exact = -1.0;  // cross-check for n <= 2
  double mu_neg_g = 0.0;  // mu^{(-g)}(A), exact
  double margin = 0.0;
  bool holds = true;
};

/// Random-pair midpoint and ray probe of quasi-concavity of f + g.
bool probe_quasi_concave(const ReweightInstance& instance, std::size_t probes, std::uint64_t seed);

ReweightGciResult reweight_gci_check(const ReweightInstance& instance, std::size_t samples = 200000,
                                   std::uint64_t seed = 1);

struct TailResult {
  double empirical = 0.0;
  double empirical_se = 0.0;
  double exact = 0.0;
  double bound_stated = 0.0;  // d exp(-R^2 / (2 d^2 l^2))
  double bound = 0.0;  // d exp(-R^2 / (2 d^2 l))
  bool holds = true;
  bool holds_stated = true;
};

TailResult tail_bound_check(int d, double l, double R, std::size_t samples = 200000, std::uint64_t seed = 1);

/// P(sup_{t <= l} |B_t| <= R) in d = 1 by the reflection series.
double sup_stay_probability(double l, double R);

struct SupSequenceResult {
  std::vector<double> l;
  std::vector<double> mc, mc_se, exact;
  /// P^{1/l} for each l (Monte Carlo).
  std::vector<double> rate;
  bool increasing = true;
  bool matches_oracle = true;
};

/// Checks that P(sup_{t<=l}|B_t| <= R)^{1/l} increases towards 1 along a decreasing l sequence (d = 1).
SupSequenceResult sup_sequence_check(const std::vector<double>& ls, double R, std::size_t samples = 100000,
                                     std::uint64_t seed = 1);

struct InflationResult {
  double lhs = 0.0;  // P(|X + z| <= R)
  double rhs = 0.0;  // P(|sqrt(sigma) X + z| <= R)
  double rhs_scaled = 0.0;  // sqrt(2^d) rhs
  double error = 0.0;  // standard error of lhs - rhs_scaled (0 for quadrature)
  bool holds = true;
};

enum class InflationMethod { quadrature, mc };

InflationResult variance_inflation_check(int d, double sigma, const Eigen::VectorXd& z, double R,
                                         InflationMethod method = InflationMethod::quadrature,
                                         std::size_t samples = 200000, std::uint64_t seed = 1);

struct SuiteSummary {
  std::string suite;
  std::size_t instances = 0;
  std::size_t violations = 0;
  std::size_t rejected = 0;
  /// Smallest margin computed without Monte Carlo error (quadrature or closed form).
  double worst_exact_margin = 0.0;
  /// CSV rows (with header) describing every instance.
  std::string csv;
  /// Optional second table (tails: the sup-over-time sequence).
  std::string extra_csv;
};

SuiteSummary run_gci_suite(std::size_t instances, std::uint64_t seed, std::size_t threads = 1,
                           std::size_t samples = 200000);
SuiteSummary run_reweight_suite(std::size_t instances, std::uint64_t seed, std::size_t threads = 1,
                                std::size_t samples = 200000);
SuiteSummary run_tail_suite(std::size_t instances, std::uint64_t seed, std::size_t threads = 1,
                            std::size_t samples = 200000);
SuiteSummary run_inflation_suite(std::size_t instances, std::uint64_t seed, std::size_t threads = 1);

}  // namespace polaron
