#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "polaron/potential.hpp"
#include "polaron/sampler.hpp"
#include "polaron/stats.hpp"

namespace polaron {

/// Uses the per-sample occupation recorded for the chain's K; other radii need kept paths.
EstimateWithError occupation_fraction(const ChainOutput& out, double K_radius);
EstimateWithError midpoint_mass(const ChainOutput& out, double K_radius);

struct Histogram {
  std::vector<double> edges;
  std::vector<double> density;
  std::vector<double> density_se;
  std::size_t in_range = 0;
  std::size_t overflow = 0;
};

/// Density of |x_{T/2}| on [0, r_max], normalised over the in-range samples.
Histogram midpoint_radial_histogram(const ChainOutput& out, std::size_t bins, double r_max);
/// Density of the first coordinate of x_{T/2} on [-half_width, half_width].
Histogram midpoint_signed_histogram(const ChainOutput& out, std::size_t bins, double half_width);

struct FreeEnergyOptions {
  /// Use (log Z_T - log Z_{T/2}) / (T/2); the single-horizon curve is always reported too.
  bool horizon_difference = true;
  std::size_t threads = 1;
};

struct FreeEnergyCurve {
  std::vector<double> delta;
  /// E[V_0^T] at horizon T and E[V_0^{T/2}] at T/2 for each grid point.
  std::vector<EstimateWithError> mean_v;
  std::vector<EstimateWithError> mean_v_half;
  std::vector<double> rate, rate_se;
  std::vector<double> rate_plain, rate_plain_se;
  double alpha = 0.0, horizon = 0.0;
  /// log Z at delta = 0 for each horizon: the exact free endpoint mass log P(|x_T| <= M) when alpha = 0,
  /// else 0 (rates are then relative to the delta = 0 coupled model).
  double log_z0 = 0.0, log_z0_half = 0.0;
  /// Set when the integrand decreases by more than 3 joint s.e. (non-convex f).
  bool convexity_flag = false;
};

/// log P_start(|x_T| <= M) for free Brownian motion (0 when M is infinite).
double free_endpoint_log_mass(const ModelSpec& model);

/// Thermodynamic integration in delta over `grid` (must start at 0). The model's delta is ignored.
FreeEnergyCurve free_energy_rate(const ModelSpec& model, const std::vector<double>& grid, const ChainConfig& config,
                                 const FreeEnergyOptions& options = {});

/// log Z(delta) - log Z(0) by trapezoid thermodynamic integration of E[V_0^T] (single horizon).
EstimateWithError log_partition_ratio(const ModelSpec& model, const std::vector<double>& grid,
                                      const ChainConfig& config, std::size_t threads = 1);

struct ReweightResult {
  EstimateWithError reweighted;
  EstimateWithError direct;
  double ess = 0.0;
  bool low_ess = false;
  bool agree = false;
};

/// Self-normalised weights exp(d_delta V_0^T) applied to the samples' occupation fractions.
EstimateWithError reweight_occupation(const ChainOutput& out, double d_delta, double* ess = nullptr);

/// Occupation fraction at delta' by reweighting a chain at the model's delta, against a direct chain.
ReweightResult reweight_check(const ModelSpec& model, double delta_prime, const ChainConfig& config,
                              double ess_threshold = 100.0);

struct GammaCurve {
  std::vector<double> t;
  std::vector<double> gamma;
  std::vector<double> gamma_se;
  double trend_slope = 0.0;
  bool bound_signal = false;
  bool insufficient_signal = false;
  /// |psi| in L^2, the Cauchy-Schwarz ceiling.
  double psi_norm = 0.0;
};

/// Least-squares slope of log gamma over the last half of the grid; > -0.02 means bound.
void classify_gamma(GammaCurve& curve);

struct GammaSpectralOptions {
  double r_max = 100.0;
  double cells_per_unit = 32.0;
};

GammaCurve gamma_ratio_spectral(const ExternalPotential& potential, double delta, int d, double psi_radius,
                                const std::vector<double>& t_grid, const GammaSpectralOptions& options = {});

struct GammaMcOptions {
  std::size_t samples = 200000;
  double dt = 1.0 / 128.0;
  std::uint64_t seed = 1;
  std::size_t threads = 1;
};

/// Feynman-Kac estimate with psi-pinned endpoints drawn uniformly in the ball and free bridges between them.
GammaCurve gamma_ratio_mc(const ExternalPotential& potential, double delta, int d, double psi_radius,
                          const std::vector<double>& t_grid, const GammaMcOptions& options = {});

/// (psi, e^{-tH} psi) by the Monte Carlo engine.
EstimateWithError semigroup_overlap_mc(const ExternalPotential& potential, double delta, int d, double psi_radius,
                                       double t, const GammaMcOptions& options);

}  // namespace polaron
