#include "polaron/estimators.hpp"

#include <algorithm>
#include <boost/math/distributions/non_central_chi_squared.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>

#include "polaron/error.hpp"
#include "polaron/parallel.hpp"
#include "polaron/path.hpp"
#include "polaron/random.hpp"
#include "polaron/spectral.hpp"

namespace polaron {

EstimateWithError occupation_fraction(const ChainOutput& out, double K_radius) {
  require(!out.samples.empty(), "occupation_fraction: no samples");
  if (std::abs(K_radius - out.K_radius) <= 1e-15 * K_radius) return batch_means(out.occupation_series());
  require(out.paths.size() == out.samples.size(), "occupation_fraction: other K radii need kept paths");
  std::vector<double> series;
  series.reserve(out.paths.size());
  for (const auto& p : out.paths) {
    const std::size_t n = p.steps();
    double occ = 0.0;
    for (std::size_t i = 0; i <= n; ++i)
      if (p.norm(i) <= K_radius) occ += trapezoid_weight(i, n);
    series.push_back(occ / static_cast<double>(n));
  }
  return batch_means(series);
}

EstimateWithError midpoint_mass(const ChainOutput& out, double K_radius) {
  require(!out.samples.empty(), "midpoint_mass: no samples");
  return batch_means(out.midpoint_indicator(K_radius));
}

namespace {

Histogram histogram(const std::vector<double>& values, std::size_t bins, double lo, double hi) {
  require(bins >= 1 && hi > lo, "histogram: need >= 1 bin and a positive range");
  require(!values.empty(), "histogram: no samples");
  Histogram h;
  const double width = (hi - lo) / static_cast<double>(bins);
  h.edges.resize(bins + 1);
  for (std::size_t b = 0; b <= bins; ++b) h.edges[b] = lo + static_cast<double>(b) * width;
  std::vector<std::vector<double>> indicator(bins, std::vector<double>(values.size(), 0.0));
  for (std::size_t s = 0; s < values.size(); ++s) {
    const double v = values[s];
    if (v < lo || v > hi) {
      ++h.overflow;
      continue;
    }
    const std::size_t b = std::min(bins - 1, static_cast<std::size_t>((v - lo) / width));
    indicator[b][s] = 1.0;
    ++h.in_range;
  }
  h.density.assign(bins, 0.0);
  h.density_se.assign(bins, 0.0);
  if (h.in_range == 0) return h;
  const double scale = static_cast<double>(values.size()) / (static_cast<double>(h.in_range) * width);
  for (std::size_t b = 0; b < bins; ++b) {
    const auto est = batch_means(indicator[b]);
    h.density[b] = est.value * scale;
    h.density_se[b] = est.std_error * scale;
  }
  return h;
}

}  // namespace

Histogram midpoint_radial_histogram(const ChainOutput& out, std::size_t bins, double r_max) {
  std::vector<double> r;
  for (const auto& s : out.samples) r.push_back(s.midpoint_radius);
  return histogram(r, bins, 0.0, r_max);
}

Histogram midpoint_signed_histogram(const ChainOutput& out, std::size_t bins, double half_width) {
  std::vector<double> x;
  for (const auto& s : out.samples) x.push_back(s.midpoint.at(0));
  return histogram(x, bins, -half_width, half_width);
}

namespace {

/// Trapezoid weights of a (possibly non-uniform) grid, integral from grid[0] to grid[k].
std::vector<double> cumulative_trapezoid_weights(const std::vector<double>& grid, std::size_t k) {
  std::vector<double> w(grid.size(), 0.0);
  for (std::size_t j = 0; j < k; ++j) {
    const double h = grid[j + 1] - grid[j];
    w[j] += 0.5 * h;
    w[j + 1] += 0.5 * h;
  }
  return w;
}

void validate_grid(const std::vector<double>& grid) {
  require(!grid.empty() && grid.front() == 0.0, "thermodynamic integration: grid must start at 0");
  for (std::size_t i = 1; i < grid.size(); ++i)
    require(grid[i] > grid[i - 1], "thermodynamic integration: grid must increase strictly");
}

std::vector<EstimateWithError> mean_v_over_grid(const ModelSpec& model, const std::vector<double>& grid,
                                                const ChainConfig& config, std::uint64_t tag, std::size_t threads) {
  std::vector<EstimateWithError> out(grid.size());
  parallel_for(grid.size(), threads, [&](std::size_t k) {
    ModelSpec m = model;
    m.delta = grid[k];
    ChainConfig c = config;
    c.seed = derive_seed(config.seed, {tag, k});
    out[k] = batch_means(mcmc_run(m, c).v_series());
  });
  return out;
}

}  // namespace

double free_endpoint_log_mass(const ModelSpec& model) {
  if (!std::isfinite(model.endpoint_radius)) return 0.0;
  double z2 = 0.0;
  for (double x : model.start) z2 += x * x;
  const double x = model.endpoint_radius * model.endpoint_radius / model.horizon;
  const double k = static_cast<double>(model.d);
  if (z2 == 0.0) return std::log(boost::math::gamma_p(k / 2.0, x / 2.0));
  return std::log(boost::math::cdf(boost::math::non_central_chi_squared(k, z2 / model.horizon), x));
}

FreeEnergyCurve free_energy_rate(const ModelSpec& model, const std::vector<double>& grid, const ChainConfig& config,
                                 const FreeEnergyOptions& options) {
  validate_grid(grid);
  model.validate();
  FreeEnergyCurve curve;
  curve.delta = grid;
  curve.alpha = model.alpha;
  curve.horizon = model.horizon;
  const std::size_t threads = resolve_threads(options.threads);
  curve.mean_v = mean_v_over_grid(model, grid, config, 0, threads);
  if (options.horizon_difference) {
    require(model.steps % 4 == 0, "free_energy_rate: horizon differencing needs N divisible by 4");
    ModelSpec half = model;
    half.horizon = model.horizon / 2.0;
    half.steps = model.steps / 2;
    curve.mean_v_half = mean_v_over_grid(half, grid, config, 1, threads);
  }
  if (model.alpha == 0.0) {
    curve.log_z0 = free_endpoint_log_mass(model);
    ModelSpec half = model;
    half.horizon = model.horizon / 2.0;
    curve.log_z0_half = free_endpoint_log_mass(half);
  }
  const double T = model.horizon;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const auto w = cumulative_trapezoid_weights(grid, k);
    double f = curve.log_z0, var = 0.0, fh = curve.log_z0_half, varh = 0.0;
    for (std::size_t j = 0; j <= k; ++j) {
      f += w[j] * curve.mean_v[j].value;
      var += w[j] * w[j] * curve.mean_v[j].std_error * curve.mean_v[j].std_error;
      if (options.horizon_difference) {
        fh += w[j] * curve.mean_v_half[j].value;
        varh += w[j] * w[j] * curve.mean_v_half[j].std_error * curve.mean_v_half[j].std_error;
      }
    }
    curve.rate_plain.push_back(f / T);
    curve.rate_plain_se.push_back(std::sqrt(var) / T);
    if (options.horizon_difference) {
      curve.rate.push_back((f - fh) / (T / 2.0));
      curve.rate_se.push_back(std::sqrt(var + varh) / (T / 2.0));
    } else {
      curve.rate.push_back(curve.rate_plain.back());
      curve.rate_se.push_back(curve.rate_plain_se.back());
    }
    if (k > 0 && curve.mean_v[k].value - curve.mean_v[k - 1].value <
                     -3.0 * joint_se(curve.mean_v[k], curve.mean_v[k - 1]))
      curve.convexity_flag = true;
  }
  return curve;
}

EstimateWithError log_partition_ratio(const ModelSpec& model, const std::vector<double>& grid,
                                      const ChainConfig& config, std::size_t threads) {
  validate_grid(grid);
  model.validate();
  const auto mean_v = mean_v_over_grid(model, grid, config, 2, resolve_threads(threads));
  const auto w = cumulative_trapezoid_weights(grid, grid.size() - 1);
  EstimateWithError est;
  double var = 0.0;
  est.n_effective = 1e300;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    est.value += w[j] * mean_v[j].value;
    var += w[j] * w[j] * mean_v[j].std_error * mean_v[j].std_error;
    est.n_effective = std::min(est.n_effective, mean_v[j].n_effective);
  }
  est.std_error = std::sqrt(var);
  est.low_ess = est.n_effective < 10.0;
  return est;
}

EstimateWithError reweight_occupation(const ChainOutput& out, double d_delta, double* ess) {
  require(!out.samples.empty(), "reweight: no samples");
  const auto v = out.v_series();
  const auto f = out.occupation_series();
  const double vmax = *std::max_element(v.begin(), v.end());
  double sw = 0.0, sw2 = 0.0, swf = 0.0;
  std::vector<double> w(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    w[i] = d_delta == 0.0 ? 1.0 : std::exp(d_delta * (v[i] - vmax));
    sw += w[i];
    sw2 += w[i] * w[i];
    swf += w[i] * f[i];
  }
  EstimateWithError est;
  est.value = swf / sw;
  double num = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) num += w[i] * w[i] * (f[i] - est.value) * (f[i] - est.value);
  const auto plain = batch_means(f);
  const double inflation = std::sqrt(static_cast<double>(f.size()) / std::max(plain.n_effective, 1.0));
  est.std_error = std::sqrt(num) / sw * inflation;
  const double kish = sw * sw / sw2;
  est.n_effective = std::min(kish, plain.n_effective);
  est.low_ess = est.n_effective < 10.0;
  if (ess) *ess = kish;
  return est;
}

ReweightResult reweight_check(const ModelSpec& model, double delta_prime, const ChainConfig& config,
                              double ess_threshold) {
  require(delta_prime >= model.delta, "reweight_check: delta' must be >= delta");
  ChainConfig base = config;
  base.seed = derive_seed(config.seed, {0});
  const ChainOutput out = mcmc_run(model, base);
  ReweightResult r;
  r.reweighted = reweight_occupation(out, delta_prime - model.delta, &r.ess);
  ModelSpec target = model;
  target.delta = delta_prime;
  ChainConfig direct = config;
  direct.seed = derive_seed(config.seed, {1});
  r.direct = batch_means(mcmc_run(target, direct).occupation_series());
  r.low_ess = r.ess < ess_threshold;
  r.agree = std::abs(r.reweighted.value - r.direct.value) <= 3.0 * joint_se(r.reweighted, r.direct);
  return r;
}

void classify_gamma(GammaCurve& curve) {
  const std::size_t n = curve.t.size();
  require(n >= 2, "gamma trend: need at least 2 grid points");
  std::vector<double> t, lg;
  for (std::size_t i = std::min(n / 2, n - 2); i < n; ++i) {
    if (!(curve.gamma[i] > 0.0)) {
      curve.insufficient_signal = true;
      continue;
    }
    t.push_back(curve.t[i]);
    lg.push_back(std::log(curve.gamma[i]));
  }
  if (t.size() < 2) {
    curve.insufficient_signal = true;
    curve.trend_slope = -std::numeric_limits<double>::infinity();
    curve.bound_signal = false;
    return;
  }
  curve.trend_slope = ls_slope(t, lg);
  curve.bound_signal = curve.trend_slope > -0.02;
}

namespace {

double ball_volume(int d, double radius) { return sphere_area(d) * std::pow(radius, d) / d; }

}  // namespace

GammaCurve gamma_ratio_spectral(const ExternalPotential& potential, double delta, int d, double psi_radius,
                                const std::vector<double>& t_grid, const GammaSpectralOptions& options) {
  require(psi_radius > 0.0, "gamma: psi radius must be positive");
  RadialGrid grid{d, options.r_max, static_cast<std::size_t>(std::ceil(options.r_max * options.cells_per_unit))};
  grid.validate();
  std::vector<double> psi(grid.n, 0.0);
  const double h = grid.h();
  for (std::size_t i = 0; i < grid.n; ++i) {
    const double a = i * h, b = a + h;
    if (b <= psi_radius) psi[i] = 1.0;
    else if (a < psi_radius) psi[i] = (std::pow(psi_radius, d) - std::pow(a, d)) / (std::pow(b, d) - std::pow(a, d));
  }
  const double shift = lowest_eigenvalue(RadialOperator(potential, delta, grid));
  const auto evolved = semigroup_apply(potential, delta, grid, psi, t_grid, shift);
  GammaCurve curve;
  curve.t = t_grid;
  curve.psi_norm = std::sqrt(radial_inner(grid, psi, psi));
  for (const auto& phi : evolved) {
    const double num = radial_inner(grid, psi, phi);
    const double den = std::sqrt(radial_inner(grid, phi, phi));
    curve.gamma.push_back(den > 0.0 ? num / den : 0.0);
    curve.gamma_se.push_back(0.0);
  }
  classify_gamma(curve);
  return curve;
}

EstimateWithError semigroup_overlap_mc(const ExternalPotential& potential, double delta, int d, double psi_radius,
                                       double t, const GammaMcOptions& options) {
  require(t > 0.0, "gamma mc: t must be positive");
  require(psi_radius > 0.0 && options.samples >= 2, "gamma mc: bad psi radius or sample count");
  const std::size_t steps = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(t / options.dt)));
  const double dt = t / static_cast<double>(steps);
  const std::size_t chunks = 64;
  std::vector<double> values(options.samples);
  parallel_for(chunks, resolve_threads(options.threads), [&](std::size_t chunk) {
    Rng rng(derive_seed(options.seed, {chunk}));
    NormalSource normal(rng);
    std::vector<double> pts((steps + 1) * d);
    const auto uniform_ball = [&](double* x) {
      for (;;) {
        double r2 = 0.0;
        for (int c = 0; c < d; ++c) {
          x[c] = psi_radius * (2.0 * uniform01(rng) - 1.0);
          r2 += x[c] * x[c];
        }
        if (r2 <= psi_radius * psi_radius) return;
      }
    };
    for (std::size_t s = chunk; s < options.samples; s += chunks) {
      uniform_ball(pts.data());
      uniform_ball(pts.data() + steps * d);
      double z2 = 0.0;
      for (int c = 0; c < d; ++c) z2 += (pts[steps * d + c] - pts[c]) * (pts[steps * d + c] - pts[c]);
      fill_bridge(pts.data(), d, steps, dt, normal);
      double integral = 0.0;
      for (std::size_t i = 0; i <= steps; ++i)
        integral += trapezoid_weight(i, steps) *
                    potential.eval(std::span<const double>(pts.data() + i * d, static_cast<std::size_t>(d)));
      const double kernel = std::pow(2.0 * M_PI * t, -0.5 * d) * std::exp(-z2 / (2.0 * t));
      values[s] = kernel * std::exp(delta * integral * dt);
    }
  });
  EstimateWithError est = iid_mean(values);
  const double vol = ball_volume(d, psi_radius);
  est.value *= vol * vol;
  est.std_error *= vol * vol;
  return est;
}

GammaCurve gamma_ratio_mc(const ExternalPotential& potential, double delta, int d, double psi_radius,
                          const std::vector<double>& t_grid, const GammaMcOptions& options) {
  GammaCurve curve;
  curve.t = t_grid;
  curve.psi_norm = std::sqrt(ball_volume(d, psi_radius));
  for (std::size_t k = 0; k < t_grid.size(); ++k) {
    GammaMcOptions o1 = options, o2 = options;
    o1.seed = derive_seed(options.seed, {k, 0});
    o2.seed = derive_seed(options.seed, {k, 1});
    const auto num = semigroup_overlap_mc(potential, delta, d, psi_radius, t_grid[k], o1);
    const auto den = semigroup_overlap_mc(potential, delta, d, psi_radius, 2.0 * t_grid[k], o2);
    if (den.value <= 2.0 * den.std_error || num.value <= 0.0) {
      curve.insufficient_signal = true;
      curve.gamma.push_back(0.0);
      curve.gamma_se.push_back(0.0);
      continue;
    }
    const double g = num.value / std::sqrt(den.value);
    const double rel = std::hypot(num.std_error / num.value, 0.5 * den.std_error / den.value);
    curve.gamma.push_back(g);
    curve.gamma_se.push_back(g * rel);
  }
  if (t_grid.size() >= 2) {
    const bool insufficient = curve.insufficient_signal;
    classify_gamma(curve);
    curve.insufficient_signal = curve.insufficient_signal || insufficient;
  }
  return curve;
}

}  // namespace polaron
