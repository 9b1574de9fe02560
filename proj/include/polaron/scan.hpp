#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "polaron/action.hpp"
#include "polaron/pair_kernel.hpp"
#include "polaron/sampler.hpp"
#include "polaron/stats.hpp"

namespace polaron {

inline constexpr int kCsvSchema = 1;

struct KernelConfig {
  std::string family = "gaussian-omega1";
  double width = 1.0;
  double t_min = 1e-3;
  /// Radial range and resolution of the per-lag tables (tabulated families only).
  double r_max = 50.0;
  std::size_t n_r = 2048;
  /// Lags beyond t_max carry zero weight.
  double t_max = std::numeric_limits<double>::infinity();
  /// custom-grid table.
  double grid_r_max = 0.0, grid_t_max = 0.0;
  std::size_t grid_n_r = 0, grid_n_t = 0;
  std::vector<double> grid_values;

  PairKernel build(int d) const;
  std::shared_ptr<const LagKernel> lag_kernel(int d, double dt, std::size_t steps) const;
};

struct PotentialConfig {
  std::string family = "well";
  double radius = 1.0;
  std::vector<double> r, v;

  ExternalPotential build() const;
};

struct ExperimentConfig {
  std::vector<double> delta{0.0};
  /// "absolute" or "threshold" (multiples of the d = 3 binding threshold of the potential).
  std::string delta_units = "absolute";
  std::vector<double> alpha{0.0};
  std::vector<double> horizon{1.0};
  bool free_energy = false;
  std::size_t free_energy_points = 9;
  bool override_assumptions = false;
  AssumptionQuery assumptions;
};

struct RunConfig {
  int d = 3;
  double dt = 0.125;
  PotentialConfig potential;
  KernelConfig kernel;
  /// Endpoint ball radius; NaN means "same as K_radius".
  double endpoint_radius = std::numeric_limits<double>::quiet_NaN();
  double K_radius = 1.0;
  std::vector<double> start;
  ChainConfig chain;
  ExperimentConfig experiment;
  std::string out_dir = "scan_out";
  std::uint64_t seed = 1;
  std::size_t threads = 0;

  void validate() const;
  /// Model for one grid cell (no pair kernel attached when alpha = 0).
  ModelSpec model(double delta, double alpha, double horizon) const;
  std::vector<double> resolved_deltas() const;
};

/// Strict JSON parsing: unknown keys are validation errors.
RunConfig run_config_from_json(const std::string& text);
std::string run_config_to_json(const RunConfig& config);

struct ScanRow {
  std::size_t i_delta = 0, i_alpha = 0, i_horizon = 0;
  double delta = 0.0, alpha = 0.0, horizon = 0.0;
  std::size_t steps = 0;
  std::uint64_t seed = 0;
  bool ok = true;
  std::string message;
  EstimateWithError occupation, midpoint;
  double free_energy = std::numeric_limits<double>::quiet_NaN();
  double free_energy_se = std::numeric_limits<double>::quiet_NaN();
  double accept_bridge = 0.0, accept_endpoint = 0.0, accept_reflect = 0.0;
  double drift = 0.0;
  double wall_seconds = 0.0;
};

struct ScanResult {
  std::vector<ScanRow> rows;
  std::string csv_path;
  std::string manifest_path;
  std::size_t failed = 0;
  bool assumptions_ok = true;
};

/// Runs every (delta, alpha, T) cell; cell seeds are derive_seed(seed, {i_delta, i_alpha, i_horizon}).
/// Writes cells/cell_<i>_<j>_<k>.csv, scan.csv and manifest.json under out_dir.
ScanResult run_scan(const RunConfig& config);

std::string scan_csv(const std::vector<ScanRow>& rows);
/// Reads scan.csv (or a directory containing it).
std::vector<ScanRow> read_scan_csv(const std::string& path);

/// Fixed-width table; failed rows read FAILED, missing values read "-".
std::string format_report(const std::vector<ScanRow>& rows);
/// midpoint_mass vs alpha and free-energy rate vs delta; returns the files written.
std::vector<std::string> write_report_plots(const std::vector<ScanRow>& rows, const std::string& dir);

std::string sha256_file(const std::string& path);
std::string sha256_hex(const std::string& data);

}  // namespace polaron
