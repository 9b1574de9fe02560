#include "polaron/scan.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <map>
#include <set>
#include <sstream>

#include "polaron/error.hpp"
#include "polaron/estimators.hpp"
#include "polaron/parallel.hpp"
#include "polaron/random.hpp"
#include "polaron/spectral.hpp"
#include "polaron/version.hpp"

namespace polaron {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  require(j.is_object(), where + ": expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : j.items())
    if (!ok.count(key)) throw ValidationError(where + ": unknown key '" + key + "'");
}

double number(const json& j, const std::string& where) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "infinity") return kInf;
    throw ValidationError(where + ": expected a number or \"inf\"");
  }
  require(j.is_number(), where + ": expected a number");
  return j.get<double>();
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    if constexpr (std::is_same_v<T, double>) {
      out = number(j.at(key), where + "." + key);
    } else if constexpr (std::is_same_v<T, std::vector<double>>) {
      require(j.at(key).is_array(), where + "." + key + ": expected an array");
      out.clear();
      for (const auto& v : j.at(key)) out.push_back(number(v, where + "." + key));
    } else {
      out = j.at(key).get<T>();
    }
  } catch (const json::exception& e) {
    throw ValidationError(where + "." + key + ": " + e.what());
  }
}

json num(double v) { return std::isfinite(v) ? json(v) : json("inf"); }

}  // namespace

PairKernel KernelConfig::build(int d) const {
  if (family == "gaussian-omega1") return PairKernel::gaussian_omega1(d, width);
  if (family == "nelson3d") {
    require(d == 3, "kernel: nelson3d needs d = 3");
    return PairKernel::nelson3d(width, t_min);
  }
  if (family == "custom-grid") return PairKernel::custom_grid(d, grid_r_max, grid_t_max, grid_n_r, grid_n_t, grid_values);
  throw ValidationError("kernel: unknown family '" + family + "'");
}

std::shared_ptr<const LagKernel> KernelConfig::lag_kernel(int d, double dt, std::size_t steps) const {
  std::size_t max_lag = steps;
  if (std::isfinite(t_max)) max_lag = std::min(steps, static_cast<std::size_t>(std::floor(t_max / dt + 1e-9)));
  return std::make_shared<LagKernel>(build(d), dt, max_lag, r_max, n_r);
}

ExternalPotential PotentialConfig::build() const {
  if (family == "well") return ExternalPotential::well(radius);
  if (family == "custom") return ExternalPotential::custom(r, v);
  throw ValidationError("potential: unknown family '" + family + "'");
}

void RunConfig::validate() const {
  require(d >= 1 && d <= 3, "config: d must be 1, 2 or 3");
  require(dt > 0.0 && std::isfinite(dt), "config: dt must be positive");
  require(K_radius > 0.0, "config: K_radius must be positive");
  require(std::isnan(endpoint_radius) || endpoint_radius > 0.0, "config: endpoint_radius must be positive");
  require(!experiment.delta.empty() && !experiment.alpha.empty() && !experiment.horizon.empty(),
          "config: scan grids must be non-empty");
  require(experiment.delta_units == "absolute" || experiment.delta_units == "threshold",
          "config: delta_units must be 'absolute' or 'threshold'");
  require(experiment.free_energy_points >= 2, "config: free_energy_points must be >= 2");
  for (double a : experiment.alpha) require(a >= 0.0, "config: alpha values must be >= 0");
  for (double x : experiment.delta) require(x >= 0.0, "config: delta values must be >= 0");
  for (double T : experiment.horizon) {
    const double n = T / dt;
    require(T > 0.0 && std::abs(n - std::round(n)) <= 1e-9 * n, "config: every horizon must be a multiple of dt");
    require(static_cast<long>(std::round(n)) % 2 == 0, "config: T / dt must be even");
  }
  potential.build();
  kernel.build(d);
  chain.validate();
}

std::vector<double> RunConfig::resolved_deltas() const {
  if (experiment.delta_units == "absolute") return experiment.delta;
  const double star = well_threshold(potential.build(), 1.0, 3);
  std::vector<double> out;
  for (double x : experiment.delta) out.push_back(x * star);
  return out;
}

ModelSpec RunConfig::model(double delta, double alpha, double horizon) const {
  ModelSpec m;
  m.d = d;
  m.delta = delta;
  m.alpha = alpha;
  m.horizon = horizon;
  m.steps = static_cast<std::size_t>(std::llround(horizon / dt));
  m.potential = potential.build();
  m.K_radius = K_radius;
  m.endpoint_radius = std::isnan(endpoint_radius) ? K_radius : endpoint_radius;
  m.start = start;
  if (alpha > 0.0) m.pair = kernel.lag_kernel(d, m.dt(), m.steps);
  m.validate();
  return m;
}

RunConfig run_config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  RunConfig c;
  check_keys(j, "config", {"seed", "threads", "out", "model", "kernel", "chain", "experiment"});
  read(j, "seed", c.seed, "config");
  read(j, "threads", c.threads, "config");
  read(j, "out", c.out_dir, "config");
  if (j.contains("model")) {
    const auto& m = j["model"];
    check_keys(m, "model", {"d", "dt", "potential", "endpoint_radius", "K_radius", "start"});
    read(m, "d", c.d, "model");
    read(m, "dt", c.dt, "model");
    read(m, "endpoint_radius", c.endpoint_radius, "model");
    read(m, "K_radius", c.K_radius, "model");
    read(m, "start", c.start, "model");
    if (m.contains("potential")) {
      const auto& p = m["potential"];
      check_keys(p, "model.potential", {"family", "radius", "r", "v"});
      read(p, "family", c.potential.family, "model.potential");
      read(p, "radius", c.potential.radius, "model.potential");
      read(p, "r", c.potential.r, "model.potential");
      read(p, "v", c.potential.v, "model.potential");
    }
  }
  if (j.contains("kernel")) {
    const auto& k = j["kernel"];
    check_keys(k, "kernel", {"family", "width", "t_min", "r_max", "n_r", "t_max", "grid"});
    read(k, "family", c.kernel.family, "kernel");
    read(k, "width", c.kernel.width, "kernel");
    read(k, "t_min", c.kernel.t_min, "kernel");
    read(k, "r_max", c.kernel.r_max, "kernel");
    read(k, "n_r", c.kernel.n_r, "kernel");
    read(k, "t_max", c.kernel.t_max, "kernel");
    if (k.contains("grid")) {
      const auto& g = k["grid"];
      check_keys(g, "kernel.grid", {"r_max", "t_max", "n_r", "n_t", "values"});
      read(g, "r_max", c.kernel.grid_r_max, "kernel.grid");
      read(g, "t_max", c.kernel.grid_t_max, "kernel.grid");
      read(g, "n_r", c.kernel.grid_n_r, "kernel.grid");
      read(g, "n_t", c.kernel.grid_n_t, "kernel.grid");
      read(g, "values", c.kernel.grid_values, "kernel.grid");
    }
  }
  if (j.contains("chain")) {
    const auto& ch = j["chain"];
    check_keys(ch, "chain", {"sweeps", "burn_in", "thin", "mix", "min_block", "max_block", "calibration_sweeps",
                             "recompute_every"});
    read(ch, "sweeps", c.chain.sweeps, "chain");
    read(ch, "burn_in", c.chain.burn_in, "chain");
    read(ch, "thin", c.chain.thin, "chain");
    read(ch, "min_block", c.chain.min_block, "chain");
    read(ch, "max_block", c.chain.max_block, "chain");
    read(ch, "calibration_sweeps", c.chain.calibration_sweeps, "chain");
    read(ch, "recompute_every", c.chain.recompute_every, "chain");
    if (ch.contains("mix")) {
      const auto& mx = ch["mix"];
      check_keys(mx, "chain.mix", {"bridge", "endpoint", "reflect"});
      read(mx, "bridge", c.chain.mix.bridge, "chain.mix");
      read(mx, "endpoint", c.chain.mix.endpoint, "chain.mix");
      read(mx, "reflect", c.chain.mix.reflect, "chain.mix");
    }
  }
  if (j.contains("experiment")) {
    const auto& e = j["experiment"];
    check_keys(e, "experiment", {"delta", "delta_units", "alpha", "horizon", "free_energy", "free_energy_points",
                                 "override_assumptions", "assumptions"});
    read(e, "delta", c.experiment.delta, "experiment");
    read(e, "delta_units", c.experiment.delta_units, "experiment");
    read(e, "alpha", c.experiment.alpha, "experiment");
    read(e, "horizon", c.experiment.horizon, "experiment");
    read(e, "free_energy", c.experiment.free_energy, "experiment");
    read(e, "free_energy_points", c.experiment.free_energy_points, "experiment");
    read(e, "override_assumptions", c.experiment.override_assumptions, "experiment");
    if (e.contains("assumptions")) {
      const auto& a = e["assumptions"];
      check_keys(a, "experiment.assumptions", {"xi", "R", "l_star", "r_max", "t_max", "n_r", "n_t"});
      auto& q = c.experiment.assumptions;
      read(a, "xi", q.xi, "experiment.assumptions");
      read(a, "R", q.R, "experiment.assumptions");
      read(a, "l_star", q.l_star, "experiment.assumptions");
      read(a, "r_max", q.r_max, "experiment.assumptions");
      read(a, "t_max", q.t_max, "experiment.assumptions");
      read(a, "n_r", q.n_r, "experiment.assumptions");
      read(a, "n_t", q.n_t, "experiment.assumptions");
    }
  }
  c.validate();
  return c;
}

std::string run_config_to_json(const RunConfig& c) {
  json pot = {{"family", c.potential.family}};
  if (c.potential.family == "well") pot["radius"] = c.potential.radius;
  else pot["r"] = c.potential.r, pot["v"] = c.potential.v;
  json model = {{"d", c.d}, {"dt", c.dt}, {"potential", pot}, {"K_radius", c.K_radius}};
  model["endpoint_radius"] = std::isnan(c.endpoint_radius) ? num(c.K_radius) : num(c.endpoint_radius);
  if (!c.start.empty()) model["start"] = c.start;
  json kernel = {{"family", c.kernel.family}, {"width", c.kernel.width}, {"t_min", c.kernel.t_min},
                 {"r_max", c.kernel.r_max}, {"n_r", c.kernel.n_r}, {"t_max", num(c.kernel.t_max)}};
  if (c.kernel.family == "custom-grid")
    kernel["grid"] = {{"r_max", c.kernel.grid_r_max}, {"t_max", c.kernel.grid_t_max}, {"n_r", c.kernel.grid_n_r},
                      {"n_t", c.kernel.grid_n_t}, {"values", c.kernel.grid_values}};
  json chain = {{"sweeps", c.chain.sweeps},
                {"burn_in", c.chain.resolved_burn_in()},
                {"thin", c.chain.thin},
                {"mix", {{"bridge", c.chain.mix.bridge}, {"endpoint", c.chain.mix.endpoint},
                         {"reflect", c.chain.mix.reflect}}},
                {"min_block", c.chain.min_block},
                {"max_block", c.chain.max_block},
                {"calibration_sweeps", c.chain.calibration_sweeps},
                {"recompute_every", c.chain.recompute_every}};
  const auto& q = c.experiment.assumptions;
  json exp = {{"delta", c.experiment.delta},
              {"delta_units", c.experiment.delta_units},
              {"alpha", c.experiment.alpha},
              {"horizon", c.experiment.horizon},
              {"free_energy", c.experiment.free_energy},
              {"free_energy_points", c.experiment.free_energy_points},
              {"override_assumptions", c.experiment.override_assumptions},
              {"assumptions", {{"xi", q.xi}, {"R", q.R}, {"l_star", q.l_star}, {"r_max", q.r_max},
                               {"t_max", q.t_max}, {"n_r", q.n_r}, {"n_t", q.n_t}}}};
  json j = {{"seed", c.seed}, {"threads", c.threads}, {"out", c.out_dir}, {"model", model},
            {"kernel", kernel}, {"chain", chain}, {"experiment", exp}};
  return j.dump(2);
}

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx, data.data(), data.size()) != 1 || EVP_DigestFinal_ex(ctx, md, &len) != 1) {
    EVP_MD_CTX_free(ctx);
    throw Error(ErrorKind::internal, "sha256 failed");
  }
  EVP_MD_CTX_free(ctx);
  std::string hex;
  char b[3];
  for (unsigned i = 0; i < len; ++i) {
    std::snprintf(b, sizeof b, "%02x", md[i]);
    hex += b;
  }
  return hex;
}

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return sha256_hex(ss.str());
}

namespace {

std::string g(double v, const char* f = "%.10g") {
  if (std::isnan(v)) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  require(static_cast<bool>(out), "cannot write " + p.string());
  out << text;
}

ScanRow run_cell(const RunConfig& c, const std::vector<double>& deltas, std::size_t i, std::size_t j, std::size_t k,
                 const fs::path& cell_dir) {
  ScanRow row;
  row.i_delta = i;
  row.i_alpha = j;
  row.i_horizon = k;
  row.delta = deltas[i];
  row.alpha = c.experiment.alpha[j];
  row.horizon = c.experiment.horizon[k];
  row.seed = derive_seed(c.seed, {i, j, k});
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const ModelSpec model = c.model(row.delta, row.alpha, row.horizon);
    row.steps = model.steps;
    ChainConfig chain = c.chain;
    chain.seed = row.seed;
    const ChainOutput out = mcmc_run(model, chain);
    row.occupation = occupation_fraction(out, model.K_radius);
    row.midpoint = midpoint_mass(out, model.K_radius);
    row.accept_bridge = out.bridge.rate();
    row.accept_endpoint = out.endpoint.rate();
    row.accept_reflect = out.reflect.rate();
    row.drift = out.max_recompute_drift;
    std::ostringstream csv;
    csv << "# schema=" << kCsvSchema << "\n";
    write_functionals_csv(csv, out);
    write_text(cell_dir / ("cell_" + std::to_string(i) + "_" + std::to_string(j) + "_" + std::to_string(k) + ".csv"),
               csv.str());
    if (out.coverage_misses > 0) {
      row.ok = false;
      row.message = "kernel table coverage missed " + std::to_string(out.coverage_misses) + " pair distances";
    } else if (row.drift > 1e-6) {
      row.ok = false;
      row.message = "running action drifted from recomputation";
    } else if (row.midpoint.low_ess || row.occupation.low_ess) {
      row.ok = false;
      row.message = "effective sample size below 10";
    }
    if (row.ok && c.experiment.free_energy) {
      std::vector<double> grid(c.experiment.free_energy_points);
      for (std::size_t p = 0; p < grid.size(); ++p)
        grid[p] = row.delta * static_cast<double>(p) / static_cast<double>(grid.size() - 1);
      if (row.delta == 0.0) {
        row.free_energy = 0.0;
        row.free_energy_se = 0.0;
      } else {
        ChainConfig fe = chain;
        fe.seed = derive_seed(row.seed, {0xFE});
        const auto curve = free_energy_rate(model, grid, fe);
        row.free_energy = curve.rate.back();
        row.free_energy_se = curve.rate_se.back();
      }
    }
  } catch (const Error& e) {
    row.ok = false;
    row.message = e.what();
  }
  row.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return row;
}

}  // namespace

std::string scan_csv(const std::vector<ScanRow>& rows) {
  std::string s = "# schema=" + std::to_string(kCsvSchema) + "\n";
  s += "i_delta,i_alpha,i_horizon,delta,alpha,horizon,steps,seed,status,occupation,occupation_se,midpoint_mass,"
       "midpoint_mass_se,free_energy_rate,free_energy_rate_se,accept_bridge,accept_endpoint,accept_reflect,"
       "n_effective\n";
  for (const auto& r : rows) {
    const bool ok = r.ok;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    s += std::to_string(r.i_delta) + "," + std::to_string(r.i_alpha) + "," + std::to_string(r.i_horizon) + "," +
         g(r.delta) + "," + g(r.alpha) + "," + g(r.horizon) + "," + std::to_string(r.steps) + "," +
         std::to_string(r.seed) + "," + (ok ? "ok" : "failed") + "," + g(ok ? r.occupation.value : nan) + "," +
         g(ok ? r.occupation.std_error : nan) + "," + g(ok ? r.midpoint.value : nan) + "," +
         g(ok ? r.midpoint.std_error : nan) + "," + g(ok ? r.free_energy : nan) + "," +
         g(ok ? r.free_energy_se : nan) + "," + g(r.accept_bridge, "%.6f") + "," + g(r.accept_endpoint, "%.6f") +
         "," + g(r.accept_reflect, "%.6f") + "," + g(ok ? r.midpoint.n_effective : nan, "%.1f") + "\n";
  }
  return s;
}

std::vector<ScanRow> read_scan_csv(const std::string& path) {
  fs::path p(path);
  if (fs::is_directory(p)) p /= "scan.csv";
  std::ifstream in(p);
  require(static_cast<bool>(in), "report: cannot read " + p.string());
  std::string line;
  std::vector<std::string> header;
  std::vector<ScanRow> rows;
  const auto split = [](const std::string& l) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(l);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!l.empty() && l.back() == ',') out.emplace_back();
    return out;
  };
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      require(line == "# schema=" + std::to_string(kCsvSchema), "report: unsupported schema line '" + line + "'");
      continue;
    }
    if (header.empty()) {
      header = split(line);
      continue;
    }
    const auto cells = split(line);
    require(cells.size() == header.size(), "report: ragged row in " + p.string());
    std::map<std::string, std::string> m;
    for (std::size_t c = 0; c < cells.size(); ++c) m[header[c]] = cells[c];
    const auto d = [&](const char* k) {
      const auto& v = m[k];
      return v.empty() ? std::numeric_limits<double>::quiet_NaN() : std::stod(v);
    };
    ScanRow r;
    r.i_delta = std::stoul(m["i_delta"]);
    r.i_alpha = std::stoul(m["i_alpha"]);
    r.i_horizon = std::stoul(m["i_horizon"]);
    r.delta = d("delta");
    r.alpha = d("alpha");
    r.horizon = d("horizon");
    r.steps = std::stoul(m["steps"]);
    r.seed = std::stoull(m["seed"]);
    r.ok = m["status"] == "ok";
    r.occupation = {d("occupation"), d("occupation_se"), d("n_effective"), false};
    r.midpoint = {d("midpoint_mass"), d("midpoint_mass_se"), d("n_effective"), false};
    r.free_energy = d("free_energy_rate");
    r.free_energy_se = d("free_energy_rate_se");
    r.accept_bridge = d("accept_bridge");
    r.accept_endpoint = d("accept_endpoint");
    r.accept_reflect = d("accept_reflect");
    rows.push_back(r);
  }
  return rows;
}

std::string format_report(const std::vector<ScanRow>& rows) {
  std::string out;
  char buf[512];
  std::snprintf(buf, sizeof buf, "%10s %8s %8s %8s  %-21s %-21s %-21s %7s\n", "delta", "alpha", "T", "status",
                "occupation", "midpoint_mass", "free_energy_rate", "acc_br");
  out += buf;
  const auto pm = [](double v, double e) -> std::string {
    if (std::isnan(v)) return "-";
    char b[64];
    std::snprintf(b, sizeof b, "%.4f +- %.4f", v, std::isnan(e) ? 0.0 : e);
    return b;
  };
  for (const auto& r : rows) {
    if (!r.ok) {
      std::snprintf(buf, sizeof buf, "%10.4f %8.3f %8.3f %8s  %-21s %-21s %-21s %7s\n", r.delta, r.alpha, r.horizon,
                    "FAILED", "-", "-", "-", "-");
    } else {
      std::snprintf(buf, sizeof buf, "%10.4f %8.3f %8.3f %8s  %-21s %-21s %-21s %7.3f\n", r.delta, r.alpha,
                    r.horizon, "ok", pm(r.occupation.value, r.occupation.std_error).c_str(),
                    pm(r.midpoint.value, r.midpoint.std_error).c_str(), pm(r.free_energy, r.free_energy_se).c_str(),
                    r.accept_bridge);
    }
    out += buf;
  }
  return out;
}

namespace {

struct Series {
  std::string label;
  std::vector<double> x, y, e;
};

std::string svg_plot(const std::vector<Series>& series, const std::string& xlabel, const std::string& ylabel) {
  double x0 = kInf, x1 = -kInf, y0 = kInf, y1 = -kInf;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i] - s.e[i]);
      y1 = std::max(y1, s.y[i] + s.e[i]);
    }
  if (!(x1 > x0)) x0 -= 0.5, x1 += 0.5;
  if (!(y1 > y0)) y0 -= 0.5, y1 += 0.5;
  const double W = 640, H = 420, L = 70, R = 160, T = 20, B = 50;
  const auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  const auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };
  static const char* colours[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
    << "\" stroke=\"black\"/>\n";
  s << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double xv = x0 + (x1 - x0) * t / 4, yv = y0 + (y1 - y0) * t / 4;
    s << "<text x=\"" << px(xv) << "\" y=\"" << H - B + 18 << "\" font-size=\"11\" text-anchor=\"middle\">" << g(xv, "%.3g")
      << "</text>\n";
    s << "<text x=\"" << L - 6 << "\" y=\"" << py(yv) + 4 << "\" font-size=\"11\" text-anchor=\"end\">" << g(yv, "%.3g")
      << "</text>\n";
  }
  s << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 10 << "\" font-size=\"13\" text-anchor=\"middle\">"
    << xlabel << "</text>\n";
  s << "<text x=\"16\" y=\"" << (T + H - B) / 2 << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
    << (T + H - B) / 2 << ")\">" << ylabel << "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& sr = series[k];
    const char* col = colours[k % 6];
    s << "<polyline fill=\"none\" stroke=\"" << col << "\" points=\"";
    for (std::size_t i = 0; i < sr.x.size(); ++i) s << px(sr.x[i]) << "," << py(sr.y[i]) << " ";
    s << "\"/>\n";
    for (std::size_t i = 0; i < sr.x.size(); ++i) {
      s << "<line x1=\"" << px(sr.x[i]) << "\" y1=\"" << py(sr.y[i] - sr.e[i]) << "\" x2=\"" << px(sr.x[i])
        << "\" y2=\"" << py(sr.y[i] + sr.e[i]) << "\" stroke=\"" << col << "\"/>\n";
      s << "<circle cx=\"" << px(sr.x[i]) << "\" cy=\"" << py(sr.y[i]) << "\" r=\"3\" fill=\"" << col << "\"/>\n";
    }
    s << "<text x=\"" << W - R + 10 << "\" y=\"" << T + 16 * (k + 1) << "\" font-size=\"11\" fill=\"" << col << "\">"
      << sr.label << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

}  // namespace

std::vector<std::string> write_report_plots(const std::vector<ScanRow>& rows, const std::string& dir) {
  fs::create_directories(dir);
  std::vector<std::string> files;
  std::map<std::pair<std::size_t, std::size_t>, Series> by_alpha;  // key (i_delta, i_horizon)
  std::map<std::pair<std::size_t, std::size_t>, Series> by_delta;  // key (i_alpha, i_horizon)
  auto sorted = rows;
  std::sort(sorted.begin(), sorted.end(), [](const ScanRow& a, const ScanRow& b) {
    return std::tie(a.i_delta, a.i_alpha, a.i_horizon) < std::tie(b.i_delta, b.i_alpha, b.i_horizon);
  });
  for (const auto& r : sorted) {
    if (!r.ok) continue;
    auto& a = by_alpha[{r.i_delta, r.i_horizon}];
    a.label = "delta=" + g(r.delta, "%.3g") + " T=" + g(r.horizon, "%.3g");
    a.x.push_back(r.alpha);
    a.y.push_back(r.midpoint.value);
    a.e.push_back(r.midpoint.std_error);
    if (!std::isnan(r.free_energy)) {
      auto& f = by_delta[{r.i_alpha, r.i_horizon}];
      f.label = "alpha=" + g(r.alpha, "%.3g") + " T=" + g(r.horizon, "%.3g");
      f.x.push_back(r.delta);
      f.y.push_back(r.free_energy);
      f.e.push_back(std::isnan(r.free_energy_se) ? 0.0 : r.free_energy_se);
    }
  }
  const auto emit = [&](const std::map<std::pair<std::size_t, std::size_t>, Series>& m, const char* name,
                        const char* xl, const char* yl) {
    if (m.empty()) return;
    std::vector<Series> s;
    for (const auto& [_, v] : m) s.push_back(v);
    const auto path = (fs::path(dir) / name).string();
    write_text(path, svg_plot(s, xl, yl));
    files.push_back(path);
  };
  emit(by_alpha, "midpoint_mass_vs_alpha.svg", "alpha", "midpoint mass");
  emit(by_delta, "free_energy_vs_delta.svg", "delta", "free energy rate");
  return files;
}

ScanResult run_scan(const RunConfig& config) {
  config.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path out(config.out_dir);
  const fs::path cells = out / "cells";
  fs::create_directories(cells);

  json assumptions = nullptr;
  ScanResult result;
  const bool any_pair = std::any_of(config.experiment.alpha.begin(), config.experiment.alpha.end(),
                                    [](double a) { return a > 0.0; });
  if (any_pair) {
    AssumptionQuery q = config.experiment.assumptions;
    q.seed = derive_seed(config.seed, {0xA55});
    const auto rep = validate_assumptions(config.kernel.build(config.d), q);
    result.assumptions_ok = rep.a2_monotone_ok && rep.b_ok;
    assumptions = {{"a2_monotone_ok", rep.a2_monotone_ok}, {"a2_worst_violation", rep.a2_worst_violation},
                   {"time_decay_C_I", rep.time_decay_C_I},  {"b_ok", rep.b_ok},
                   {"b_worst_violation", rep.b_worst_violation}, {"xi", rep.xi}, {"R", rep.R},
                   {"l_star", rep.l_star}, {"overridden", config.experiment.override_assumptions}};
    if (!result.assumptions_ok && !config.experiment.override_assumptions)
      throw ValidationError("scan: kernel fails the structural assumption checks (set override_assumptions to run)");
  }

  const auto deltas = config.resolved_deltas();
  const std::size_t nd = deltas.size(), na = config.experiment.alpha.size(), nt = config.experiment.horizon.size();
  std::vector<ScanRow> rows(nd * na * nt);
  parallel_for(rows.size(), resolve_threads(config.threads), [&](std::size_t idx) {
    const std::size_t i = idx / (na * nt), j = (idx / nt) % na, k = idx % nt;
    rows[idx] = run_cell(config, deltas, i, j, k, cells);
  });

  const auto csv_path = out / "scan.csv";
  write_text(csv_path, scan_csv(rows));
  write_text(out / "config.json", run_config_to_json(config));

  json cell_list = json::array();
  for (const auto& r : rows) {
    if (!r.ok) ++result.failed;
    cell_list.push_back({{"i_delta", r.i_delta}, {"i_alpha", r.i_alpha}, {"i_horizon", r.i_horizon},
                         {"delta", r.delta}, {"alpha", r.alpha}, {"horizon", r.horizon}, {"seed", r.seed},
                         {"status", r.ok ? "ok" : "failed"}, {"message", r.message},
                         {"max_recompute_drift", r.drift}, {"wall_seconds", r.wall_seconds}});
  }
  json files = json::array();
  std::vector<fs::path> paths;
  for (const auto& e : fs::recursive_directory_iterator(out))
    if (e.is_regular_file() && e.path().filename() != "manifest.json") paths.push_back(e.path());
  std::sort(paths.begin(), paths.end());
  for (const auto& p : paths)
    files.push_back({{"path", fs::relative(p, out).generic_string()}, {"sha256", sha256_file(p.string())},
                     {"bytes", fs::file_size(p)}});
  const std::string config_text = run_config_to_json(config);
  json manifest = {{"schema", kCsvSchema},
                   {"run_id", sha256_hex(config_text).substr(0, 12)},
                   {"version", version_string()},
                   {"master_seed", config.seed},
                   {"seed_scheme", "derive_seed(master_seed, {i_delta, i_alpha, i_horizon})"},
                   {"threads", resolve_threads(config.threads)},
                   {"config", json::parse(config_text)},
                   {"resolved_delta", deltas},
                   {"assumptions", assumptions},
                   {"cells", cell_list},
                   {"failed_cells", result.failed},
                   {"files", files},
                   {"wall_seconds",
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()}};
  write_text(out / "manifest.json", manifest.dump(2) + "\n");

  result.rows = std::move(rows);
  result.csv_path = csv_path.string();
  result.manifest_path = (out / "manifest.json").string();
  return result;
}

}  // namespace polaron
