#include "polaron/inequalities.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/non_central_chi_squared.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <cstdio>
#include <limits>

#include "polaron/error.hpp"
#include "polaron/parallel.hpp"
#include "polaron/random.hpp"
#include "polaron/stats.hpp"

namespace polaron {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::VectorXd normal_vector(int n, NormalSource& normal) {
  Eigen::VectorXd z(n);
  for (int i = 0; i < n; ++i) z[i] = normal();
  return z;
}

Eigen::MatrixXd cholesky(const Eigen::MatrixXd& cov) {
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) throw ValidationError("covariance is not positive definite");
  return llt.matrixL();
}

}  // namespace

ConvexSet ConvexSet::box(Eigen::VectorXd half_widths) {
  for (double h : half_widths) require(h > 0.0, "box half-widths must be positive");
  ConvexSet s;
  s.kind = Kind::box;
  s.half_widths = std::move(half_widths);
  return s;
}

ConvexSet ConvexSet::ellipsoid(Eigen::MatrixXd shape) {
  require(shape.rows() == shape.cols(), "ellipsoid shape must be square");
  require((shape - shape.transpose()).norm() <= 1e-12 * std::max(1.0, shape.norm()), "ellipsoid shape must be symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(shape);
  require(es.eigenvalues().minCoeff() >= -1e-10 * std::max(1.0, shape.norm()), "ellipsoid shape must be PSD");
  ConvexSet s;
  s.kind = Kind::ellipsoid;
  s.shape = std::move(shape);
  return s;
}

int ConvexSet::dim() const {
  return static_cast<int>(kind == Kind::box ? half_widths.size() : shape.rows());
}

bool ConvexSet::contains(const Eigen::VectorXd& x) const {
  if (kind == Kind::box) {
    for (int i = 0; i < x.size(); ++i)
      if (std::abs(x[i]) > half_widths[i]) return false;
    return true;
  }
  double q = 0.0;
  for (int i = 0; i < x.size(); ++i) {
    double row = 0.0;
    for (int j = 0; j < x.size(); ++j) row += shape(i, j) * x[j];
    q += x[i] * row;
  }
  return q <= 1.0;
}

void GaussianInstance::validate() const {
  require(covariance.rows() == covariance.cols() && covariance.rows() >= 1, "instance: covariance must be square");
  require((covariance - covariance.transpose()).norm() <= 1e-12 * std::max(1.0, covariance.norm()),
          "instance: covariance must be symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(covariance);
  require(es.eigenvalues().minCoeff() >= -1e-10, "instance: covariance must be PSD within 1e-10");
  for (const auto& s : sets) require(s.dim() == dim(), "instance: set dimension mismatch");
}

namespace {

/// Interval of z2 (given z1) on which x = L z lies in the set; empty when lo >= hi.
std::pair<double, double> z2_interval(const ConvexSet& s, const Eigen::Matrix2d& L, double z1) {
  const double a = L(0, 0) * z1, b = L(1, 0) * z1, c = L(1, 1);
  if (s.kind == ConvexSet::Kind::box) {
    if (std::abs(a) > s.half_widths[0]) return {0.0, 0.0};
    const double h = s.half_widths[1];
    if (!std::isfinite(h)) return {-kInf, kInf};
    return {(-h - b) / c, (h - b) / c};
  }
  const auto& Q = s.shape;
  const double q11 = Q(1, 1), q01 = Q(0, 1), q00 = Q(0, 0);
  if (q11 <= 0.0) return q00 * a * a <= 1.0 ? std::pair{-kInf, kInf} : std::pair{0.0, 0.0};
  const double disc = q01 * q01 * a * a - q11 * (q00 * a * a - 1.0);
  if (disc <= 0.0) return {0.0, 0.0};
  const double r = std::sqrt(disc);
  const double y_lo = (-q01 * a - r) / q11, y_hi = (-q01 * a + r) / q11;
  return {(y_lo - b) / c, (y_hi - b) / c};
}

}  // namespace

double gaussian_mass_exact(const Eigen::MatrixXd& cov, const std::vector<ConvexSet>& sets) {
  const int n = static_cast<int>(cov.rows());
  require(n >= 1 && n <= 2, "exact Gaussian mass: n must be 1 or 2");
  if (n == 1) {
    const double sd = std::sqrt(cov(0, 0));
    double h = kInf;
    for (const auto& s : sets)
      h = std::min(h, s.kind == ConvexSet::Kind::box ? s.half_widths[0]
                                                     : (s.shape(0, 0) > 0 ? 1.0 / std::sqrt(s.shape(0, 0)) : kInf));
    return std::isfinite(h) ? 1.0 - 2.0 * normal_cdf(-h / sd) : 1.0;
  }
  const Eigen::Matrix2d L = cholesky(cov);
  require(L(1, 1) > 1e-12 * L(0, 0), "exact Gaussian mass: covariance is numerically singular");
  // Active constraint pattern: which set bounds each end, or -1 when empty.
  const auto pattern = [&](double z1) {
    double lo = -kInf, hi = kInf;
    int ilo = -2, ihi = -2;
    for (std::size_t k = 0; k < sets.size(); ++k) {
      const auto [a, b] = z2_interval(sets[k], L, z1);
      if (a > lo) lo = a, ilo = static_cast<int>(k);
      if (b < hi) hi = b, ihi = static_cast<int>(k);
    }
    return lo >= hi ? -1 : (ilo + 2) * 64 + ihi + 2;
  };
  const auto integrand = [&](double z1) {
    double lo = -kInf, hi = kInf;
    for (const auto& s : sets) {
      const auto [a, b] = z2_interval(s, L, z1);
      lo = std::max(lo, a);
      hi = std::min(hi, b);
      if (lo >= hi) return 0.0;
    }
    const double p = lo > 0.0 ? normal_cdf(-lo) - normal_cdf(-hi) : normal_cdf(hi) - normal_cdf(lo);
    return normal_pdf(z1) * p;
  };
  // Split at every change of the active pattern so each piece is smooth.
  constexpr double span = 12.0;
  constexpr int scan = 4096;
  std::vector<double> cuts{-span};
  double prev_z = -span;
  int prev_p = pattern(prev_z);
  for (int i = 1; i <= scan; ++i) {
    const double z = -span + 2.0 * span * i / scan;
    const int p = pattern(z);
    if (p != prev_p) {
      double a = prev_z, b = z;
      for (int it = 0; it < 60 && b - a > 1e-14; ++it) {
        const double m = 0.5 * (a + b);
        (pattern(m) == prev_p ? a : b) = m;
      }
      cuts.push_back(0.5 * (a + b));
    }
    prev_z = z;
    prev_p = p;
  }
  cuts.push_back(span);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (cuts[i + 1] - cuts[i] <= 0.0) continue;
    total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, cuts[i], cuts[i + 1], 15,
                                                                           1e-13);
  }
  return total;
}

GciResult gci_check(const GaussianInstance& instance, std::size_t split, GciMethod method, std::size_t samples,
                    std::uint64_t seed) {
  instance.validate();
  require(split >= 1 && split < instance.sets.size(), "gci_check: split must leave both groups non-empty");
  const std::vector<ConvexSet> A(instance.sets.begin(), instance.sets.begin() + split);
  const std::vector<ConvexSet> B(instance.sets.begin() + split, instance.sets.end());
  GciResult r;
  if (method == GciMethod::exact2d) {
    require(instance.dim() <= 2, "gci_check: exact2d needs n <= 2");
    r.lhs = gaussian_mass_exact(instance.covariance, A) * gaussian_mass_exact(instance.covariance, B);
    r.rhs = gaussian_mass_exact(instance.covariance, instance.sets);
    r.margin = r.rhs - r.lhs;
    r.holds = r.margin >= -1e-8;
    return r;
  }
  require(instance.dim() <= 8, "gci_check: mc needs n <= 8");
  require(samples >= 100, "gci_check: need at least 100 samples");
  const Eigen::MatrixXd L = cholesky(instance.covariance);
  Rng rng(seed);
  NormalSource normal(rng);
  std::vector<unsigned char> ia(samples), ib(samples);
  Eigen::VectorXd z(instance.dim()), x(instance.dim());
  for (std::size_t s = 0; s < samples; ++s) {
    for (auto& v : z) v = normal();
    x.noalias() = L * z;
    ia[s] = std::all_of(A.begin(), A.end(), [&](const ConvexSet& c) { return c.contains(x); });
    ib[s] = std::all_of(B.begin(), B.end(), [&](const ConvexSet& c) { return c.contains(x); });
  }
  const double n = static_cast<double>(samples);
  double pa = 0.0, pb = 0.0, pab = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    pa += ia[s];
    pb += ib[s];
    pab += ia[s] & ib[s];
  }
  pa /= n;
  pb /= n;
  pab /= n;
  // Influence function of D = pa pb - pab.
  double var = 0.0;
  const double d = pa * pb - pab;
  for (std::size_t s = 0; s < samples; ++s) {
    const double inf = pb * (ia[s] - pa) + pa * (ib[s] - pb) - ((ia[s] & ib[s]) - pab);
    var += inf * inf;
  }
  r.lhs = pa * pb;
  r.rhs = pab;
  r.margin = -d;
  r.error = std::sqrt(var / (n - 1.0) / n);
  r.holds = !(d > 4.0 * r.error);
  return r;
}

namespace {

double eval_f_plus_g(const ReweightInstance& in, const Eigen::VectorXd& x) {
  return (in.S.contains(x) ? in.c : 0.0) + 0.5 * x.dot((in.G - in.F) * x);
}

}  // namespace

bool probe_quasi_concave(const ReweightInstance& in, std::size_t probes, std::uint64_t seed) {
  const int n = static_cast<int>(in.covariance.rows());
  Rng rng(seed);
  NormalSource normal(rng);
  const double scale = std::sqrt(in.covariance.diagonal().maxCoeff()) * 3.0;
  for (std::size_t p = 0; p < probes; ++p) {
    // Ray: t -> h(t u) non-increasing for t >= 0.
    const Eigen::VectorXd u = normal_vector(n, normal).normalized();
    double prev = eval_f_plus_g(in, Eigen::VectorXd::Zero(n));
    for (int k = 1; k <= 40; ++k) {
      const double h = eval_f_plus_g(in, (scale * k / 20.0) * u);
      if (h > prev + 1e-12 * (1.0 + std::abs(prev))) return false;
      prev = h;
    }
    // Midpoint: h((x+y)/2) >= min(h(x), h(y)); symmetry h(-x) = h(x).
    const Eigen::VectorXd x = scale * normal_vector(n, normal), y = scale * normal_vector(n, normal);
    const double hx = eval_f_plus_g(in, x), hy = eval_f_plus_g(in, y);
    const double hm = eval_f_plus_g(in, 0.5 * (x + y));
    if (hm < std::min(hx, hy) - 1e-12 * (1.0 + std::abs(std::min(hx, hy)))) return false;
    if (std::abs(eval_f_plus_g(in, -x) - hx) > 1e-12 * (1.0 + std::abs(hx))) return false;
  }
  return true;
}

ReweightGciResult reweight_gci_check(const ReweightInstance& in, std::size_t samples, std::uint64_t seed) {
  const int n = static_cast<int>(in.covariance.rows());
  require(n >= 1 && n <= 2, "reweight check: n must be 1 or 2 (exact mu^(-g))");
  require(in.c >= 0.0, "reweight check: c must be >= 0");
  ReweightGciResult r;
  r.accepted = probe_quasi_concave(in, 500, derive_seed(seed, {0x9C}));
  if (!r.accepted) return r;
  const Eigen::MatrixXd prec = in.covariance.inverse();
  const Eigen::MatrixXd cov_g = (prec + in.G).inverse();
  const Eigen::MatrixXd cov_f = (prec + in.F).inverse();
  r.mu_neg_g = gaussian_mass_exact(cov_g, {in.A});

  const double lift = std::expm1(in.c);
  const double nu_a = gaussian_mass_exact(cov_f, {in.A});
  const double nu_s = gaussian_mass_exact(cov_f, {in.S});
  const double nu_as = gaussian_mass_exact(cov_f, {in.A, in.S});
  r.mu_f_exact = (nu_a + lift * nu_as) / (1.0 + lift * nu_s);

  const Eigen::MatrixXd L = cholesky(cov_f);
  Rng rng(seed);
  NormalSource normal(rng);
  double sw = 0.0, swa = 0.0;
  std::vector<double> w(samples), a(samples);
  Eigen::VectorXd z(n), x(n);
  for (std::size_t s = 0; s < samples; ++s) {
    for (auto& v : z) v = normal();
    x.noalias() = L * z;
    w[s] = in.S.contains(x) ? std::exp(in.c) : 1.0;
    a[s] = in.A.contains(x) ? 1.0 : 0.0;
    sw += w[s];
    swa += w[s] * a[s];
  }
  r.mu_f = swa / sw;
  double num = 0.0;
  for (std::size_t s = 0; s < samples; ++s) num += w[s] * w[s] * (a[s] - r.mu_f) * (a[s] - r.mu_f);
  r.mu_f_se = std::sqrt(num) / sw;
  r.margin = r.mu_f - r.mu_neg_g;
  r.holds = !(-r.margin > 4.0 * r.mu_f_se);
  return r;
}

TailResult tail_bound_check(int d, double l, double R, std::size_t samples, std::uint64_t seed) {
  require(d >= 1 && l > 0.0 && R > 0.0, "tail check: need d >= 1 and l, R > 0");
  TailResult r;
  Rng rng(seed);
  NormalSource normal(rng);
  std::size_t hits = 0;
  const double sd = std::sqrt(l);
  for (std::size_t s = 0; s < samples; ++s) {
    double r2 = 0.0;
    for (int c = 0; c < d; ++c) {
      const double x = sd * normal();
      r2 += x * x;
    }
    if (r2 >= R * R) ++hits;
  }
  const double n = static_cast<double>(samples);
  r.empirical = static_cast<double>(hits) / n;
  r.empirical_se = std::sqrt(std::max(r.empirical * (1.0 - r.empirical), 1.0 / n) / n);
  r.exact = boost::math::cdf(boost::math::complement(boost::math::chi_squared(d), R * R / l));
  r.bound_stated = d * std::exp(-R * R / (2.0 * d * d * l * l));
  r.bound = d * std::exp(-R * R / (2.0 * d * d * l));
  r.holds = !(r.empirical - r.bound > 4.0 * r.empirical_se);
  r.holds_stated = !(r.empirical - r.bound_stated > 4.0 * r.empirical_se);
  return r;
}

double sup_stay_probability(double l, double R) {
  require(l > 0.0 && R > 0.0, "sup probability: need l, R > 0");
  double sum = 0.0;
  for (int k = 0; k < 100000; ++k) {
    const double m = 2.0 * k + 1.0;
    const double term = std::exp(-m * m * M_PI * M_PI * l / (8.0 * R * R)) / m;
    sum += (k % 2 == 0 ? term : -term);
    if (term < 1e-18) break;
  }
  return std::clamp(4.0 / M_PI * sum, 0.0, 1.0);
}

SupSequenceResult sup_sequence_check(const std::vector<double>& ls, double R, std::size_t samples,
                                     std::uint64_t seed) {
  SupSequenceResult r;
  r.l = ls;
  const std::size_t steps = 256;
  for (std::size_t k = 0; k < ls.size(); ++k) {
    const double l = ls[k], dt = l / steps, sd = std::sqrt(dt);
    Rng rng(derive_seed(seed, {k}));
    NormalSource normal(rng);
    std::vector<double> v(samples);
    for (std::size_t s = 0; s < samples; ++s) {
      // Survival probability given the discrete skeleton (bridge crossing correction per step).
      double x = 0.0, p = 1.0;
      for (std::size_t i = 0; i < steps && p > 0.0; ++i) {
        const double y = x + sd * normal();
        if (std::abs(y) >= R) {
          p = 0.0;
          break;
        }
        p *= (1.0 - std::exp(-2.0 * (R - x) * (R - y) / dt)) * (1.0 - std::exp(-2.0 * (R + x) * (R + y) / dt));
        x = y;
      }
      v[s] = p;
    }
    const auto est = iid_mean(v);
    r.mc.push_back(est.value);
    r.mc_se.push_back(est.std_error);
    r.exact.push_back(sup_stay_probability(l, R));
    r.rate.push_back(std::pow(est.value, 1.0 / l));
    if (std::abs(est.value - r.exact.back()) > 5.0 * est.std_error + 1e-3) r.matches_oracle = false;
  }
  for (std::size_t k = 1; k < ls.size(); ++k) {
    if (ls[k] < ls[k - 1] && r.rate[k] < r.rate[k - 1]) r.increasing = false;
    if (ls[k] > ls[k - 1] && r.rate[k] > r.rate[k - 1]) r.increasing = false;
  }
  return r;
}

namespace {

double ball_probability(int d, double shift2, double R2) {
  if (shift2 <= 0.0) return boost::math::cdf(boost::math::chi_squared(d), R2);
  return boost::math::cdf(boost::math::non_central_chi_squared(d, shift2), R2);
}

}  // namespace

InflationResult variance_inflation_check(int d, double sigma, const Eigen::VectorXd& z, double R,
                                         InflationMethod method, std::size_t samples, std::uint64_t seed) {
  require(d >= 1 && z.size() == d, "inflation check: z must have dimension d");
  require(sigma >= 1.0 && sigma <= 2.0, "inflation check: sigma must lie in [1, 2]");
  require(R > 0.0, "inflation check: R must be positive");
  InflationResult r;
  if (method == InflationMethod::quadrature) {
    const double z2 = z.squaredNorm();
    r.lhs = ball_probability(d, z2, R * R);
    r.rhs = ball_probability(d, z2 / sigma, R * R / sigma);
  } else {
    Rng rng(seed);
    NormalSource normal(rng);
    std::size_t a = 0, b = 0;
    const double s = std::sqrt(sigma), scale = std::sqrt(std::pow(2.0, d));
    double sum = 0.0, sum2 = 0.0;
    Eigen::VectorXd x(d);
    for (std::size_t i = 0; i < samples; ++i) {
      for (auto& v : x) v = normal();
      const bool in_a = (x + z).squaredNorm() <= R * R;
      const bool in_b = (s * x + z).squaredNorm() <= R * R;
      a += in_a;
      b += in_b;
      const double diff = (in_a ? 1.0 : 0.0) - (in_b ? scale : 0.0);
      sum += diff;
      sum2 += diff * diff;
    }
    const double n = static_cast<double>(samples);
    r.lhs = static_cast<double>(a) / n;
    r.rhs = static_cast<double>(b) / n;
    const double mean = sum / n;
    r.error = std::sqrt(std::max(sum2 / n - mean * mean, 0.0) / n);
  }
  r.rhs_scaled = std::sqrt(std::pow(2.0, d)) * r.rhs;
  r.holds = r.lhs - r.rhs_scaled <= std::max(4.0 * r.error, 1e-12);
  return r;
}

namespace {

double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

Eigen::MatrixXd random_spd(int n, Rng& rng, NormalSource& normal) {
  Eigen::MatrixXd A(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = normal();
  Eigen::MatrixXd S = A * A.transpose() / n + uniform(rng, 0.05, 0.5) * Eigen::MatrixXd::Identity(n, n);
  return 0.5 * (S + S.transpose());
}

ConvexSet random_set(int n, Rng& rng, NormalSource& normal) {
  if (uniform01(rng) < 0.5) {
    Eigen::VectorXd h(n);
    bool any = false;
    for (int i = 0; i < n; ++i) {
      const bool bounded = uniform01(rng) < 0.6;
      h[i] = bounded ? uniform(rng, 0.3, 2.0) : kInf;
      any = any || bounded;
    }
    if (!any) h[std::uniform_int_distribution<int>(0, n - 1)(rng)] = uniform(rng, 0.3, 2.0);
    return ConvexSet::box(h);
  }
  Eigen::MatrixXd Q = random_spd(n, rng, normal);
  Q /= uniform(rng, 0.5, 4.0) * Q.trace() / n;
  return ConvexSet::ellipsoid(0.5 * (Q + Q.transpose()));
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

}  // namespace

SuiteSummary run_gci_suite(std::size_t instances, std::uint64_t seed, std::size_t threads, std::size_t samples) {
  struct Row {
    int n;
    std::size_t sets, split;
    GciResult exact, mc;
    bool has_exact;
  };
  std::vector<Row> rows(instances);
  parallel_for(instances, resolve_threads(threads), [&](std::size_t i) {
    Rng rng(derive_seed(seed, {0x6C1, i}));
    NormalSource normal(rng);
    Row row;
    row.n = std::uniform_int_distribution<int>(1, 4)(rng);
    GaussianInstance inst;
    inst.covariance = random_spd(row.n, rng, normal);
    const std::size_t k = std::uniform_int_distribution<std::size_t>(2, 4)(rng);
    for (std::size_t s = 0; s < k; ++s) inst.sets.push_back(random_set(row.n, rng, normal));
    row.sets = k;
    row.split = std::uniform_int_distribution<std::size_t>(1, k - 1)(rng);
    row.has_exact = row.n <= 2;
    if (row.has_exact) row.exact = gci_check(inst, row.split, GciMethod::exact2d);
    row.mc = gci_check(inst, row.split, GciMethod::mc, samples, derive_seed(seed, {0x6C2, i}));
    rows[i] = row;
  });
  SuiteSummary sum;
  sum.suite = "gci";
  sum.worst_exact_margin = kInf;
  sum.instances = instances;
  sum.csv = "instance,n,sets,split,method,lhs,rhs,margin,error,holds\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const auto emit = [&](const char* method, const GciResult& g) {
      sum.csv += std::to_string(i) + "," + std::to_string(r.n) + "," + std::to_string(r.sets) + "," +
                 std::to_string(r.split) + "," + method + "," + fmt("%.10g", g.lhs) + "," + fmt("%.10g", g.rhs) +
                 "," + fmt("%.6g", g.margin) + "," + fmt("%.3g", g.error) + "," + (g.holds ? "1" : "0") + "\n";
    };
    if (r.has_exact) {
      emit("exact2d", r.exact);
      sum.worst_exact_margin = std::min(sum.worst_exact_margin, r.exact.margin);
    }
    emit("mc", r.mc);
    if (!r.mc.holds || (r.has_exact && !r.exact.holds)) ++sum.violations;
  }
  return sum;
}

SuiteSummary run_reweight_suite(std::size_t instances, std::uint64_t seed, std::size_t threads, std::size_t samples) {
  // Attempts are drawn deterministically; a fraction use F != G and are expected to be rejected.
  const std::size_t attempts = instances * 3;
  std::vector<ReweightGciResult> results(attempts);
  std::vector<int> dims(attempts);
  std::vector<int> same(attempts);
  parallel_for(attempts, resolve_threads(threads), [&](std::size_t i) {
    Rng rng(derive_seed(seed, {0x2E3, i}));
    NormalSource normal(rng);
    ReweightInstance in;
    const int n = std::uniform_int_distribution<int>(1, 2)(rng);
    dims[i] = n;
    in.covariance = random_spd(n, rng, normal);
    in.c = uniform(rng, 0.2, 3.0);
    Eigen::VectorXd h(n);
    for (int c = 0; c < n; ++c) h[c] = uniform(rng, 0.2, 1.5);
    in.S = ConvexSet::box(h);
    in.G = random_spd(n, rng, normal) * uniform(rng, 0.1, 2.0);
    same[i] = uniform01(rng) < 0.7;
    if (same[i]) {
      in.F = in.G;
    } else if (uniform01(rng) < 0.5) {
      in.F = in.G + random_spd(n, rng, normal);
    } else {
      // F < G makes f + g grow along some ray; these should be rejected.
      const Eigen::MatrixXd base = in.covariance.inverse() + in.G;
      const double lo = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(base).eigenvalues().minCoeff();
      in.F = in.G - 0.5 * lo * Eigen::MatrixXd::Identity(n, n);
    }
    in.A = random_set(n, rng, normal);
    results[i] = reweight_gci_check(in, samples, derive_seed(seed, {0x2E4, i}));
  });
  SuiteSummary sum;
  sum.suite = "reweight";
  sum.worst_exact_margin = kInf;
  sum.csv = "attempt,n,F_equals_G,accepted,mu_f,mu_f_se,mu_f_exact,mu_neg_g,margin,holds\n";
  for (std::size_t i = 0; i < attempts && sum.instances < instances; ++i) {
    const auto& r = results[i];
    sum.csv += std::to_string(i) + "," + std::to_string(dims[i]) + "," + std::to_string(same[i]) + "," +
               (r.accepted ? "1" : "0") + "," + fmt("%.10g", r.mu_f) + "," + fmt("%.3g", r.mu_f_se) + "," +
               fmt("%.10g", r.mu_f_exact) + "," + fmt("%.10g", r.mu_neg_g) + "," + fmt("%.6g", r.margin) + "," +
               (r.holds ? "1" : "0") + "\n";
    if (!r.accepted) {
      ++sum.rejected;
      continue;
    }
    ++sum.instances;
    if (!r.holds) ++sum.violations;
    sum.worst_exact_margin = std::min(sum.worst_exact_margin, r.mu_f_exact - r.mu_neg_g);
  }
  require(sum.instances == instances, "reweight suite: too few instances passed the quasi-concavity probe");
  return sum;
}

SuiteSummary run_tail_suite(std::size_t instances, std::uint64_t seed, std::size_t threads, std::size_t samples) {
  std::vector<TailResult> results(instances);
  std::vector<int> ds(instances);
  std::vector<double> ls(instances), Rs(instances);
  parallel_for(instances, resolve_threads(threads), [&](std::size_t i) {
    Rng rng(derive_seed(seed, {0x7A1, i}));
    ds[i] = std::uniform_int_distribution<int>(1, 3)(rng);
    ls[i] = std::exp(uniform(rng, std::log(0.05), std::log(2.0)));
    Rs[i] = uniform(rng, 0.2, 4.0);
    results[i] = tail_bound_check(ds[i], ls[i], Rs[i], samples, derive_seed(seed, {0x7A2, i}));
  });
  SuiteSummary sum;
  sum.suite = "tails";
  sum.instances = instances;
  sum.worst_exact_margin = kInf;
  sum.csv = "instance,d,l,R,empirical,se,exact,bound,bound_stated,holds,holds_stated\n";
  for (std::size_t i = 0; i < instances; ++i) {
    const auto& r = results[i];
    sum.csv += std::to_string(i) + "," + std::to_string(ds[i]) + "," + fmt("%.6g", ls[i]) + "," + fmt("%.6g", Rs[i]) +
               "," + fmt("%.6g", r.empirical) + "," + fmt("%.3g", r.empirical_se) + "," + fmt("%.6g", r.exact) + "," +
               fmt("%.6g", r.bound) + "," + fmt("%.6g", r.bound_stated) + "," + (r.holds ? "1" : "0") + "," +
               (r.holds_stated ? "1" : "0") + "\n";
    if (!r.holds) ++sum.violations;
    sum.worst_exact_margin = std::min(sum.worst_exact_margin, r.bound - r.exact);
  }
  const auto seq = sup_sequence_check({1.0, 0.5, 0.25, 0.125}, 1.0, samples / 4, derive_seed(seed, {0x7A3}));
  sum.extra_csv = "l,R,mc,mc_se,exact,rate\n";
  for (std::size_t k = 0; k < seq.l.size(); ++k)
    sum.extra_csv += fmt("%.6g", seq.l[k]) + ",1," + fmt("%.6g", seq.mc[k]) + "," + fmt("%.3g", seq.mc_se[k]) + "," +
                     fmt("%.6g", seq.exact[k]) + "," + fmt("%.6g", seq.rate[k]) + "\n";
  if (!seq.increasing || !seq.matches_oracle) ++sum.violations;
  return sum;
}

SuiteSummary run_inflation_suite(std::size_t instances, std::uint64_t seed, std::size_t threads) {
  std::vector<InflationResult> results(instances);
  std::vector<int> ds(instances);
  std::vector<double> sigmas(instances), zs(instances), Rs(instances);
  parallel_for(instances, resolve_threads(threads), [&](std::size_t i) {
    Rng rng(derive_seed(seed, {0x1F1, i}));
    NormalSource normal(rng);
    ds[i] = std::uniform_int_distribution<int>(1, 3)(rng);
    sigmas[i] = uniform(rng, 1.0, 2.0);
    Eigen::VectorXd z = normal_vector(ds[i], normal);
    z *= uniform(rng, 0.0, 4.0) / std::max(z.norm(), 1e-12);
    zs[i] = z.norm();
    Rs[i] = uniform(rng, 0.1, 3.0);
    results[i] = variance_inflation_check(ds[i], sigmas[i], z, Rs[i]);
  });
  SuiteSummary sum;
  sum.suite = "inflation";
  sum.instances = instances;
  sum.worst_exact_margin = kInf;
  sum.csv = "instance,d,sigma,shift,R,lhs,rhs,rhs_scaled,holds\n";
  for (std::size_t i = 0; i < instances; ++i) {
    const auto& r = results[i];
    sum.csv += std::to_string(i) + "," + std::to_string(ds[i]) + "," + fmt("%.6g", sigmas[i]) + "," +
               fmt("%.6g", zs[i]) + "," + fmt("%.6g", Rs[i]) + "," + fmt("%.10g", r.lhs) + "," + fmt("%.10g", r.rhs) +
               "," + fmt("%.10g", r.rhs_scaled) + "," + (r.holds ? "1" : "0") + "\n";
    if (!r.holds) ++sum.violations;
    sum.worst_exact_margin = std::min(sum.worst_exact_margin, r.rhs_scaled - r.lhs);
  }
  return sum;
}

}  // namespace polaron
