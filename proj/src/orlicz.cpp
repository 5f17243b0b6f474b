#include "fieldtail/orlicz.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include "fieldtail/error.hpp"
#include "fieldtail/log_value.hpp"
#include "fieldtail/parallel.hpp"
#include "fieldtail/stats.hpp"

namespace fieldtail {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// phi on lambda >= 0 without the domain check; used for limits at lambda0.
double phi_closed(const PhiFunction& phi, double a) {
  switch (phi.kind) {
    case PhiFunction::Kind::Gaussian:
      return 0.5 * a * a;
    case PhiFunction::Kind::PowerP:
      return a <= 1.0 ? a * a : std::pow(a, phi.p);
    case PhiFunction::Kind::PurePower:
      return std::pow(a, phi.p) / phi.p;
    case PhiFunction::Kind::Tabulated: {
      const auto& k = phi.knots;
      const auto& v = phi.values;
      if (a >= k.back()) return v.back();
      const auto it = std::upper_bound(k.begin(), k.end(), a);
      const std::size_t j = static_cast<std::size_t>(it - k.begin());
      const double t = (a - k[j - 1]) / (k[j] - k[j - 1]);
      return v[j - 1] + t * (v[j] - v[j - 1]);
    }
  }
  return kInf;
}

struct Argmax {
  double x = 0.0;
  double value = kNegInf;
};

// Maximum of a concave g on [a, b], endpoints included.
template <class F>
Argmax golden_max(const F& g, double a, double b) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  Argmax best{a, g(a)};
  const double gb = g(b);
  if (gb > best.value) best = {b, gb};
  double lo = a, hi = b;
  double c = hi - r * (hi - lo), d = lo + r * (hi - lo);
  double gc = g(c), gd = g(d);
  for (int it = 0; it < 300; ++it) {
    if (hi - lo <= 1e-15 * std::max(1.0, std::abs(lo) + std::abs(hi))) break;
    if (gc >= gd) {
      hi = d;
      d = c;
      gd = gc;
      c = hi - r * (hi - lo);
      gc = g(c);
    } else {
      lo = c;
      c = d;
      gc = gd;
      d = lo + r * (hi - lo);
      gd = g(d);
    }
  }
  if (gc > best.value) best = {c, gc};
  if (gd > best.value) best = {d, gd};
  return best;
}

double rms_of(std::span<const double> x) {
  long double s = 0.0L;
  for (double v : x) s += static_cast<long double>(v) * v;
  return static_cast<double>(std::sqrt(s / static_cast<long double>(x.size())));
}

struct MgfPoint {
  double log_mgf = 0.0;
  double ess = 0.0;
};

MgfPoint empirical_log_mgf(std::span<const double> x, double lambda) {
  double top = kNegInf;
  for (double v : x) top = std::max(top, lambda * v);
  long double sw = 0.0L, sw2 = 0.0L;
  for (double v : x) {
    const long double w = std::exp(static_cast<long double>(lambda * v - top));
    sw += w;
    sw2 += w * w;
  }
  return {top + static_cast<double>(std::log(sw)) - std::log(static_cast<double>(x.size())),
          static_cast<double>(sw * sw / sw2)};
}

// Lower convex hull of (knots, values) evaluated at a >= 0.
double lower_hull_at(const std::vector<double>& hx, const std::vector<double>& hy, double a) {
  if (a >= hx.back()) return hy.back();
  const auto it = std::upper_bound(hx.begin(), hx.end(), a);
  const std::size_t j = static_cast<std::size_t>(it - hx.begin());
  const double t = (a - hx[j - 1]) / (hx[j] - hx[j - 1]);
  return hy[j - 1] + t * (hy[j] - hy[j - 1]);
}

}  // namespace

PhiFunction PhiFunction::gaussian(double lambda0) {
  PhiFunction f;
  f.kind = Kind::Gaussian;
  f.lambda0 = lambda0;
  f.validate();
  return f;
}

PhiFunction PhiFunction::power_p(double p, double lambda0) {
  PhiFunction f;
  f.kind = Kind::PowerP;
  f.p = p;
  f.lambda0 = lambda0;
  f.validate();
  return f;
}

PhiFunction PhiFunction::pure_power(double p) {
  PhiFunction f;
  f.kind = Kind::PurePower;
  f.p = p;
  f.validate();
  return f;
}

PhiFunction PhiFunction::tabulated(std::vector<double> knots, std::vector<double> values) {
  PhiFunction f;
  f.kind = Kind::Tabulated;
  f.knots = std::move(knots);
  f.values = std::move(values);
  f.lambda0 = f.knots.empty() ? 0.0 : f.knots.back();
  f.validate();
  return f;
}

void PhiFunction::validate() const {
  require(lambda0 > 0.0, ErrorCode::InvalidArgument, "lambda0 must be positive");
  if (kind == Kind::PowerP || kind == Kind::PurePower) {
    require(std::isfinite(p) && p > 1.0, ErrorCode::InvalidArgument, "power phi needs p > 1");
  }
  if (kind != Kind::Tabulated) return;
  require(knots.size() >= 2 && knots.size() == values.size(), ErrorCode::InvalidArgument,
          "tabulated phi needs at least two (lambda, phi) rows");
  require(knots[0] == 0.0 && values[0] == 0.0, ErrorCode::InvalidArgument,
          "tabulated phi must start at (0, 0)");
  for (std::size_t i = 1; i < knots.size(); ++i) {
    require(std::isfinite(knots[i]) && knots[i] > knots[i - 1], ErrorCode::InvalidArgument,
            "tabulated lambda must be strictly increasing");
    require(std::isfinite(values[i]) && values[i] >= values[i - 1], ErrorCode::InvalidArgument,
            "tabulated phi must be non-decreasing in lambda");
  }
  require(lambda0 == knots.back(), ErrorCode::InvalidArgument,
          "tabulated lambda0 must equal the last knot");
}

double PhiFunction::operator()(double lambda) const {
  const double a = std::abs(lambda);
  if (kind == Kind::Tabulated) return a <= knots.back() ? phi_closed(*this, a) : kInf;
  if (a >= lambda0) return kInf;
  return phi_closed(*this, a);
}

double PhiFunction::derivative(double lambda) const {
  const double a = std::abs(lambda);
  switch (kind) {
    case Kind::Gaussian: return a;
    case Kind::PowerP: return a < 1.0 ? 2.0 * a : p * std::pow(a, p - 1.0);
    case Kind::PurePower: return std::pow(a, p - 1.0);
    case Kind::Tabulated: {
      if (a >= knots.back()) return kInf;
      const auto it = std::upper_bound(knots.begin(), knots.end(), a);
      const std::size_t j = static_cast<std::size_t>(it - knots.begin());
      return (values[j] - values[j - 1]) / (knots[j] - knots[j - 1]);
    }
  }
  return kInf;
}

std::vector<double> PhiFunction::breakpoints() const {
  if (kind == Kind::PowerP && lambda0 > 1.0) return {1.0};
  if (kind == Kind::Tabulated) return {knots.begin() + 1, knots.end() - 1};
  return {};
}

PhiProperties check_properties(const PhiFunction& phi, std::size_t grid_points) {
  phi.validate();
  require(grid_points >= 3, ErrorCode::InvalidArgument, "need at least three grid points");
  PhiProperties out;
  out.zero_at_origin = phi(0.0) == 0.0;

  const double L = phi.kind == PhiFunction::Kind::Tabulated ? phi.knots.back()
                   : std::isfinite(phi.lambda0)           ? phi.lambda0 * (1.0 - 1e-9)
                                                          : 100.0;
  const double h = L / static_cast<double>(grid_points - 1);
  std::vector<double> v(grid_points);
  for (std::size_t i = 0; i < grid_points; ++i) v[i] = phi_closed(phi, h * static_cast<double>(i));
  const double scale = std::max(1.0, v.back());

  out.monotone = true;
  for (std::size_t i = 1; i < grid_points; ++i) out.monotone = out.monotone && v[i] >= v[i - 1];
  // Second differences across the origin use evenness: phi(-h) = phi(h).
  double defect = std::max(0.0, -(2.0 * v[1] - 2.0 * v[0]));
  for (std::size_t i = 1; i + 1 < grid_points; ++i) {
    defect = std::max(defect, -(v[i - 1] - 2.0 * v[i] + v[i + 1]));
  }
  out.convexity_defect = defect;
  out.convex = defect <= 1e-12 * scale;

  out.c_minus = kInf;
  out.c_plus = 0.0;
  const double top = std::min(1.0, L);
  for (int k = 1; k <= 1000; ++k) {
    const double a = top * k / 1000.0;
    const double r = phi_closed(phi, a) / (a * a);
    out.c_minus = std::min(out.c_minus, r);
    out.c_plus = std::max(out.c_plus, r);
  }

  const double tail = phi_closed(phi, L) / L;
  const double mid = phi_closed(phi, 0.5 * L) / (0.5 * L);
  out.growth_ratio = mid > 0.0 ? tail / mid : kInf;
  out.superlinear = out.growth_ratio > 1.0 + 1e-9;
  return out;
}

PhiFunction read_tabulated(std::istream& in) {
  std::vector<double> knots, values;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    double a = 0.0, b = 0.0;
    if (!(ss >> a)) continue;
    std::string extra;
    require(static_cast<bool>(ss >> b) && !(ss >> extra), ErrorCode::InvalidArgument,
            "tabulated phi line " + std::to_string(lineno) + ": expected two numbers");
    knots.push_back(a);
    values.push_back(b);
  }
  return PhiFunction::tabulated(std::move(knots), std::move(values));
}

PhiFunction read_tabulated_file(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCode::Io, "cannot open " + path);
  return read_tabulated(in);
}

void write_tabulated(std::ostream& out, const PhiFunction& phi) {
  require(phi.kind == PhiFunction::Kind::Tabulated, ErrorCode::InvalidArgument,
          "only tabulated phi has a text form");
  out << "# lambda phi\n" << std::setprecision(17);
  for (std::size_t i = 0; i < phi.knots.size(); ++i) out << phi.knots[i] << ' ' << phi.values[i] << '\n';
}

Conjugate young_fenchel_detail(const PhiFunction& phi, double u) {
  require(std::isfinite(u), ErrorCode::InvalidArgument, "u must be finite");
  const double au = std::abs(u);
  const double sgn = u < 0.0 ? -1.0 : 1.0;
  Conjugate out;

  if (phi.kind == PhiFunction::Kind::Tabulated) {
    std::size_t best = 0;
    double bv = 0.0;
    for (std::size_t i = 1; i < phi.knots.size(); ++i) {
      const double v = phi.knots[i] * au - phi.values[i];
      if (v > bv) {
        bv = v;
        best = i;
      }
    }
    out.value = bv;
    out.argmax = sgn * phi.knots[best];
    out.at_edge = best + 1 == phi.knots.size();
    return out;
  }

  if (phi.kind == PhiFunction::Kind::Gaussian) {
    if (au < phi.lambda0) {
      out.value = 0.5 * au * au;
      out.argmax = u;
    } else {
      out.value = phi.lambda0 * au - 0.5 * phi.lambda0 * phi.lambda0;
      out.argmax = sgn * phi.lambda0;
      out.at_edge = true;
    }
    return out;
  }

  double hi = 1.0;
  if (std::isfinite(phi.lambda0)) {
    hi = phi.lambda0;
  } else {
    while (phi.derivative(hi) < au && hi < 1e300) hi *= 2.0;
  }
  auto g = [&](double a) { return a * au - phi_closed(phi, a); };
  std::vector<double> cuts{0.0};
  for (double b : phi.breakpoints()) {
    if (b < hi) cuts.push_back(b);
  }
  cuts.push_back(hi);
  Argmax best{0.0, 0.0};
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const Argmax m = golden_max(g, cuts[i], cuts[i + 1]);
    if (m.value > best.value) best = m;
  }
  out.value = best.value;
  out.argmax = sgn * best.x;
  out.at_edge = std::isfinite(phi.lambda0) && best.x >= phi.lambda0 * (1.0 - 1e-9);
  return out;
}

double young_fenchel(const PhiFunction& phi, double u) { return young_fenchel_detail(phi, u).value; }

FenchelMoreauReport fenchel_moreau_check(const PhiFunction& phi, std::span<const double> grid) {
  phi.validate();
  for (double l : grid) {
    require(std::isfinite(l) && std::abs(l) < phi.lambda0, ErrorCode::InvalidArgument,
            "grid must lie inside (-lambda0, lambda0)");
  }
  std::vector<double> dev(grid.size());

  if (phi.kind == PhiFunction::Kind::Tabulated) {
    // phi** of a piecewise linear function is its lower convex envelope.
    std::vector<double> hx, hy;
    for (std::size_t i = 0; i < phi.knots.size(); ++i) {
      while (hx.size() >= 2) {
        const std::size_t m = hx.size();
        const double cross = (hx[m - 1] - hx[m - 2]) * (phi.values[i] - hy[m - 2]) -
                             (hy[m - 1] - hy[m - 2]) * (phi.knots[i] - hx[m - 2]);
        if (cross > 0.0) break;
        hx.pop_back();
        hy.pop_back();
      }
      hx.push_back(phi.knots[i]);
      hy.push_back(phi.values[i]);
    }
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double a = std::abs(grid[i]);
      dev[i] = std::abs(phi_closed(phi, a) - lower_hull_at(hx, hy, a));
    }
  } else {
    parallel_for(grid.size(), [&](std::size_t i) {
      const double a = std::abs(grid[i]);
      const double U = 2.0 * phi.derivative(a) + 1.0;
      auto g = [&](double u) { return a * u - young_fenchel(phi, u); };
      const double biconj = golden_max(g, 0.0, U).value;
      dev[i] = std::abs(biconj - phi_closed(phi, a));
    });
  }

  FenchelMoreauReport out;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (dev[i] > out.max_deviation) {
      out.max_deviation = dev[i];
      out.worst_lambda = grid[i];
    }
  }
  out.flagged = out.max_deviation > 1e-6;
  return out;
}

double phi_inverse(const PhiFunction& phi, double r) {
  require(std::isfinite(r) && r >= 0.0, ErrorCode::InvalidArgument, "phi_inverse needs finite r >= 0");
  if (r == 0.0) return 0.0;
  double hi;
  if (phi.kind == PhiFunction::Kind::Tabulated) {
    require(r <= phi.values.back(), ErrorCode::RangeExceeded,
            "r = " + std::to_string(r) + " exceeds the tabulated range");
    hi = phi.knots.back();
  } else if (std::isfinite(phi.lambda0)) {
    require(r < phi_closed(phi, phi.lambda0), ErrorCode::RangeExceeded,
            "r exceeds phi on (-lambda0, lambda0)");
    hi = phi.lambda0;
  } else {
    hi = 1.0;
    while (phi_closed(phi, hi) < r) hi *= 2.0;
  }
  double lo = 0.0;
  for (int it = 0; it < 2000; ++it) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    if (phi_closed(phi, mid) < r) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

double psi_from_phi(const PhiFunction& phi, double r) {
  require(r >= 2.0, ErrorCode::InvalidArgument, "psi(r) is defined for r >= 2");
  return r / phi_inverse(phi, r);
}

NormEstimate bphi_norm(std::span<const double> samples, const PhiFunction& phi, const BphiOptions& opts) {
  require(!samples.empty(), ErrorCode::InvalidArgument, "need at least one sample");
  for (double v : samples) require(std::isfinite(v), ErrorCode::InvalidArgument, "samples must be finite");
  NormEstimate out;
  const double rms = rms_of(samples);
  if (rms == 0.0) return out;

  const std::size_t n = samples.size();
  long double sum = 0.0L;
  for (double v : samples) sum += v;
  const double mean = static_cast<double>(sum / static_cast<long double>(n));
  long double ss = 0.0L;
  for (double v : samples) ss += (v - mean) * static_cast<long double>(v - mean);
  const double se = n >= 2 ? std::sqrt(static_cast<double>(ss) / static_cast<double>(n - 1)) /
                                 std::sqrt(static_cast<double>(n))
                           : 0.0;
  if (std::abs(mean) > opts.center_z * se) {
    throw Error(ErrorCode::NotCentered, "sample mean " + std::to_string(mean) + " exceeds " +
                                            std::to_string(opts.center_z) + " standard errors");
  }

  std::vector<double> ts;
  for (double t : opts.t_grid) {
    require(std::isfinite(t) && t != 0.0, ErrorCode::InvalidArgument, "t grid must be finite and non-zero");
    ts.push_back(std::abs(t));
  }
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  require(!ts.empty(), ErrorCode::InvalidArgument, "empty lambda grid");

  std::vector<double> z(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = samples[i] / rms;

  // Index 2k is +t_k, 2k+1 is -t_k.
  std::vector<MgfPoint> pts(2 * ts.size());
  parallel_for(pts.size(), [&](std::size_t i) {
    const double t = (i % 2 == 0 ? 1.0 : -1.0) * ts[i / 2];
    pts[i] = empirical_log_mgf(z, t);
  });

  std::vector<std::size_t> kept;
  for (int side = 0; side < 2; ++side) {
    for (std::size_t k = 0; k < ts.size(); ++k) {
      const std::size_t i = 2 * k + static_cast<std::size_t>(side);
      if (pts[i].ess < opts.min_ess) {
        out.trimmed += ts.size() - k;
        break;
      }
      kept.push_back(i);
    }
  }
  if (kept.empty()) {
    throw Error(ErrorCode::MgfUnstable, "no grid point keeps ESS >= " + std::to_string(opts.min_ess));
  }
  std::sort(kept.begin(), kept.end());

  // Standardized tau per grid point: phi^{-1}(log M(t)) / |t|, in units of rms.
  double best = 0.0;
  double binding = 0.0;
  for (std::size_t i : kept) {
    const double t = (i % 2 == 0 ? 1.0 : -1.0) * ts[i / 2];
    const double lambda = t / rms;
    out.grid.push_back(lambda);
    const double L = pts[i].log_mgf;
    double tau = 0.0;
    if (L > 0.0) {
      try {
        tau = phi_inverse(phi, L) / std::abs(t);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::RangeExceeded) throw;
        tau = kInf;
      }
    }
    if (tau > best || out.grid.size() == 1) {
      best = std::max(best, tau);
      binding = lambda;
    }
  }
  out.value = best * rms;
  out.binding = binding;
  out.finite = std::isfinite(out.value);
  return out;
}

NormEstimate gpsi_norm(std::span<const double> samples, const PhiFunction& phi, std::span<const double> r_grid) {
  require(!samples.empty(), ErrorCode::InvalidArgument, "need at least one sample");
  std::vector<double> rs(r_grid.begin(), r_grid.end());
  if (rs.empty()) {
    for (double r = 2.0; r <= 10.0 + 1e-12; r += 0.5) rs.push_back(r);
  }
  for (double r : rs) require(r >= 2.0 && std::isfinite(r), ErrorCode::InvalidArgument, "r grid needs r >= 2");

  std::vector<double> logs;
  for (double v : samples) {
    require(std::isfinite(v), ErrorCode::InvalidArgument, "samples must be finite");
    if (v != 0.0) logs.push_back(std::log(std::abs(v)));
  }
  NormEstimate out;
  out.grid = rs;
  if (logs.empty()) return out;

  const double logn = std::log(static_cast<double>(samples.size()));
  std::vector<double> scaled(logs.size());
  double best = -1.0;
  for (double r : rs) {
    for (std::size_t i = 0; i < logs.size(); ++i) scaled[i] = r * logs[i];
    const double log_moment = log_sum_exp(scaled) - logn;
    double v;
    try {
      v = std::exp(log_moment / r) / psi_from_phi(phi, r);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::RangeExceeded) throw;
      v = kInf;
    }
    if (v > best) {
      best = v;
      out.binding = r;
    }
  }
  out.value = best;
  out.finite = std::isfinite(best);
  return out;
}

TailBoundReport tail_bound_check(std::span<const double> samples, const PhiFunction& phi, double C) {
  require(std::isfinite(C) && C > 0.0, ErrorCode::InvalidArgument, "tail constant C must be positive");
  std::vector<double> x(samples.begin(), samples.end());
  std::sort(x.begin(), x.end());
  const std::size_t n = x.size();
  TailBoundReport out;
  const double log2 = std::log(2.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = x[i];
    if (!(u > 0.0)) continue;
    if (i + 1 < n && x[i + 1] == u) continue;
    const std::size_t above = n - 1 - i;
    const double env = wilson_interval(above, n, 1.645).second;
    const double margin = std::log(env) - (log2 - young_fenchel(phi, u / C));
    ++out.n_checked;
    if (margin > out.worst_log_margin) {
      out.worst_log_margin = margin;
      out.worst_u = u;
    }
  }
  out.passes = out.worst_log_margin <= 0.0;
  return out;
}

double smallest_tail_constant(std::span<const double> samples, const PhiFunction& phi) {
  double top = 0.0;
  for (double v : samples) top = std::max(top, v);
  if (!(top > 0.0)) return 0.0;
  auto ok = [&](double c) { return tail_bound_check(samples, phi, c).passes; };
  double hi = top;
  for (int i = 0; i < 200 && !ok(hi); ++i) hi *= 2.0;
  require(ok(hi), ErrorCode::NoConvergence, "no tail constant found");
  double lo = hi;
  for (int i = 0; i < 200 && ok(lo); ++i) lo *= 0.5;
  if (ok(lo)) return lo;
  while (hi / lo > 1.0 + 1e-6) {
    const double mid = std::sqrt(lo * hi);
    if (ok(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

KramerReport kramer_check(const Eigen::MatrixXd& per_x_samples, std::span<const double> mu_candidates,
                          std::span<const double> lambda_grid) {
  const auto rows = static_cast<std::size_t>(per_x_samples.rows());
  const auto cols = static_cast<std::size_t>(per_x_samples.cols());
  require(rows >= 1, ErrorCode::InvalidArgument, "need at least one grid point");
  require(cols >= 1000, ErrorCode::InvalidArgument, "need at least 1000 samples per grid point");
  require(!mu_candidates.empty(), ErrorCode::InvalidArgument, "need at least one mu candidate");
  for (double m : mu_candidates) {
    require(std::isfinite(m) && m > 0.0, ErrorCode::InvalidArgument, "mu candidates must be positive");
  }

  KramerReport out;
  if (lambda_grid.empty()) {
    out.lambda_grid = {-2.0, -1.5, -1.0, -0.5, 0.5, 1.0, 1.5, 2.0};
  } else {
    out.lambda_grid.assign(lambda_grid.begin(), lambda_grid.end());
  }

  // Largest mu each row tolerates: min over sample points of -log(lower) / u,
  // lower being the one-sided Wilson lower bound of the tail frequency. The
  // upper bound cannot resolve exp(-mu u) ~ 1 - mu u near u = 0.
  std::vector<double> mu_row(rows, kInf);
  std::vector<std::vector<double>> phi_row(rows, std::vector<double>(out.lambda_grid.size()));
  parallel_for(rows, [&](std::size_t r) {
    const Eigen::VectorXd row = per_x_samples.row(static_cast<Eigen::Index>(r)).transpose();
    const double mean = row.mean();
    std::vector<double> c(cols);
    for (std::size_t j = 0; j < cols; ++j) c[j] = row[static_cast<Eigen::Index>(j)] - mean;
    for (std::size_t k = 0; k < out.lambda_grid.size(); ++k) {
      phi_row[r][k] = empirical_log_mgf(c, out.lambda_grid[k]).log_mgf;
    }
    for (double& v : c) v = std::abs(v);
    std::sort(c.begin(), c.end());
    for (std::size_t j = 0; j < cols; ++j) {
      const double u = c[j];
      if (!(u > 0.0) || (j + 1 < cols && c[j + 1] == u)) continue;
      const double lower = wilson_interval(cols - 1 - j, cols, 1.645).first;
      if (lower > 0.0) mu_row[r] = std::min(mu_row[r], -std::log(lower) / u);
    }
  });

  const double mu_max = *std::min_element(mu_row.begin(), mu_row.end());
  double best = 0.0;
  for (double m : mu_candidates) {
    if (m <= mu_max) best = std::max(best, m);
  }
  if (best == 0.0) {
    throw Error(ErrorCode::NoCandidatePasses,
                "no mu candidate passes; largest admissible mu is " + std::to_string(mu_max));
  }
  out.mu = best;
  out.phi0.resize(out.lambda_grid.size());
  for (std::size_t k = 0; k < out.lambda_grid.size(); ++k) {
    double m = kNegInf;
    for (std::size_t r = 0; r < rows; ++r) m = std::max(m, phi_row[r][k]);
    out.phi0[k] = m;
  }
  return out;
}

}  // namespace fieldtail
