#include "fieldtail/tail_asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

#include <Eigen/Dense>

#include "fieldtail/error.hpp"
#include "fieldtail/parallel.hpp"
#include "fieldtail/quadrature.hpp"
#include "fieldtail/stats.hpp"

namespace fieldtail {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
const double kHalfLog2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

// log of integral_0^inf exp(log_g(y)) dy for an integrand peaked near
// y_star with Laplace width `scale`.
double integrate_half_line(const std::function<double(double)>& log_g, double y_star, double scale) {
  const double peak = log_g(y_star);
  double offset = 8.0 * scale;
  while (log_g(y_star + offset) > peak - 60.0) offset *= 2.0;
  const double lower[] = {0.0};
  const double upper[] = {y_star + offset};
  QuadOptions quad;
  quad.rel_tol = 1e-12;
  quad.max_cells = 400000;
  auto f = [&](std::span<const double> x) { return log_g(x[0]); };
  const LogIntegral I = integrate_log(lower, upper, f, quad, Focus{{y_star}, scale});
  return I.value.log_magnitude;
}

double saddle_of(double p, double lambda) { return std::pow(lambda, 1.0 / (p - 1.0)); }

// 1 / sqrt(phi''(y*)) for phi(y) = y^p / p.
double saddle_width(double p, double y_star) { return 1.0 / std::sqrt((p - 1.0) * std::pow(y_star, p - 2.0)); }

void check_saddle(double p, double lambda) {
  require(std::isfinite(p) && p > 1.0, ErrorCode::InvalidArgument, "p must exceed 1");
  require(std::isfinite(lambda) && lambda > 0.0, ErrorCode::InvalidArgument, "lambda must be positive");
  require(saddle_of(p, lambda) > 1.0, ErrorCode::InvalidArgument,
          "lambda too small: the saddle lambda^{1/(p-1)} must exceed 1");
}

FitRow fit_for_q(std::span<const double> lambda, std::span<const double> log_R, double q) {
  std::vector<double> x(lambda.size()), y(lambda.size());
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    x[i] = std::log(lambda[i]);
    y[i] = log_R[i] - std::pow(lambda[i], q) / q;
  }
  const LineFit f = fit_line(x, y);
  return {q, f.slope, f.intercept, f.rss, false};
}

}  // namespace

double delta_exponent(double gamma, double p) { return (2.0 * gamma + 2.0 - p) / (2.0 * (p - 1.0)); }

AsymptoticParams AsymptoticParams::from_growth(double alpha, double C_R, double q) {
  AsymptoticParams a;
  a.alpha = alpha;
  a.C_R = C_R;
  a.q = q;
  a.p = q / (q - 1.0);
  a.gamma = alpha * (a.p - 1.0) - 1.0 + 0.5 * a.p;
  a.Delta = delta_exponent(a.gamma, a.p);
  a.validate();
  return a;
}

void AsymptoticParams::validate() const {
  require(std::isfinite(alpha), ErrorCode::InvalidArgument, "alpha must be finite");
  require(std::isfinite(C_R) && C_R > 0.0, ErrorCode::InvalidArgument, "C_R must be positive");
  require(std::isfinite(q) && q > 1.0, ErrorCode::InvalidArgument, "q must exceed 1");
  require(std::abs(1.0 / p + 1.0 / q - 1.0) < 1e-12, ErrorCode::InvalidArgument, "p and q must be conjugate");
  require(std::abs(Delta - delta_exponent(gamma, p)) < 1e-12 * std::max(1.0, std::abs(Delta)),
          ErrorCode::InvalidArgument, "Delta does not match gamma and p");
}

void TailCurve::validate() const {
  const std::size_t m = u.size();
  require(tail.size() == m && lower95.size() == m && upper95.size() == m, ErrorCode::InvalidArgument,
          "tail curve columns differ in length");
  for (std::size_t i = 0; i < m; ++i) {
    require(tail[i] >= 0.0 && tail[i] <= 1.0, ErrorCode::InvalidArgument, "tail values must lie in [0, 1]");
    if (i > 0) {
      require(u[i] > u[i - 1], ErrorCode::InvalidArgument, "u grid must be strictly increasing");
      require(tail[i] <= tail[i - 1], ErrorCode::InvalidArgument, "tail must be non-increasing");
    }
  }
}

TailCurve empirical_tail(std::span<const double> maxima, std::span<const double> u_grid) {
  require(!maxima.empty(), ErrorCode::InvalidArgument, "need at least one maximum");
  std::vector<double> m(maxima.begin(), maxima.end());
  std::sort(m.begin(), m.end());
  TailCurve c;
  c.source = "empirical";
  c.n = m.size();
  for (double u : u_grid) {
    const auto above = static_cast<std::size_t>(m.end() - std::upper_bound(m.begin(), m.end(), u));
    const auto [lo, hi] = wilson_interval(above, c.n, 1.96);
    c.u.push_back(u);
    c.tail.push_back(static_cast<double>(above) / static_cast<double>(c.n));
    c.lower95.push_back(lo);
    c.upper95.push_back(hi);
  }
  c.validate();
  return c;
}

LaplaceCheck laplace_asymptotic_44(double gamma, double p, double lambda) {
  require(std::isfinite(gamma) && gamma > -1.0, ErrorCode::InvalidArgument, "gamma must exceed -1");
  check_saddle(p, lambda);
  const double ys = saddle_of(p, lambda);
  const double w = saddle_width(p, ys);
  auto exponent = [&](double y) { return lambda * y - std::pow(y, p) / p; };

  LaplaceCheck out;
  if (gamma >= 0.0) {
    auto log_g = [&](double y) {
      const double poly = gamma == 0.0 ? 0.0 : gamma * std::log(y);
      return poly + exponent(y);
    };
    out.log_numeric = integrate_half_line(log_g, ys, w);
  } else {
    // y = s^{1/(1+gamma)} turns y^gamma dy into ds / (1 + gamma).
    const double a = 1.0 / (1.0 + gamma);
    auto log_g = [&](double s) { return -std::log1p(gamma) + exponent(std::pow(s, a)); };
    const double ss = std::pow(ys, 1.0 + gamma);
    const double sw = w * (1.0 + gamma) * std::pow(ys, gamma);
    out.log_numeric = integrate_half_line(log_g, ss, sw);
  }
  const double q = p / (p - 1.0);
  out.log_formula = kHalfLog2Pi + delta_exponent(gamma, p) * std::log(lambda) + std::pow(lambda, q) / q;
  out.ratio = std::exp(out.log_numeric - out.log_formula);
  return out;
}

double log_tail_formula(const AsymptoticParams& params, double u) {
  require(u > 0.0, ErrorCode::InvalidArgument, "tail formula needs u > 0");
  return -kHalfLog2Pi + std::log(params.C_R) + params.gamma * std::log(u) - std::pow(u, params.p) / params.p;
}

TailCurve tail_prediction_45(const AsymptoticParams& params, std::span<const double> u_grid) {
  params.validate();
  TailCurve c;
  c.source = "predicted";
  std::vector<double> logs;
  for (double u : u_grid) {
    double lt = log_tail_formula(params, u);
    if (lt > 0.0) {
      lt = 0.0;
      c.clipped = true;
    }
    c.u.push_back(u);
    logs.push_back(lt);
  }
  for (std::size_t i = logs.size(); i-- > 1;) {
    if (logs[i - 1] < logs[i]) {
      logs[i - 1] = logs[i];
      c.monotone_enforced = true;
    }
  }
  for (double lt : logs) c.tail.push_back(std::exp(lt));
  c.lower95 = c.tail;
  c.upper95 = c.tail;
  c.validate();
  return c;
}

FitReport fit_R_params(std::span<const double> lambda, std::span<const double> log_R,
                       std::span<const double> q_candidates) {
  require(lambda.size() == log_R.size(), ErrorCode::InvalidArgument, "lambda and log R differ in length");
  require(lambda.size() >= 6, ErrorCode::InvalidArgument, "fit needs at least 6 grid points");
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    require(std::isfinite(lambda[i]) && lambda[i] > 0.0 && std::isfinite(log_R[i]), ErrorCode::InvalidArgument,
            "lambda must be positive and log R finite");
    if (i > 0) require(lambda[i] > lambda[i - 1], ErrorCode::InvalidArgument, "lambda grid must increase");
  }
  require(lambda.back() >= 10.0 * lambda.front(), ErrorCode::InvalidArgument,
          "lambda grid must span at least one decade");

  std::vector<double> qs(q_candidates.begin(), q_candidates.end());
  if (qs.empty()) qs = {1.25, 1.5, 2.0, 2.5, 3.0};
  std::sort(qs.begin(), qs.end());
  qs.erase(std::unique(qs.begin(), qs.end()), qs.end());
  for (double q : qs) require(std::isfinite(q) && q > 1.0, ErrorCode::InvalidArgument, "q candidates must exceed 1");

  FitReport out;
  for (double q : qs) out.table.push_back(fit_for_q(lambda, log_R, q));
  std::size_t b = 0;
  for (std::size_t i = 1; i < out.table.size(); ++i) {
    if (out.table[i].residual < out.table[b].residual) b = i;
  }
  FitRow best = out.table[b];

  if (qs.size() >= 2) {
    double lo = qs[b == 0 ? 0 : b - 1];
    double hi = qs[b + 1 < qs.size() ? b + 1 : b];
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = hi - r * (hi - lo), d = lo + r * (hi - lo);
    double fc = fit_for_q(lambda, log_R, c).residual, fd = fit_for_q(lambda, log_R, d).residual;
    for (int it = 0; it < 200 && hi - lo > 1e-13 * hi; ++it) {
      if (fc <= fd) {
        hi = d;
        d = c;
        fd = fc;
        c = hi - r * (hi - lo);
        fc = fit_for_q(lambda, log_R, c).residual;
      } else {
        lo = c;
        c = d;
        fc = fd;
        d = lo + r * (hi - lo);
        fd = fit_for_q(lambda, log_R, d).residual;
      }
    }
    FitRow refined = fit_for_q(lambda, log_R, 0.5 * (lo + hi));
    refined.refined = true;
    out.table.push_back(refined);
    if (refined.residual < best.residual) best = refined;
  }

  // Residuals over the sorted candidates should fall and then rise.
  bool rising = false;
  for (std::size_t i = 1; i < qs.size(); ++i) {
    const double step = out.table[i].residual - out.table[i - 1].residual;
    if (step > 0.0) rising = true;
    if (rising && step < 0.0) {
      out.degenerate = true;
      out.reason = "residual is not unimodal in q across the candidates";
    }
  }

  // Pure power growth without the exponential term.
  std::vector<double> x(lambda.size());
  for (std::size_t i = 0; i < lambda.size(); ++i) x[i] = std::log(lambda[i]);
  const LineFit power = fit_line(x, log_R);
  if (power.rss <= best.residual) {
    out.degenerate = true;
    out.reason = "no exponential growth: a pure power fits at least as well";
    out.params.alpha = power.slope;
    out.params.C_R = std::exp(power.intercept);
    out.params.q = out.params.p = out.params.gamma = out.params.Delta = kNaN;
    return out;
  }
  out.params = AsymptoticParams::from_growth(best.alpha, std::exp(best.log_C), best.q);
  return out;
}

TauberianCheck tauberian_consistency(const AsymptoticParams& params, double lambda) {
  params.validate();
  check_saddle(params.p, lambda);
  const double zs = saddle_of(params.p, lambda);
  const double w = saddle_width(params.p, zs);
  auto log_g = [&](double z) {
    if (z <= 0.0) return params.gamma > 0.0 ? -std::numeric_limits<double>::infinity() : 0.0;
    return std::min(0.0, log_tail_formula(params, z)) + lambda * z;
  };
  TauberianCheck out;
  out.log_integral = integrate_half_line(log_g, zs, w);
  out.log_reference = std::log(params.C_R) + params.alpha * std::log(lambda) + std::pow(lambda, params.q) / params.q;
  out.ratio = std::exp(out.log_integral - out.log_reference);
  return out;
}

ShapeFit shape_regression(std::span<const double> maxima, double p, double top_fraction) {
  require(std::isfinite(p) && p > 1.0, ErrorCode::InvalidArgument, "p must exceed 1");
  require(top_fraction > 0.0 && top_fraction <= 1.0, ErrorCode::InvalidArgument, "top fraction must lie in (0, 1]");
  std::vector<double> m(maxima.begin(), maxima.end());
  std::sort(m.begin(), m.end());
  const std::size_t n = m.size();
  const auto start = static_cast<std::size_t>(std::floor(static_cast<double>(n) * (1.0 - top_fraction)));
  std::vector<double> x, lu, y;
  for (std::size_t k = start; k < n; ++k) {
    const double u = m[k];
    if (!(u > 0.0) || (k + 1 < n && m[k + 1] == u)) continue;
    const auto above = static_cast<std::size_t>(m.end() - std::upper_bound(m.begin(), m.end(), u));
    if (above == 0) continue;
    x.push_back(std::pow(u, p) / p);
    lu.push_back(std::log(u));
    y.push_back(-std::log(static_cast<double>(above) / static_cast<double>(n)));
  }
  ShapeFit out;
  out.n_points = x.size();
  require(x.size() >= 3, ErrorCode::InvalidArgument, "too few positive upper order statistics to regress");
  const LineFit f = fit_line(x, y);
  out.slope = f.slope;
  out.intercept = f.intercept;

  Eigen::MatrixXd A(static_cast<Eigen::Index>(x.size()), 3);
  Eigen::VectorXd b(static_cast<Eigen::Index>(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    A(r, 0) = x[i];
    A(r, 1) = lu[i];
    A(r, 2) = 1.0;
    b(r) = y[i];
  }
  const Eigen::VectorXd coef = A.colPivHouseholderQr().solve(b);
  out.slope_with_log = coef(0);
  out.log_coeff = coef(1);
  return out;
}

std::vector<double> simulate_maxima(const std::shared_ptr<const FieldSpec>& spec, std::size_t n,
                                    const MaxOptions& opts, std::uint64_t first_id) {
  require(spec != nullptr, ErrorCode::InvalidArgument, "null field spec");
  require(n >= 1, ErrorCode::InvalidArgument, "need at least one replicate");
  spec->validate();
  const std::size_t count = spec->deterministic() ? 1 : n;
  std::vector<double> out(count);
  parallel_for(count, [&](std::size_t i) { out[i] = find_max(sample_field(spec, first_id + i), opts).M; });
  return out;
}

}  // namespace fieldtail
