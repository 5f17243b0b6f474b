#include "fieldtail/laplace_saddle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <Eigen/Eigenvalues>

#include "fieldtail/error.hpp"
#include "fieldtail/parallel.hpp"

namespace fieldtail {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
const double kLog2Pi = std::log(2.0 * std::numbers::pi);

void check_lambda(double lambda, bool allow_zero) {
  require(std::isfinite(lambda) && (allow_zero ? lambda >= 0.0 : lambda > 0.0),
          ErrorCode::InvalidArgument,
          allow_zero ? "lambda must be finite and >= 0" : "lambda must be finite and > 0");
}

double max_of(std::span<const double> v) {
  double m = kNegInf;
  for (double x : v) m = std::max(m, x);
  return m;
}

// Delete-one jackknife standard error of a statistic with leave-one-out
// values theta_i.
double jackknife_se(const std::vector<double>& theta) {
  const auto n = static_cast<double>(theta.size());
  if (theta.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  long double mean = 0.0L;
  for (double t : theta) mean += t;
  mean /= n;
  long double ss = 0.0L;
  for (double t : theta) ss += (t - mean) * (t - mean);
  return static_cast<double>(std::sqrt((n - 1.0) / n * ss));
}

}  // namespace

double log_K(std::size_t dim) { return -0.5 * static_cast<double>(dim) * kLog2Pi; }

LogIntegral integral_I(const FieldSample& sample, double lambda, const QuadOptions& quad,
                       const MaxResult* peak) {
  check_lambda(lambda, true);
  const auto& dom = sample.spec().domain;
  auto log_f = [&](std::span<const double> x) {
    const Jet jet = sample.jet_unchecked(x);
    const double z = zeta_from_hessian(jet.hessian);
    if (z == 0.0) return kNegInf;
    return std::log(z) + lambda * jet.value;
  };

  std::optional<Focus> focus;
  if (peak != nullptr && lambda > 0.0 && peak->x0.size() == sample.dim()) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(peak->hessian_at_max, Eigen::EigenvaluesOnly);
    const double curvature = std::max(eig.eigenvalues().cwiseAbs().maxCoeff(), 1e-300);
    focus = Focus{peak->x0, 4.0 / std::sqrt(lambda * curvature)};
  }
  return integrate_log(dom.lower, dom.upper, log_f, quad, focus);
}

LogValue saddle_approx(const MaxResult& result, double lambda, double det_tol) {
  check_lambda(lambda, false);
  if (!check_nondegeneracy(result, det_tol)) {
    throw Error(ErrorCode::DegenerateMaximum,
                result.interior ? "maximum has a degenerate or indefinite Hessian"
                                : "maximum lies on the domain boundary");
  }
  const double d = static_cast<double>(result.x0.size());
  return LogValue::from_log(0.5 * d * (kLog2Pi - std::log(lambda)) + lambda * result.M);
}

LogValue printed_constant_approx(const MaxResult& result, double lambda) {
  check_lambda(lambda, false);
  const double d = static_cast<double>(result.x0.size());
  return LogValue::from_log(log_K(result.x0.size()) - 0.5 * d * std::log(lambda) + lambda * result.M);
}

SaddleReport pathwise_report(const FieldSample& sample, const MaxResult& peak, double lambda,
                             const QuadOptions& quad, double det_tol) {
  SaddleReport r;
  r.lambda = lambda;
  r.log_approx = saddle_approx(peak, lambda, det_tol);
  r.log_approx_printed = printed_constant_approx(peak, lambda);
  const LogIntegral I = integral_I(sample, lambda, quad, &peak);
  r.log_I = I.value;
  r.n_quad_points = I.n_points;
  r.ratio = (r.log_I / r.log_approx).to_linear();
  return r;
}

SaddleReport pathwise_report(const FieldSample& sample, double lambda, const SaddleOptions& opts) {
  const MaxResult peak = find_max(sample, opts.max);
  return pathwise_report(sample, peak, lambda, opts.quad, opts.max.det_tol);
}

double pathwise_ratio(const FieldSample& sample, double lambda, const SaddleOptions& opts) {
  return pathwise_report(sample, lambda, opts).ratio;
}

std::vector<double> ReplicateTable::maxima() const {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.M);
  return out;
}

std::vector<double> ReplicateTable::log_integrals(std::size_t lambda_index) const {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.log_I.at(lambda_index));
  return out;
}

ReplicateTable simulate_replicates(const std::shared_ptr<const FieldSpec>& spec,
                                   std::span<const double> lambdas, std::size_t n,
                                   const SaddleOptions& opts, std::uint64_t first_id) {
  require(spec != nullptr, ErrorCode::InvalidArgument, "null field spec");
  require(n >= 1, ErrorCode::InvalidArgument, "need at least one replicate");
  for (double l : lambdas) check_lambda(l, true);
  spec->validate();

  ReplicateTable table;
  table.dim = spec->dim();
  table.lambdas.assign(lambdas.begin(), lambdas.end());
  const std::size_t count = spec->deterministic() ? 1 : n;
  table.rows.resize(count);
  parallel_for(count, [&](std::size_t i) {
    const FieldSample sample = sample_field(spec, first_id + i);
    const MaxResult peak = find_max(sample, opts.max);
    ReplicateRecord rec;
    rec.replicate_id = first_id + i;
    rec.M = peak.M;
    rec.interior = peak.interior;
    rec.nondegenerate = check_nondegeneracy(peak, opts.max.det_tol, opts.max.eig_tol);
    for (double l : table.lambdas) {
      rec.log_I.push_back(integral_I(sample, l, opts.quad, &peak).value.log_magnitude);
    }
    table.rows[i] = std::move(rec);
  });
  return table;
}

GEstimate g_from_log_integrals(std::span<const double> log_I, std::size_t dim) {
  require(!log_I.empty(), ErrorCode::InvalidArgument, "need at least one replicate");
  const std::size_t n = log_I.size();
  const double c = max_of(log_I);
  GEstimate out;
  out.n = n;
  if (c == kNegInf) {
    out.log_se = n < 2 ? std::numeric_limits<double>::quiet_NaN() : 0.0;
    return out;
  }
  long double total = 0.0L;
  for (double l : log_I) total += std::exp(static_cast<long double>(l - c));
  const double logn = std::log(static_cast<double>(n));
  out.log_G = LogValue::from_log(log_K(dim) + c + static_cast<double>(std::log(total)) - logn);

  std::vector<double> theta;
  if (n >= 2) {
    theta.reserve(n);
    const double logn1 = std::log(static_cast<double>(n - 1));
    for (double l : log_I) {
      const long double rest = total - std::exp(static_cast<long double>(l - c));
      theta.push_back(rest > 0.0L ? c + static_cast<double>(std::log(rest)) - logn1 : kNegInf);
    }
  }
  out.log_se = jackknife_se(theta);
  return out;
}

GEstimate estimate_G(const std::shared_ptr<const FieldSpec>& spec, double lambda, std::size_t n,
                     const SaddleOptions& opts, std::uint64_t first_id) {
  const double lambdas[] = {lambda};
  const auto table = simulate_replicates(spec, lambdas, n, opts, first_id);
  return g_from_log_integrals(table.log_integrals(0), table.dim);
}

MgfEstimate mgf_from_maxima(std::span<const double> maxima, double lambda, double min_ess) {
  check_lambda(lambda, true);
  require(!maxima.empty(), ErrorCode::InvalidArgument, "need at least one maximum");
  const double top = max_of(maxima);
  long double sw = 0.0L, sw2 = 0.0L;
  for (double m : maxima) {
    const long double w = std::exp(static_cast<long double>(lambda * (m - top)));
    sw += w;
    sw2 += w * w;
  }
  MgfEstimate out;
  out.n = maxima.size();
  out.log_mgf = lambda * top + static_cast<double>(std::log(sw)) -
                std::log(static_cast<double>(maxima.size()));
  out.ess = static_cast<double>(sw * sw / sw2);
  if (out.ess < min_ess) {
    throw Error(ErrorCode::EffectiveSampleSizeTooSmall,
                "ESS " + std::to_string(out.ess) + " < " + std::to_string(min_ess) +
                    " at lambda " + std::to_string(lambda) + " (estimate log E e^{lambda M} = " +
                    std::to_string(out.log_mgf) + ")");
  }
  return out;
}

MgfEstimate mgf_of_max(const std::shared_ptr<const FieldSpec>& spec, double lambda, std::size_t n,
                       const SaddleOptions& opts, std::uint64_t first_id) {
  require(spec != nullptr, ErrorCode::InvalidArgument, "null field spec");
  spec->validate();
  check_lambda(lambda, true);
  const std::size_t count = spec->deterministic() ? 1 : n;
  require(count >= 1, ErrorCode::InvalidArgument, "need at least one replicate");
  std::vector<double> maxima(count);
  parallel_for(count, [&](std::size_t i) {
    maxima[i] = find_max(sample_field(spec, first_id + i), opts.max).M;
  });
  return mgf_from_maxima(maxima, lambda, spec->deterministic() ? 0.0 : opts.min_ess);
}

Theorem1Report theorem1_from_samples(std::span<const double> maxima, std::span<const double> log_I,
                                     std::size_t dim, double lambda, double min_ess) {
  check_lambda(lambda, false);
  require(!maxima.empty() && maxima.size() == log_I.size(), ErrorCode::InvalidArgument,
          "maxima and log integrals must be non-empty and of equal length");
  const std::size_t n = maxima.size();
  const MgfEstimate mgf = mgf_from_maxima(maxima, lambda, min_ess);
  const GEstimate g = g_from_log_integrals(log_I, dim);
  require(!g.log_G.is_zero(), ErrorCode::DegenerateMaximum, "G(lambda) is zero for every replicate");

  Theorem1Report r;
  r.lambda = lambda;
  r.n = n;
  r.ess = mgf.ess;
  r.log_mgf = mgf.log_mgf;
  r.log_G = g.log_G.log_magnitude;
  const double log_scale = 0.5 * static_cast<double>(dim) * std::log(lambda) + log_K(dim);
  r.ratio = std::exp(r.log_mgf - 0.5 * static_cast<double>(dim) * std::log(lambda) - r.log_G);

  // Numerator a_i = exp(lambda M_i), denominator b_i = lambda^{d/2} K(d) I_i,
  // both rescaled by a common shift so the leave-one-out sums stay finite.
  std::vector<double> la(n), lb(n);
  double shift = kNegInf;
  for (std::size_t i = 0; i < n; ++i) {
    la[i] = lambda * maxima[i];
    lb[i] = log_scale + log_I[i];
    shift = std::max({shift, la[i], lb[i]});
  }
  long double A = 0.0L, B = 0.0L;
  std::vector<long double> a(n), b(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = std::exp(static_cast<long double>(la[i] - shift));
    b[i] = std::exp(static_cast<long double>(lb[i] - shift));
    A += a[i];
    B += b[i];
  }
  std::vector<double> theta;
  if (n >= 2) {
    theta.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      const long double den = B - b[i];
      if (den > 0.0L) theta.push_back(static_cast<double>((A - a[i]) / den));
    }
  }
  r.ratio_se = jackknife_se(theta);
  r.ci_low = r.ratio - 1.96 * r.ratio_se;
  r.ci_high = r.ratio + 1.96 * r.ratio_se;
  return r;
}

Theorem1Report theorem1_ratio(const std::shared_ptr<const FieldSpec>& spec, double lambda,
                              std::size_t n, const SaddleOptions& opts, std::uint64_t first_id) {
  const double lambdas[] = {lambda};
  const auto table = simulate_replicates(spec, lambdas, n, opts, first_id);
  const double min_ess = spec->deterministic() ? 0.0 : opts.min_ess;
  return theorem1_from_samples(table.maxima(), table.log_integrals(0), table.dim, lambda, min_ess);
}

LogValue corollary_R_from_log_integrals(std::span<const double> log_I, std::size_t dim, double lambda) {
  check_lambda(lambda, false);
  const GEstimate g = g_from_log_integrals(log_I, dim);
  if (g.log_G.is_zero()) return LogValue::zero();
  return LogValue::from_log((0.5 * static_cast<double>(dim) - 1.0) * std::log(lambda) +
                            g.log_G.log_magnitude);
}

LogValue corollary_R(const std::shared_ptr<const FieldSpec>& spec, double lambda, std::size_t n,
                     const SaddleOptions& opts, std::uint64_t first_id) {
  const double lambdas[] = {lambda};
  const auto table = simulate_replicates(spec, lambdas, n, opts, first_id);
  return corollary_R_from_log_integrals(table.log_integrals(0), table.dim, lambda);
}

TailTransform empirical_tail_transform(std::span<const double> maxima, double lambda) {
  check_lambda(lambda, false);
  require(!maxima.empty(), ErrorCode::InvalidArgument, "need at least one maximum");
  std::vector<double> m(maxima.begin(), maxima.end());
  std::sort(m.begin(), m.end());
  const std::size_t n = m.size();
  const double logn = std::log(static_cast<double>(n));

  // lambda * integral_a^b exp(lambda z) dz in log form; a may be -inf.
  auto log_segment = [&](double a, double b) {
    if (!(b > a)) return kNegInf;
    if (a == kNegInf) return lambda * b;
    return lambda * b + std::log(-std::expm1(lambda * (a - b)));
  };

  std::vector<double> full, half;
  full.reserve(n);
  half.reserve(n);
  // T = (n - k) / n on [m_k, m_{k+1}), with m_0 = -inf and T = 1 below m_1.
  for (std::size_t k = 0; k < n; ++k) {
    const double a = k == 0 ? kNegInf : m[k - 1];
    const double b = m[k];
    const double log_tail = std::log(static_cast<double>(n - k)) - logn;
    full.push_back(log_segment(a, b) + log_tail);
    half.push_back(log_segment(std::max(a, 0.0), b) + log_tail);
  }
  return {log_sum_exp(full), log_sum_exp(half)};
}

}  // namespace fieldtail
