#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "fieldtail/extremum.hpp"
#include "fieldtail/field_model.hpp"
#include "fieldtail/log_value.hpp"
#include "fieldtail/quadrature.hpp"

namespace fieldtail {

struct SaddleOptions {
  MaxOptions max;
  QuadOptions quad;
  double min_ess = 10.0;
};

// log K(d) = -(d/2) log(2 pi).
double log_K(std::size_t dim);

// I(lambda) = integral over D of zeta(x) exp(lambda xi(x)). When `peak` is
// given the quadrature refines the cell holding x0 down to the Laplace
// width lambda^{-1/2} |eig|^{-1/2}.
LogIntegral integral_I(const FieldSample& sample, double lambda, const QuadOptions& quad = {},
                       const MaxResult* peak = nullptr);

// (2 pi / lambda)^{d/2} exp(lambda M). Throws DegenerateMaximum unless the
// maximum is interior and non-degenerate.
LogValue saddle_approx(const MaxResult& result, double lambda, double det_tol = 1e-8);

// K(d) lambda^{-d/2} exp(lambda M): the constant as printed in the source
// derivation; off from saddle_approx by exactly (2 pi)^{-d}.
LogValue printed_constant_approx(const MaxResult& result, double lambda);

struct SaddleReport {
  double lambda = 0.0;
  LogValue log_I;
  LogValue log_approx;
  LogValue log_approx_printed;
  double ratio = 0.0;  // I / approx
  std::size_t n_quad_points = 0;
};

SaddleReport pathwise_report(const FieldSample& sample, const MaxResult& peak, double lambda,
                             const QuadOptions& quad = {}, double det_tol = 1e-8);
SaddleReport pathwise_report(const FieldSample& sample, double lambda, const SaddleOptions& opts = {});
double pathwise_ratio(const FieldSample& sample, double lambda, const SaddleOptions& opts = {});

// Per-replicate maxima and log I(lambda_k) over one replicate id range; every
// Monte Carlo estimator below is a reduction of this table, so estimators
// built from the same table are paired by construction.
struct ReplicateRecord {
  std::uint64_t replicate_id = 0;
  double M = 0.0;
  bool interior = false;
  bool nondegenerate = false;
  std::vector<double> log_I;  // one per lambda; -inf encodes I = 0
};

struct ReplicateTable {
  std::size_t dim = 0;
  std::vector<double> lambdas;
  std::vector<ReplicateRecord> rows;

  std::vector<double> maxima() const;
  std::vector<double> log_integrals(std::size_t lambda_index) const;
};

// Replicate ids first_id .. first_id + n - 1. A deterministic spec yields a
// single row whatever n is.
ReplicateTable simulate_replicates(const std::shared_ptr<const FieldSpec>& spec,
                                   std::span<const double> lambdas, std::size_t n,
                                   const SaddleOptions& opts = {}, std::uint64_t first_id = 0);

struct GEstimate {
  LogValue log_G;
  double log_se = 0.0;  // jackknife standard error of log G; NaN when n < 2
  std::size_t n = 0;
};

// K(d) * mean(I_i) from per-replicate log I values.
GEstimate g_from_log_integrals(std::span<const double> log_I, std::size_t dim);
GEstimate estimate_G(const std::shared_ptr<const FieldSpec>& spec, double lambda, std::size_t n,
                     const SaddleOptions& opts = {}, std::uint64_t first_id = 0);

struct MgfEstimate {
  double log_mgf = 0.0;
  double ess = 0.0;  // (sum w)^2 / sum w^2 with w_i = exp(lambda (M_i - max M))
  std::size_t n = 0;
};

// Throws EffectiveSampleSizeTooSmall when ess < min_ess.
MgfEstimate mgf_from_maxima(std::span<const double> maxima, double lambda, double min_ess = 10.0);
MgfEstimate mgf_of_max(const std::shared_ptr<const FieldSpec>& spec, double lambda, std::size_t n,
                       const SaddleOptions& opts = {}, std::uint64_t first_id = 0);

struct Theorem1Report {
  double lambda = 0.0;
  double log_mgf = 0.0;
  double log_G = 0.0;
  double ratio = 0.0;  // E exp(lambda M) / (lambda^{d/2} G(lambda))
  double ratio_se = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double ess = 0.0;
  std::size_t n = 0;
};

// Ratio of means over paired (M_i, I_i); jackknife standard error and a 95%
// normal interval. `maxima` and `log_I` may come from different replicate
// sets to form the unpaired estimator.
Theorem1Report theorem1_from_samples(std::span<const double> maxima, std::span<const double> log_I,
                                     std::size_t dim, double lambda, double min_ess = 10.0);
Theorem1Report theorem1_ratio(const std::shared_ptr<const FieldSpec>& spec, double lambda,
                              std::size_t n, const SaddleOptions& opts = {},
                              std::uint64_t first_id = 0);

// log R(lambda) = (d/2 - 1) log lambda - (d/2) log 2 pi + log mean I_i,
// i.e. R = lambda^{d/2 - 1} G.
LogValue corollary_R_from_log_integrals(std::span<const double> log_I, std::size_t dim, double lambda);
LogValue corollary_R(const std::shared_ptr<const FieldSpec>& spec, double lambda, std::size_t n,
                     const SaddleOptions& opts = {}, std::uint64_t first_id = 0);

// lambda * integral of exp(lambda z) T_emp(z) dz for the empirical tail of
// `maxima`, integrated segment by segment between order statistics. Over
// the whole line this equals the empirical mean of exp(lambda M) exactly;
// over [0, inf) it differs by the mean of min(exp(lambda M), 1).
struct TailTransform {
  double log_full_line = 0.0;
  double log_positive_half = 0.0;  // -inf when no maximum exceeds 0
};
TailTransform empirical_tail_transform(std::span<const double> maxima, double lambda);

}  // namespace fieldtail
