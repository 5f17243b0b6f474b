#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "fieldtail/extremum.hpp"
#include "fieldtail/field_model.hpp"

namespace fieldtail {

// R(lambda) ~ C_R lambda^alpha exp(lambda^q / q) and the matching tail
// parameters: p = q / (q - 1), gamma = alpha (p - 1) - 1 + p / 2 and
// Delta = (2 gamma + 2 - p) / (2 (p - 1)), which reduces to alpha.
struct AsymptoticParams {
  double alpha = 0.0;
  double C_R = 1.0;
  double q = 2.0;
  double p = 2.0;
  double gamma = 0.0;
  double Delta = 0.0;

  static AsymptoticParams from_growth(double alpha, double C_R, double q);
  void validate() const;
};

double delta_exponent(double gamma, double p);

struct TailCurve {
  std::vector<double> u;
  std::vector<double> tail;
  std::vector<double> lower95;
  std::vector<double> upper95;
  std::string source;        // "empirical" or "predicted"
  std::size_t n = 0;         // sample count for empirical curves
  bool clipped = false;      // some predicted value exceeded 1
  bool monotone_enforced = false;

  // Increasing u, tail in [0, 1] and non-increasing; throws InvalidArgument.
  void validate() const;
};

// T(u) = #{M_i > u} / n with 95% Wilson bands.
TailCurve empirical_tail(std::span<const double> maxima, std::span<const double> u_grid);

struct LaplaceCheck {
  double log_numeric = 0.0;
  double log_formula = 0.0;
  double ratio = 0.0;
};

// integral_0^inf y^gamma exp(lambda y - y^p / p) dy against
// (2 pi)^{1/2} lambda^Delta exp(lambda^q / q).
LaplaceCheck laplace_asymptotic_44(double gamma, double p, double lambda);

// log of (2 pi)^{-1/2} C_R u^gamma exp(-u^p / p), before clipping.
double log_tail_formula(const AsymptoticParams& params, double u);

// The formula on u_grid, clipped to [0, 1]; a formula increasing in u is
// replaced by its supremum to the right so the curve is non-increasing.
TailCurve tail_prediction_45(const AsymptoticParams& params, std::span<const double> u_grid);

struct FitRow {
  double q = 0.0;
  double alpha = 0.0;
  double log_C = 0.0;
  double residual = 0.0;  // residual sum of squares
  bool refined = false;
};

struct FitReport {
  AsymptoticParams params;
  std::vector<FitRow> table;
  bool degenerate = false;
  std::string reason;
};

// For each q, least squares of log R - lambda^q / q on (log lambda, 1); the
// best candidate is refined by golden section between its neighbours.
// Flat growth or a non-unimodal residual profile sets `degenerate`; with no
// exponential growth q, p, gamma and Delta are NaN.
FitReport fit_R_params(std::span<const double> lambda, std::span<const double> log_R,
                       std::span<const double> q_candidates = {});

struct TauberianCheck {
  double log_integral = 0.0;
  double log_reference = 0.0;
  double ratio = 0.0;
};

// integral_0^inf exp(lambda z) T(z) dz for the clipped tail formula,
// against C_R lambda^alpha exp(lambda^q / q).
TauberianCheck tauberian_consistency(const AsymptoticParams& params, double lambda);

struct ShapeFit {
  double slope = 0.0;      // of -log T on u^p / p
  double intercept = 0.0;
  double slope_with_log = 0.0;  // same, with log u as an extra regressor
  double log_coeff = 0.0;       // coefficient of log u in that fit
  std::size_t n_points = 0;
};

// Regression over the top `top_fraction` of the order statistics, using
// T(M_(k)) = #{M > M_(k)} / n; points with T = 0 or u <= 0 are dropped.
ShapeFit shape_regression(std::span<const double> maxima, double p, double top_fraction = 0.1);

// Maxima of replicates first_id .. first_id + n - 1 (one value for a
// deterministic spec).
std::vector<double> simulate_maxima(const std::shared_ptr<const FieldSpec>& spec, std::size_t n,
                                    const MaxOptions& opts = {}, std::uint64_t first_id = 0);

}  // namespace fieldtail
