#pragma once

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace fieldtail {

// Even function phi with phi(0) = 0, finite on (-lambda0, lambda0).
//   gaussian    lambda^2 / 2
//   power_p     lambda^2 for |lambda| <= 1, |lambda|^p beyond
//   pure_power  |lambda|^p / p
//   tabulated   piecewise linear through (knots, values) on [0, last knot],
//               extended evenly; lambda0 is the last knot
struct PhiFunction {
  enum class Kind { Gaussian, PowerP, PurePower, Tabulated };

  Kind kind = Kind::Gaussian;
  double p = 2.0;
  double lambda0 = std::numeric_limits<double>::infinity();
  std::vector<double> knots;
  std::vector<double> values;

  static PhiFunction gaussian(double lambda0 = std::numeric_limits<double>::infinity());
  static PhiFunction power_p(double p, double lambda0 = std::numeric_limits<double>::infinity());
  static PhiFunction pure_power(double p);
  static PhiFunction tabulated(std::vector<double> knots, std::vector<double> values);

  // +inf outside the domain.
  double operator()(double lambda) const;
  // Right derivative on lambda >= 0 (analytic kinds only).
  double derivative(double lambda) const;
  // Kinks on (0, lambda0) where the formula changes.
  std::vector<double> breakpoints() const;
  void validate() const;
};

struct PhiProperties {
  bool zero_at_origin = false;
  bool monotone = false;        // non-decreasing on lambda >= 0
  bool convex = false;
  double convexity_defect = 0.0;  // largest negative second difference, as a positive number
  double c_minus = 0.0;         // min phi / lambda^2 on (0, 1]
  double c_plus = 0.0;          // max phi / lambda^2 on (0, 1]
  double growth_ratio = 0.0;    // (phi(L)/L) / (phi(L/2)/(L/2)) at the grid tail
  bool superlinear = false;
};

PhiProperties check_properties(const PhiFunction& phi, std::size_t grid_points = 2001);

// Two columns "lambda phi" per line, strictly increasing lambda >= 0,
// starting at (0, 0); '#' starts a comment.
PhiFunction read_tabulated(std::istream& in);
PhiFunction read_tabulated_file(const std::string& path);
void write_tabulated(std::ostream& out, const PhiFunction& phi);

struct Conjugate {
  double value = 0.0;
  double argmax = 0.0;
  bool at_edge = false;  // sup reached at the domain edge
};

// phi*(u) = sup_lambda (lambda u - phi(lambda)). Closed form for the
// gaussian kind, exact maximum over knots for tabulated, golden section on
// each concave piece otherwise.
Conjugate young_fenchel_detail(const PhiFunction& phi, double u);
double young_fenchel(const PhiFunction& phi, double u);

struct FenchelMoreauReport {
  double max_deviation = 0.0;  // max |phi** - phi| over the grid
  double worst_lambda = 0.0;
  bool flagged = false;        // deviation above 1e-6: input not convex
};

FenchelMoreauReport fenchel_moreau_check(const PhiFunction& phi, std::span<const double> grid);

// Smallest lambda >= 0 with phi(lambda) = r, by bisection to full precision.
double phi_inverse(const PhiFunction& phi, double r);
// psi(r) = r / phi^{-1}(r), r >= 2.
double psi_from_phi(const PhiFunction& phi, double r);

struct NormEstimate {
  double value = 0.0;
  std::vector<double> grid;    // grid actually used (after trimming)
  double binding = 0.0;        // grid point achieving the sup
  std::size_t trimmed = 0;     // grid points dropped for low ESS
  bool finite = true;
};

struct BphiOptions {
  // Grid in standardized units t = lambda * rms(samples); used for both signs.
  // For Gaussian data the ESS at t is about n exp(-t^2) and the relative
  // error of the sample MGF about 1 / sqrt(ESS); the sup over the grid turns
  // that noise into upward bias, so the default stops at t = 2.
  std::vector<double> t_grid = {0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0};
  double min_ess = 10.0;
  double center_z = 3.0;
};

// Smallest tau with log mean exp(lambda x) <= phi(lambda tau) at every grid
// lambda. Throws NotCentered when |mean| > center_z * SE and MgfUnstable
// when no grid point keeps ESS >= min_ess.
NormEstimate bphi_norm(std::span<const double> samples, const PhiFunction& phi,
                       const BphiOptions& opts = {});

// sup over r of (mean |x|^r)^{1/r} / psi(r).
NormEstimate gpsi_norm(std::span<const double> samples, const PhiFunction& phi,
                       std::span<const double> r_grid = {});

struct TailBoundReport {
  bool passes = true;
  double worst_u = 0.0;
  double worst_log_margin = -std::numeric_limits<double>::infinity();  // log(envelope / bound)
  std::size_t n_checked = 0;
};

// Upper tail P(x > u) with a one-sided Wilson upper envelope (z = 1.645)
// against 2 exp(-phi*(u / C)) at every sample point u > 0.
TailBoundReport tail_bound_check(std::span<const double> samples, const PhiFunction& phi, double C);

// Smallest C passing tail_bound_check, to relative precision 1e-6; 0 when
// no sample is positive.
double smallest_tail_constant(std::span<const double> samples, const PhiFunction& phi);

struct KramerReport {
  double mu = 0.0;
  std::vector<double> lambda_grid;
  std::vector<double> phi0;  // log max_x mean exp(lambda xi_centered(x))
};

// Rows are grid points x, columns are samples of xi(x). Each row is
// centered; the largest candidate mu not rejected at any row and sample
// point is returned, where rejection means the one-sided 95% Wilson lower
// bound of P(|xi| > u) exceeds exp(-mu u).
KramerReport kramer_check(const Eigen::MatrixXd& per_x_samples, std::span<const double> mu_candidates,
                          std::span<const double> lambda_grid = {});

}  // namespace fieldtail
