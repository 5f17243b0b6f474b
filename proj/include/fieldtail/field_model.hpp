#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fieldtail/rng.hpp"

namespace fieldtail {

using Point = std::vector<double>;

// Open box D = prod (lower_i, upper_i); evaluations accept the closure [D].
struct Domain {
  std::vector<double> lower;
  std::vector<double> upper;

  std::size_t dim() const { return lower.size(); }
  double volume() const;
  bool contains(std::span<const double> x) const;
  void validate() const;
};

// Law of one centered basis coefficient. Every law has a finite moment
// generating function on the whole real line.
struct CoefficientLaw {
  enum class Kind { Gaussian, SymmetricWeibull, Uniform };

  Kind kind = Kind::Gaussian;
  double sd = 1.0;     // gaussian
  double p = 2.0;      // symmetric-weibull: density ~ exp(-|c|^p / p)
  double scale = 1.0;  // symmetric-weibull: c = scale * W
  double lo = -1.0;    // uniform
  double hi = 1.0;

  static CoefficientLaw gaussian(double sd);
  static CoefficientLaw symmetric_weibull(double p, double scale = 1.0);
  static CoefficientLaw uniform(double lo, double hi);

  double variance() const;
  double draw(Philox4x32& rng) const;
  void validate() const;
};

// c * prod x_i^{powers_i}, each power in {0, 1, 2}.
struct Monomial {
  std::vector<int> powers;
  double coeff = 0.0;
};

// prod_i cos(2 pi frequency_i x_i + phase_i); sin factors are phase -pi/2.
struct BasisTerm {
  std::vector<double> frequency;
  std::vector<double> phase;
  CoefficientLaw law;
};

struct FieldSpec {
  Domain domain;
  std::vector<Monomial> mean;
  std::vector<BasisTerm> terms;
  std::uint64_t seed = 0;

  std::size_t dim() const { return domain.dim(); }
  bool deterministic() const { return terms.empty(); }
  bool all_gaussian() const;
  void validate() const;
};

// Value, gradient and Hessian of a C^2 function at one point.
struct Jet {
  double value = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
};

// One realization: frozen coefficients over a shared, read-only spec.
class FieldSample {
 public:
  FieldSample(std::shared_ptr<const FieldSpec> spec, std::vector<double> coefficients,
              std::uint64_t replicate_id = 0);

  const FieldSpec& spec() const { return *spec_; }
  const std::shared_ptr<const FieldSpec>& spec_ptr() const { return spec_; }
  const std::vector<double>& coefficients() const { return coefficients_; }
  std::uint64_t replicate_id() const { return replicate_id_; }
  std::size_t dim() const { return spec_->dim(); }

  double value(std::span<const double> x) const;
  double centered_value(std::span<const double> x) const;
  Eigen::VectorXd gradient(std::span<const double> x) const;
  Eigen::MatrixXd hessian(std::span<const double> x) const;
  double zeta(std::span<const double> x) const;
  Jet jet(std::span<const double> x) const;

  // Skips the domain check; for inner loops whose points are known to lie
  // in [D] (quadrature nodes, projected iterates).
  Jet jet_unchecked(std::span<const double> x) const;
  double value_unchecked(std::span<const double> x) const;

 private:
  void check_point(std::span<const double> x) const;

  std::shared_ptr<const FieldSpec> spec_;
  std::vector<double> coefficients_;
  std::uint64_t replicate_id_;
};

FieldSample sample_field(std::shared_ptr<const FieldSpec> spec, std::uint64_t replicate_id);

double mean_value(const FieldSpec& spec, std::span<const double> x);
double basis_value(const BasisTerm& term, std::span<const double> x);

// |det H|^{1/2}.
double zeta_from_hessian(const Eigen::MatrixXd& hessian);

// W(z1, z2) = sum_j var(c_j) b_j(z1) b_j(z2); requires all-Gaussian laws.
double gaussian_covariance(const FieldSpec& spec, std::span<const double> z1,
                           std::span<const double> z2);
double gaussian_natural_distance(const FieldSpec& spec, std::span<const double> z1,
                                 std::span<const double> z2);

}  // namespace fieldtail
