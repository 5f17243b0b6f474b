#include "fieldtail/field_model.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "fieldtail/error.hpp"

namespace fieldtail {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Per-coordinate factor cos(w x + phase) with its first two derivatives.
struct Factor {
  double f, df, d2f;
};

Factor factor(double w, double phase, double x) {
  const double arg = w * x + phase;
  const double c = std::cos(arg);
  const double s = std::sin(arg);
  return {c, -w * s, -w * w * c};
}

double ipow(double x, int k) {
  switch (k) {
    case 0: return 1.0;
    case 1: return x;
    default: return x * x;
  }
}

double dipow(double x, int k) {
  switch (k) {
    case 0: return 0.0;
    case 1: return 1.0;
    default: return 2.0 * x;
  }
}

double d2ipow(int k) { return k == 2 ? 2.0 : 0.0; }

// Accumulates coeff * prod_i g_i(x_i) into a jet, given per-coordinate
// values, first and second derivatives.
void accumulate_product(double coeff, const std::vector<Factor>& fs, Jet& jet) {
  const std::size_t d = fs.size();
  double prod = coeff;
  for (const auto& f : fs) prod *= f.f;
  jet.value += prod;
  for (std::size_t a = 0; a < d; ++a) {
    double ga = coeff * fs[a].df;
    double ha = coeff * fs[a].d2f;
    for (std::size_t i = 0; i < d; ++i) {
      if (i == a) continue;
      ga *= fs[i].f;
      ha *= fs[i].f;
    }
    jet.gradient[a] += ga;
    jet.hessian(a, a) += ha;
    for (std::size_t b = a + 1; b < d; ++b) {
      double hab = coeff * fs[a].df * fs[b].df;
      for (std::size_t i = 0; i < d; ++i) {
        if (i == a || i == b) continue;
        hab *= fs[i].f;
      }
      jet.hessian(a, b) += hab;
      jet.hessian(b, a) += hab;
    }
  }
}

}  // namespace

double Domain::volume() const {
  double v = 1.0;
  for (std::size_t i = 0; i < dim(); ++i) v *= upper[i] - lower[i];
  return v;
}

bool Domain::contains(std::span<const double> x) const {
  if (x.size() != dim()) return false;
  for (std::size_t i = 0; i < dim(); ++i) {
    if (!(x[i] >= lower[i] && x[i] <= upper[i])) return false;
  }
  return true;
}

void Domain::validate() const {
  require(!lower.empty(), ErrorCode::InvalidArgument, "domain must have dimension >= 1");
  require(lower.size() == upper.size(), ErrorCode::InvalidArgument,
          "domain lower/upper dimension mismatch");
  for (std::size_t i = 0; i < dim(); ++i) {
    require(std::isfinite(lower[i]) && std::isfinite(upper[i]) && lower[i] < upper[i],
            ErrorCode::InvalidArgument,
            "domain requires finite lower < upper on axis " + std::to_string(i));
  }
}

CoefficientLaw CoefficientLaw::gaussian(double sd) {
  CoefficientLaw law;
  law.kind = Kind::Gaussian;
  law.sd = sd;
  return law;
}

CoefficientLaw CoefficientLaw::symmetric_weibull(double p, double scale) {
  CoefficientLaw law;
  law.kind = Kind::SymmetricWeibull;
  law.p = p;
  law.scale = scale;
  return law;
}

CoefficientLaw CoefficientLaw::uniform(double lo, double hi) {
  CoefficientLaw law;
  law.kind = Kind::Uniform;
  law.lo = lo;
  law.hi = hi;
  return law;
}

double CoefficientLaw::variance() const {
  switch (kind) {
    case Kind::Gaussian: return sd * sd;
    case Kind::SymmetricWeibull:
      return scale * scale * std::pow(p, 2.0 / p) * std::tgamma(3.0 / p) / std::tgamma(1.0 / p);
    case Kind::Uniform: return (hi - lo) * (hi - lo) / 12.0;
  }
  return 0.0;
}

double CoefficientLaw::draw(Philox4x32& rng) const {
  switch (kind) {
    case Kind::Gaussian: {
      std::normal_distribution<double> normal(0.0, sd);
      return normal(rng);
    }
    case Kind::SymmetricWeibull: {
      // |W|^p / p ~ Gamma(1/p, 1).
      std::gamma_distribution<double> gamma(1.0 / p, 1.0);
      const double magnitude = std::pow(p * gamma(rng), 1.0 / p);
      const bool negative = (rng() & 1u) != 0;
      return scale * (negative ? -magnitude : magnitude);
    }
    case Kind::Uniform: return lo + (hi - lo) * rng.uniform();
  }
  return 0.0;
}

void CoefficientLaw::validate() const {
  switch (kind) {
    case Kind::Gaussian:
      require(std::isfinite(sd) && sd > 0.0, ErrorCode::InvalidArgument, "gaussian law needs sd > 0");
      break;
    case Kind::SymmetricWeibull:
      require(std::isfinite(p) && p > 1.0, ErrorCode::InvalidArgument,
              "symmetric-weibull law needs p > 1");
      require(std::isfinite(scale) && scale > 0.0, ErrorCode::InvalidArgument,
              "symmetric-weibull law needs scale > 0");
      break;
    case Kind::Uniform:
      require(std::isfinite(lo) && std::isfinite(hi) && lo < hi, ErrorCode::InvalidArgument,
              "uniform law needs lo < hi");
      require(std::abs(lo + hi) <= 1e-12 * (hi - lo), ErrorCode::InvalidArgument,
              "uniform law must be centered (lo = -hi); put offsets in the mean polynomial");
      break;
  }
}

bool FieldSpec::all_gaussian() const {
  for (const auto& t : terms) {
    if (t.law.kind != CoefficientLaw::Kind::Gaussian) return false;
  }
  return true;
}

void FieldSpec::validate() const {
  domain.validate();
  const std::size_t d = dim();
  for (const auto& m : mean) {
    require(m.powers.size() == d, ErrorCode::InvalidArgument,
            "mean monomial power vector must have one entry per coordinate");
    for (int k : m.powers) {
      require(k >= 0 && k <= 2, ErrorCode::InvalidArgument,
              "mean monomial powers must be 0, 1 or 2");
    }
    require(std::isfinite(m.coeff), ErrorCode::InvalidArgument, "mean coefficient must be finite");
  }
  for (const auto& t : terms) {
    require(t.frequency.size() == d && t.phase.size() == d, ErrorCode::InvalidArgument,
            "basis term frequency/phase vectors must have one entry per coordinate");
    for (std::size_t i = 0; i < d; ++i) {
      require(std::isfinite(t.frequency[i]) && std::isfinite(t.phase[i]),
              ErrorCode::InvalidArgument, "basis term frequency/phase must be finite");
    }
    t.law.validate();
  }
}

FieldSample::FieldSample(std::shared_ptr<const FieldSpec> spec, std::vector<double> coefficients,
                         std::uint64_t replicate_id)
    : spec_(std::move(spec)), coefficients_(std::move(coefficients)), replicate_id_(replicate_id) {
  require(spec_ != nullptr, ErrorCode::InvalidArgument, "null field spec");
  require(coefficients_.size() == spec_->terms.size(), ErrorCode::InvalidArgument,
          "coefficient count must match the number of basis terms");
}

void FieldSample::check_point(std::span<const double> x) const {
  if (!spec_->domain.contains(x)) {
    throw Error(ErrorCode::PointOutsideDomain, "evaluation point is outside the closed domain");
  }
}

double FieldSample::value(std::span<const double> x) const {
  check_point(x);
  return value_unchecked(x);
}

double FieldSample::value_unchecked(std::span<const double> x) const {
  double v = mean_value(*spec_, x);
  for (std::size_t j = 0; j < coefficients_.size(); ++j) {
    if (coefficients_[j] != 0.0) v += coefficients_[j] * basis_value(spec_->terms[j], x);
  }
  return v;
}

double FieldSample::centered_value(std::span<const double> x) const {
  check_point(x);
  double v = 0.0;
  for (std::size_t j = 0; j < coefficients_.size(); ++j) {
    v += coefficients_[j] * basis_value(spec_->terms[j], x);
  }
  return v;
}

Eigen::VectorXd FieldSample::gradient(std::span<const double> x) const { return jet(x).gradient; }

Eigen::MatrixXd FieldSample::hessian(std::span<const double> x) const { return jet(x).hessian; }

double FieldSample::zeta(std::span<const double> x) const { return zeta_from_hessian(hessian(x)); }

Jet FieldSample::jet(std::span<const double> x) const {
  check_point(x);
  return jet_unchecked(x);
}

Jet FieldSample::jet_unchecked(std::span<const double> x) const {
  const std::size_t d = dim();
  Jet out;
  out.gradient = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
  out.hessian = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));

  std::vector<Factor> fs(d);
  for (const auto& m : spec_->mean) {
    for (std::size_t i = 0; i < d; ++i) {
      fs[i] = {ipow(x[i], m.powers[i]), dipow(x[i], m.powers[i]), d2ipow(m.powers[i])};
    }
    accumulate_product(m.coeff, fs, out);
  }
  for (std::size_t j = 0; j < coefficients_.size(); ++j) {
    if (coefficients_[j] == 0.0) continue;
    const auto& term = spec_->terms[j];
    for (std::size_t i = 0; i < d; ++i) {
      fs[i] = factor(kTwoPi * term.frequency[i], term.phase[i], x[i]);
    }
    accumulate_product(coefficients_[j], fs, out);
  }
  return out;
}

FieldSample sample_field(std::shared_ptr<const FieldSpec> spec, std::uint64_t replicate_id) {
  require(spec != nullptr, ErrorCode::InvalidArgument, "null field spec");
  std::vector<double> coeffs(spec->terms.size());
  for (std::size_t j = 0; j < coeffs.size(); ++j) {
    Philox4x32 rng(spec->seed, replicate_id, static_cast<std::uint32_t>(j));
    coeffs[j] = spec->terms[j].law.draw(rng);
  }
  return FieldSample(std::move(spec), std::move(coeffs), replicate_id);
}

double mean_value(const FieldSpec& spec, std::span<const double> x) {
  double v = 0.0;
  for (const auto& m : spec.mean) {
    double term = m.coeff;
    for (std::size_t i = 0; i < x.size(); ++i) term *= ipow(x[i], m.powers[i]);
    v += term;
  }
  return v;
}

double basis_value(const BasisTerm& term, std::span<const double> x) {
  double v = 1.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    v *= std::cos(kTwoPi * term.frequency[i] * x[i] + term.phase[i]);
  }
  return v;
}

double zeta_from_hessian(const Eigen::MatrixXd& hessian) {
  if (hessian.rows() == 1) return std::sqrt(std::abs(hessian(0, 0)));
  return std::sqrt(std::abs(hessian.determinant()));
}

double gaussian_covariance(const FieldSpec& spec, std::span<const double> z1,
                           std::span<const double> z2) {
  require(spec.all_gaussian(), ErrorCode::NonGaussianSpec,
          "covariance closed form needs all coefficient laws Gaussian");
  require(spec.domain.contains(z1) && spec.domain.contains(z2), ErrorCode::PointOutsideDomain,
          "covariance points must lie in the closed domain");
  double w = 0.0;
  for (const auto& t : spec.terms) w += t.law.variance() * basis_value(t, z1) * basis_value(t, z2);
  return w;
}

double gaussian_natural_distance(const FieldSpec& spec, std::span<const double> z1,
                                 std::span<const double> z2) {
  require(spec.all_gaussian(), ErrorCode::NonGaussianSpec,
          "analytic natural distance needs all coefficient laws Gaussian");
  require(spec.domain.contains(z1) && spec.domain.contains(z2), ErrorCode::PointOutsideDomain,
          "distance points must lie in the closed domain");
  // Var(xi(z1) - xi(z2)) summed term by term avoids cancellation in W11 - 2W12 + W22.
  double var = 0.0;
  for (const auto& t : spec.terms) {
    const double diff = basis_value(t, z1) - basis_value(t, z2);
    var += t.law.variance() * diff * diff;
  }
  return std::sqrt(var);
}

}  // namespace fieldtail
