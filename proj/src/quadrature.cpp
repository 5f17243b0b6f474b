#include "fieldtail/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <string>

#include <Eigen/Eigenvalues>

#include "fieldtail/error.hpp"

namespace fieldtail {
namespace {

struct Cell {
  std::vector<double> lo, hi;
  LogValue fine;
  LogValue err;
};

class Integrator {
 public:
  Integrator(std::size_t dim, const std::function<double(std::span<const double>)>& log_f,
             const GaussLegendreRule& rule)
      : d_(dim), log_f_(log_f), rule_(rule), idx_(dim), x_(dim), terms_() {}

  LogValue rule_estimate(const std::vector<double>& lo, const std::vector<double>& hi) {
    const auto n = rule_.nodes.size();
    std::size_t total = 1;
    for (std::size_t i = 0; i < d_; ++i) total *= n;
    terms_.resize(total);
    double log_jacobian = 0.0;
    for (std::size_t i = 0; i < d_; ++i) log_jacobian += std::log(0.5 * (hi[i] - lo[i]));
    std::fill(idx_.begin(), idx_.end(), 0);
    for (std::size_t k = 0; k < total; ++k) {
      double log_w = log_jacobian;
      for (std::size_t i = 0; i < d_; ++i) {
        const double mid = 0.5 * (lo[i] + hi[i]);
        const double half = 0.5 * (hi[i] - lo[i]);
        x_[i] = mid + half * rule_.nodes[idx_[i]];
        log_w += std::log(rule_.weights[idx_[i]]);
      }
      terms_[k] = log_w + log_f_(x_);
      for (std::size_t i = 0; i < d_; ++i) {
        if (++idx_[i] < n) break;
        idx_[i] = 0;
      }
    }
    evaluations_ += total;
    return LogValue::from_log(log_sum_exp(terms_));
  }

  std::vector<std::pair<std::vector<double>, std::vector<double>>> children(
      const std::vector<double>& lo, const std::vector<double>& hi) const {
    std::vector<std::pair<std::vector<double>, std::vector<double>>> out;
    const std::size_t count = std::size_t{1} << d_;
    out.reserve(count);
    for (std::size_t mask = 0; mask < count; ++mask) {
      std::vector<double> clo(d_), chi(d_);
      for (std::size_t i = 0; i < d_; ++i) {
        const double mid = 0.5 * (lo[i] + hi[i]);
        const bool upper_half = (mask >> i) & 1u;
        clo[i] = upper_half ? mid : lo[i];
        chi[i] = upper_half ? hi[i] : mid;
      }
      out.emplace_back(std::move(clo), std::move(chi));
    }
    return out;
  }

  Cell make_cell(std::vector<double> lo, std::vector<double> hi) {
    Cell c;
    const LogValue coarse = rule_estimate(lo, hi);
    for (const auto& [clo, chi] : children(lo, hi)) c.fine = c.fine + rule_estimate(clo, chi);
    const LogValue diff = coarse - c.fine;
    c.err = LogValue::from_log(diff.log_magnitude, diff.is_zero() ? 0 : 1);
    c.lo = std::move(lo);
    c.hi = std::move(hi);
    return c;
  }

  std::vector<Cell> split(const Cell& c) {
    std::vector<Cell> out;
    for (auto& [clo, chi] : children(c.lo, c.hi)) out.push_back(make_cell(std::move(clo), std::move(chi)));
    return out;
  }

  std::size_t evaluations() const { return evaluations_; }

 private:
  std::size_t d_;
  const std::function<double(std::span<const double>)>& log_f_;
  const GaussLegendreRule& rule_;
  std::vector<std::size_t> idx_;
  std::vector<double> x_;
  std::vector<double> terms_;
  std::size_t evaluations_ = 0;
};

bool cell_contains(const Cell& c, std::span<const double> x) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < c.lo[i] || x[i] > c.hi[i]) return false;
  }
  return true;
}

double max_width(const Cell& c) {
  double w = 0.0;
  for (std::size_t i = 0; i < c.lo.size(); ++i) w = std::max(w, c.hi[i] - c.lo[i]);
  return w;
}

}  // namespace

void QuadOptions::validate() const {
  require(order >= 2 && order <= 64, ErrorCode::InvalidArgument, "quadrature order must be in [2, 64]");
  require(rel_tol > 0.0 && rel_tol < 1.0, ErrorCode::InvalidArgument, "rel_tol must be in (0, 1)");
  require(max_cells >= 1, ErrorCode::InvalidArgument, "max_cells must be >= 1");
}

const GaussLegendreRule& gauss_legendre(int order) {
  static std::mutex mutex;
  static std::map<int, GaussLegendreRule> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(order);
  if (it != cache.end()) return it->second;

  // Golub-Welsch: eigen-decomposition of the Jacobi matrix of the Legendre
  // recurrence; nodes are eigenvalues, weights 2 * (first component)^2.
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(order, order);
  for (int k = 1; k < order; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    jacobi(k, k - 1) = b;
    jacobi(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
  GaussLegendreRule rule;
  for (int k = 0; k < order; ++k) {
    rule.nodes.push_back(eig.eigenvalues()[k]);
    const double v = eig.eigenvectors()(0, k);
    rule.weights.push_back(2.0 * v * v);
  }
  return cache.emplace(order, std::move(rule)).first->second;
}

LogIntegral integrate_log(std::span<const double> lower, std::span<const double> upper,
                          const std::function<double(std::span<const double>)>& log_f,
                          const QuadOptions& opts, const std::optional<Focus>& focus) {
  opts.validate();
  require(!lower.empty() && lower.size() == upper.size(), ErrorCode::InvalidArgument,
          "integration box dimension mismatch");
  const std::size_t d = lower.size();
  for (std::size_t i = 0; i < d; ++i) {
    require(lower[i] < upper[i], ErrorCode::InvalidArgument, "integration box needs lower < upper");
  }

  Integrator integ(d, log_f, gauss_legendre(opts.order));
  std::vector<Cell> leaves;
  leaves.push_back(integ.make_cell({lower.begin(), lower.end()}, {upper.begin(), upper.end()}));

  if (focus && focus->width > 0.0 && focus->center.size() == d) {
    for (int guard = 0; guard < 64; ++guard) {
      auto it = std::find_if(leaves.begin(), leaves.end(),
                             [&](const Cell& c) { return cell_contains(c, focus->center); });
      if (it == leaves.end() || max_width(*it) <= focus->width) break;
      Cell parent = std::move(*it);
      leaves.erase(it);
      for (auto& child : integ.split(parent)) leaves.push_back(std::move(child));
    }
  }

  const double log_tol = std::log(opts.rel_tol);
  while (true) {
    LogValue total, err_total;
    for (const auto& c : leaves) {
      total = total + c.fine;
      err_total = err_total + c.err;
    }
    if (total.is_zero() && err_total.is_zero()) {
      return {LogValue::zero(), 0.0, integ.evaluations(), leaves.size()};
    }
    const double rel_err = total.is_zero()
                               ? std::numeric_limits<double>::infinity()
                               : std::exp(err_total.log_magnitude - total.log_magnitude);
    if (!total.is_zero() && err_total.log_magnitude <= log_tol + total.log_magnitude) {
      return {total, rel_err, integ.evaluations(), leaves.size()};
    }
    if (leaves.size() >= opts.max_cells) {
      throw Error(ErrorCode::QuadratureNotConverged,
                  "relative error " + std::to_string(rel_err) + " after " +
                      std::to_string(leaves.size()) + " cells");
    }

    // Split every leaf whose error is within a factor 10 of the worst one.
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& c : leaves) {
      if (!c.err.is_zero()) worst = std::max(worst, c.err.log_magnitude);
    }
    const double cut = worst - std::log(10.0);
    std::vector<Cell> next;
    next.reserve(leaves.size() * 2);
    for (auto& c : leaves) {
      if (!c.err.is_zero() && c.err.log_magnitude >= cut) {
        for (auto& child : integ.split(c)) next.push_back(std::move(child));
      } else {
        next.push_back(std::move(c));
      }
    }
    leaves = std::move(next);
  }
}

}  // namespace fieldtail
