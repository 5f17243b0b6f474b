#include "fieldtail/extremum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fieldtail/error.hpp"

namespace fieldtail {
namespace {

constexpr int kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};

double radical_inverse(unsigned long index, int base) {
  double inv = 1.0 / base;
  double f = inv;
  double r = 0.0;
  while (index > 0) {
    r += f * static_cast<double>(index % static_cast<unsigned long>(base));
    index /= static_cast<unsigned long>(base);
    f *= inv;
  }
  return r;
}

struct Box {
  Eigen::VectorXd lo, hi;
};

Eigen::VectorXd project(const Eigen::VectorXd& x, const Box& box) {
  return x.cwiseMax(box.lo).cwiseMin(box.hi);
}

// Coordinates pinned at a bound with the gradient pushing outward.
std::vector<bool> active_set(const Eigen::VectorXd& x, const Eigen::VectorXd& g, const Box& box) {
  std::vector<bool> active(static_cast<std::size_t>(x.size()), false);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    active[static_cast<std::size_t>(i)] =
        (x[i] <= box.lo[i] && g[i] < 0.0) || (x[i] >= box.hi[i] && g[i] > 0.0);
  }
  return active;
}

struct LocalResult {
  bool converged = false;
  double value = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd x;
};

LocalResult ascend(const FieldSample& sample, Eigen::VectorXd x, const Box& box,
                   const MaxOptions& opts) {
  const Eigen::Index d = x.size();
  auto eval = [&](const Eigen::VectorXd& p) {
    return sample.jet_unchecked(std::span<const double>(p.data(), static_cast<std::size_t>(d)));
  };

  LocalResult out;
  Jet jet = eval(x);
  for (int it = 0; it < opts.max_iter; ++it) {
    const auto active = active_set(x, jet.gradient, box);
    std::vector<Eigen::Index> free;
    for (Eigen::Index i = 0; i < d; ++i) {
      if (!active[static_cast<std::size_t>(i)]) free.push_back(i);
    }
    double pg = 0.0;
    for (auto i : free) pg = std::max(pg, std::abs(jet.gradient[i]));
    if (pg <= opts.grad_tol) {
      out = {true, jet.value, x};
      return out;
    }

    const auto nf = static_cast<Eigen::Index>(free.size());
    Eigen::VectorXd g(nf);
    Eigen::MatrixXd negH(nf, nf);
    for (Eigen::Index a = 0; a < nf; ++a) {
      g[a] = jet.gradient[free[static_cast<std::size_t>(a)]];
      for (Eigen::Index b = 0; b < nf; ++b) {
        negH(a, b) = -jet.hessian(free[static_cast<std::size_t>(a)], free[static_cast<std::size_t>(b)]);
      }
    }

    Eigen::VectorXd dir;
    Eigen::LLT<Eigen::MatrixXd> llt(negH);
    bool newton = llt.info() == Eigen::Success;
    if (newton) {
      dir = llt.solve(g);
      newton = dir.allFinite();
    }
    if (!newton) {
      // Gradient step scaled by the curvature magnitude.
      const double curvature = std::max(negH.cwiseAbs().maxCoeff(), 1e-12);
      dir = g / curvature;
    }

    Eigen::VectorXd step = Eigen::VectorXd::Zero(d);
    for (Eigen::Index a = 0; a < nf; ++a) step[free[static_cast<std::size_t>(a)]] = dir[a];

    double alpha = 1.0;
    bool accepted = false;
    Eigen::VectorXd x_new;
    Jet jet_new;
    for (int ls = 0; ls < 60; ++ls) {
      x_new = project(x + alpha * step, box);
      jet_new = eval(x_new);
      const double predicted = jet.gradient.dot(x_new - x);
      if (jet_new.value >= jet.value + 1e-4 * predicted && jet_new.value >= jet.value) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }

    const double moved = (x_new - x).cwiseAbs().maxCoeff();
    const double scale = 1.0 + x.cwiseAbs().maxCoeff();
    if (!accepted || moved <= 4.0 * std::numeric_limits<double>::epsilon() * scale) {
      // No representable ascent left: at a maximum to working precision if
      // the last step was a Newton step on a negative definite Hessian.
      out.converged = newton && pg <= 1e3 * opts.grad_tol * (1.0 + negH.cwiseAbs().maxCoeff());
      out.value = jet.value;
      out.x = x;
      return out;
    }
    x = x_new;
    jet = jet_new;
  }
  out.value = jet.value;
  out.x = x;
  return out;
}

}  // namespace

int MaxOptions::effective_starts(std::size_t dim) const {
  if (starts > 0) return starts;
  int n = 8;
  for (std::size_t i = 0; i < dim; ++i) n *= 3;
  return n;
}

void MaxOptions::validate() const {
  require(starts >= 0, ErrorCode::InvalidArgument, "starts must be >= 0");
  require(grad_tol > 0.0 && max_iter > 0, ErrorCode::InvalidArgument,
          "grad_tol and max_iter must be positive");
  require(det_tol >= 0.0 && eig_tol >= 0.0 && value_tol >= 0.0, ErrorCode::InvalidArgument,
          "tolerances must be nonnegative");
  require(boundary_eps > 0.0 && boundary_eps < 0.5, ErrorCode::InvalidArgument,
          "boundary_eps must lie in (0, 0.5)");
}

MaxResult find_max(const FieldSample& sample, const MaxOptions& opts) {
  opts.validate();
  const std::size_t d = sample.dim();
  require(d <= std::size(kPrimes), ErrorCode::InvalidArgument, "dimension too large for Halton starts");
  const auto& dom = sample.spec().domain;

  Box box{Eigen::VectorXd(d), Eigen::VectorXd(d)};
  Eigen::VectorXd eps(d);
  for (std::size_t i = 0; i < d; ++i) {
    box.lo[i] = dom.lower[i];
    box.hi[i] = dom.upper[i];
    eps[i] = opts.boundary_eps * (dom.upper[i] - dom.lower[i]);
  }

  const int n_starts = opts.effective_starts(d);
  std::vector<LocalResult> locals;
  locals.reserve(static_cast<std::size_t>(n_starts));
  for (int s = 0; s < n_starts; ++s) {
    Eigen::VectorXd x(d);
    for (std::size_t i = 0; i < d; ++i) {
      // Offset by one half so the first start is not a corner.
      const double t = radical_inverse(static_cast<unsigned long>(s) + 1, kPrimes[i]);
      x[i] = std::clamp(box.lo[i] + t * (box.hi[i] - box.lo[i]), box.lo[i] + eps[i],
                        box.hi[i] - eps[i]);
    }
    locals.push_back(ascend(sample, x, box, opts));
  }

  int best = -1;
  int n_converged = 0;
  for (int s = 0; s < n_starts; ++s) {
    const auto& r = locals[static_cast<std::size_t>(s)];
    if (!r.converged) continue;
    ++n_converged;
    if (best < 0 || r.value > locals[static_cast<std::size_t>(best)].value) best = s;
  }
  if (best < 0) {
    throw Error(ErrorCode::NoConvergence, "no start converged within " +
                                              std::to_string(opts.max_iter) + " iterations");
  }

  const auto& top = locals[static_cast<std::size_t>(best)];
  MaxResult out;
  out.M = top.value;
  out.x0.assign(top.x.data(), top.x.data() + d);
  out.n_converged = n_converged;
  const double agree_tol = opts.value_tol * std::max(1.0, std::abs(out.M));
  for (const auto& r : locals) {
    if (r.converged && r.value >= out.M - agree_tol) ++out.n_starts_agreeing;
  }
  out.interior = true;
  for (std::size_t i = 0; i < d; ++i) {
    if (top.x[i] - box.lo[i] <= eps[i] || box.hi[i] - top.x[i] <= eps[i]) out.interior = false;
  }
  out.hessian_at_max = sample.jet_unchecked(out.x0).hessian;
  out.min_abs_det = std::abs(out.hessian_at_max.determinant());
  return out;
}

GridMax brute_force_max(const FieldSample& sample, long points_per_axis) {
  require(points_per_axis >= 2, ErrorCode::InvalidArgument, "points_per_axis must be >= 2");
  const std::size_t d = sample.dim();
  double total = 1.0;
  for (std::size_t i = 0; i < d; ++i) total *= static_cast<double>(points_per_axis);
  require(total <= 1e8, ErrorCode::GridTooLarge,
          "grid of " + std::to_string(total) + " points exceeds the 1e8 budget");

  const auto& dom = sample.spec().domain;
  const auto n = static_cast<unsigned long>(points_per_axis);
  std::vector<unsigned long> idx(d, 0);
  Point x(d);
  GridMax best{-std::numeric_limits<double>::infinity(), Point(d)};
  const auto count = static_cast<unsigned long>(total);
  for (unsigned long k = 0; k < count; ++k) {
    for (std::size_t i = 0; i < d; ++i) {
      const double t = static_cast<double>(idx[i]) / static_cast<double>(n - 1);
      x[i] = idx[i] + 1 == n ? dom.upper[i] : dom.lower[i] + t * (dom.upper[i] - dom.lower[i]);
    }
    const double v = sample.value_unchecked(x);
    if (v > best.value) {
      best.value = v;
      best.point = x;
    }
    for (std::size_t i = 0; i < d; ++i) {
      if (++idx[i] < n) break;
      idx[i] = 0;
    }
  }
  return best;
}

bool check_nondegeneracy(const MaxResult& result, double det_tolerance, double eig_tolerance) {
  if (!result.interior) return false;
  if (!(result.min_abs_det > det_tolerance)) return false;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(result.hessian_at_max, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().maxCoeff() <= eig_tolerance;
}

}  // namespace fieldtail
