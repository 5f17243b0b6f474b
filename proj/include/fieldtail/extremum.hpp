#pragma once

#include <vector>

#include <Eigen/Dense>

#include "fieldtail/field_model.hpp"

namespace fieldtail {

struct MaxOptions {
  int starts = 0;  // 0 selects 8 * 3^d
  double grad_tol = 1e-10;
  int max_iter = 200;
  double det_tol = 1e-8;
  double eig_tol = 1e-8;
  double value_tol = 1e-9;      // relative; starts within this of the best "agree"
  double boundary_eps = 1e-6;   // relative to the axis width

  int effective_starts(std::size_t dim) const;
  void validate() const;
};

struct MaxResult {
  double M = 0.0;
  Point x0;
  Eigen::MatrixXd hessian_at_max;
  bool interior = false;
  double min_abs_det = 0.0;
  int n_starts_agreeing = 0;
  int n_converged = 0;
};

// Multistart local ascent from a Halton start set projected into
// [l + eps, u - eps]. Iterates stay in the closed box; a limit point within
// eps of the boundary is reported with interior = false.
MaxResult find_max(const FieldSample& sample, const MaxOptions& opts = {});

struct GridMax {
  double value = 0.0;
  Point point;
};

// Exhaustive maximum over the tensor grid with points_per_axis nodes per
// axis, endpoints included. A lower bound on the true maximum.
GridMax brute_force_max(const FieldSample& sample, long points_per_axis);

// Interior, |det H| > det_tolerance and every eigenvalue <= eig_tolerance.
bool check_nondegeneracy(const MaxResult& result, double det_tolerance, double eig_tolerance = 1e-8);

}  // namespace fieldtail
