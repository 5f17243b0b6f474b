#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "fieldtail/log_value.hpp"

namespace fieldtail {

struct QuadOptions {
  int order = 16;
  double rel_tol = 1e-8;
  std::size_t max_cells = 200000;

  void validate() const;
};

// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
struct GaussLegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
const GaussLegendreRule& gauss_legendre(int order);

struct LogIntegral {
  LogValue value;
  double rel_error = 0.0;   // estimated |error| / |value|
  std::size_t n_points = 0; // integrand evaluations
  std::size_t n_cells = 0;  // leaves in the final partition
};

// Region of sharp concentration; the cell holding `center` is split until
// its widest side is at most `width`.
struct Focus {
  std::vector<double> center;
  double width = 0.0;
};

// Integral over the box [lower, upper] of exp(log_f(x)), for an integrand
// given in log form (log_f may return -inf). Adaptive dyadic subdivision
// with a tensor Gauss-Legendre rule per cell; each cell compares its own
// rule with the sum over its 2^d children, and the largest-error leaves are
// split until the summed error is below rel_tol times the integral.
LogIntegral integrate_log(std::span<const double> lower, std::span<const double> upper,
                          const std::function<double(std::span<const double>)>& log_f,
                          const QuadOptions& opts = {}, const std::optional<Focus>& focus = {});

}  // namespace fieldtail
