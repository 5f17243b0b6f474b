#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <numbers>
#include <vector>

#include "fieldtail/field_model.hpp"
#include "fieldtail/rng.hpp"

namespace ft_test {

using namespace fieldtail;

inline std::shared_ptr<FieldSpec> box_spec(std::vector<double> lower, std::vector<double> upper) {
  auto s = std::make_shared<FieldSpec>();
  s->domain = {std::move(lower), std::move(upper)};
  return s;
}

// -x^2/2 on (-1, 1)
inline std::shared_ptr<const FieldSpec> quadratic_spec() {
  auto s = box_spec({-1.0}, {1.0});
  s->mean.push_back({{2}, -0.5});
  return s;
}

// cos and sin pairs at frequencies 1..k on (0, 1), sd 1/k.
inline std::shared_ptr<FieldSpec> trig_spec(std::uint64_t seed, int k_max = 3) {
  auto s = box_spec({0.0}, {1.0});
  s->seed = seed;
  for (int k = 1; k <= k_max; ++k) {
    s->terms.push_back({{double(k)}, {0.0}, CoefficientLaw::gaussian(1.0 / k)});
    s->terms.push_back({{double(k)}, {-std::numbers::pi / 2}, CoefficientLaw::gaussian(1.0 / k)});
  }
  return s;
}

// Box-Muller on an independent Philox stream.
inline std::vector<double> normal_draws(std::size_t n, std::uint64_t seed) {
  Philox4x32 rng(seed, 0xabcdef, 7);
  std::vector<double> out;
  out.reserve(n);
  while (out.size() < n) {
    const double u1 = 1.0 - rng.uniform();
    const double u2 = rng.uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    out.push_back(r * std::cos(2.0 * std::numbers::pi * u2));
    if (out.size() < n) out.push_back(r * std::sin(2.0 * std::numbers::pi * u2));
  }
  return out;
}

inline std::vector<double> uniform_points(std::size_t n, double lo, double hi, std::uint64_t seed) {
  Philox4x32 rng(seed, 0x1234, 3);
  std::vector<double> out(n);
  for (auto& v : out) v = lo + (hi - lo) * rng.uniform();
  return out;
}

}  // namespace ft_test
