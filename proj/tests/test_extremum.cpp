#include <gtest/gtest.h>

#include <cmath>

#include "fieldtail/extremum.hpp"
#include "fieldtail/parallel.hpp"
#include "support.hpp"

using namespace fieldtail;
using ft_test::box_spec;

namespace {

std::shared_ptr<FieldSpec> bump() {
  // 1 - (x - 0.3)^2 = 0.91 + 0.6 x - x^2
  auto s = box_spec({0.0}, {1.0});
  s->mean = {{{0}, 0.91}, {{1}, 0.6}, {{2}, -1.0}};
  return s;
}

// Golden-section polish of a grid maximum, written independently of the
// library maximizer.
double polish(const FieldSample& f, double x, double h) {
  double a = std::max(0.0, x - h), b = std::min(1.0, x + h);
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int i = 0; i < 200; ++i) {
    const double c = b - g * (b - a), d = a + g * (b - a);
    if (f.value(Point{c}) > f.value(Point{d})) b = d; else a = c;
  }
  return f.value(Point{0.5 * (a + b)});
}

}  // namespace

TEST(FindMax, AnalyticInteriorMaximum) {
  const MaxResult r = find_max(sample_field(bump(), 0));
  EXPECT_NEAR(r.M, 1.0, 1e-12);
  EXPECT_NEAR(r.x0[0], 0.3, 1e-8);
  EXPECT_NEAR(r.hessian_at_max(0, 0), -2.0, 1e-12);
  EXPECT_TRUE(r.interior);
}

TEST(FindMax, MonotoneFieldHasBoundaryMaximum) {
  auto s = box_spec({0.0}, {1.0});
  s->mean = {{{1}, 1.0}};
  const MaxResult r = find_max(sample_field(s, 0));
  EXPECT_FALSE(r.interior);
  EXPECT_NEAR(r.M, 1.0, 1e-9);
}

TEST(FindMax, MatchesPolishedGrid) {
  auto s = ft_test::trig_spec(31);
  for (int id = 0; id < 5; ++id) {
    const FieldSample f = sample_field(s, id);
    const GridMax g = brute_force_max(f, 1000000);
    const double refined = std::max(g.value, polish(f, g.point[0], 2e-6));
    EXPECT_NEAR(find_max(f).M, refined, 1e-8) << "replicate " << id;
  }
}

TEST(BruteForceMax, ConstantField) {
  auto s = box_spec({0.0, 0.0}, {1.0, 2.0});
  s->mean = {{{0, 0}, 3.5}};
  const GridMax g = brute_force_max(sample_field(s, 0), 11);
  EXPECT_EQ(g.value, 3.5);
  EXPECT_EQ(g.point, (Point{0.0, 0.0}));
}

TEST(BruteForceMax, QuadraticResolution) {
  EXPECT_NEAR(brute_force_max(sample_field(bump(), 0), 1000000).value, 1.0, 1e-12);
}

TEST(BruteForceMax, LowerBoundAndGapOn500Samples) {
  auto s = ft_test::trig_spec(12);
  const std::size_t n = 500;
  std::vector<double> gap(n), over(n);
  parallel_for(n, [&](std::size_t i) {
    const FieldSample f = sample_field(s, i);
    const double M = find_max(f).M;
    const double b = brute_force_max(f, 100000).value;
    over[i] = b - M;
    gap[i] = M - b;
  });
  for (std::size_t i = 0; i < n; ++i) {
    EXPECT_LE(over[i], 1e-9) << i;
    EXPECT_LE(gap[i], 1e-6) << i;
  }
}

TEST(CheckNondegeneracy, Examples) {
  MaxResult r;
  r.M = 1.0;
  r.x0 = {0.3};
  r.hessian_at_max = (Eigen::MatrixXd(1, 1) << -2.0).finished();
  r.interior = true;
  r.min_abs_det = 2.0;
  EXPECT_TRUE(check_nondegeneracy(r, 1e-6));
  r.interior = false;
  EXPECT_FALSE(check_nondegeneracy(r, 1e-6));
}

TEST(CheckNondegeneracy, RareFailuresOnGaussianTrigField) {
  auto s = ft_test::trig_spec(44);
  const std::size_t n = 10000;
  std::vector<char> ok(n);
  MaxOptions opts;
  parallel_for(n, [&](std::size_t i) { ok[i] = check_nondegeneracy(find_max(sample_field(s, i), opts), opts.det_tol); });
  std::size_t failing = 0;
  for (char c : ok) failing += !c;
  EXPECT_LT(static_cast<double>(failing) / n, 0.01);
}

TEST(FindMax, FirstAndSecondOrderConditionsAtInteriorMaxima) {
  auto s = box_spec({0.0, 0.0}, {1.0, 1.0});
  s->seed = 5;
  for (int k = 1; k <= 2; ++k) {
    for (double ph : {0.0, -1.5707963267948966}) {
      s->terms.push_back({{double(k), 0.0}, {ph, 0.0}, CoefficientLaw::gaussian(1.0 / k)});
      s->terms.push_back({{0.0, double(k)}, {0.0, ph}, CoefficientLaw::gaussian(1.0 / k)});
      s->terms.push_back({{double(k), double(k)}, {ph, 0.0}, CoefficientLaw::gaussian(0.5 / k)});
    }
  }
  MaxOptions opts;
  for (int id = 0; id < 50; ++id) {
    const FieldSample f = sample_field(s, id);
    const MaxResult r = find_max(f, opts);
    if (!r.interior) continue;
    EXPECT_LE(f.gradient(r.x0).norm(), 1e-7) << id;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(r.hessian_at_max);
    EXPECT_LE(es.eigenvalues().maxCoeff(), opts.eig_tol) << id;
  }
}

TEST(FindMax, ShiftEquivariance) {
  auto s = ft_test::trig_spec(8);
  auto shifted = ft_test::trig_spec(8);
  shifted->mean = {{{0}, 5.0}};
  for (int id = 0; id < 20; ++id) {
    const MaxResult a = find_max(sample_field(s, id));
    const MaxResult b = find_max(sample_field(shifted, id));
    EXPECT_NEAR(b.M - a.M, 5.0, 1e-9);
    EXPECT_NEAR(b.x0[0], a.x0[0], 1e-7);
  }
}
