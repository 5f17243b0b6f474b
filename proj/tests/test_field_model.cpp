#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "fieldtail/error.hpp"
#include "fieldtail/field_model.hpp"
#include "support.hpp"

using namespace fieldtail;
using ft_test::box_spec;

namespace {

constexpr double kPi = std::numbers::pi;

FieldSample single_cos(double c) {
  auto s = box_spec({0.0}, {1.0});
  s->terms.push_back({{1.0}, {0.0}, CoefficientLaw::gaussian(1.0)});
  return FieldSample(s, {c}, 0);
}

double fd_value(const FieldSample& s, Point x, std::size_t i, double h) {
  Point a = x, b = x;
  a[i] += h;
  b[i] -= h;
  return (s.value(a) - s.value(b)) / (2 * h);
}

std::shared_ptr<FieldSpec> mixed_2d(std::uint64_t seed) {
  auto s = box_spec({0.0, -1.0}, {1.0, 1.0});
  s->seed = seed;
  s->mean = {{{2, 0}, -1.0}, {{1, 1}, 0.5}, {{0, 1}, 0.3}};
  s->terms.push_back({{1.0, 0.5}, {0.2, 0.0}, CoefficientLaw::gaussian(1.0)});
  s->terms.push_back({{2.0, 1.0}, {0.0, 1.0}, CoefficientLaw::symmetric_weibull(3.0)});
  s->terms.push_back({{0.5, 2.0}, {1.3, -0.4}, CoefficientLaw::uniform(-1.0, 1.0)});
  return s;
}

}  // namespace

TEST(SampleField, ZeroTermsIsDeterministic) {
  auto s = box_spec({0.0}, {1.0});
  const FieldSample a = sample_field(s, 17);
  EXPECT_TRUE(a.coefficients().empty());
  EXPECT_TRUE(s->deterministic());
}

TEST(SampleField, SameIdSameCoefficients) {
  auto s = ft_test::trig_spec(5);
  EXPECT_EQ(sample_field(s, 42).coefficients(), sample_field(s, 42).coefficients());
  EXPECT_NE(sample_field(s, 42).coefficients(), sample_field(s, 43).coefficients());
}

TEST(SampleField, SeedChangesDraws) {
  EXPECT_NE(sample_field(ft_test::trig_spec(1), 0).coefficients(), sample_field(ft_test::trig_spec(2), 0).coefficients());
}

TEST(SampleField, GaussianFirstCoefficientMean) {
  auto s = box_spec({0.0}, {1.0});
  s->seed = 99;
  s->terms.push_back({{1.0}, {0.0}, CoefficientLaw::gaussian(1.0)});
  double sum = 0.0, sum2 = 0.0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const double c = sample_field(s, i).coefficients()[0];
    sum += c;
    sum2 += c * c;
  }
  EXPECT_LE(std::abs(sum / n), 4.0 / std::sqrt(n));
  EXPECT_NEAR(sum2 / n, 1.0, 0.05);
}

TEST(SampleField, LawVariances) {
  auto s = box_spec({0.0}, {1.0});
  s->seed = 3;
  s->terms.push_back({{1.0}, {0.0}, CoefficientLaw::symmetric_weibull(3.0, 2.0)});
  s->terms.push_back({{1.0}, {0.0}, CoefficientLaw::uniform(-2.0, 2.0)});
  const int n = 40000;
  double v0 = 0.0, v1 = 0.0;
  for (int i = 0; i < n; ++i) {
    const std::vector<double> c = sample_field(s, i).coefficients();
    v0 += c[0] * c[0];
    v1 += c[1] * c[1];
    ASSERT_LE(std::abs(c[1]), 2.0);
  }
  EXPECT_NEAR(v0 / n / s->terms[0].law.variance(), 1.0, 0.03);
  EXPECT_NEAR(v1 / n / s->terms[1].law.variance(), 1.0, 0.03);
  EXPECT_NEAR(s->terms[1].law.variance(), 4.0 / 3.0, 1e-12);
}

TEST(EvalField, CosAtZeroIsOne) { EXPECT_DOUBLE_EQ(single_cos(1.0).value(Point{0.0}), 1.0); }

TEST(EvalField, MeanOnly) {
  auto s = box_spec({0.0}, {1.0});
  s->mean.push_back({{2}, 1.0});
  EXPECT_DOUBLE_EQ(sample_field(s, 0).value(Point{0.5}), 0.25);
}

TEST(EvalField, CosAtQuarterIsZero) { EXPECT_NEAR(single_cos(1.0).value(Point{0.25}), 0.0, 1e-15); }

TEST(EvalField, OutsideDomainThrows) {
  try {
    single_cos(1.0).value(Point{1.5});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::PointOutsideDomain);
  }
}

TEST(EvalGradient, Examples) {
  auto s = box_spec({0.0}, {1.0});
  s->mean.push_back({{2}, 1.0});
  EXPECT_DOUBLE_EQ(sample_field(s, 0).gradient(Point{0.5})(0), 1.0);
  EXPECT_DOUBLE_EQ(single_cos(1.0).gradient(Point{0.0})(0), 0.0);
}

TEST(EvalGradient, MatchesFiniteDifferences) {
  auto s = mixed_2d(8);
  const auto xs = ft_test::uniform_points(200, 0.05, 0.95, 1);
  for (int r = 0; r < 100; ++r) {
    const FieldSample f = sample_field(s, r);
    const Point x{xs[2 * r], 2.0 * xs[2 * r + 1] - 1.0};
    const Eigen::VectorXd g = f.gradient(x);
    for (std::size_t i = 0; i < 2; ++i) {
      const double fd = fd_value(f, x, i, 1e-5);
      EXPECT_NEAR(g(i), fd, 1e-6 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST(EvalHessian, Examples) {
  const Eigen::MatrixXd h = single_cos(1.0).hessian(Point{0.0});
  EXPECT_NEAR(h(0, 0), -4 * kPi * kPi, 1e-12);
  auto s = box_spec({-1.0, -1.0}, {1.0, 1.0});
  s->mean = {{{2, 0}, 1.0}, {{0, 2}, 1.0}};
  const Eigen::MatrixXd h2 = sample_field(s, 0).hessian(Point{0.3, -0.7});
  EXPECT_EQ(h2, (Eigen::Matrix2d() << 2, 0, 0, 2).finished());
}

TEST(EvalHessian, SymmetricAndMatchesFiniteDifferences) {
  auto s = mixed_2d(9);
  const auto xs = ft_test::uniform_points(200, 0.05, 0.95, 2);
  for (int r = 0; r < 100; ++r) {
    const FieldSample f = sample_field(s, r);
    const Point x{xs[2 * r], 2.0 * xs[2 * r + 1] - 1.0};
    const Eigen::MatrixXd h = f.hessian(x);
    EXPECT_EQ(h(0, 1), h(1, 0));
    const double step = 1e-4;
    for (std::size_t j = 0; j < 2; ++j) {
      Point a = x, b = x;
      a[j] += step;
      b[j] -= step;
      const Eigen::VectorXd col = (f.gradient(a) - f.gradient(b)) / (2 * step);
      for (std::size_t i = 0; i < 2; ++i) {
        EXPECT_NEAR(h(i, j), col(i), 1e-5 * std::max(1.0, std::abs(col(i))));
      }
    }
  }
}

TEST(Zeta, Examples) {
  EXPECT_DOUBLE_EQ(zeta_from_hessian((Eigen::MatrixXd(1, 1) << -1).finished()), 1.0);
  EXPECT_DOUBLE_EQ(zeta_from_hessian((Eigen::MatrixXd(2, 2) << -2, 0, 0, -2).finished()), 2.0);
  EXPECT_NEAR(single_cos(1.0).zeta(Point{0.0}), 2 * kPi, 1e-12);
}

TEST(NaturalDistance, Examples) {
  auto s = box_spec({0.0}, {1.0});
  s->terms.push_back({{1.0}, {0.0}, CoefficientLaw::gaussian(1.0)});
  EXPECT_DOUBLE_EQ(gaussian_natural_distance(*s, Point{0.3}, Point{0.3}), 0.0);
  EXPECT_NEAR(gaussian_natural_distance(*s, Point{0.0}, Point{0.5}), 2.0, 1e-12);
}

TEST(NaturalDistance, NonGaussianRefused) {
  auto s = box_spec({0.0}, {1.0});
  s->terms.push_back({{1.0}, {0.0}, CoefficientLaw::symmetric_weibull(3.0)});
  try {
    gaussian_natural_distance(*s, Point{0.0}, Point{0.5});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonGaussianSpec);
  }
}

TEST(NaturalDistance, MatchesMonteCarloSd) {
  auto s = ft_test::trig_spec(21);
  const Point z1{0.13}, z2{0.61};
  const int n = 100000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const FieldSample f = sample_field(s, i);
    const double d = f.value(z1) - f.value(z2);
    sum += d;
    sum2 += d * d;
  }
  const double mean = sum / n;
  const double sd = std::sqrt(sum2 / n - mean * mean);
  EXPECT_NEAR(sd / gaussian_natural_distance(*s, z1, z2), 1.0, 0.03);
}

TEST(NaturalDistance, SemiMetricAxioms) {
  auto s = ft_test::trig_spec(4);
  const auto p = ft_test::uniform_points(300, 0.0, 1.0, 5);
  for (int i = 0; i < 100; ++i) {
    const Point a{p[3 * i]}, b{p[3 * i + 1]}, c{p[3 * i + 2]};
    const double ab = gaussian_natural_distance(*s, a, b);
    EXPECT_DOUBLE_EQ(ab, gaussian_natural_distance(*s, b, a));
    EXPECT_LE(gaussian_natural_distance(*s, a, c), ab + gaussian_natural_distance(*s, b, c) + 1e-12);
  }
}

TEST(Reproducibility, BitIdenticalEvaluations) {
  auto s = mixed_2d(77);
  const FieldSample a = sample_field(s, 5), b = sample_field(s, 5);
  const Point x{0.37, -0.21};
  EXPECT_EQ(a.value(x), b.value(x));
  EXPECT_EQ(a.hessian(x), b.hessian(x));
}

TEST(FieldSpecValidate, RejectsBadInput) {
  auto s = box_spec({1.0}, {0.0});
  EXPECT_THROW(s->validate(), Error);
  auto t = box_spec({0.0}, {1.0});
  t->mean.push_back({{3}, 1.0});
  EXPECT_THROW(t->validate(), Error);
  EXPECT_THROW(CoefficientLaw::uniform(0.0, 2.0).validate(), Error);
}
