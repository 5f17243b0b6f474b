#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fieldtail/error.hpp"
#include "fieldtail/laplace_saddle.hpp"
#include "fieldtail/parallel.hpp"
#include "fieldtail/quadrature.hpp"
#include "support.hpp"

using namespace fieldtail;
using ft_test::box_spec;

namespace {

constexpr double kPi = std::numbers::pi;

// mean -1 + 4x - 4x^2 plus small k = 1, 2 trig terms on (0, 1)
std::shared_ptr<FieldSpec> bump_trig(std::uint64_t seed) {
  auto s = box_spec({0.0}, {1.0});
  s->seed = seed;
  s->mean = {{{0}, -1.0}, {{1}, 4.0}, {{2}, -4.0}};
  for (int k = 1; k <= 2; ++k) {
    const double sd = k == 1 ? 0.015 : 0.005;
    s->terms.push_back({{double(k)}, {0.0}, CoefficientLaw::gaussian(sd)});
    s->terms.push_back({{double(k)}, {-kPi / 2}, CoefficientLaw::gaussian(sd)});
  }
  return s;
}

MaxResult synthetic_max(double M, std::size_t d) {
  MaxResult r;
  r.M = M;
  r.x0.assign(d, 0.0);
  r.hessian_at_max = -Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  r.interior = true;
  r.min_abs_det = 1.0;
  return r;
}

// Composite Simpson of zeta over (0, 1), independent of the library rule.
double simpson_zeta(const FieldSample& f, int m) {
  const double h = 1.0 / m;
  double s = 0.0;
  for (int i = 0; i <= m; ++i) {
    const double w = (i == 0 || i == m) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    s += w * f.zeta(Point{i * h});
  }
  return s * h / 3.0;
}

}  // namespace

TEST(IntegralI, GaussianBump) {
  const FieldSample f = sample_field(ft_test::quadratic_spec(), 0);
  const LogIntegral r = integral_I(f, 100.0);
  const double exact = std::sqrt(kPi / 50.0) * std::erf(std::sqrt(50.0));
  EXPECT_NEAR(r.value.log_magnitude, std::log(exact), 1e-9);
  EXPECT_NEAR(exact, 0.250663, 1e-6);
}

TEST(IntegralI, LambdaZeroIsZetaIntegral) {
  EXPECT_NEAR(integral_I(sample_field(ft_test::quadratic_spec(), 0), 0.0).value.log_magnitude, std::log(2.0), 1e-12);
  const FieldSample f = sample_field(ft_test::trig_spec(3), 1);
  EXPECT_NEAR(std::exp(integral_I(f, 0.0).value.log_magnitude) / simpson_zeta(f, 200000), 1.0, 1e-6);
}

TEST(IntegralI, ConstantFieldIsZero) {
  auto s = box_spec({0.0}, {1.0});
  s->mean = {{{0}, 2.0}};
  EXPECT_TRUE(integral_I(sample_field(s, 0), 5.0).value.is_zero());
}

TEST(IntegralI, LogSpaceMatchesLinearAtModerateLambda) {
  const FieldSample f = sample_field(ft_test::quadratic_spec(), 0);
  QuadOptions q;
  q.rel_tol = 1e-13;
  const double exact = std::sqrt(kPi / 15.0) * std::erf(std::sqrt(15.0));
  EXPECT_NEAR(std::exp(integral_I(f, 30.0, q).value.log_magnitude) / exact, 1.0, 1e-10);
}

TEST(SaddleApprox, Examples) {
  EXPECT_NEAR(saddle_approx(synthetic_max(0.0, 1), 100.0).log_magnitude, std::log(std::sqrt(2 * kPi / 100.0)), 1e-14);
  EXPECT_NEAR(saddle_approx(synthetic_max(1.0, 1), 10.0).log_magnitude, std::log(std::sqrt(2 * kPi / 10.0)) + 10.0,
              1e-13);
  EXPECT_NEAR(saddle_approx(synthetic_max(0.0, 2), 2 * kPi).log_magnitude, 0.0, 1e-14);
}

TEST(SaddleApprox, PrintedConstantOffByTwoPiPerDimension) {
  for (std::size_t d : {1u, 2u, 3u}) {
    const MaxResult r = synthetic_max(0.3, d);
    const double gap = saddle_approx(r, 50.0).log_magnitude - printed_constant_approx(r, 50.0).log_magnitude;
    EXPECT_NEAR(gap, d * std::log(2 * kPi), 1e-12);
  }
}

TEST(SaddleApprox, BoundaryRefused) {
  MaxResult r = synthetic_max(0.0, 1);
  r.interior = false;
  EXPECT_THROW(saddle_approx(r, 10.0), Error);
}

TEST(PathwiseRatio, QuadraticAtLambda400) {
  EXPECT_NEAR(pathwise_ratio(sample_field(ft_test::quadratic_spec(), 0), 400.0), 1.0, 0.005);
}

TEST(PathwiseRatio, ErrorDecreasesWithLambda) {
  auto s = bump_trig(2);
  const FieldSample f = sample_field(s, 3);
  EXPECT_LT(std::abs(pathwise_ratio(f, 100.0) - 1.0), std::abs(pathwise_ratio(f, 25.0) - 1.0));
}

TEST(PathwiseRatio, BoundaryMaximumRefused) {
  auto s = box_spec({0.0}, {1.0});
  s->mean = {{{1}, -1.0}};
  try {
    pathwise_ratio(sample_field(s, 0), 50.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateMaximum);
  }
}

TEST(PathwiseRatio, MedianErrorShrinksOnTrigSamples) {
  auto s = ft_test::trig_spec(7);
  const std::vector<double> lambdas{25, 50, 100, 200};
  std::vector<std::vector<double>> dev(lambdas.size());
  std::vector<std::vector<double>> per(400);
  std::vector<char> nd(400);
  parallel_for(400, [&](std::size_t i) {
    const FieldSample f = sample_field(s, i);
    const MaxResult m = find_max(f);
    nd[i] = check_nondegeneracy(m, 1e-8);
    if (!nd[i]) return;
    for (double l : lambdas) per[i].push_back(std::abs(pathwise_report(f, m, l).ratio - 1.0));
  });
  std::size_t used = 0;
  for (std::size_t i = 0; i < 400 && used < 200; ++i) {
    if (!nd[i]) continue;
    ++used;
    for (std::size_t k = 0; k < lambdas.size(); ++k) dev[k].push_back(per[i][k]);
  }
  ASSERT_EQ(used, 200u);
  std::vector<double> med;
  for (auto& v : dev) {
    std::sort(v.begin(), v.end());
    med.push_back(0.5 * (v[99] + v[100]));
  }
  for (std::size_t k = 1; k < med.size(); ++k) EXPECT_LT(med[k], med[k - 1]);
  EXPECT_LE(med.back(), 0.05);
}

TEST(EstimateG, DeterministicSpec) {
  auto s = ft_test::quadratic_spec();
  const GEstimate g = estimate_G(s, 50.0, 10);
  EXPECT_EQ(g.n, 1u);
  const double log_I = integral_I(sample_field(s, 0), 50.0).value.log_magnitude;
  EXPECT_NEAR(g.log_G.log_magnitude, log_K(1) + log_I, 1e-12);
}

TEST(EstimateG, LambdaZeroMatchesMonteCarloOfZetaIntegral) {
  auto s = ft_test::trig_spec(15);
  const std::size_t n = 200;
  const GEstimate g = estimate_G(s, 0.0, n);
  std::vector<double> z(n);
  parallel_for(n, [&](std::size_t i) { z[i] = simpson_zeta(sample_field(s, i), 20000); });
  double mean = 0.0;
  for (double v : z) mean += v / n;
  EXPECT_NEAR(g.log_G.log_magnitude, log_K(1) + std::log(mean), 1e-5);
}

TEST(EstimateG, SameIdTwiceIsIdentical) {
  auto s = ft_test::trig_spec(15);
  EXPECT_EQ(estimate_G(s, 40.0, 1, {}, 9).log_G.log_magnitude, estimate_G(s, 40.0, 1, {}, 9).log_G.log_magnitude);
}

TEST(MgfOfMax, DeterministicIsLambdaTimesMax) {
  auto s = box_spec({0.0}, {1.0});
  s->mean = {{{0}, 0.91}, {{1}, 0.6}, {{2}, -1.0}};
  EXPECT_NEAR(mgf_of_max(s, 7.0, 5).log_mgf, 7.0, 1e-10);
}

TEST(MgfOfMax, StandardNormalSurrogate) {
  const std::size_t n = 100000;
  const auto m = ft_test::normal_draws(n, 4);
  EXPECT_NEAR(mgf_from_maxima(m, 1.0).log_mgf, 0.5, 3.0 / std::sqrt(static_cast<double>(n)));
  EXPECT_EQ(mgf_from_maxima(m, 0.0).log_mgf, 0.0);
}

TEST(MgfOfMax, LogSpaceMatchesLinear) {
  const auto m = ft_test::normal_draws(5000, 6);
  for (double l : {1.0, 5.0, 30.0}) {
    long double s = 0;
    for (double v : m) s += std::exp(static_cast<long double>(l * v));
    const double linear = static_cast<double>(s / m.size());
    EXPECT_NEAR(std::exp(mgf_from_maxima(m, l, 1.0).log_mgf) / linear, 1.0, 1e-10);
  }
}

TEST(MgfOfMax, EssGuard) {
  const auto m = ft_test::normal_draws(1000, 8);
  try {
    mgf_from_maxima(m, 50.0, 10.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EffectiveSampleSizeTooSmall);
  }
}

TEST(MgfOfMax, MonotoneInLambdaForNonNegativeMaxima) {
  // zero-mean integer-frequency trig fields integrate to 0, so M >= 0
  auto s = ft_test::trig_spec(19);
  const std::vector<double> lambdas{0.5, 1, 2, 4, 8};
  const ReplicateTable t = simulate_replicates(s, lambdas, 2000);
  const auto M = t.maxima();
  double prev = -1.0, prev_norm = -INFINITY;
  for (double l : lambdas) {
    const double v = mgf_from_maxima(M, l, 1.0).log_mgf;
    EXPECT_GE(v, prev);
    EXPECT_GE(v / l, prev_norm);
    prev = v;
    prev_norm = v / l;
  }
}

TEST(Theorem1Ratio, DeterministicReducesToLaplaceOracle) {
  EXPECT_NEAR(theorem1_ratio(ft_test::quadratic_spec(), 400.0, 1).ratio, 1.0, 0.005);
}

TEST(Theorem1Ratio, PairedBeatsUnpaired) {
  auto s = bump_trig(11);
  const std::vector<double> lambdas{50.0};
  const ReplicateTable a = simulate_replicates(s, lambdas, 1000, {}, 0);
  const ReplicateTable b = simulate_replicates(s, lambdas, 1000, {}, 1000);
  const Theorem1Report paired = theorem1_from_samples(a.maxima(), a.log_integrals(0), 1, 50.0);
  const Theorem1Report unpaired = theorem1_from_samples(a.maxima(), b.log_integrals(0), 1, 50.0);
  EXPECT_LT(paired.ratio_se, unpaired.ratio_se);
}

TEST(Theorem1Ratio, TrigFieldAtLambda100) {
  const Theorem1Report r = theorem1_ratio(bump_trig(11), 100.0, 10000);
  EXPECT_GE(r.ratio, 0.8);
  EXPECT_LE(r.ratio, 1.2);
  EXPECT_GE(r.ess, 10.0);
}

TEST(CorollaryR, IdentityWithG) {
  auto s = ft_test::trig_spec(2);
  const std::vector<double> lambdas{20.0};
  const ReplicateTable t = simulate_replicates(s, lambdas, 300);
  const auto logI = t.log_integrals(0);
  const double lhs = corollary_R_from_log_integrals(logI, 1, 20.0).log_magnitude;
  const double rhs = (0.5 - 1.0) * std::log(20.0) + g_from_log_integrals(logI, 1).log_G.log_magnitude;
  EXPECT_NEAR(lhs, rhs, 1e-13);
}

TEST(CorollaryR, DeterministicLaplaceLimit) {
  auto s = ft_test::quadratic_spec();
  double prev = INFINITY;
  for (double l : {1.0, 4.0, 16.0}) {
    // lambda R(lambda) = erf(sqrt(lambda / 2)) here, so the limit is 1
    const double dev = std::abs(std::exp(std::log(l) + corollary_R(s, l, 1).log_magnitude) - 1.0);
    EXPECT_LT(dev, prev);
    prev = dev;
  }
  EXPECT_LT(prev, 0.005);
}

TEST(CorollaryR, TailTransformIdentity) {
  auto s = bump_trig(5);
  const std::vector<double> lambdas{30.0};
  const auto M = simulate_replicates(s, lambdas, 2000).maxima();
  const TailTransform t = empirical_tail_transform(M, 30.0);
  EXPECT_NEAR(std::exp(t.log_full_line - mgf_from_maxima(M, 30.0).log_mgf), 1.0, 1e-6);
  // [0, inf) misses the mean of min(exp(lambda M), 1)
  double miss = 0.0;
  for (double m : M) miss += std::min(std::exp(30.0 * m), 1.0) / M.size();
  EXPECT_NEAR(std::exp(t.log_full_line) - std::exp(t.log_positive_half), miss, 1e-9 * std::exp(t.log_full_line));
}
