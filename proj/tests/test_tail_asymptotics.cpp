#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "fieldtail/error.hpp"
#include "fieldtail/tail_asymptotics.hpp"
#include "support.hpp"

using namespace fieldtail;

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// log of integral_0^inf y^gamma exp(lambda y - y^p / p) dy by a plain
// trapezoid rule in log space on a window around the saddle.
double log_integral_trapezoid(double gamma, double p, double lambda) {
  const double ys = std::pow(lambda, 1.0 / (p - 1.0));
  const double w = 1.0 / std::sqrt((p - 1.0) * std::pow(ys, p - 2.0));
  const double hi = ys + 60.0 * w;
  const int n = 400000;
  const double h = hi / n;
  std::vector<double> lv;
  lv.reserve(n + 1);
  for (int i = 1; i <= n; ++i) {
    const double y = i * h;
    lv.push_back(gamma * std::log(y) + lambda * y - std::pow(y, p) / p);
  }
  const double top = *std::max_element(lv.begin(), lv.end());
  double s = 0.0;
  for (std::size_t i = 0; i < lv.size(); ++i) s += (i + 1 == lv.size() ? 0.5 : 1.0) * std::exp(lv[i] - top);
  return top + std::log(s * h);
}

std::vector<double> geometric_grid(double lo, double hi, int n) {
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) g[i] = lo * std::pow(hi / lo, double(i) / (n - 1));
  return g;
}

}  // namespace

TEST(EmpiricalTail, SmallExample) {
  const std::vector<double> m{1, 2, 3, 4}, u{2.5};
  const TailCurve c = empirical_tail(m, u);
  EXPECT_EQ(c.tail[0], 0.5);
  EXPECT_EQ(c.n, 4u);
  EXPECT_LE(c.lower95[0], 0.5);
  EXPECT_GE(c.upper95[0], 0.5);
}

TEST(EmpiricalTail, BoundaryValues) {
  const std::vector<double> m{1, 2, 3, 4};
  const std::vector<double> u{0.0, 4.0, 10.0};
  const TailCurve c = empirical_tail(m, u);
  EXPECT_EQ(c.tail[0], 1.0);
  EXPECT_EQ(c.tail[1], 0.0);  // strict inequality
  EXPECT_EQ(c.tail[2], 0.0);
  EXPECT_THROW(empirical_tail(std::vector<double>{}, u), Error);
}

TEST(EmpiricalTail, NormalSampleAtTwo) {
  const auto x = ft_test::normal_draws(100000, 12);
  const std::vector<double> u{2.0};
  const double p = 1.0 - normal_cdf(2.0);
  EXPECT_NEAR(p, 0.02275, 1e-5);
  const TailCurve c = empirical_tail(x, u);
  EXPECT_NEAR(c.tail[0], p, 3.0 * std::sqrt(p * (1 - p) / 1e5));
}

TEST(EmpiricalTail, MonotoneAndBounded) {
  const auto x = ft_test::normal_draws(5000, 13);
  const auto u = geometric_grid(0.01, 4.0, 60);
  const TailCurve c = empirical_tail(x, u);
  EXPECT_NO_THROW(c.validate());
  for (std::size_t i = 1; i < c.tail.size(); ++i) EXPECT_LE(c.tail[i], c.tail[i - 1]);
}

TEST(Laplace44, GaussianCaseIsNormalCdf) {
  // p = 2, gamma = 0: the integral is sqrt(2 pi) exp(lambda^2 / 2) Phi(lambda)
  for (double lam : {1.5, 3.0, 6.0}) {
    const LaplaceCheck r = laplace_asymptotic_44(0.0, 2.0, lam);
    EXPECT_NEAR(r.ratio, normal_cdf(lam), 1e-8) << lam;
  }
  EXPECT_EQ(delta_exponent(0.0, 2.0), 0.0);
}

TEST(Laplace44, MatchesIndependentQuadrature) {
  for (auto [g, p, lam] : {std::tuple{1.0, 3.0, 4.0}, std::tuple{0.0, 1.5, 3.0}, std::tuple{-0.5, 2.5, 5.0}}) {
    const LaplaceCheck r = laplace_asymptotic_44(g, p, lam);
    EXPECT_NEAR(r.log_numeric, log_integral_trapezoid(g, p, lam), 1e-6 * std::max(1.0, std::abs(r.log_numeric)));
  }
}

TEST(Laplace44, RatioStabilizes) {
  for (double g : {0.0, 1.0}) {
    for (double p : {1.5, 2.0, 3.0}) {
      const double limit = 1.0 / std::sqrt(p - 1.0);
      double prev = INFINITY;
      for (double lam : {10.0, 20.0, 40.0, 80.0}) {
        const double dev = std::abs(laplace_asymptotic_44(g, p, lam).ratio - limit);
        EXPECT_LE(dev, prev + 1e-9) << g << " " << p << " " << lam;
        prev = dev;
      }
      EXPECT_LE(prev / limit, 0.02) << g << " " << p;
    }
  }
}

TEST(Laplace44, RejectsBadInput) {
  EXPECT_THROW(laplace_asymptotic_44(-1.0, 2.0, 5.0), Error);
  EXPECT_THROW(laplace_asymptotic_44(0.0, 1.0, 5.0), Error);
  EXPECT_THROW(laplace_asymptotic_44(0.0, 2.0, 0.0), Error);
}

TEST(AsymptoticParams, Exponents) {
  const AsymptoticParams a = AsymptoticParams::from_growth(0.0, 1.0, 2.0);
  EXPECT_DOUBLE_EQ(a.p, 2.0);
  EXPECT_DOUBLE_EQ(a.gamma, 0.0);
  const AsymptoticParams b = AsymptoticParams::from_growth(1.0, 1.0, 1.5);
  EXPECT_NEAR(b.p, 3.0, 1e-12);
  EXPECT_NEAR(b.gamma, 2.5, 1e-12);
  EXPECT_NEAR(b.Delta, b.alpha, 1e-12);
  EXPECT_THROW(AsymptoticParams::from_growth(0.0, -1.0, 2.0), Error);
  EXPECT_THROW(AsymptoticParams::from_growth(0.0, 1.0, 1.0), Error);
}

TEST(TailPrediction, GaussianValue) {
  const AsymptoticParams a = AsymptoticParams::from_growth(0.0, 1.0, 2.0);
  const std::vector<double> u{3.0};
  EXPECT_NEAR(tail_prediction_45(a, u).tail[0], 4.4318e-3, 1e-7);
  EXPECT_NEAR(std::exp(log_tail_formula(a, 3.0)), std::exp(-4.5) / std::sqrt(2 * std::numbers::pi), 1e-15);
}

TEST(TailPrediction, MonotoneAndClipped) {
  const AsymptoticParams a = AsymptoticParams::from_growth(1.0, 50.0, 1.5);
  const auto u = geometric_grid(0.05, 5.0, 80);
  const TailCurve c = tail_prediction_45(a, u);
  EXPECT_NO_THROW(c.validate());
  EXPECT_TRUE(c.clipped);
  EXPECT_TRUE(c.monotone_enforced);
  for (std::size_t i = 1; i < c.tail.size(); ++i) EXPECT_LE(c.tail[i], c.tail[i - 1]);
  for (double t : c.tail) {
    EXPECT_GE(t, 0.0);
    EXPECT_LE(t, 1.0);
  }
}

TEST(FitR, ExactRecovery) {
  const auto lam = geometric_grid(2.0, 40.0, 12);
  std::vector<double> logR;
  for (double l : lam) logR.push_back(std::log(1.7) + 0.8 * std::log(l) + l * l / 2.0);
  const FitReport f = fit_R_params(lam, logR);
  EXPECT_FALSE(f.degenerate) << f.reason;
  EXPECT_NEAR(f.params.q, 2.0, 1e-6);
  EXPECT_NEAR(f.params.alpha, 0.8, 1e-5);
  EXPECT_NEAR(f.params.C_R, 1.7, 1e-4);
}

TEST(FitR, OffGridExponentIsRefined) {
  const auto lam = geometric_grid(2.0, 40.0, 12);
  const double q = 1.8;
  std::vector<double> logR;
  for (double l : lam) logR.push_back(0.3 * std::log(l) + std::pow(l, q) / q);
  const FitReport f = fit_R_params(lam, logR);
  EXPECT_NEAR(f.params.q, q, 1e-4);
  EXPECT_NEAR(f.params.alpha, 0.3, 1e-2);
}

TEST(FitR, NoisyRecovery) {
  const auto lam = geometric_grid(2.0, 40.0, 16);
  const auto noise = ft_test::normal_draws(lam.size(), 4);
  std::vector<double> logR;
  for (std::size_t i = 0; i < lam.size(); ++i) {
    logR.push_back(0.5 * std::log(lam[i]) + lam[i] * lam[i] / 2.0 + std::log1p(0.01 * noise[i]));
  }
  const FitReport f = fit_R_params(lam, logR);
  EXPECT_NEAR(f.params.q, 2.0, 0.01);
  EXPECT_NEAR(f.params.alpha, 0.5, 0.1);
}

TEST(FitR, ConstantIsDegenerate) {
  const auto lam = geometric_grid(1.0, 100.0, 10);
  const std::vector<double> logR(lam.size(), std::log(3.0));
  const FitReport f = fit_R_params(lam, logR);
  EXPECT_TRUE(f.degenerate);
  EXPECT_NEAR(f.params.alpha, 0.0, 1e-12);
  EXPECT_NEAR(f.params.C_R, 3.0, 1e-12);
  EXPECT_TRUE(std::isnan(f.params.q));
}

TEST(FitR, RejectsShortOrNarrowGrids) {
  const std::vector<double> lam{1, 2, 3, 4, 5};
  const std::vector<double> r(5, 1.0);
  EXPECT_THROW(fit_R_params(lam, r), Error);
  const auto narrow = geometric_grid(1.0, 5.0, 8);
  EXPECT_THROW(fit_R_params(narrow, std::vector<double>(8, 1.0)), Error);
}

TEST(FitR, RoundTripThroughPrediction) {
  const AsymptoticParams truth = AsymptoticParams::from_growth(0.7, 2.0, 1.5);
  const auto lam = geometric_grid(3.0, 60.0, 12);
  std::vector<double> logR;
  for (double l : lam) logR.push_back(std::log(truth.C_R) + truth.alpha * std::log(l) + std::pow(l, truth.q) / truth.q);
  const FitReport f = fit_R_params(lam, logR);
  const std::vector<double> u{2.0, 3.0, 4.0};
  const TailCurve a = tail_prediction_45(truth, u), b = tail_prediction_45(f.params, u);
  for (std::size_t i = 0; i < u.size(); ++i) {
    EXPECT_NEAR(std::log(b.tail[i]), std::log(a.tail[i]), 0.05 * std::abs(std::log(a.tail[i])));
  }
}

TEST(Tauberian, GaussianRatioNearOne) {
  const AsymptoticParams a = AsymptoticParams::from_growth(0.0, 1.0, 2.0);
  EXPECT_NEAR(tauberian_consistency(a, 20.0).ratio, 1.0, 1e-3);
}

TEST(Tauberian, ApproachesLimitUnderDoubling) {
  for (double q : {1.5, 2.0, 3.0}) {
    const AsymptoticParams a = AsymptoticParams::from_growth(0.5, 1.0, q);
    const double limit = 1.0 / std::sqrt(a.p - 1.0);
    double prev = INFINITY;
    for (double lam = 5.0; lam <= 80.0; lam *= 2) {
      const double dev = std::abs(tauberian_consistency(a, lam).ratio - limit);
      EXPECT_LE(dev, prev + 1e-9) << q << " " << lam;
      prev = dev;
    }
    EXPECT_LE(prev / limit, 0.02) << q;
  }
}

TEST(TailCurve, ValidateRejectsBadCurves) {
  TailCurve c;
  c.u = {1.0, 2.0};
  c.tail = {0.5, 0.6};
  c.lower95 = c.tail;
  c.upper95 = c.tail;
  EXPECT_THROW(c.validate(), Error);
  c.tail = {0.5, 0.4};
  c.u = {2.0, 1.0};
  EXPECT_THROW(c.validate(), Error);
  c.u = {1.0, 2.0};
  EXPECT_NO_THROW(c.validate());
  c.tail = {1.5, 0.4};
  EXPECT_THROW(c.validate(), Error);
}

TEST(ShapeRegression, GaussianMaximaSlope) {
  // |N(0,1)| has tail ~ exp(-u^2 / 2) up to a log factor
  auto x = ft_test::normal_draws(200000, 21);
  for (auto& v : x) v = std::abs(v);
  const ShapeFit f = shape_regression(x, 2.0, 0.05);
  EXPECT_GT(f.n_points, 100u);
  EXPECT_NEAR(f.slope_with_log, 1.0, 0.15);
}

TEST(SimulateMaxima, DeterministicSpecGivesOneValue) {
  const auto m = simulate_maxima(ft_test::quadratic_spec(), 50);
  ASSERT_EQ(m.size(), 1u);
  EXPECT_NEAR(m[0], 0.0, 1e-12);
}
