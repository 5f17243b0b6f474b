#include "fieldtail/oracles.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <utility>

#include "fieldtail/error.hpp"
#include "fieldtail/laplace_saddle.hpp"
#include "fieldtail/metric_entropy.hpp"
#include "fieldtail/orlicz.hpp"
#include "fieldtail/rng.hpp"
#include "fieldtail/tail_asymptotics.hpp"

namespace fieldtail {
namespace {

using Check = std::pair<bool, std::string>;

std::string printf_str(const char* f, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

Check saddle_quadratic() {
  auto spec = std::make_shared<FieldSpec>();
  spec->domain = {{-1.0}, {1.0}};
  spec->mean.push_back({{2}, -0.5});
  const FieldSample s = sample_field(spec, 0);
  const SaddleReport r = pathwise_report(s, 400.0);
  const double printed = std::exp(r.log_I.log_magnitude - r.log_approx_printed.log_magnitude);
  return {std::abs(r.ratio - 1.0) <= 0.005,
          printf_str("ratio %.9f at lambda 400; against the printed constant %.6f", r.ratio, printed)};
}

Check yf_gaussian() {
  const PhiFunction phi = PhiFunction::gaussian();
  double worst = 0.0;
  for (int i = 0; i <= 2000; ++i) {
    const double u = -10.0 + 0.01 * i;
    worst = std::max(worst, std::abs(young_fenchel(phi, u) - 0.5 * u * u));
  }
  return {worst <= 1e-8, printf_str("max |phi*(u) - u^2/2| = %.3g on [-10, 10]", worst)};
}

Check yf_power() {
  const PhiFunction phi = PhiFunction::pure_power(3.0);
  const double q = 1.5;
  double worst = 0.0;
  for (int i = 0; i <= 400; ++i) {
    const double u = -10.0 + 0.05 * i;
    worst = std::max(worst, std::abs(young_fenchel(phi, u) - std::pow(std::abs(u), q) / q));
  }
  return {worst <= 1e-6, printf_str("max |phi*(u) - |u|^1.5/1.5| = %.3g for p = 3", worst)};
}

Check laplace_p2() {
  const double r = laplace_asymptotic_44(0.0, 2.0, 20.0).ratio;
  return {std::abs(r - 1.0) <= 0.01, printf_str("ratio %.6f at lambda 20", r)};
}

Check laplace_p3() {
  const double r = laplace_asymptotic_44(0.0, 3.0, 30.0).ratio;
  const double target = 1.0 / std::sqrt(2.0);
  return {std::abs(r / target - 1.0) <= 0.02, printf_str("ratio %.6f at lambda 30, (p-1)^{-1/2} = %.6f", r, target)};
}

Check tauberian_p2() {
  const double r = tauberian_consistency(AsymptoticParams::from_growth(0.0, 1.0, 2.0), 20.0).ratio;
  return {std::abs(r - 1.0) <= 0.02, printf_str("ratio %.9f at lambda 20", r)};
}

Check fit_synthetic() {
  std::vector<double> lambda, logR;
  for (int i = 0; i < 30; ++i) {
    const double l = 1.0 + 0.5 * i;
    lambda.push_back(l);
    logR.push_back(std::log(2.0) + std::log(l) + 0.5 * l * l);
  }
  const FitReport f = fit_R_params(lambda, logR);
  const double err = std::max({std::abs(f.params.alpha - 1.0), std::abs(f.params.C_R - 2.0), std::abs(f.params.q - 2.0)});
  return {!f.degenerate && err <= 1e-6, printf_str("alpha %.9f, largest parameter error %.3g", f.params.alpha, err)};
}

Check covering_interval() {
  std::vector<Point> pts;
  for (int i = 0; i <= 1000; ++i) pts.push_back({i / 1000.0});
  const MetricSample ms = euclidean_metric(pts);
  bool ok = true;
  std::string detail;
  for (double eps : {0.5, 0.25, 0.1}) {
    // each ball holds 2 eps / h + 1 grid points
    const auto expected = static_cast<std::size_t>(std::ceil(1001.0 / (2.0 * eps * 1000.0 + 1.0)));
    const std::size_t got = covering_number(ms, eps);
    ok = ok && got == expected;
    detail += "N(" + printf_str("%g", eps) + ") = " + std::to_string(got) + " ";
  }
  return {ok, detail};
}

Check corollary_identity() {
  std::vector<double> maxima;
  Philox4x32 rng(5, 0);
  for (int i = 0; i < 2000; ++i) maxima.push_back(2.0 * rng.uniform() - 0.5);
  const double lambda = 3.0;
  double log_mgf = -INFINITY;
  for (double m : maxima) log_mgf = std::max(log_mgf, lambda * m);
  double s = 0.0;
  for (double m : maxima) s += std::exp(lambda * m - log_mgf);
  log_mgf += std::log(s / static_cast<double>(maxima.size()));
  const TailTransform t = empirical_tail_transform(maxima, lambda);
  const double rel = std::abs(std::expm1(t.log_full_line - log_mgf));
  return {rel <= 1e-10, printf_str("relative difference %.3g", rel)};
}

Check philox_kat() {
  using A = std::array<std::uint32_t, 4>;
  const A a = Philox4x32::block({0, 0, 0, 0}, {0, 0});
  const A b = Philox4x32::block({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff});
  const A c = Philox4x32::block({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0});
  const bool ok = a == A{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8} &&
                  b == A{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd} &&
                  c == A{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1};
  return {ok, ok ? "three reference blocks match" : "reference block mismatch"};
}

const std::vector<std::pair<std::string, std::function<Check()>>>& registry() {
  static const std::vector<std::pair<std::string, std::function<Check()>>> r = {
      {"saddle-quadratic", saddle_quadratic},   {"young-fenchel-gaussian", yf_gaussian},
      {"young-fenchel-power", yf_power},        {"laplace44-p2", laplace_p2},
      {"laplace44-p3", laplace_p3},             {"tauberian-p2", tauberian_p2},
      {"fit-synthetic", fit_synthetic},         {"covering-interval", covering_interval},
      {"corollary-identity", corollary_identity}, {"philox-kat", philox_kat},
  };
  return r;
}

}  // namespace

std::vector<std::string> oracle_names() {
  std::vector<std::string> out;
  for (const auto& [name, fn] : registry()) out.push_back(name);
  return out;
}

OracleResult run_oracle(const std::string& name) {
  for (const auto& [n, fn] : registry()) {
    if (n != name) continue;
    const auto t0 = std::chrono::steady_clock::now();
    const auto [ok, detail] = fn();
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {name, ok, detail, secs};
  }
  throw Error(ErrorCode::InvalidArgument, "unknown oracle '" + name + "'");
}

}  // namespace fieldtail
