#include "fieldtail/metric_entropy.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <queue>

#include "fieldtail/error.hpp"
#include "fieldtail/parallel.hpp"
#include "fieldtail/stats.hpp"

namespace fieldtail {
namespace {

// Closed balls with a relative slack so grid distances that equal epsilon
// up to rounding count as inside.
double with_slack(double epsilon) { return epsilon * (1.0 + 1e-12); }

// If dist(i, j) = c |x_i - x_j| for scalar points, returns the scaled line
// coordinates c x_i.
std::optional<std::vector<double>> line_coordinates(const MetricSample& ms) {
  const std::size_t n = ms.size();
  for (const auto& p : ms.points) {
    if (p.size() != 1) return std::nullopt;
  }
  std::size_t lo = 0, hi = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (ms.points[i][0] < ms.points[lo][0]) lo = i;
    if (ms.points[i][0] > ms.points[hi][0]) hi = i;
  }
  const double span = ms.points[hi][0] - ms.points[lo][0];
  const double c = span > 0.0 ? ms.dist(static_cast<Eigen::Index>(lo), static_cast<Eigen::Index>(hi)) / span : 0.0;
  const double tol = 1e-9 * std::max(1.0, ms.dist.maxCoeff());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double expect = c * std::abs(ms.points[i][0] - ms.points[j][0]);
      if (std::abs(ms.dist(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) - expect) > tol) {
        return std::nullopt;
      }
    }
  }
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = c * ms.points[i][0];
  return y;
}

std::size_t sweep_cover(std::vector<double> y, double epsilon) {
  std::sort(y.begin(), y.end());
  const double r = with_slack(epsilon);
  std::size_t count = 0;
  std::size_t i = 0;
  const std::size_t n = y.size();
  while (i < n) {
    const double left = y[i];
    std::size_t j = i;
    while (j + 1 < n && y[j + 1] - left <= r) ++j;
    const double reach = y[j];
    ++count;
    i = j;
    while (i < n && y[i] - reach <= r) ++i;
  }
  return count;
}

std::size_t greedy_cover(const MetricSample& ms, double epsilon) {
  const std::size_t n = ms.size();
  const double r = with_slack(epsilon);
  std::vector<char> covered(n, 0);
  std::size_t remaining = n;
  auto gain = [&](std::size_t c) {
    std::size_t g = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (!covered[j] && ms.dist(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(j)) <= r) ++g;
    }
    return g;
  };
  // Max-heap on (gain, -index): ties go to the lowest index.
  using Entry = std::pair<std::size_t, std::int64_t>;
  std::priority_queue<Entry> heap;
  for (std::size_t i = 0; i < n; ++i) heap.push({gain(i), -static_cast<std::int64_t>(i)});
  std::size_t count = 0;
  while (remaining > 0) {
    const auto [stale, negi] = heap.top();
    heap.pop();
    const auto c = static_cast<std::size_t>(-negi);
    const std::size_t g = gain(c);
    if (g == 0) continue;
    if (!heap.empty() && g < heap.top().first) {
      heap.push({g, negi});
      continue;
    }
    for (std::size_t j = 0; j < n; ++j) {
      if (!covered[j] && ms.dist(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(j)) <= r) {
        covered[j] = 1;
        --remaining;
      }
    }
    ++count;
  }
  return count;
}

MetricSample from_function(std::vector<Point> points, double (*d)(const Point&, const Point&)) {
  MetricSample ms;
  const std::size_t n = points.size();
  ms.dist = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    require(points[i].size() == points[0].size(), ErrorCode::InvalidArgument, "points differ in dimension");
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = d(points[i], points[j]);
      ms.dist(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
      ms.dist(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
    }
  }
  ms.points = std::move(points);
  return ms;
}

}  // namespace

double MetricSample::diameter() const { return size() == 0 ? 0.0 : dist.maxCoeff(); }

void MetricSample::validate() const {
  const auto n = static_cast<Eigen::Index>(points.size());
  require(dist.rows() == n && dist.cols() == n, ErrorCode::InvalidArgument,
          "distance matrix size does not match the point count");
  for (Eigen::Index i = 0; i < n; ++i) {
    require(dist(i, i) == 0.0, ErrorCode::InvalidArgument, "distance diagonal must be zero");
    for (Eigen::Index j = i + 1; j < n; ++j) {
      require(std::isfinite(dist(i, j)) && dist(i, j) >= 0.0, ErrorCode::InvalidArgument,
              "distances must be finite and non-negative");
      require(dist(i, j) == dist(j, i), ErrorCode::InvalidArgument, "distance matrix must be symmetric");
    }
  }
}

double MetricSample::triangle_defect() const {
  const auto n = static_cast<Eigen::Index>(points.size());
  double worst = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index k = 0; k < n; ++k) {
        worst = std::max(worst, dist(i, k) - dist(i, j) - dist(j, k));
      }
    }
  }
  return worst;
}

MetricSample euclidean_metric(std::vector<Point> points) {
  return from_function(std::move(points), [](const Point& a, const Point& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
    return std::sqrt(s);
  });
}

MetricSample sup_metric(std::vector<Point> points) {
  return from_function(std::move(points), [](const Point& a, const Point& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s = std::max(s, std::abs(a[k] - b[k]));
    return s;
  });
}

std::vector<Point> grid_points(const std::vector<double>& lower, const std::vector<double>& upper, std::size_t m) {
  require(!lower.empty() && lower.size() == upper.size(), ErrorCode::InvalidArgument, "bad grid box");
  require(m >= 1, ErrorCode::InvalidArgument, "grid needs at least one point per axis");
  const std::size_t d = lower.size();
  std::size_t total = 1;
  for (std::size_t k = 0; k < d; ++k) total *= m;
  std::vector<Point> out;
  out.reserve(total);
  std::vector<std::size_t> idx(d, 0);
  for (std::size_t t = 0; t < total; ++t) {
    Point p(d);
    for (std::size_t k = 0; k < d; ++k) {
      p[k] = m == 1 ? lower[k]
                    : lower[k] + (upper[k] - lower[k]) * static_cast<double>(idx[k]) / static_cast<double>(m - 1);
    }
    out.push_back(std::move(p));
    for (std::size_t k = 0; k < d; ++k) {
      if (++idx[k] < m) break;
      idx[k] = 0;
    }
  }
  return out;
}

MetricSample natural_distance_matrix(const std::shared_ptr<const FieldSpec>& spec, std::vector<Point> points,
                                     DistanceMode mode, std::size_t replicates, const BphiOptions& bphi) {
  require(spec != nullptr, ErrorCode::InvalidArgument, "null field spec");
  spec->validate();
  for (const auto& p : points) {
    require(spec->domain.contains(p), ErrorCode::PointOutsideDomain, "distance points must lie in [D]");
  }
  const std::size_t n = points.size();
  MetricSample ms;
  ms.dist = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));

  if (mode == DistanceMode::AnalyticGaussian) {
    require(spec->all_gaussian(), ErrorCode::NonGaussianSpec,
            "analytic natural distance needs all coefficient laws Gaussian");
    parallel_for(n, [&](std::size_t i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        ms.dist(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            gaussian_natural_distance(*spec, points[i], points[j]);
      }
    });
  } else {
    require(replicates >= 2, ErrorCode::InvalidArgument, "empirical distances need a replicate budget >= 2");
    // values(r, i) = centered field value of replicate r at point i.
    Eigen::MatrixXd values(static_cast<Eigen::Index>(replicates), static_cast<Eigen::Index>(n));
    parallel_for(replicates, [&](std::size_t r) {
      const FieldSample s = sample_field(spec, r);
      for (std::size_t i = 0; i < n; ++i) {
        values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(i)) = s.centered_value(points[i]);
      }
    });
    const PhiFunction phi = PhiFunction::gaussian();
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
    }
    parallel_for(pairs.size(), [&](std::size_t k) {
      const auto [i, j] = pairs[k];
      std::vector<double> diff(replicates);
      long double mean = 0.0L;
      for (std::size_t r = 0; r < replicates; ++r) {
        diff[r] = values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(i)) -
                  values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j));
        mean += diff[r];
      }
      mean /= static_cast<long double>(replicates);
      for (double& v : diff) v -= static_cast<double>(mean);
      ms.dist(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = bphi_norm(diff, phi, bphi).value;
    });
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      ms.dist(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) =
          ms.dist(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  }
  ms.points = std::move(points);
  return ms;
}

std::size_t covering_number(const MetricSample& ms, double epsilon) {
  require(std::isfinite(epsilon) && epsilon > 0.0, ErrorCode::InvalidArgument, "epsilon must be positive");
  if (ms.size() == 0) return 0;
  if (auto y = line_coordinates(ms)) return sweep_cover(std::move(*y), epsilon);
  return greedy_cover(ms, epsilon);
}

std::size_t covering_number_exact(const MetricSample& ms, double epsilon) {
  require(std::isfinite(epsilon) && epsilon > 0.0, ErrorCode::InvalidArgument, "epsilon must be positive");
  const std::size_t n = ms.size();
  require(n <= 20, ErrorCode::InvalidArgument, "exhaustive cover is limited to 20 points");
  if (n == 0) return 0;
  const double r = with_slack(epsilon);
  std::vector<std::uint32_t> ball(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (ms.dist(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) <= r) ball[i] |= 1u << j;
    }
  }
  const std::uint32_t all = n == 32 ? ~0u : (1u << n) - 1u;
  std::size_t best = n;
  for (std::uint32_t mask = 1; mask <= all; ++mask) {
    const auto k = static_cast<std::size_t>(std::popcount(mask));
    if (k >= best) continue;
    std::uint32_t cover = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1u << i)) cover |= ball[i];
    }
    if (cover == all) best = k;
  }
  return best;
}

double resolution(const MetricSample& ms) {
  const auto n = static_cast<Eigen::Index>(ms.size());
  double worst = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double nn = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j != i) nn = std::min(nn, ms.dist(i, j));
    }
    if (std::isfinite(nn)) worst = std::max(worst, nn);
  }
  return worst;
}

EntropyReport entropy_series(const MetricSample& ms, int n_max) {
  require(n_max >= 1, ErrorCode::InvalidArgument, "n_max must be >= 1");
  require(ms.size() >= 1, ErrorCode::InvalidArgument, "empty metric sample");
  ms.validate();
  EntropyReport out;
  const double diam = ms.diameter();
  const double h = resolution(ms);
  out.normalization = diam > 0.0 ? diam : 1.0;

  double sum = 0.0;
  for (int n = 1; n <= n_max; ++n) {
    const double eps = std::ldexp(1.0, -n);
    if (diam > 0.0 && eps * diam < h) break;
    EntropyRow row;
    row.n = n;
    row.eps = eps;
    row.covering = diam > 0.0 ? covering_number(ms, eps * diam) : 1;
    row.entropy = std::log(static_cast<double>(row.covering));
    row.term = eps * row.entropy;
    sum += row.term;
    row.partial_sum = sum;
    out.rows.push_back(row);
    out.resolved_n = n;
  }

  bool geometric = out.rows.size() >= 6;
  for (std::size_t k = out.rows.size() >= 6 ? out.rows.size() - 5 : 0; geometric && k < out.rows.size(); ++k) {
    const double prev = out.rows[k - 1].term;
    const double cur = out.rows[k].term;
    const double ratio = prev > 0.0 ? cur / prev : (cur > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    geometric = ratio < 0.9;
  }
  if (diam == 0.0) geometric = true;
  if (geometric) {
    out.verdict = "converges";
  } else if (out.resolved_n < n_max) {
    out.verdict = "inconclusive-beyond-n";
  } else {
    out.verdict = "inconclusive";
  }
  return out;
}

DimensionEstimate metric_dimension(const MetricSample& ms) {
  require(ms.size() >= 1, ErrorCode::InvalidArgument, "empty metric sample");
  ms.validate();
  DimensionEstimate out;
  const double diam = ms.diameter();
  if (diam == 0.0) return out;
  const double h = resolution(ms);
  std::vector<double> x, y;
  for (int n = 1; n <= 60; ++n) {
    const double eps = std::ldexp(1.0, -n);
    if (eps * diam < h) break;
    const std::size_t N = covering_number(ms, eps * diam);
    if (N <= 1) continue;
    x.push_back(-std::log(eps));
    y.push_back(std::log(static_cast<double>(N)));
  }
  out.n_scales = x.size();
  if (x.size() < 3) {
    throw Error(ErrorCode::InsufficientScales,
                "only " + std::to_string(x.size()) + " resolvable scales with N > 1; need 3");
  }
  out.kappa = fit_line(x, y).slope;
  return out;
}

MetricSample restrict_to(const MetricSample& ms, const std::vector<std::size_t>& idx) {
  MetricSample out;
  const auto k = static_cast<Eigen::Index>(idx.size());
  out.dist.resize(k, k);
  for (Eigen::Index a = 0; a < k; ++a) {
    out.points.push_back(ms.points.at(idx[static_cast<std::size_t>(a)]));
    for (Eigen::Index b = 0; b < k; ++b) {
      out.dist(a, b) = ms.dist(static_cast<Eigen::Index>(idx[static_cast<std::size_t>(a)]),
                               static_cast<Eigen::Index>(idx[static_cast<std::size_t>(b)]));
    }
  }
  return out;
}

}  // namespace fieldtail
