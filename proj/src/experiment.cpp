#include "fieldtail/experiment.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <regex>
#include <sstream>

#include "fieldtail/error.hpp"
#include "fieldtail/laplace_saddle.hpp"
#include "fieldtail/metric_entropy.hpp"
#include "fieldtail/orlicz.hpp"
#include "fieldtail/parallel.hpp"
#include "fieldtail/tail_asymptotics.hpp"

namespace fieldtail {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using Clock = std::chrono::system_clock;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt(std::uint64_t v) { return std::to_string(v); }

std::string fmt_point(const Point& x) {
  std::string s;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (i) s += ';';
    s += fmt(x[i]);
  }
  return s;
}

std::string stamp(Clock::time_point t, const char* pattern) {
  const std::time_t tt = Clock::to_time_t(t);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, pattern, &tm);
  return buf;
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

// json has no NaN; non-finite scalars become null.
json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

using Row = std::vector<std::string>;

class CsvWriter {
 public:
  explicit CsvWriter(std::FILE* f) : f_(f) {}
  void row(const Row& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) std::fputc(',', f_);
      std::fputs(cells[i].c_str(), f_);
    }
    std::fputc('\n', f_);
  }
  void flush() { std::fflush(f_); }

 private:
  std::FILE* f_;
};

std::vector<std::string> header_for(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::SaddlePathwise:
      return {"replicate_id", "lambda", "M", "x0", "interior", "nondegenerate",
              "log_I", "log_approx", "log_approx_printed", "ratio"};
    case ExperimentKind::Theorem1:
      return {"lambda", "n", "ess", "log_mgf", "log_G", "ratio", "ratio_se", "ci_low", "ci_high"};
    case ExperimentKind::Corollary1:
      return {"lambda", "n", "ess", "log_mgf", "log_tail_full", "log_tail_half",
              "identity_rel_diff", "log_R", "ratio_half_to_R"};
    case ExperimentKind::Entropy:
      return {"n", "eps", "covering_number", "entropy", "term", "partial_sum", "verdict"};
    case ExperimentKind::Norms:
      return {"point", "n", "bphi_norm", "bphi_binding", "bphi_trimmed", "gpsi_norm", "gpsi_binding", "tail_constant"};
    case ExperimentKind::Tauberian:
      return {"lambda", "alpha", "C_R", "q", "p", "gamma", "Delta", "ratio", "laplace44_ratio"};
    case ExperimentKind::TailShape:
      return {"u", "tail", "lower95", "upper95", "source"};
  }
  return {};
}

SaddleOptions saddle_options(const ExperimentConfig& cfg) { return {cfg.max, cfg.quad, cfg.min_ess}; }

json run_saddle_pathwise(const ExperimentConfig& cfg, CsvWriter& out) {
  auto spec = std::make_shared<const FieldSpec>(cfg.field);
  const std::size_t n = spec->deterministic() ? 1 : cfg.replicates;
  const std::size_t L = cfg.lambdas.size();
  std::vector<std::vector<double>> deviations(L);
  std::size_t n_nondegenerate = 0;
  constexpr std::size_t kChunk = 64;
  for (std::size_t start = 0; start < n; start += kChunk) {
    const std::size_t m = std::min(kChunk, n - start);
    std::vector<std::vector<Row>> rows(m);
    std::vector<std::vector<double>> ratios(m);
    std::vector<char> nondeg(m, 0);
    parallel_for(m, [&](std::size_t i) {
      const std::uint64_t id = start + i;
      const FieldSample sample = sample_field(spec, id);
      const MaxResult peak = find_max(sample, cfg.max);
      const bool nd = check_nondegeneracy(peak, cfg.max.det_tol, cfg.max.eig_tol);
      nondeg[i] = nd;
      for (double lambda : cfg.lambdas) {
        double log_I, log_approx, log_printed, ratio;
        if (nd) {
          const SaddleReport rep = pathwise_report(sample, peak, lambda, cfg.quad, cfg.max.det_tol);
          log_I = rep.log_I.log_magnitude;
          log_approx = rep.log_approx.log_magnitude;
          log_printed = rep.log_approx_printed.log_magnitude;
          ratio = rep.ratio;
        } else {
          log_I = integral_I(sample, lambda, cfg.quad).value.log_magnitude;
          log_approx = log_printed = ratio = std::numeric_limits<double>::quiet_NaN();
        }
        ratios[i].push_back(ratio);
        rows[i].push_back({fmt(id), fmt(lambda), fmt(peak.M), fmt_point(peak.x0), peak.interior ? "1" : "0",
                           nd ? "1" : "0", fmt(log_I), fmt(log_approx), fmt(log_printed), fmt(ratio)});
      }
    });
    for (std::size_t i = 0; i < m; ++i) {
      for (const Row& r : rows[i]) out.row(r);
      if (!nondeg[i]) continue;
      ++n_nondegenerate;
      for (std::size_t k = 0; k < L; ++k) deviations[k].push_back(std::abs(ratios[i][k] - 1.0));
    }
    out.flush();
  }
  json med = json::array();
  for (std::size_t k = 0; k < L; ++k) med.push_back(num(median(deviations[k])));
  return {{"replicates", n}, {"nondegenerate", n_nondegenerate}, {"lambdas", cfg.lambdas},
          {"median_abs_ratio_minus_1", med}};
}

json run_theorem1(const ExperimentConfig& cfg, CsvWriter& out) {
  auto spec = std::make_shared<const FieldSpec>(cfg.field);
  const ReplicateTable table = simulate_replicates(spec, cfg.lambdas, cfg.replicates, saddle_options(cfg));
  const std::vector<double> maxima = table.maxima();
  json ratios = json::array();
  for (std::size_t k = 0; k < cfg.lambdas.size(); ++k) {
    const std::vector<double> log_I = table.log_integrals(k);
    const Theorem1Report r = theorem1_from_samples(maxima, log_I, table.dim, cfg.lambdas[k], cfg.min_ess);
    out.row({fmt(r.lambda), fmt(static_cast<std::uint64_t>(r.n)), fmt(r.ess), fmt(r.log_mgf), fmt(r.log_G),
             fmt(r.ratio), fmt(r.ratio_se), fmt(r.ci_low), fmt(r.ci_high)});
    out.flush();
    ratios.push_back(num(r.ratio));
  }
  return {{"replicates", table.rows.size()}, {"lambdas", cfg.lambdas}, {"ratio", ratios}};
}

json run_corollary1(const ExperimentConfig& cfg, CsvWriter& out) {
  auto spec = std::make_shared<const FieldSpec>(cfg.field);
  const ReplicateTable table = simulate_replicates(spec, cfg.lambdas, cfg.replicates, saddle_options(cfg));
  const std::vector<double> maxima = table.maxima();
  double worst = 0.0;
  for (std::size_t k = 0; k < cfg.lambdas.size(); ++k) {
    const double lambda = cfg.lambdas[k];
    const MgfEstimate mgf = mgf_from_maxima(maxima, lambda, cfg.min_ess);
    const TailTransform tt = empirical_tail_transform(maxima, lambda);
    // Columns hold the bare integrals of exp(lambda z) T(z); the identity
    // compares lambda times the whole-line integral with the MGF.
    const double log_full = tt.log_full_line - std::log(lambda);
    const double log_half = tt.log_positive_half - std::log(lambda);
    const double rel = std::abs(std::expm1(tt.log_full_line - mgf.log_mgf));
    worst = std::max(worst, rel);
    const double log_R = corollary_R_from_log_integrals(table.log_integrals(k), table.dim, lambda).log_magnitude;
    out.row({fmt(lambda), fmt(static_cast<std::uint64_t>(mgf.n)), fmt(mgf.ess), fmt(mgf.log_mgf), fmt(log_full),
             fmt(log_half), fmt(rel), fmt(log_R), fmt(std::exp(log_half - log_R))});
    out.flush();
  }
  return {{"replicates", table.rows.size()}, {"max_identity_rel_diff", worst}};
}

json run_entropy(const ExperimentConfig& cfg, CsvWriter& out) {
  auto spec = std::make_shared<const FieldSpec>(cfg.field);
  std::vector<Point> pts = grid_points(cfg.field.domain.lower, cfg.field.domain.upper, cfg.entropy.grid_points);
  BphiOptions bo;
  bo.min_ess = cfg.min_ess;
  const MetricSample ms =
      natural_distance_matrix(spec, std::move(pts), cfg.entropy.empirical ? DistanceMode::EmpiricalBphi
                                                                           : DistanceMode::AnalyticGaussian,
                              cfg.entropy.replicates, bo);
  const EntropyReport rep = entropy_series(ms, cfg.entropy.n_max);
  for (const EntropyRow& r : rep.rows) {
    out.row({std::to_string(r.n), fmt(r.eps), fmt(static_cast<std::uint64_t>(r.covering)), fmt(r.entropy),
             fmt(r.term), fmt(r.partial_sum), rep.verdict});
  }
  json res = {{"verdict", rep.verdict},
              {"resolved_n", rep.resolved_n},
              {"normalization", rep.normalization},
              {"points", ms.size()}};
  try {
    const DimensionEstimate dim = metric_dimension(ms);
    res["kappa"] = dim.kappa;
    res["kappa_scales"] = dim.n_scales;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::InsufficientScales) throw;
    res["kappa"] = nullptr;
  }
  if (ms.size() <= 400) res["triangle_defect"] = ms.triangle_defect();
  return res;
}

json run_norms(const ExperimentConfig& cfg, CsvWriter& out) {
  auto spec = std::make_shared<const FieldSpec>(cfg.field);
  const auto& points = cfg.norms.points;
  const std::size_t n = cfg.replicates;
  Eigen::MatrixXd X(static_cast<Eigen::Index>(points.size()), static_cast<Eigen::Index>(n));
  parallel_for(n, [&](std::size_t j) {
    const FieldSample s = sample_field(spec, j);
    for (std::size_t i = 0; i < points.size(); ++i) {
      X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = s.centered_value(points[i]);
    }
  });
  BphiOptions bo;
  if (!cfg.norms.t_grid.empty()) bo.t_grid = cfg.norms.t_grid;
  bo.min_ess = cfg.min_ess;
  json per_point = json::array();
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Eigen::VectorXd row = X.row(static_cast<Eigen::Index>(i)).transpose();
    const std::span<const double> v(row.data(), static_cast<std::size_t>(row.size()));
    const NormEstimate b = bphi_norm(v, cfg.norms.phi, bo);
    const NormEstimate g = gpsi_norm(v, cfg.norms.phi, cfg.norms.r_grid);
    const double c = smallest_tail_constant(v, cfg.norms.phi);
    out.row({fmt_point(points[i]), fmt(static_cast<std::uint64_t>(n)), fmt(b.value), fmt(b.binding),
             fmt(static_cast<std::uint64_t>(b.trimmed)), fmt(g.value), fmt(g.binding), fmt(c)});
    out.flush();
    per_point.push_back({{"bphi", num(b.value)}, {"gpsi", num(g.value)}, {"tail_constant", num(c)}});
  }
  json res = {{"points", per_point}};
  if (!cfg.norms.mu_candidates.empty()) {
    try {
      const KramerReport k = kramer_check(X, cfg.norms.mu_candidates);
      json phi0 = json::array();
      for (double v : k.phi0) phi0.push_back(num(v));
      res["kramer"] = {{"mu", k.mu}, {"lambda_grid", k.lambda_grid}, {"phi0", phi0}};
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoCandidatePasses) throw;
      res["kramer"] = {{"error", e.what()}};
    }
  }
  return res;
}

json run_tauberian(const ExperimentConfig& cfg, CsvWriter& out) {
  const AsymptoticParams pr = AsymptoticParams::from_growth(cfg.tauberian.alpha, cfg.tauberian.C_R, cfg.tauberian.q);
  json ratios = json::array();
  for (double lambda : cfg.lambdas) {
    const TauberianCheck t = tauberian_consistency(pr, lambda);
    const LaplaceCheck l = laplace_asymptotic_44(pr.gamma, pr.p, lambda);
    out.row({fmt(lambda), fmt(pr.alpha), fmt(pr.C_R), fmt(pr.q), fmt(pr.p), fmt(pr.gamma), fmt(pr.Delta),
             fmt(t.ratio), fmt(l.ratio)});
    out.flush();
    ratios.push_back(num(t.ratio));
  }
  return {{"p", pr.p}, {"gamma", pr.gamma}, {"Delta", pr.Delta}, {"ratio", ratios},
          {"laplace_constant_expected", 1.0 / std::sqrt(pr.p - 1.0)}};
}

json run_tail_shape(const ExperimentConfig& cfg, CsvWriter& out) {
  auto spec = std::make_shared<const FieldSpec>(cfg.field);
  const std::vector<double> maxima = simulate_maxima(spec, cfg.replicates, cfg.max);
  const ShapeFit fit = shape_regression(maxima, cfg.tail_shape.p, cfg.tail_shape.top_fraction);
  const auto [lo, hi] = std::minmax_element(maxima.begin(), maxima.end());
  const std::size_t m = std::max<std::size_t>(cfg.tail_shape.curve_points, 2);
  std::vector<double> u(m);
  for (std::size_t k = 0; k < m; ++k) u[k] = *lo + (*hi - *lo) * static_cast<double>(k) / static_cast<double>(m - 1);
  const TailCurve curve = empirical_tail(maxima, u);
  for (std::size_t k = 0; k < curve.u.size(); ++k) {
    out.row({fmt(curve.u[k]), fmt(curve.tail[k]), fmt(curve.lower95[k]), fmt(curve.upper95[k]), curve.source});
  }
  return {{"n", maxima.size()},
          {"p", cfg.tail_shape.p},
          {"slope", num(fit.slope)},
          {"intercept", num(fit.intercept)},
          {"slope_with_log", num(fit.slope_with_log)},
          {"log_coeff", num(fit.log_coeff)},
          {"n_points", fit.n_points}};
}

json dispatch(const ExperimentConfig& cfg, CsvWriter& out) {
  switch (cfg.kind) {
    case ExperimentKind::SaddlePathwise: return run_saddle_pathwise(cfg, out);
    case ExperimentKind::Theorem1: return run_theorem1(cfg, out);
    case ExperimentKind::Corollary1: return run_corollary1(cfg, out);
    case ExperimentKind::Entropy: return run_entropy(cfg, out);
    case ExperimentKind::Norms: return run_norms(cfg, out);
    case ExperimentKind::Tauberian: return run_tauberian(cfg, out);
    case ExperimentKind::TailShape: return run_tail_shape(cfg, out);
  }
  return {};
}

// First stem whose csv, partial and manifest names are all unused.
std::string free_stem(const fs::path& dir, const std::string& base) {
  for (int k = 0;; ++k) {
    const std::string stem = (dir / (k == 0 ? base : base + "_" + std::to_string(k))).string();
    if (!fs::exists(stem + ".csv") && !fs::exists(stem + ".csv.partial") && !fs::exists(stem + ".manifest.json")) {
      return stem;
    }
  }
}

void write_new_file(const std::string& path, const std::string& content) {
  std::FILE* f = std::fopen(path.c_str(), "wx");
  require(f != nullptr, ErrorCode::Io, "cannot create " + path);
  std::fwrite(content.data(), 1, content.size(), f);
  std::fclose(f);
}

}  // namespace

std::string git_blob_hash(const std::string& content) {
  const std::string blob = "blob " + std::to_string(content.size()) + '\0' + content;
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  require(EVP_Digest(blob.data(), blob.size(), md, &len, EVP_sha1(), nullptr) == 1, ErrorCode::Io,
          "SHA-1 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string s;
  for (unsigned int i = 0; i < len; ++i) {
    s += hex[md[i] >> 4];
    s += hex[md[i] & 15];
  }
  return s;
}

RunOutcome run_experiment(ExperimentConfig cfg, std::optional<std::uint64_t> seed_override) {
  RunOutcome out;
  if (seed_override) cfg.field.seed = *seed_override;
  try {
    cfg.validate();
  } catch (const Error& e) {
    out.exit_code = is_validation_error(e.code()) ? kExitValidation : kExitNumeric;
    out.error = e.what();
    out.error_code = e.code();
    return out;
  }

  const auto started = Clock::now();
  const std::string kind = kind_name(cfg.kind);
  std::string stem;
  std::FILE* f = nullptr;
  try {
    fs::create_directories(cfg.output_dir);
    stem = free_stem(cfg.output_dir, kind + "_" + stamp(started, "%Y%m%dT%H%M%SZ"));
    f = std::fopen((stem + ".csv.partial").c_str(), "wx");
    require(f != nullptr, ErrorCode::Io, "cannot create " + stem + ".csv.partial");
  } catch (const Error& e) {
    out.exit_code = kExitNumeric;
    out.error = e.what();
    out.error_code = e.code();
    return out;
  } catch (const std::exception& e) {
    out.exit_code = kExitNumeric;
    out.error = std::string("io: ") + e.what();
    out.error_code = ErrorCode::Io;
    return out;
  }

  CsvWriter csv(f);
  csv.row(header_for(cfg.kind));
  std::string status = "ok";
  try {
    out.results = dispatch(cfg, csv);
  } catch (const Error& e) {
    out.exit_code = kExitNumeric;
    out.error = e.what();
    out.error_code = e.code();
  } catch (const std::exception& e) {
    out.exit_code = kExitNumeric;
    out.error = std::string("internal: ") + e.what();
  }
  std::fclose(f);
  const double wall = std::chrono::duration<double>(Clock::now() - started).count();

  out.csv_path = stem + ".csv.partial";
  if (out.exit_code == kExitOk) {
    std::error_code ec;
    fs::rename(out.csv_path, stem + ".csv", ec);
    if (ec) {
      out.exit_code = kExitNumeric;
      out.error = "io: cannot rename " + out.csv_path;
      out.error_code = ErrorCode::Io;
    } else {
      out.csv_path = stem + ".csv";
    }
  }
  if (out.exit_code != kExitOk) status = "failed";

  const json canonical = config_to_json(cfg);
  json manifest = {{"manifest_version", 1},
                   {"kind", kind},
                   {"status", status},
                   {"seed", cfg.field.seed},
                   {"input_hash", git_blob_hash(canonical.dump())},
                   {"started_at", stamp(started, "%Y-%m-%dT%H:%M:%SZ")},
                   {"wall_time_seconds", wall},
                   {"threads", thread_count()},
                   {"outputs", {fs::path(out.csv_path).filename().string()}},
                   {"config", canonical},
                   {"results", out.results.is_null() ? json::object() : out.results}};
  if (!out.error.empty()) manifest["error"] = out.error;
  out.manifest_path = stem + ".manifest.json";
  try {
    write_new_file(out.manifest_path, manifest.dump(2) + "\n");
  } catch (const Error& e) {
    out.manifest_path.clear();
    if (out.exit_code == kExitOk) {
      out.exit_code = kExitNumeric;
      out.error = e.what();
      out.error_code = e.code();
    }
  }
  return out;
}

// ---- summarize ----

namespace {

struct CsvTable {
  std::string path;
  std::string kind;
  std::vector<std::string> header;
  std::vector<std::map<std::string, std::string>> rows;
  std::size_t skipped = 0;
  json results;  // from the sibling manifest, if readable

  double get(std::size_t i, const std::string& col) const {
    return std::strtod(rows[i].at(col).c_str(), nullptr);
  }
};

bool is_text_column(const std::string& c) {
  return c == "x0" || c == "point" || c == "verdict" || c == "source";
}

bool parses_as_number(const std::string& s) {
  if (s.empty()) return false;
  char* end = nullptr;
  std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

CsvTable read_table(const fs::path& path, const std::string& kind) {
  CsvTable t;
  t.path = path.filename().string();
  t.kind = kind;
  std::ifstream in(path);
  std::string line;
  if (!std::getline(in, line)) return t;
  t.header = split(line);
  if (t.header != header_for(*kind_from_name(kind))) {
    t.header.clear();
    return t;
  }
  while (std::getline(in, line)) {
    const auto cells = split(line);
    bool ok = cells.size() == t.header.size();
    for (std::size_t c = 0; ok && c < cells.size(); ++c) {
      ok = is_text_column(t.header[c]) ? !cells[c].empty() : parses_as_number(cells[c]);
    }
    if (!ok) {
      ++t.skipped;
      continue;
    }
    std::map<std::string, std::string> r;
    for (std::size_t c = 0; c < cells.size(); ++c) r[t.header[c]] = cells[c];
    t.rows.push_back(std::move(r));
  }
  fs::path manifest = path;
  manifest.replace_extension(".manifest.json");
  std::ifstream min(manifest);
  if (min) {
    try {
      const json m = json::parse(min);
      if (m.contains("results")) t.results = m.at("results");
    } catch (const json::exception&) {
    }
  }
  return t;
}

std::string pass(bool ok) { return ok ? "PASS" : "FAIL"; }

std::string g6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void section_saddle(std::ostream& os, const CsvTable& t) {
  std::map<double, std::vector<double>> dev;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const double r = t.get(i, "ratio");
    if (std::isfinite(r)) dev[t.get(i, "lambda")].push_back(std::abs(r - 1.0));
  }
  os << "| lambda | n | median abs(ratio - 1) |\n|---|---|---|\n";
  std::vector<double> meds;
  for (const auto& [l, v] : dev) {
    meds.push_back(median(v));
    os << "| " << g6(l) << " | " << v.size() << " | " << g6(meds.back()) << " |\n";
  }
  if (meds.empty()) {
    os << "\nverdict: FAIL (no non-degenerate rows)\n";
    return;
  }
  bool decreasing = true;
  for (std::size_t k = 1; k < meds.size(); ++k) decreasing = decreasing && meds[k] < meds[k - 1];
  const bool single = dev.begin()->second.size() == 1;
  const double thr = single ? 0.005 : 0.05;
  os << "\nverdict: " << pass(meds.back() <= thr && (single || decreasing)) << " (median at largest lambda "
     << g6(meds.back()) << ", threshold " << thr << (single ? "" : decreasing ? ", decreasing" : ", not decreasing")
     << ")\n";
}

void section_theorem1(std::ostream& os, const CsvTable& t) {
  os << "| lambda | n | ess | ratio | abs(ratio - 1) | 95% CI |\n|---|---|---|---|---|---|\n";
  std::vector<double> devs;
  bool ci_ok = true;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const double r = t.get(i, "ratio");
    devs.push_back(std::abs(r - 1.0));
    ci_ok = ci_ok && t.get(i, "ci_low") <= 1.0 && 1.0 <= t.get(i, "ci_high");
    os << "| " << g6(t.get(i, "lambda")) << " | " << t.rows[i].at("n") << " | " << g6(t.get(i, "ess")) << " | "
       << g6(r) << " | " << g6(devs.back()) << " | [" << g6(t.get(i, "ci_low")) << ", " << g6(t.get(i, "ci_high"))
       << "] |\n";
  }
  if (devs.empty()) {
    os << "\nverdict: FAIL (no rows)\n";
    return;
  }
  bool monotone = true;
  for (std::size_t k = 1; k < devs.size(); ++k) monotone = monotone && devs[k] <= devs[k - 1];
  const double last = t.get(t.rows.size() - 1, "ratio");
  os << "\nverdict: " << pass(last >= 0.8 && last <= 1.2 && monotone) << " (ratio at largest lambda " << g6(last)
     << " in [0.8, 1.2]; abs(ratio - 1) " << (monotone ? "monotone" : "not monotone") << ")\n";
  os << "CI contains 1 at every lambda: " << (ci_ok ? "yes" : "no") << "\n";
}

void section_corollary1(std::ostream& os, const CsvTable& t) {
  os << "| lambda | n | identity rel diff | half-line / R |\n|---|---|---|---|\n";
  double worst = 0.0;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    worst = std::max(worst, t.get(i, "identity_rel_diff"));
    os << "| " << g6(t.get(i, "lambda")) << " | " << t.rows[i].at("n") << " | " << g6(t.get(i, "identity_rel_diff"))
       << " | " << g6(t.get(i, "ratio_half_to_R")) << " |\n";
  }
  os << "\nverdict: " << pass(!t.rows.empty() && worst <= 1e-6) << " (largest identity rel diff " << g6(worst)
     << ", threshold 1e-6)\n";
}

void section_entropy(std::ostream& os, const CsvTable& t) {
  os << "| n | eps | N | partial sum |\n|---|---|---|---|\n";
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    os << "| " << t.rows[i].at("n") << " | " << g6(t.get(i, "eps")) << " | " << t.rows[i].at("covering_number")
       << " | " << g6(t.get(i, "partial_sum")) << " |\n";
  }
  const std::string v = t.rows.empty() ? "none" : t.rows.back().at("verdict");
  os << "\nverdict: " << pass(v == "converges") << " (series " << v << ")\n";
  if (t.results.contains("kappa") && t.results.at("kappa").is_number()) {
    os << "metric dimension estimate: " << g6(t.results.at("kappa").get<double>()) << "\n";
  }
}

void section_norms(std::ostream& os, const CsvTable& t) {
  os << "| point | n | bphi | gpsi | tail constant |\n|---|---|---|---|---|\n";
  bool ok = !t.rows.empty();
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    ok = ok && t.get(i, "tail_constant") <= 1.5;
    os << "| " << t.rows[i].at("point") << " | " << t.rows[i].at("n") << " | " << g6(t.get(i, "bphi_norm")) << " | "
       << g6(t.get(i, "gpsi_norm")) << " | " << g6(t.get(i, "tail_constant")) << " |\n";
  }
  os << "\nverdict: " << pass(ok) << " (tail bound holds with C = 1.5 at every point)\n";
}

void section_tauberian(std::ostream& os, const CsvTable& t) {
  // Laplace's method gives the limit (p - 1)^{-1/2}; it is 1 only at p = 2.
  os << "| lambda | q | ratio | limit | abs(ratio - limit) | Laplace ratio |\n|---|---|---|---|---|---|\n";
  std::vector<double> devs;
  double limit = 1.0;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    limit = 1.0 / std::sqrt(t.get(i, "p") - 1.0);
    devs.push_back(std::abs(t.get(i, "ratio") - limit));
    os << "| " << g6(t.get(i, "lambda")) << " | " << g6(t.get(i, "q")) << " | " << g6(t.get(i, "ratio")) << " | "
       << g6(limit) << " | " << g6(devs.back()) << " | " << g6(t.get(i, "laplace44_ratio")) << " |\n";
  }
  if (devs.empty()) {
    os << "\nverdict: FAIL (no rows)\n";
    return;
  }
  bool monotone = true;
  for (std::size_t k = 1; k < devs.size(); ++k) monotone = monotone && devs[k] <= devs[k - 1] + 1e-12;
  const bool close = devs.back() <= 0.02 * limit;
  os << "\nverdict: " << pass(monotone && close) << " (approach to " << g6(limit) << " "
     << (monotone ? "monotone" : "not monotone") << "; " << g6(devs.back()) << " off at largest lambda, threshold 2%)\n";
}

void section_tail_shape(std::ostream& os, const CsvTable& t) {
  os << "| u | T(u) | 95% band |\n|---|---|---|\n";
  const std::size_t step = std::max<std::size_t>(1, t.rows.size() / 10);
  for (std::size_t i = 0; i < t.rows.size(); i += step) {
    os << "| " << g6(t.get(i, "u")) << " | " << g6(t.get(i, "tail")) << " | [" << g6(t.get(i, "lower95")) << ", "
       << g6(t.get(i, "upper95")) << "] |\n";
  }
  if (t.results.contains("slope") && t.results.at("slope").is_number()) {
    const double s = t.results.at("slope").get<double>();
    os << "\nverdict: " << pass(std::abs(s - 1.0) <= 0.15) << " (shape slope " << g6(s) << ", expected 1 +- 0.15)\n";
  } else {
    os << "\nverdict: FAIL (no slope in the manifest)\n";
  }
}

}  // namespace

SummaryOutcome summarize(const std::string& dir) {
  require(fs::is_directory(dir), ErrorCode::EmptyDirectory, dir + " is not a directory");
  static const std::regex name_re(
      R"(^(saddle-pathwise|theorem1|corollary1|entropy|norms|tauberian|tail-shape)_\d{8}T\d{6}Z(_\d+)?\.csv$)");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && std::regex_match(e.path().filename().string(), name_re)) files.push_back(e.path());
  }
  require(!files.empty(), ErrorCode::EmptyDirectory, "no experiment CSVs in " + dir);
  std::sort(files.begin(), files.end());

  std::map<std::string, std::vector<CsvTable>> by_kind;
  SummaryOutcome out;
  for (const auto& f : files) {
    std::smatch m;
    const std::string name = f.filename().string();
    std::regex_match(name, m, name_re);
    CsvTable t = read_table(f, m[1].str());
    out.skipped_rows += t.skipped;
    by_kind[t.kind].push_back(std::move(t));
    ++out.files;
  }

  std::ostringstream os;
  os << "# Experiment summary\n\n" << out.files << " file(s); " << out.skipped_rows << " corrupt row(s) skipped.\n";
  for (const auto& [kind, tables] : by_kind) {
    os << "\n## " << kind << "\n";
    for (const CsvTable& t : tables) {
      os << "\n### " << t.path << "\n\n";
      if (t.header.empty()) {
        os << "unreadable header; file skipped\n";
        continue;
      }
      if (t.skipped) os << "warning: " << t.skipped << " corrupt row(s) skipped\n\n";
      switch (*kind_from_name(kind)) {
        case ExperimentKind::SaddlePathwise: section_saddle(os, t); break;
        case ExperimentKind::Theorem1: section_theorem1(os, t); break;
        case ExperimentKind::Corollary1: section_corollary1(os, t); break;
        case ExperimentKind::Entropy: section_entropy(os, t); break;
        case ExperimentKind::Norms: section_norms(os, t); break;
        case ExperimentKind::Tauberian: section_tauberian(os, t); break;
        case ExperimentKind::TailShape: section_tail_shape(os, t); break;
      }
    }
  }
  const std::string stem = free_stem(dir, "summary_" + stamp(Clock::now(), "%Y%m%dT%H%M%SZ"));
  out.report_path = stem + ".md";
  for (int k = 1; fs::exists(out.report_path); ++k) out.report_path = stem + "_" + std::to_string(k) + ".md";
  write_new_file(out.report_path, os.str());
  return out;
}

}  // namespace fieldtail
