#include "fieldtail/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "fieldtail/error.hpp"
#include "fieldtail/tail_asymptotics.hpp"

namespace fieldtail {
namespace {

using nlohmann::json;

[[noreturn]] void invalid(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::ConfigInvalid, where + ": " + what);
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) invalid(where, "expected an object");
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || item.key() == a;
    if (!known) invalid(where, "unknown key '" + item.key() + "'");
  }
}

double number(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) invalid(where, std::string("missing '") + key + "'");
  if (!j.at(key).is_number()) invalid(where, std::string("'") + key + "' must be a number");
  return j.at(key).get<double>();
}

double number_or(const json& j, const char* key, double fallback, const std::string& where) {
  return j.contains(key) ? number(j, key, where) : fallback;
}

std::uint64_t unsigned_or(const json& j, const char* key, std::uint64_t fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
    invalid(where, std::string("'") + key + "' must be a non-negative integer");
  }
  return j.at(key).get<std::uint64_t>();
}

std::vector<double> numbers(const json& j, const std::string& where) {
  if (!j.is_array()) invalid(where, "expected an array of numbers");
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) invalid(where, "expected an array of numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

std::vector<int> parse_powers(const std::string& key, const std::string& where) {
  std::vector<int> out;
  std::stringstream ss(key);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok != "0" && tok != "1" && tok != "2") invalid(where, "monomial powers must be 0, 1 or 2: '" + key + "'");
    out.push_back(tok[0] - '0');
  }
  return out;
}

std::string format_powers(const std::vector<int>& powers) {
  std::string s;
  for (std::size_t i = 0; i < powers.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(powers[i]);
  }
  return s;
}

CoefficientLaw law_from_json(const json& term, const std::string& where) {
  if (!term.contains("law") || !term.at("law").is_string()) invalid(where, "missing string 'law'");
  const std::string law = term.at("law").get<std::string>();
  const json params = term.contains("params") ? term.at("params") : json::object();
  if (law == "gaussian") {
    check_keys(params, {"sd"}, where + ".params");
    return CoefficientLaw::gaussian(number(params, "sd", where + ".params"));
  }
  if (law == "symmetric-weibull") {
    check_keys(params, {"p", "scale"}, where + ".params");
    return CoefficientLaw::symmetric_weibull(number(params, "p", where + ".params"),
                                             number_or(params, "scale", 1.0, where + ".params"));
  }
  if (law == "uniform") {
    check_keys(params, {"lo", "hi"}, where + ".params");
    return CoefficientLaw::uniform(number(params, "lo", where + ".params"), number(params, "hi", where + ".params"));
  }
  invalid(where, "unknown law '" + law + "'");
}

json law_to_json(const CoefficientLaw& law) {
  switch (law.kind) {
    case CoefficientLaw::Kind::Gaussian: return {{"law", "gaussian"}, {"params", {{"sd", law.sd}}}};
    case CoefficientLaw::Kind::SymmetricWeibull:
      return {{"law", "symmetric-weibull"}, {"params", {{"p", law.p}, {"scale", law.scale}}}};
    case CoefficientLaw::Kind::Uniform: return {{"law", "uniform"}, {"params", {{"lo", law.lo}, {"hi", law.hi}}}};
  }
  return {};
}

MaxOptions max_from_json(const json& j) {
  const std::string w = "maximizer";
  check_keys(j, {"starts", "grad_tol", "max_iter", "det_tol", "eig_tol", "value_tol", "boundary_eps"}, w);
  MaxOptions o;
  o.starts = static_cast<int>(unsigned_or(j, "starts", 0, w));
  o.grad_tol = number_or(j, "grad_tol", o.grad_tol, w);
  o.max_iter = static_cast<int>(unsigned_or(j, "max_iter", static_cast<std::uint64_t>(o.max_iter), w));
  o.det_tol = number_or(j, "det_tol", o.det_tol, w);
  o.eig_tol = number_or(j, "eig_tol", o.eig_tol, w);
  o.value_tol = number_or(j, "value_tol", o.value_tol, w);
  o.boundary_eps = number_or(j, "boundary_eps", o.boundary_eps, w);
  return o;
}

QuadOptions quad_from_json(const json& j) {
  const std::string w = "quadrature";
  check_keys(j, {"order", "rel_tol", "max_cells"}, w);
  QuadOptions o;
  o.order = static_cast<int>(unsigned_or(j, "order", static_cast<std::uint64_t>(o.order), w));
  o.rel_tol = number_or(j, "rel_tol", o.rel_tol, w);
  o.max_cells = unsigned_or(j, "max_cells", o.max_cells, w);
  return o;
}

void check_lambda_grid(const std::vector<double>& l) {
  if (l.empty()) invalid("lambdas", "must not be empty");
  for (std::size_t i = 0; i < l.size(); ++i) {
    if (!std::isfinite(l[i]) || l[i] <= 0.0) invalid("lambdas", "values must be finite and positive");
    if (i > 0 && l[i] <= l[i - 1]) invalid("lambdas", "grid must be strictly increasing");
  }
}

}  // namespace

std::string kind_name(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::SaddlePathwise: return "saddle-pathwise";
    case ExperimentKind::Theorem1: return "theorem1";
    case ExperimentKind::Corollary1: return "corollary1";
    case ExperimentKind::Entropy: return "entropy";
    case ExperimentKind::Norms: return "norms";
    case ExperimentKind::Tauberian: return "tauberian";
    case ExperimentKind::TailShape: return "tail-shape";
  }
  return "unknown";
}

std::optional<ExperimentKind> kind_from_name(const std::string& name) {
  for (auto k : {ExperimentKind::SaddlePathwise, ExperimentKind::Theorem1, ExperimentKind::Corollary1,
                 ExperimentKind::Entropy, ExperimentKind::Norms, ExperimentKind::Tauberian, ExperimentKind::TailShape}) {
    if (kind_name(k) == name) return k;
  }
  return std::nullopt;
}

FieldSpec field_from_json(const json& j) {
  check_keys(j, {"domain", "mean", "terms", "seed"}, "field");
  FieldSpec spec;
  if (!j.contains("domain")) invalid("field", "missing 'domain'");
  check_keys(j.at("domain"), {"lower", "upper"}, "field.domain");
  if (!j.at("domain").contains("lower") || !j.at("domain").contains("upper")) {
    invalid("field.domain", "needs 'lower' and 'upper'");
  }
  spec.domain.lower = numbers(j.at("domain").at("lower"), "field.domain.lower");
  spec.domain.upper = numbers(j.at("domain").at("upper"), "field.domain.upper");
  spec.seed = unsigned_or(j, "seed", 0, "field");
  if (j.contains("mean")) {
    const json& m = j.at("mean");
    if (!m.is_object()) invalid("field.mean", "expected a map from powers to coefficients");
    for (const auto& item : m.items()) {
      if (!item.value().is_number()) invalid("field.mean", "coefficients must be numbers");
      spec.mean.push_back({parse_powers(item.key(), "field.mean"), item.value().get<double>()});
    }
  }
  if (j.contains("terms")) {
    const json& ts = j.at("terms");
    if (!ts.is_array()) invalid("field.terms", "expected an array");
    for (std::size_t i = 0; i < ts.size(); ++i) {
      const std::string w = "field.terms[" + std::to_string(i) + "]";
      check_keys(ts[i], {"frequency", "phase", "law", "params"}, w);
      BasisTerm t;
      if (!ts[i].contains("frequency")) invalid(w, "missing 'frequency'");
      t.frequency = numbers(ts[i].at("frequency"), w + ".frequency");
      t.phase = ts[i].contains("phase") ? numbers(ts[i].at("phase"), w + ".phase")
                                        : std::vector<double>(t.frequency.size(), 0.0);
      t.law = law_from_json(ts[i], w);
      spec.terms.push_back(std::move(t));
    }
  }
  return spec;
}

json field_to_json(const FieldSpec& spec) {
  json j;
  j["domain"] = {{"lower", spec.domain.lower}, {"upper", spec.domain.upper}};
  j["seed"] = spec.seed;
  json mean = json::object();
  for (const auto& m : spec.mean) mean[format_powers(m.powers)] = m.coeff;
  j["mean"] = mean;
  json terms = json::array();
  for (const auto& t : spec.terms) {
    json tj = law_to_json(t.law);
    tj["frequency"] = t.frequency;
    tj["phase"] = t.phase;
    terms.push_back(tj);
  }
  j["terms"] = terms;
  return j;
}

PhiFunction phi_from_json(const json& j) {
  check_keys(j, {"kind", "p", "lambda0", "knots", "values"}, "norms.phi");
  if (!j.contains("kind") || !j.at("kind").is_string()) invalid("norms.phi", "missing string 'kind'");
  const std::string k = j.at("kind").get<std::string>();
  const double inf = std::numeric_limits<double>::infinity();
  if (k == "gaussian") return PhiFunction::gaussian(number_or(j, "lambda0", inf, "norms.phi"));
  if (k == "power_p") return PhiFunction::power_p(number(j, "p", "norms.phi"), number_or(j, "lambda0", inf, "norms.phi"));
  if (k == "pure_power") return PhiFunction::pure_power(number(j, "p", "norms.phi"));
  if (k == "tabulated") {
    if (!j.contains("knots") || !j.contains("values")) invalid("norms.phi", "tabulated needs 'knots' and 'values'");
    return PhiFunction::tabulated(numbers(j.at("knots"), "norms.phi.knots"), numbers(j.at("values"), "norms.phi.values"));
  }
  invalid("norms.phi", "unknown kind '" + k + "'");
}

json phi_to_json(const PhiFunction& phi) {
  json j;
  switch (phi.kind) {
    case PhiFunction::Kind::Gaussian: j["kind"] = "gaussian"; break;
    case PhiFunction::Kind::PowerP: j["kind"] = "power_p"; j["p"] = phi.p; break;
    case PhiFunction::Kind::PurePower: j["kind"] = "pure_power"; j["p"] = phi.p; break;
    case PhiFunction::Kind::Tabulated:
      j["kind"] = "tabulated";
      j["knots"] = phi.knots;
      j["values"] = phi.values;
      return j;
  }
  if (std::isfinite(phi.lambda0) && phi.kind != PhiFunction::Kind::PurePower) j["lambda0"] = phi.lambda0;
  return j;
}

ExperimentConfig config_from_json(const json& input) {
  if (input.is_object() && input.contains("manifest_version")) {
    if (!input.contains("config")) invalid("manifest", "no echoed config");
    return config_from_json(input.at("config"));
  }
  try {
    check_keys(input, {"kind", "seed", "lambdas", "replicates", "output_dir", "field", "maximizer", "quadrature",
                       "min_ess", "entropy", "norms", "tauberian", "tail_shape"},
               "config");
    ExperimentConfig cfg;
    if (!input.contains("kind") || !input.at("kind").is_string()) invalid("config", "missing string 'kind'");
    const auto kind = kind_from_name(input.at("kind").get<std::string>());
    if (!kind) invalid("config", "unknown kind '" + input.at("kind").get<std::string>() + "'");
    cfg.kind = *kind;
    if (input.contains("field")) {
      cfg.field = field_from_json(input.at("field"));
      cfg.has_field = true;
    }
    if (input.contains("seed")) cfg.field.seed = unsigned_or(input, "seed", 0, "config");
    if (input.contains("lambdas")) cfg.lambdas = numbers(input.at("lambdas"), "lambdas");
    cfg.replicates = unsigned_or(input, "replicates", 1, "config");
    if (input.contains("output_dir")) {
      if (!input.at("output_dir").is_string()) invalid("config", "'output_dir' must be a string");
      cfg.output_dir = input.at("output_dir").get<std::string>();
    }
    if (input.contains("maximizer")) cfg.max = max_from_json(input.at("maximizer"));
    if (input.contains("quadrature")) cfg.quad = quad_from_json(input.at("quadrature"));
    cfg.min_ess = number_or(input, "min_ess", cfg.min_ess, "config");

    if (input.contains("entropy")) {
      const json& e = input.at("entropy");
      check_keys(e, {"grid_points", "n_max", "mode", "replicates"}, "entropy");
      cfg.entropy.grid_points = unsigned_or(e, "grid_points", cfg.entropy.grid_points, "entropy");
      cfg.entropy.n_max = static_cast<int>(unsigned_or(e, "n_max", static_cast<std::uint64_t>(cfg.entropy.n_max), "entropy"));
      cfg.entropy.replicates = unsigned_or(e, "replicates", 0, "entropy");
      if (e.contains("mode")) {
        const std::string m = e.at("mode").is_string() ? e.at("mode").get<std::string>() : "";
        if (m == "empirical-bphi") {
          cfg.entropy.empirical = true;
        } else if (m != "analytic-gaussian") {
          invalid("entropy", "mode must be analytic-gaussian or empirical-bphi");
        }
      }
    }
    if (input.contains("norms")) {
      const json& n = input.at("norms");
      check_keys(n, {"phi", "points", "t_grid", "r_grid", "mu_candidates"}, "norms");
      if (n.contains("phi")) cfg.norms.phi = phi_from_json(n.at("phi"));
      if (n.contains("points")) {
        if (!n.at("points").is_array()) invalid("norms.points", "expected an array of points");
        for (const auto& p : n.at("points")) cfg.norms.points.push_back(numbers(p, "norms.points"));
      }
      if (n.contains("t_grid")) cfg.norms.t_grid = numbers(n.at("t_grid"), "norms.t_grid");
      if (n.contains("r_grid")) cfg.norms.r_grid = numbers(n.at("r_grid"), "norms.r_grid");
      if (n.contains("mu_candidates")) cfg.norms.mu_candidates = numbers(n.at("mu_candidates"), "norms.mu_candidates");
    }
    if (input.contains("tauberian")) {
      const json& t = input.at("tauberian");
      check_keys(t, {"alpha", "C_R", "q"}, "tauberian");
      cfg.tauberian.alpha = number_or(t, "alpha", 0.0, "tauberian");
      cfg.tauberian.C_R = number_or(t, "C_R", 1.0, "tauberian");
      cfg.tauberian.q = number_or(t, "q", 2.0, "tauberian");
    }
    if (input.contains("tail_shape")) {
      const json& t = input.at("tail_shape");
      check_keys(t, {"p", "top_fraction", "curve_points"}, "tail_shape");
      cfg.tail_shape.p = number_or(t, "p", cfg.tail_shape.p, "tail_shape");
      cfg.tail_shape.top_fraction = number_or(t, "top_fraction", cfg.tail_shape.top_fraction, "tail_shape");
      cfg.tail_shape.curve_points = unsigned_or(t, "curve_points", cfg.tail_shape.curve_points, "tail_shape");
    }
    return cfg;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigInvalid, e.what());
  }
}

json config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["kind"] = kind_name(cfg.kind);
  j["seed"] = cfg.field.seed;
  j["replicates"] = cfg.replicates;
  j["output_dir"] = cfg.output_dir;
  j["min_ess"] = cfg.min_ess;
  if (!cfg.lambdas.empty()) j["lambdas"] = cfg.lambdas;
  if (cfg.has_field) j["field"] = field_to_json(cfg.field);
  j["maximizer"] = {{"starts", cfg.max.starts},       {"grad_tol", cfg.max.grad_tol},
                    {"max_iter", cfg.max.max_iter},   {"det_tol", cfg.max.det_tol},
                    {"eig_tol", cfg.max.eig_tol},     {"value_tol", cfg.max.value_tol},
                    {"boundary_eps", cfg.max.boundary_eps}};
  j["quadrature"] = {{"order", cfg.quad.order}, {"rel_tol", cfg.quad.rel_tol}, {"max_cells", cfg.quad.max_cells}};
  switch (cfg.kind) {
    case ExperimentKind::Entropy:
      j["entropy"] = {{"grid_points", cfg.entropy.grid_points},
                      {"n_max", cfg.entropy.n_max},
                      {"mode", cfg.entropy.empirical ? "empirical-bphi" : "analytic-gaussian"},
                      {"replicates", cfg.entropy.replicates}};
      break;
    case ExperimentKind::Norms: {
      json n;
      n["phi"] = phi_to_json(cfg.norms.phi);
      n["points"] = cfg.norms.points;
      if (!cfg.norms.t_grid.empty()) n["t_grid"] = cfg.norms.t_grid;
      if (!cfg.norms.r_grid.empty()) n["r_grid"] = cfg.norms.r_grid;
      if (!cfg.norms.mu_candidates.empty()) n["mu_candidates"] = cfg.norms.mu_candidates;
      j["norms"] = n;
      break;
    }
    case ExperimentKind::Tauberian:
      j["tauberian"] = {{"alpha", cfg.tauberian.alpha}, {"C_R", cfg.tauberian.C_R}, {"q", cfg.tauberian.q}};
      break;
    case ExperimentKind::TailShape:
      j["tail_shape"] = {{"p", cfg.tail_shape.p},
                         {"top_fraction", cfg.tail_shape.top_fraction},
                         {"curve_points", cfg.tail_shape.curve_points}};
      break;
    default: break;
  }
  return j;
}

void ExperimentConfig::validate() const {
  max.validate();
  quad.validate();
  if (!(min_ess >= 0.0)) invalid("config", "min_ess must be non-negative");
  if (replicates < 1) invalid("config", "replicates must be >= 1");
  const bool needs_field = kind != ExperimentKind::Tauberian;
  if (needs_field && !has_field) invalid("config", "kind " + kind_name(kind) + " needs a 'field' block");
  if (has_field) field.validate();
  if (!lambdas.empty() || kind == ExperimentKind::SaddlePathwise || kind == ExperimentKind::Theorem1 ||
      kind == ExperimentKind::Corollary1 || kind == ExperimentKind::Tauberian) {
    check_lambda_grid(lambdas);
  }
  switch (kind) {
    case ExperimentKind::Entropy: {
      if (entropy.grid_points < 2) invalid("entropy", "grid_points must be >= 2");
      double total = 1.0;
      for (std::size_t i = 0; i < field.dim(); ++i) total *= static_cast<double>(entropy.grid_points);
      if (total > 6000.0) invalid("entropy", "grid has more than 6000 points");
      if (entropy.n_max < 1) invalid("entropy", "n_max must be >= 1");
      if (entropy.empirical && entropy.replicates < 2) invalid("entropy", "empirical mode needs replicates >= 2");
      if (!entropy.empirical) {
        require(field.all_gaussian(), ErrorCode::NonGaussianSpec, "analytic-gaussian mode needs Gaussian laws");
      }
      break;
    }
    case ExperimentKind::Norms:
      norms.phi.validate();
      if (norms.points.empty()) invalid("norms", "needs at least one point");
      for (const auto& p : norms.points) {
        require(field.domain.contains(p), ErrorCode::PointOutsideDomain, "norms point outside the domain");
      }
      if (replicates < 2) invalid("config", "norms needs replicates >= 2");
      if (!norms.mu_candidates.empty() && replicates < 1000) {
        invalid("norms", "mu_candidates need replicates >= 1000");
      }
      break;
    case ExperimentKind::Tauberian: {
      const auto params = AsymptoticParams::from_growth(tauberian.alpha, tauberian.C_R, tauberian.q);
      for (double l : lambdas) {
        if (!(std::pow(l, 1.0 / (params.p - 1.0)) > 1.0)) invalid("lambdas", "saddle must exceed 1 at every lambda");
      }
      break;
    }
    case ExperimentKind::TailShape:
      if (!(tail_shape.p > 1.0)) invalid("tail_shape", "p must exceed 1");
      if (!(tail_shape.top_fraction > 0.0 && tail_shape.top_fraction <= 1.0)) {
        invalid("tail_shape", "top_fraction must lie in (0, 1]");
      }
      if (replicates < 10) invalid("config", "tail-shape needs replicates >= 10");
      if (field.deterministic()) invalid("field", "tail-shape needs a random field");
      break;
    default: break;
  }
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCode::Io, "cannot open " + path);
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigInvalid, path + ": " + e.what());
  }
  return config_from_json(j);
}

}  // namespace fieldtail
