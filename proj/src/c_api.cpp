#include "fieldtail/fieldtail.h"

#include <cmath>
#include <memory>
#include <new>
#include <span>
#include <string>

#include "fieldtail/config.hpp"
#include "fieldtail/error.hpp"
#include "fieldtail/experiment.hpp"
#include "fieldtail/extremum.hpp"
#include "fieldtail/field_model.hpp"
#include "fieldtail/laplace_saddle.hpp"
#include "fieldtail/oracles.hpp"
#include "fieldtail/orlicz.hpp"
#include "fieldtail/parallel.hpp"
#include "fieldtail/tail_asymptotics.hpp"

using namespace fieldtail;

struct ft_field_spec {
  std::shared_ptr<const FieldSpec> spec;
};

struct ft_field_sample {
  FieldSample sample;
};

struct ft_phi {
  PhiFunction phi;
};

struct ft_run_result {
  RunOutcome outcome;
};

namespace {

thread_local std::string g_last_error;
thread_local std::string g_summary_path;
thread_local std::string g_oracle_detail;

ft_status to_status(ErrorCode code) { return static_cast<ft_status>(static_cast<int>(code) + 1); }

template <class F>
ft_status guard(F&& f) {
  try {
    f();
    g_last_error.clear();
    return FT_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const nlohmann::json::exception& e) {
    g_last_error = std::string("config-invalid: ") + e.what();
    return FT_CONFIG_INVALID;
  } catch (const std::bad_alloc&) {
    g_last_error = "internal: out of memory";
    return FT_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = std::string("internal: ") + e.what();
    return FT_INTERNAL;
  } catch (...) {
    g_last_error = "internal: unknown exception";
    return FT_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (p == nullptr) throw Error(ErrorCode::InvalidArgument, std::string(what) + " is NULL");
}

template <class Make>
ft_status new_phi(Make make, ft_phi** out) {
  return guard([&] {
    need(out, "out");
    PhiFunction phi = make();
    phi.validate();
    *out = new ft_phi{std::move(phi)};
  });
}

}  // namespace

extern "C" {

const char* ft_version(void) { return "0.1.0"; }

const char* ft_status_name(ft_status status) {
  if (status == FT_OK) return "ok";
  if (status == FT_INTERNAL) return "internal";
  if (status < FT_OK || status > FT_INTERNAL) return "unknown";
  static thread_local std::string name;
  name = error_code_name(static_cast<ErrorCode>(static_cast<int>(status) - 1));
  return name.c_str();
}

int ft_status_is_validation(ft_status status) {
  if (status <= FT_OK || status >= FT_INTERNAL) return 0;
  return is_validation_error(static_cast<ErrorCode>(static_cast<int>(status) - 1)) ? 1 : 0;
}

const char* ft_last_error(void) { return g_last_error.c_str(); }

void ft_set_threads(size_t n) { set_thread_count(n); }
size_t ft_threads(void) { return thread_count(); }

ft_status ft_field_spec_from_json(const char* json, ft_field_spec** out) {
  return guard([&] {
    need(json, "json");
    need(out, "out");
    FieldSpec spec = field_from_json(nlohmann::json::parse(json));
    spec.validate();
    *out = new ft_field_spec{std::make_shared<const FieldSpec>(std::move(spec))};
  });
}

void ft_field_spec_free(ft_field_spec* spec) { delete spec; }

size_t ft_field_spec_dim(const ft_field_spec* spec) { return spec ? spec->spec->dim() : 0; }

ft_status ft_field_sample_new(const ft_field_spec* spec, uint64_t replicate_id, ft_field_sample** out) {
  return guard([&] {
    need(spec, "spec");
    need(out, "out");
    *out = new ft_field_sample{sample_field(spec->spec, replicate_id)};
  });
}

void ft_field_sample_free(ft_field_sample* sample) { delete sample; }

ft_status ft_field_value(const ft_field_sample* sample, const double* x, double* out) {
  return guard([&] {
    need(sample, "sample");
    need(x, "x");
    need(out, "out");
    *out = sample->sample.value(std::span<const double>(x, sample->sample.dim()));
  });
}

ft_status ft_field_max(const ft_field_sample* sample, double* M, double* x0, int* interior, int* nondegenerate) {
  return guard([&] {
    need(sample, "sample");
    const MaxOptions opts;
    const MaxResult r = find_max(sample->sample, opts);
    if (M) *M = r.M;
    if (x0) std::copy(r.x0.begin(), r.x0.end(), x0);
    if (interior) *interior = r.interior ? 1 : 0;
    if (nondegenerate) *nondegenerate = check_nondegeneracy(r, opts.det_tol, opts.eig_tol) ? 1 : 0;
  });
}

ft_status ft_pathwise_ratio(const ft_field_sample* sample, double lambda, double* out) {
  return guard([&] {
    need(sample, "sample");
    need(out, "out");
    *out = pathwise_ratio(sample->sample, lambda);
  });
}

ft_status ft_phi_gaussian(double lambda0, ft_phi** out) { return new_phi([&] { return PhiFunction::gaussian(lambda0); }, out); }

ft_status ft_phi_power(double p, double lambda0, ft_phi** out) { return new_phi([&] { return PhiFunction::power_p(p, lambda0); }, out); }

ft_status ft_phi_pure_power(double p, ft_phi** out) { return new_phi([&] { return PhiFunction::pure_power(p); }, out); }

ft_status ft_phi_tabulated(const double* knots, const double* values, size_t n, ft_phi** out) {
  if (knots == nullptr || values == nullptr) {
    g_last_error = "invalid-argument: knots or values is NULL";
    return FT_INVALID_ARGUMENT;
  }
  return new_phi([&] { return PhiFunction::tabulated({knots, knots + n}, {values, values + n}); }, out);
}

void ft_phi_free(ft_phi* phi) { delete phi; }

ft_status ft_phi_eval(const ft_phi* phi, double lambda, double* out) {
  return guard([&] {
    need(phi, "phi");
    need(out, "out");
    *out = phi->phi(lambda);
  });
}

ft_status ft_young_fenchel(const ft_phi* phi, double u, double* out) {
  return guard([&] {
    need(phi, "phi");
    need(out, "out");
    *out = young_fenchel(phi->phi, u);
  });
}

ft_status ft_phi_inverse(const ft_phi* phi, double r, double* out) {
  return guard([&] {
    need(phi, "phi");
    need(out, "out");
    *out = phi_inverse(phi->phi, r);
  });
}

ft_status ft_bphi_norm(const double* samples, size_t n, const ft_phi* phi, double* out) {
  return guard([&] {
    need(samples, "samples");
    need(phi, "phi");
    need(out, "out");
    *out = bphi_norm(std::span<const double>(samples, n), phi->phi).value;
  });
}

ft_status ft_gpsi_norm(const double* samples, size_t n, const ft_phi* phi, double* out) {
  return guard([&] {
    need(samples, "samples");
    need(phi, "phi");
    need(out, "out");
    *out = gpsi_norm(std::span<const double>(samples, n), phi->phi).value;
  });
}

ft_status ft_tail_bound_check(const double* samples, size_t n, const ft_phi* phi, double C, int* passes) {
  return guard([&] {
    need(samples, "samples");
    need(phi, "phi");
    need(passes, "passes");
    *passes = tail_bound_check(std::span<const double>(samples, n), phi->phi, C).passes ? 1 : 0;
  });
}

ft_status ft_laplace44_ratio(double gamma, double p, double lambda, double* out) {
  return guard([&] {
    need(out, "out");
    *out = laplace_asymptotic_44(gamma, p, lambda).ratio;
  });
}

ft_status ft_tauberian_ratio(double alpha, double C_R, double q, double lambda, double* out) {
  return guard([&] {
    need(out, "out");
    *out = tauberian_consistency(AsymptoticParams::from_growth(alpha, C_R, q), lambda).ratio;
  });
}

ft_status ft_config_validate(const char* path) {
  return guard([&] {
    need(path, "path");
    load_config(path).validate();
  });
}

ft_status ft_run(const char* path, const uint64_t* seed_override, ft_run_result** out) {
  ExperimentConfig cfg;
  ft_status st = guard([&] {
    need(path, "path");
    cfg = load_config(path);
  });
  if (st != FT_OK) return st;
  std::unique_ptr<ft_run_result> result;
  st = guard([&] {
    result = std::make_unique<ft_run_result>();
    result->outcome =
        run_experiment(std::move(cfg), seed_override ? std::optional<std::uint64_t>(*seed_override) : std::nullopt);
  });
  if (st != FT_OK) return st;
  const RunOutcome& o = result->outcome;
  if (o.exit_code != kExitOk) {
    g_last_error = o.error;
    st = o.error_code ? to_status(*o.error_code) : FT_INTERNAL;
  }
  if (out) *out = result.release();
  return st;
}

int ft_run_result_exit_code(const ft_run_result* r) { return r ? r->outcome.exit_code : -1; }
const char* ft_run_result_csv(const ft_run_result* r) { return r ? r->outcome.csv_path.c_str() : ""; }
const char* ft_run_result_manifest(const ft_run_result* r) { return r ? r->outcome.manifest_path.c_str() : ""; }
const char* ft_run_result_error(const ft_run_result* r) { return r ? r->outcome.error.c_str() : ""; }
void ft_run_result_free(ft_run_result* r) { delete r; }

ft_status ft_summarize(const char* dir, const char** report_path, size_t* skipped_rows) {
  return guard([&] {
    need(dir, "dir");
    const SummaryOutcome s = summarize(dir);
    g_summary_path = s.report_path;
    if (report_path) *report_path = g_summary_path.c_str();
    if (skipped_rows) *skipped_rows = s.skipped_rows;
  });
}

size_t ft_oracle_count(void) { return oracle_names().size(); }

const char* ft_oracle_name(size_t i) {
  static const std::vector<std::string> names = oracle_names();
  return i < names.size() ? names[i].c_str() : nullptr;
}

ft_status ft_oracle_run(const char* name, int* passed, const char** detail) {
  return guard([&] {
    need(name, "name");
    const OracleResult r = run_oracle(name);
    g_oracle_detail = r.detail;
    if (passed) *passed = r.passed ? 1 : 0;
    if (detail) *detail = g_oracle_detail.c_str();
  });
}

}  // extern "C"
