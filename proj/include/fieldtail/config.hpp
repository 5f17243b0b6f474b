#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fieldtail/extremum.hpp"
#include "fieldtail/field_model.hpp"
#include "fieldtail/orlicz.hpp"
#include "fieldtail/quadrature.hpp"

namespace fieldtail {

enum class ExperimentKind { SaddlePathwise, Theorem1, Corollary1, Entropy, Norms, Tauberian, TailShape };

std::string kind_name(ExperimentKind kind);
std::optional<ExperimentKind> kind_from_name(const std::string& name);

struct EntropySettings {
  std::size_t grid_points = 201;  // per axis
  int n_max = 20;
  bool empirical = false;         // empirical-bphi instead of analytic-gaussian
  std::size_t replicates = 0;     // empirical mode only
};

struct NormSettings {
  PhiFunction phi = PhiFunction::gaussian();
  std::vector<Point> points;
  std::vector<double> t_grid;
  std::vector<double> r_grid;
  std::vector<double> mu_candidates;
};

struct TauberianSettings {
  double alpha = 0.0;
  double C_R = 1.0;
  double q = 2.0;
};

struct TailShapeSettings {
  double p = 3.0;
  double top_fraction = 0.1;
  std::size_t curve_points = 200;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::SaddlePathwise;
  bool has_field = false;
  FieldSpec field;
  std::vector<double> lambdas;
  std::size_t replicates = 1;
  MaxOptions max;
  QuadOptions quad;
  double min_ess = 10.0;
  std::string output_dir = "results";
  EntropySettings entropy;
  NormSettings norms;
  TauberianSettings tauberian;
  TailShapeSettings tail_shape;

  // Throws ConfigInvalid or the owning module's validation error.
  void validate() const;
};

FieldSpec field_from_json(const nlohmann::json& j);
nlohmann::json field_to_json(const FieldSpec& spec);
PhiFunction phi_from_json(const nlohmann::json& j);
nlohmann::json phi_to_json(const PhiFunction& phi);

// Unknown keys and wrong types are ConfigInvalid errors. A manifest written
// by a previous run is accepted in place of a config; its echoed config is
// used.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& cfg);

ExperimentConfig load_config(const std::string& path);

}  // namespace fieldtail
