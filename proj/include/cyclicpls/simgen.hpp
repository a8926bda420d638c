#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "cyclicpls/dataset.hpp"
#include "cyclicpls/modelspec.hpp"

namespace cpls {

struct PopulationConstruct {
  std::string name;
  Mode mode = Mode::Reflective;  // reflective, formative or single-item
  /// Loadings (reflective) or weights (formative); empty for single-item.
  Eigen::VectorXd coefficients;
};

enum class Generator { Acyclic, Cyclic };

std::string_view to_string(Generator g);

/// Generative model xi = B xi + zeta with reflective indicators
/// x = l xi + sqrt(1 - l^2) e. structural(i, j) is the effect of construct j
/// on construct i. Formative constructs must be exogenous; their score is the
/// normalized weighted sum of independent standard-normal indicators.
struct PopulationSpec {
  std::vector<PopulationConstruct> constructs;
  Eigen::MatrixXd structural;
  /// Disturbance variances. Ignored by the acyclic generator, which derives
  /// them from unit construct variances; the cyclic generator defaults to 1.
  std::optional<Eigen::VectorXd> disturbances;
  Generator generator = Generator::Acyclic;
  Eigen::Index n = 1000;
  std::uint64_t seed = 1;

  Eigen::Index size() const { return static_cast<Eigen::Index>(constructs.size()); }
  int index(std::string_view name) const;
};

/// JSON population document:
/// {"generator": "acyclic"|"cyclic", "n": int, "seed": int,
///  "constructs": [{"name", "mode", "loadings"|"weights"}],
///  "paths": [{"source", "target", "beta"}], "disturbances": [..]}
PopulationSpec parse_population(std::string_view document);
PopulationSpec load_population(const std::string& path);
nlohmann::json population_to_json(const PopulationSpec& pop);

/// Indicator column names in emission order.
std::vector<std::string> indicator_names(const PopulationSpec& pop);

double spectral_radius(const Eigen::MatrixXd& b);

/// Disturbance variances giving every construct unit variance under a
/// triangularizable B. Throws ValidationError for cyclic B or any implied
/// variance <= 0.
Eigen::VectorXd unit_variance_disturbances(const Eigen::MatrixXd& b);

/// Construct covariance (I-B)^-1 Psi (I-B)^-T before rescaling.
Eigen::MatrixXd construct_covariance(const Eigen::MatrixXd& b, const Eigen::VectorXd& psi);

/// Population correlation of the constructs as emitted by the generator.
Eigen::MatrixXd population_correlation(const PopulationSpec& pop);

RawTable gen_acyclic(const PopulationSpec& pop);
RawTable gen_cyclic_equilibrium(const PopulationSpec& pop);
RawTable generate(const PopulationSpec& pop);

/// Ground-truth sidecar: population echo plus the implied construct
/// correlation matrix.
nlohmann::json population_sidecar(const PopulationSpec& pop);

/// Convenience: model spec matching a population (one block per construct,
/// sequential paths from the nonzero entries of B).
ModelSpec model_for(const PopulationSpec& pop);

}  // namespace cpls
