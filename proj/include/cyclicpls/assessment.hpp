#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "cyclicpls/dataset.hpp"
#include "cyclicpls/modelspec.hpp"
#include "cyclicpls/plscore.hpp"
#include "cyclicpls/resample.hpp"

namespace cpls {

// Measurement-model reliability indices. Inputs are standardized blocks or
// their correlation matrices.

double cronbach_alpha(const Eigen::MatrixXd& block);
double cronbach_alpha_from_corr(const Eigen::MatrixXd& corr);

/// (sum l)^2 / ((sum l)^2 + sum(1 - l^2))
double composite_reliability(const Eigen::VectorXd& loadings);

/// mean squared loading
double ave(const Eigen::VectorXd& loadings);

/// Dijkstra-Henseler rho_A from unit-variance weights (w' S w = 1).
double dijkstra_rho_a(const Eigen::VectorXd& weights, const Eigen::MatrixXd& corr);

struct Unidimensionality {
  double eig1 = 0.0;
  double eig2 = 0.0;
  bool pass = false;
};

Unidimensionality unidimensionality(const Eigen::MatrixXd& block);
Unidimensionality unidimensionality_from_corr(const Eigen::MatrixXd& corr);

enum class Flag { Pass, Borderline, Fail, Exempt, NotApplicable };

std::string_view to_string(Flag flag);

struct Thresholds {
  double alpha = 0.7;
  double composite_reliability = 0.7;
  double rho_a = 0.7;
  double ave = 0.5;
  double loading = 0.7;
  double borderline_band = 0.01;
};

/// Pass above the threshold, borderline within the band below it, fail
/// otherwise.
Flag threshold_flag(double value, double threshold, const Thresholds& t = {});

struct IndicatorReport {
  std::string name;
  double loading = 0.0;
  std::optional<Interval> ci;
  std::optional<bool> significant;
  Flag flag = Flag::NotApplicable;
};

struct ConstructReliability {
  std::string name;
  Mode mode = Mode::Reflective;
  bool exempt = false;  // single-item constructs need no validation
  std::optional<double> alpha;
  std::optional<double> composite_reliability;
  std::optional<double> rho_a;
  std::optional<double> ave;
  std::optional<Unidimensionality> eigen;
  std::vector<IndicatorReport> indicators;
  std::map<std::string, Flag> flags;  // alpha, cr, rho_a, ave, unidimensionality
};

struct ReliabilityReport {
  std::vector<ConstructReliability> constructs;

  const ConstructReliability& find(const std::string& name) const;
};

/// Fills ConstructReliability::flags and the per-indicator loading flags from
/// the values already present.
void apply_flags(ConstructReliability& c, const Thresholds& t = {});

/// Runs the full index battery for every construct of a converged fit.
/// Loading confidence intervals are attached when a bootstrap result is
/// supplied.
ReliabilityReport assess(const PlsFit& fit, const PreparedData& data, const ModelSpec& spec,
                         const BootstrapResult* boot = nullptr, const Thresholds& t = {});

}  // namespace cpls
