#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "cyclicpls/dataset.hpp"
#include "cyclicpls/modelspec.hpp"

namespace cpls {

struct PlsOptions {
  double tol = 1e-6;
  int max_iter = 300;
  /// Overrides ModelSpec::scheme when set.
  std::optional<Scheme> scheme;
  /// Starting outer weights per block (rescaled to unit score variance);
  /// equal weights when absent.
  std::optional<std::vector<Eigen::VectorXd>> initial_weights;
  /// When set, each block's converged weights are flipped to have a
  /// non-negative inner product with the reference block weights instead of
  /// the default non-negative loading-sum orientation.
  std::optional<std::vector<Eigen::VectorXd>> sign_reference;
};

/// Converged PLS path model. Constructs are indexed in ModelSpec block order.
struct PlsFit {
  std::vector<std::string> constructs;
  std::vector<std::vector<std::string>> indicators;
  std::vector<Eigen::VectorXd> weights;   // unit-variance outer weights
  std::vector<Eigen::VectorXd> loadings;  // indicator-score correlations
  Eigen::MatrixXd scores;                 // N x K latent scores
  Eigen::MatrixXd construct_corr;         // K x K score correlations
  Eigen::MatrixXd paths;                  // paths(j, k): effect of j on k
  Eigen::VectorXd r_squared;              // NaN for exogenous constructs
  int iterations = 0;
  bool converged = false;

  int index(const std::string& construct) const;
  double path(const std::string& source, const std::string& target) const;
  double loading(const std::string& construct, const std::string& indicator) const;
  double r2(const std::string& construct) const;
  Eigen::VectorXd score(const std::string& construct) const;
};

/// Alternating outer/inner PLS estimation followed by loadings, inner OLS
/// paths and R². Non-convergence is reported through PlsFit::converged;
/// singular mode-B blocks or collinear predecessors throw EstimationError.
PlsFit fit_pls(const PreparedData& data, const ModelSpec& spec, const PlsOptions& options = {});

struct InnerModel {
  Eigen::MatrixXd paths;
  Eigen::VectorXd r_squared;
};

/// OLS of every endogenous construct on its predecessors, from a K x K
/// construct correlation matrix.
InnerModel inner_regressions(const Eigen::MatrixXd& construct_corr, const ModelSpec& spec);

/// Same, from standardized score columns (one per block, in block order).
InnerModel path_coefficients(const Eigen::MatrixXd& scores, const ModelSpec& spec);

/// Indicator-score Pearson correlations per block.
std::vector<Eigen::VectorXd> loadings(const PreparedData& data, const Eigen::MatrixXd& scores,
                                      const ModelSpec& spec);

}  // namespace cpls
