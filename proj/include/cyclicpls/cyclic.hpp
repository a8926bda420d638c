#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cyclicpls/dataset.hpp"
#include "cyclicpls/modelspec.hpp"
#include "cyclicpls/plscore.hpp"

namespace cpls {

/// Name of the data column holding the step-1 score of a cyclic source.
std::string score_column_name(const std::string& construct);

/// Step-2 model: the cyclic source becomes a single-item block measured by
/// its own step-1 score, targets keep their blocks and modes, and the inner
/// model holds one source->target edge per target. With
/// include_target_paths the sequential edges among targets are kept as
/// controls.
ModelSpec build_feedback_model(const PlsFit& fit, const ModelSpec& spec,
                               bool include_target_paths = false);

struct CyclicOptions {
  PlsOptions pls;  // step-2 estimation settings
  bool include_target_paths = false;
};

struct CyclicPath {
  std::string source;
  std::string target;
  double beta_ce = 0.0;
  /// Step-1 direct mirror path target->source, when one exists.
  std::optional<double> beta_se;
  std::string diagnostic;
};

struct CyclicFit {
  ModelSpec step2_spec;
  PlsFit step2;
  std::vector<CyclicPath> paths;

  const CyclicPath& find(const std::string& source, const std::string& target) const;
};

/// Runs step 2 on top of a converged step-1 fit. The step-1 fit is not
/// modified. Throws ValidationError for models without an intermediate
/// construct and EstimationError when step 2 fails to converge.
CyclicFit estimate_cyclic(const PreparedData& data, const PlsFit& fit, const ModelSpec& spec,
                          const CyclicOptions& options = {});

enum class Direction { CeGtSe, SeGtCe, TwoSided };

std::string_view to_string(Direction direction);
Direction parse_direction(std::string_view keyword);

struct TestResult {
  double t = 0.0;
  long long df = 0;
  double p = 1.0;
  Direction direction = Direction::CeGtSe;
  bool reject = false;  // at alpha
};

/// Welch-type comparison of a sequential and a cyclic coefficient using
/// bootstrap standard errors:
///   t  = |b_se - b_ce| / sqrt((n-1)/n * (s_se^2 + s_ce^2))
///   df = floor( ((n-1)/n (s_se^2+s_ce^2))^2 / ((n-1)/n^2 (s_se^4+s_ce^4)) )
TestResult reinforcement_test(double beta_se, double beta_ce, double sigma_se, double sigma_ce,
                              long long n, Direction direction = Direction::CeGtSe,
                              double alpha = 0.05);

}  // namespace cpls
