#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cyclicpls/cyclic.hpp"
#include "cyclicpls/dataset.hpp"
#include "cyclicpls/modelspec.hpp"
#include "cyclicpls/plscore.hpp"

namespace cpls {

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
};

/// Nearest-rank percentile interval: the order statistics of rank
/// ceil(q n) for q = (1-level)/2 and 1-(1-level)/2. Throws
/// std::invalid_argument for empty input or level outside (0, 1).
Interval percentile_ci(std::vector<double> replicates, double level);

/// Sample standard deviation (divisor B-1); 0 for fewer than two values.
double standard_error(const std::vector<double>& replicates);

// Coefficient keys shared by bootstrap results and reports.
std::string loading_key(const std::string& construct, const std::string& indicator);
std::string path_key(const std::string& source, const std::string& target);
std::string cyclic_key(const std::string& source, const std::string& target);

struct BootstrapCoefficient {
  std::string name;
  double estimate = 0.0;  // original-sample value
  std::vector<double> replicates;
  double se = 0.0;
  Interval ci;
  bool significant = false;  // ci excludes zero
};

struct BootstrapResult {
  int replicates = 0;  // requested B
  int failed = 0;
  double level = 0.95;
  std::uint64_t seed = 0;
  std::vector<BootstrapCoefficient> coefficients;
  std::map<std::string, int> failure_reasons;

  const BootstrapCoefficient* find(const std::string& name) const;
};

struct BootstrapOptions {
  int replicates = 500;
  double level = 0.95;
  std::uint64_t seed = 1;
  PlsOptions pls;
  /// When set and the model declares a cyclic section, both steps are re-run
  /// per replicate and the cyclic paths are bootstrapped too.
  std::optional<CyclicOptions> cyclic;
  unsigned threads = 0;  // 0: hardware concurrency
};

/// Row indices of replicate r; a function of (seed, r) only.
std::vector<Eigen::Index> resample_indices(std::uint64_t seed, int replicate, Eigen::Index n);

/// Nonparametric bootstrap of loadings, paths and (optionally) cyclic paths.
/// Replicate weights are sign-aligned with the original-sample weights.
/// Replicates that fail (singular systems, non-convergence, degenerate
/// resamples) are skipped and counted; more than 5% failures throws
/// EstimationError.
BootstrapResult bootstrap(const PreparedData& data, const ModelSpec& spec,
                          const BootstrapOptions& options = {});

}  // namespace cpls
