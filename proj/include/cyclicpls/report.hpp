#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cyclicpls/assessment.hpp"
#include "cyclicpls/cyclic.hpp"
#include "cyclicpls/dataset.hpp"
#include "cyclicpls/modelspec.hpp"
#include "cyclicpls/plscore.hpp"
#include "cyclicpls/resample.hpp"

namespace cpls {

inline constexpr const char* kToolName = "cyclicpls";
inline constexpr const char* kToolVersion = "1.0.0";

struct RunConfig {
  MissingPolicy missing = MissingPolicy::Listwise;
  PlsOptions pls;
  int bootstrap = 500;  // 0 disables resampling
  double level = 0.95;
  std::uint64_t seed = 1;
  Direction direction = Direction::CeGtSe;
  bool include_target_paths = false;
  unsigned threads = 0;
};

/// One pair-table row: a cyclic path paired with its sequential mirror.
struct ReinforcementRow {
  std::string source;  // cyclic source (step-1 dependent construct)
  std::string target;
  double beta_ce = 0.0;
  std::optional<double> beta_se;
  std::optional<double> sigma_se;
  std::optional<double> sigma_ce;
  std::optional<TestResult> test;
  std::string diagnostic;
};

struct RunResult {
  ModelSpec spec;
  PreparedData data;
  PlsFit fit;
  ReliabilityReport reliability;
  std::optional<BootstrapResult> boot;
  std::optional<CyclicFit> cyclic;
  std::vector<ReinforcementRow> reinforcement;
};

/// prepare -> fit -> (bootstrap) -> assess. Throws ValidationError when the
/// model is not estimable on the table and EstimationError when the fit fails.
RunResult run_fit(const ModelSpec& spec, const RawTable& raw, const RunConfig& config);

/// run_fit plus the two-step cyclic estimator and the reinforcement tests.
RunResult run_cyclic(const ModelSpec& spec, const RawTable& raw, const RunConfig& config);

std::vector<ReinforcementRow> reinforcement_rows(const CyclicFit& cyclic,
                                                 const BootstrapResult* boot, long long n,
                                                 Direction direction);

nlohmann::json report_json(const RunResult& run, const RunConfig& config);
std::string report_text(const RunResult& run, const RunConfig& config);

/// Pair table: Effects, SE, CE, Abs (diff.), t-statistic, p-value.
std::string reinforcement_table(const std::vector<ReinforcementRow>& rows);

}  // namespace cpls
