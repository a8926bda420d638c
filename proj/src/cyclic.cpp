#include "cyclicpls/cyclic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

#include "cyclicpls/errors.hpp"

namespace cpls {

std::string score_column_name(const std::string& construct) { return construct + "_score"; }

ModelSpec build_feedback_model(const PlsFit& fit, const ModelSpec& spec, bool include_target_paths) {
  if (!spec.cyclic) throw ValidationError("no cyclic specification");
  const CyclicSpec& cyc = *spec.cyclic;
  // throws when the source has no step-1 score
  (void)fit.index(cyc.source);

  ModelSpec out;
  out.scheme = spec.scheme;
  out.blocks.push_back({cyc.source, {score_column_name(cyc.source)}, Mode::SingleItem});
  for (const auto& t : cyc.targets) out.blocks.push_back(spec.block(t));
  for (const auto& t : cyc.targets) out.paths.push_back({cyc.source, t});
  if (include_target_paths) {
    for (const auto& p : spec.paths) {
      const bool both = std::find(cyc.targets.begin(), cyc.targets.end(), p.source) != cyc.targets.end() &&
                        std::find(cyc.targets.begin(), cyc.targets.end(), p.target) != cyc.targets.end();
      if (both) out.paths.push_back(p);
    }
  }
  return out;
}

namespace {

// Data for the step-2 model: the source score column followed by the target
// blocks' prepared columns.
PreparedData step2_data(const PreparedData& data, const PlsFit& fit, const ModelSpec& step2) {
  PreparedData out;
  out.n_raw = data.n_raw;
  out.n_effective = data.n_effective;
  const Eigen::Index n = data.matrix.rows();
  Eigen::Index total = 1;
  for (std::size_t k = 1; k < step2.blocks.size(); ++k) total += data.range(step2.blocks[k].name).count;
  out.matrix.resize(n, total);

  const std::string& source = step2.blocks.front().name;
  out.matrix.col(0) = standardize(fit.score(source), "step-1 score of '" + source + "'");
  out.columns.push_back(score_column_name(source));
  out.block_index[source] = {0, 1};

  Eigen::Index at = 1;
  for (std::size_t k = 1; k < step2.blocks.size(); ++k) {
    const std::string& name = step2.blocks[k].name;
    const ColumnRange& r = data.range(name);
    out.matrix.middleCols(at, r.count) = data.matrix.middleCols(r.start, r.count);
    for (Eigen::Index j = 0; j < r.count; ++j) {
      out.columns.push_back(data.columns[static_cast<std::size_t>(r.start + j)]);
    }
    out.block_index[name] = {at, r.count};
    if (const auto it = data.mca.find(name); it != data.mca.end()) out.mca[name] = it->second;
    at += r.count;
  }
  return out;
}

}  // namespace

const CyclicPath& CyclicFit::find(const std::string& source, const std::string& target) const {
  for (const auto& p : paths) {
    if (p.source == source && p.target == target) return p;
  }
  throw ValidationError("no cyclic path " + source + "->" + target);
}

CyclicFit estimate_cyclic(const PreparedData& data, const PlsFit& fit, const ModelSpec& spec,
                          const CyclicOptions& options) {
  if (!spec.cyclic) throw ValidationError("no cyclic specification");
  const ValidationReport report = validate_model(spec);
  if (report.has("cyclic_no_intermediate")) {
    throw ValidationError(std::string(kTwoConstructDiagnostic));
  }
  if (!report.ok()) throw ValidationError(report.summary());

  CyclicFit out;
  out.step2_spec = build_feedback_model(fit, spec, options.include_target_paths);
  const PreparedData data2 = step2_data(data, fit, out.step2_spec);
  out.step2 = fit_pls(data2, out.step2_spec, options.pls);
  if (!out.step2.converged) {
    throw EstimationError("step-2 feedback model did not converge in " +
                          std::to_string(out.step2.iterations) + " iterations");
  }

  const CyclicSpec& cyc = *spec.cyclic;
  for (const auto& target : cyc.targets) {
    CyclicPath path;
    path.source = cyc.source;
    path.target = target;
    path.beta_ce = out.step2.path(cyc.source, target);
    const bool direct = std::any_of(spec.paths.begin(), spec.paths.end(), [&](const PathSpec& p) {
      return p.source == target && p.target == cyc.source;
    });
    if (direct) {
      path.beta_se = fit.path(target, cyc.source);
    } else {
      path.diagnostic = "no direct sequential path " + target + "->" + cyc.source +
                        "; reinforcement test skipped";
    }
    out.paths.push_back(std::move(path));
  }
  return out;
}

// ---------------------------------------------------------------------------

std::string_view to_string(Direction direction) {
  switch (direction) {
    case Direction::CeGtSe: return "ce_gt_se";
    case Direction::SeGtCe: return "se_gt_ce";
    case Direction::TwoSided: return "two_sided";
  }
  return "ce_gt_se";
}

Direction parse_direction(std::string_view keyword) {
  for (Direction d : {Direction::CeGtSe, Direction::SeGtCe, Direction::TwoSided}) {
    if (keyword == to_string(d)) return d;
  }
  throw ValidationError("unknown test direction '" + std::string(keyword) + "'");
}

TestResult reinforcement_test(double beta_se, double beta_ce, double sigma_se, double sigma_ce,
                              long long n, Direction direction, double alpha) {
  if (!(sigma_se > 0.0) || !(sigma_ce > 0.0)) {
    throw std::invalid_argument("reinforcement test needs positive standard errors");
  }
  if (n < 2) throw std::invalid_argument("reinforcement test needs n >= 2");

  const double nd = static_cast<double>(n);
  const double var_se = sigma_se * sigma_se;
  const double var_ce = sigma_ce * sigma_ce;
  const double pooled = (nd - 1.0) / nd * (var_se + var_ce);

  TestResult out;
  out.direction = direction;
  out.t = std::abs(beta_se - beta_ce) / std::sqrt(pooled);
  // (n-1)^2/n^2 (a+b)^2 / ((n-1)/n^2 (a^2+b^2)) reduces to (n-1)(a+b)^2/(a^2+b^2),
  // which is exactly 2(n-1) when a == b.
  const double sum = var_se + var_ce;
  const double ratio = (nd - 1.0) * (sum * sum) / (var_se * var_se + var_ce * var_ce);
  out.df = std::max(1LL, static_cast<long long>(std::floor(ratio)));

  const boost::math::students_t dist(static_cast<double>(out.df));
  const double upper = boost::math::cdf(boost::math::complement(dist, out.t));  // P(T >= t)
  const double diff = beta_ce - beta_se;
  switch (direction) {
    case Direction::CeGtSe: out.p = diff >= 0.0 ? upper : 1.0 - upper; break;
    case Direction::SeGtCe: out.p = diff <= 0.0 ? upper : 1.0 - upper; break;
    case Direction::TwoSided: out.p = std::min(1.0, 2.0 * upper); break;
  }
  out.reject = out.p < alpha;
  return out;
}

}  // namespace cpls
