#include "cyclicpls/assessment.hpp"

#include <cmath>
#include <stdexcept>

#include "cyclicpls/errors.hpp"
#include "cyclicpls/moments.hpp"

namespace cpls {

namespace {

Eigen::MatrixXd correlation(const Eigen::MatrixXd& block) {
  Eigen::MatrixXd centered = block.rowwise() - block.colwise().mean();
  Eigen::MatrixXd c = cross_moments(centered);
  const Eigen::VectorXd sd = c.diagonal().cwiseSqrt();
  for (Eigen::Index i = 0; i < c.rows(); ++i) {
    for (Eigen::Index j = 0; j < c.cols(); ++j) c(i, j) /= sd(i) * sd(j);
  }
  c.diagonal().setOnes();
  return c;
}

}  // namespace

double cronbach_alpha_from_corr(const Eigen::MatrixXd& corr) {
  const auto p = static_cast<double>(corr.rows());
  if (corr.rows() < 2) throw std::invalid_argument("Cronbach's alpha needs at least 2 items");
  return p / (p - 1.0) * (1.0 - p / corr.sum());
}

double cronbach_alpha(const Eigen::MatrixXd& block) {
  if (block.cols() < 2) throw std::invalid_argument("Cronbach's alpha needs at least 2 items");
  return cronbach_alpha_from_corr(correlation(block));
}

double composite_reliability(const Eigen::VectorXd& loadings) {
  if (loadings.size() == 0) throw std::invalid_argument("composite reliability of no loadings");
  const double s = loadings.sum();
  const double error = (1.0 - loadings.array().square()).sum();
  return s * s / (s * s + error);
}

double ave(const Eigen::VectorXd& loadings) {
  if (loadings.size() == 0) throw std::invalid_argument("AVE of no loadings");
  return loadings.squaredNorm() / static_cast<double>(loadings.size());
}

double dijkstra_rho_a(const Eigen::VectorXd& weights, const Eigen::MatrixXd& corr) {
  if (weights.size() < 2) throw std::invalid_argument("rho_A needs at least 2 indicators");
  if (std::abs(weights.dot(corr * weights) - 1.0) > 1e-8) {
    throw std::invalid_argument("rho_A needs unit-variance weights");
  }
  const Eigen::MatrixXd s_off = corr - Eigen::MatrixXd(corr.diagonal().asDiagonal());
  const Eigen::MatrixXd ww = weights * weights.transpose();
  const Eigen::MatrixXd ww_off = ww - Eigen::MatrixXd(ww.diagonal().asDiagonal());
  const double denom = weights.dot(ww_off * weights);
  if (denom == 0.0) throw EstimationError("rho_A undefined: zero off-diagonal weight structure");
  const double ww_norm = weights.squaredNorm();
  return ww_norm * ww_norm * weights.dot(s_off * weights) / denom;
}

Unidimensionality unidimensionality_from_corr(const Eigen::MatrixXd& corr) {
  if (corr.rows() < 2) throw std::invalid_argument("unidimensionality needs at least 2 items");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(corr, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd v = eig.eigenvalues().reverse();
  return {v(0), v(1), v(0) > 1.0 && v(1) < 1.0};
}

Unidimensionality unidimensionality(const Eigen::MatrixXd& block) {
  return unidimensionality_from_corr(correlation(block));
}

std::string_view to_string(Flag flag) {
  switch (flag) {
    case Flag::Pass: return "pass";
    case Flag::Borderline: return "borderline";
    case Flag::Fail: return "fail";
    case Flag::Exempt: return "exempt";
    case Flag::NotApplicable: return "not-applicable";
  }
  return "fail";
}

Flag threshold_flag(double value, double threshold, const Thresholds& t) {
  if (value >= threshold) return Flag::Pass;
  if (value >= threshold - t.borderline_band) return Flag::Borderline;
  return Flag::Fail;
}

const ConstructReliability& ReliabilityReport::find(const std::string& name) const {
  for (const auto& c : constructs) {
    if (c.name == name) return c;
  }
  throw ValidationError("no reliability entry for '" + name + "'");
}

void apply_flags(ConstructReliability& c, const Thresholds& t) {
  c.flags.clear();
  if (c.exempt) {
    for (const char* key : {"alpha", "cr", "rho_a", "ave", "unidimensionality"}) c.flags[key] = Flag::Exempt;
    for (auto& ind : c.indicators) ind.flag = Flag::Exempt;
    return;
  }
  auto flag_of = [&](const std::optional<double>& v, double threshold) {
    return v ? threshold_flag(*v, threshold, t) : Flag::NotApplicable;
  };
  c.flags["alpha"] = flag_of(c.alpha, t.alpha);
  c.flags["cr"] = flag_of(c.composite_reliability, t.composite_reliability);
  c.flags["rho_a"] = flag_of(c.rho_a, t.rho_a);
  c.flags["ave"] = flag_of(c.ave, t.ave);
  c.flags["unidimensionality"] =
      c.eigen ? (c.eigen->pass ? Flag::Pass : Flag::Fail) : Flag::NotApplicable;
  for (auto& ind : c.indicators) {
    ind.flag = c.mode == Mode::Reflective ? threshold_flag(ind.loading, t.loading, t)
                                          : Flag::NotApplicable;
  }
}

ReliabilityReport assess(const PlsFit& fit, const PreparedData& data, const ModelSpec& spec,
                         const BootstrapResult* boot, const Thresholds& t) {
  ReliabilityReport report;
  for (std::size_t k = 0; k < spec.blocks.size(); ++k) {
    const BlockSpec& b = spec.blocks[k];
    ConstructReliability c;
    c.name = b.name;
    c.mode = b.mode;
    c.exempt = b.yields_single_column();

    const auto& names = fit.indicators[k];
    for (std::size_t p = 0; p < names.size(); ++p) {
      IndicatorReport ind;
      ind.name = names[p];
      ind.loading = fit.loadings[k](static_cast<Eigen::Index>(p));
      if (boot) {
        if (const auto* coef = boot->find(loading_key(b.name, names[p]))) {
          ind.ci = coef->ci;
          ind.significant = coef->significant;
        }
      }
      c.indicators.push_back(std::move(ind));
    }

    if (b.mode == Mode::Reflective && b.indicators.size() >= 2) {
      const Eigen::MatrixXd corr = correlation(data.block(b.name));
      c.alpha = cronbach_alpha_from_corr(corr);
      c.composite_reliability = composite_reliability(fit.loadings[k]);
      c.ave = ave(fit.loadings[k]);
      c.rho_a = dijkstra_rho_a(fit.weights[k], corr);
      c.eigen = unidimensionality_from_corr(corr);
    } else if (b.mode == Mode::Reflective) {
      c.composite_reliability = composite_reliability(fit.loadings[k]);
      c.ave = ave(fit.loadings[k]);
    }
    apply_flags(c, t);
    report.constructs.push_back(std::move(c));
  }
  return report;
}

}  // namespace cpls
