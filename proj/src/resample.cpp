#include "cyclicpls/resample.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <thread>

#include "cyclicpls/errors.hpp"

namespace cpls {

Interval percentile_ci(std::vector<double> replicates, double level) {
  if (replicates.empty()) throw std::invalid_argument("percentile_ci: no replicates");
  if (!(level > 0.0 && level < 1.0)) {
    throw std::invalid_argument("percentile_ci: level must lie in (0, 1)");
  }
  std::sort(replicates.begin(), replicates.end());
  const auto n = static_cast<double>(replicates.size());
  auto nearest_rank = [&](double q) {
    // small slack so that q n landing on an integer is not pushed up by rounding
    auto rank = static_cast<std::size_t>(std::ceil(q * n - 1e-9));
    rank = std::clamp<std::size_t>(rank, 1, replicates.size());
    return replicates[rank - 1];
  };
  const double tail = (1.0 - level) / 2.0;
  return {nearest_rank(tail), nearest_rank(1.0 - tail)};
}

double standard_error(const std::vector<double>& replicates) {
  if (replicates.size() < 2) return 0.0;
  if (std::all_of(replicates.begin(), replicates.end(),
                  [&](double v) { return v == replicates.front(); })) {
    return 0.0;
  }
  double mean = 0.0;
  for (double v : replicates) mean += v;
  mean /= static_cast<double>(replicates.size());
  double ss = 0.0;
  for (double v : replicates) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(replicates.size() - 1));
}

std::string loading_key(const std::string& construct, const std::string& indicator) {
  return "loading:" + construct + ":" + indicator;
}

std::string path_key(const std::string& source, const std::string& target) {
  return "path:" + source + "->" + target;
}

std::string cyclic_key(const std::string& source, const std::string& target) {
  return "cyclic:" + source + "->" + target;
}

const BootstrapCoefficient* BootstrapResult::find(const std::string& name) const {
  for (const auto& c : coefficients) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

std::vector<Eigen::Index> resample_indices(std::uint64_t seed, int replicate, Eigen::Index n) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(replicate), 0x9e3779b9u};
  std::mt19937_64 rng(seq);
  std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
  std::vector<Eigen::Index> rows(static_cast<std::size_t>(n));
  for (auto& r : rows) r = pick(rng);
  return rows;
}

namespace {

struct Estimates {
  std::vector<std::string> names;
  std::vector<double> values;
  std::vector<Eigen::VectorXd> step1_weights;
  std::vector<Eigen::VectorXd> step2_weights;
};

Estimates estimate_once(const PreparedData& data, const ModelSpec& spec, const PlsOptions& pls,
                        const std::optional<CyclicOptions>& cyclic,
                        const Estimates* reference) {
  Estimates out;
  PlsOptions step1 = pls;
  if (reference) step1.sign_reference = reference->step1_weights;
  const PlsFit fit = fit_pls(data, spec, step1);
  if (!fit.converged) throw EstimationError("PLS did not converge");
  out.step1_weights = fit.weights;

  for (std::size_t k = 0; k < fit.constructs.size(); ++k) {
    for (std::size_t p = 0; p < fit.indicators[k].size(); ++p) {
      out.names.push_back(loading_key(fit.constructs[k], fit.indicators[k][p]));
      out.values.push_back(fit.loadings[k](static_cast<Eigen::Index>(p)));
    }
  }
  for (const auto& p : spec.paths) {
    out.names.push_back(path_key(p.source, p.target));
    out.values.push_back(fit.path(p.source, p.target));
  }
  if (cyclic && spec.cyclic) {
    CyclicOptions opts = *cyclic;
    if (reference) opts.pls.sign_reference = reference->step2_weights;
    const CyclicFit cfit = estimate_cyclic(data, fit, spec, opts);
    out.step2_weights = cfit.step2.weights;
    for (const auto& c : cfit.paths) {
      out.names.push_back(cyclic_key(c.source, c.target));
      out.values.push_back(c.beta_ce);
    }
  }
  return out;
}

}  // namespace

BootstrapResult bootstrap(const PreparedData& data, const ModelSpec& spec,
                          const BootstrapOptions& options) {
  if (options.replicates < 100) throw std::invalid_argument("bootstrap needs at least 100 replicates");
  if (!(options.level > 0.0 && options.level < 1.0)) {
    throw std::invalid_argument("bootstrap level must lie in (0, 1)");
  }

  const Estimates original = estimate_once(data, spec, options.pls, options.cyclic, nullptr);
  const int b_count = options.replicates;
  const Eigen::Index n = data.matrix.rows();

  // Slot r holds replicate r; failures keep an empty vector and a reason.
  std::vector<std::vector<double>> values(static_cast<std::size_t>(b_count));
  std::vector<std::string> reasons(static_cast<std::size_t>(b_count));

  auto run = [&](int r) {
    try {
      const PreparedData sample = data.resampled(resample_indices(options.seed, r, n));
      Estimates e = estimate_once(sample, spec, options.pls, options.cyclic, &original);
      values[static_cast<std::size_t>(r)] = std::move(e.values);
    } catch (const EstimationError& err) {
      reasons[static_cast<std::size_t>(r)] = err.what();
    } catch (const ValidationError& err) {
      reasons[static_cast<std::size_t>(r)] = err.what();
    }
  };

  unsigned threads = options.threads ? options.threads : std::thread::hardware_concurrency();
  threads = std::clamp(threads, 1u, static_cast<unsigned>(b_count));
  if (threads == 1) {
    for (int r = 0; r < b_count; ++r) run(r);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        for (int r = static_cast<int>(t); r < b_count; r += static_cast<int>(threads)) run(r);
      });
    }
    for (auto& th : pool) th.join();
  }

  BootstrapResult result;
  result.replicates = b_count;
  result.level = options.level;
  result.seed = options.seed;
  for (int r = 0; r < b_count; ++r) {
    if (values[static_cast<std::size_t>(r)].empty()) {
      ++result.failed;
      ++result.failure_reasons[reasons[static_cast<std::size_t>(r)]];
    }
  }
  if (static_cast<double>(result.failed) > 0.05 * b_count) {
    std::string msg = "bootstrap failed in " + std::to_string(result.failed) + " of " +
                      std::to_string(b_count) + " replicates:";
    for (const auto& [reason, count] : result.failure_reasons) {
      msg += " [" + std::to_string(count) + "x " + reason + "]";
    }
    throw EstimationError(msg);
  }

  for (std::size_t c = 0; c < original.names.size(); ++c) {
    BootstrapCoefficient coef;
    coef.name = original.names[c];
    coef.estimate = original.values[c];
    for (const auto& v : values) {
      if (!v.empty()) coef.replicates.push_back(v[c]);
    }
    coef.se = standard_error(coef.replicates);
    coef.ci = percentile_ci(coef.replicates, options.level);
    coef.significant = coef.ci.lower > 0.0 || coef.ci.upper < 0.0;
    result.coefficients.push_back(std::move(coef));
  }
  return result;
}

}  // namespace cpls
