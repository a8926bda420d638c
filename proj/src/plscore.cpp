#include "cyclicpls/plscore.hpp"

#include <cmath>
#include <limits>

#include "cyclicpls/errors.hpp"
#include "cyclicpls/moments.hpp"

namespace cpls {

namespace {

constexpr double kSingular = 1e-12;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double min_eigenvalue(const Eigen::MatrixXd& sym) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym, Eigen::EigenvaluesOnly);
  return eig.eigenvalues()(0);
}

struct BlockLayout {
  std::vector<Eigen::Index> start;
  std::vector<Eigen::Index> size;
  std::vector<Mode> mode;
};

BlockLayout layout_of(const PreparedData& data, const ModelSpec& spec) {
  BlockLayout layout;
  for (const auto& b : spec.blocks) {
    const ColumnRange& r = data.range(b.name);
    const Eigen::Index expected =
        b.yields_single_column() ? 1 : static_cast<Eigen::Index>(b.indicators.size());
    if (r.count != expected) {
      throw ValidationError("block '" + b.name + "' has " + std::to_string(r.count) +
                            " prepared columns, expected " + std::to_string(expected));
    }
    layout.start.push_back(r.start);
    layout.size.push_back(r.count);
    layout.mode.push_back(b.mode);
  }
  return layout;
}

void normalize(Eigen::VectorXd& w, const Eigen::MatrixXd& r_kk) {
  const double var = w.dot(r_kk * w);
  if (!(var > 0.0)) throw EstimationError("degenerate block: zero score variance");
  w /= std::sqrt(var);
}

}  // namespace

// ---------------------------------------------------------------------------

int PlsFit::index(const std::string& construct) const {
  for (std::size_t k = 0; k < constructs.size(); ++k) {
    if (constructs[k] == construct) return static_cast<int>(k);
  }
  throw ValidationError("unknown construct '" + construct + "'");
}

double PlsFit::path(const std::string& source, const std::string& target) const {
  return paths(index(source), index(target));
}

double PlsFit::loading(const std::string& construct, const std::string& indicator) const {
  const int k = index(construct);
  const auto& names = indicators[static_cast<std::size_t>(k)];
  for (std::size_t p = 0; p < names.size(); ++p) {
    if (names[p] == indicator) return loadings[static_cast<std::size_t>(k)](static_cast<Eigen::Index>(p));
  }
  throw ValidationError("construct '" + construct + "' has no indicator '" + indicator + "'");
}

double PlsFit::r2(const std::string& construct) const { return r_squared(index(construct)); }

Eigen::VectorXd PlsFit::score(const std::string& construct) const {
  return scores.col(index(construct));
}

// ---------------------------------------------------------------------------

InnerModel inner_regressions(const Eigen::MatrixXd& construct_corr, const ModelSpec& spec) {
  const auto k_count = static_cast<Eigen::Index>(spec.blocks.size());
  InnerModel out{Eigen::MatrixXd::Zero(k_count, k_count),
                 Eigen::VectorXd::Constant(k_count, kNaN)};
  for (int k = 0; k < static_cast<int>(k_count); ++k) {
    const std::vector<int> preds = spec.predecessors(k);
    if (preds.empty()) continue;
    const auto m = static_cast<Eigen::Index>(preds.size());
    Eigen::MatrixXd c_pp(m, m);
    Eigen::VectorXd c_pk(m);
    for (Eigen::Index a = 0; a < m; ++a) {
      c_pk(a) = construct_corr(preds[static_cast<std::size_t>(a)], k);
      for (Eigen::Index b = 0; b < m; ++b) {
        c_pp(a, b) = construct_corr(preds[static_cast<std::size_t>(a)], preds[static_cast<std::size_t>(b)]);
      }
    }
    if (min_eigenvalue(c_pp) < kSingular) {
      throw EstimationError("singular system: predecessors of '" +
                            spec.blocks[static_cast<std::size_t>(k)].name + "' are collinear");
    }
    const Eigen::VectorXd beta = c_pp.ldlt().solve(c_pk);
    for (Eigen::Index a = 0; a < m; ++a) out.paths(preds[static_cast<std::size_t>(a)], k) = beta(a);
    out.r_squared(k) = beta.dot(c_pk);
  }
  return out;
}

InnerModel path_coefficients(const Eigen::MatrixXd& scores, const ModelSpec& spec) {
  if (scores.cols() != static_cast<Eigen::Index>(spec.blocks.size())) {
    throw ValidationError("score matrix must have one column per construct");
  }
  const auto k_count = scores.cols();
  Eigen::MatrixXd corr(k_count, k_count);
  for (Eigen::Index a = 0; a < k_count; ++a) {
    corr(a, a) = 1.0;
    for (Eigen::Index b = a + 1; b < k_count; ++b) {
      corr(a, b) = corr(b, a) = pearson(scores.col(a), scores.col(b));
    }
  }
  return inner_regressions(corr, spec);
}

std::vector<Eigen::VectorXd> loadings(const PreparedData& data, const Eigen::MatrixXd& scores,
                                      const ModelSpec& spec) {
  std::vector<Eigen::VectorXd> out;
  for (std::size_t k = 0; k < spec.blocks.size(); ++k) {
    const Eigen::MatrixXd x = data.block(spec.blocks[k].name);
    Eigen::VectorXd l(x.cols());
    for (Eigen::Index p = 0; p < x.cols(); ++p) {
      l(p) = pearson(x.col(p), scores.col(static_cast<Eigen::Index>(k)));
    }
    out.push_back(std::move(l));
  }
  return out;
}

// ---------------------------------------------------------------------------

PlsFit fit_pls(const PreparedData& data, const ModelSpec& spec, const PlsOptions& options) {
  if (!spec.topological_order()) {
    throw ValidationError("sequential graph must be acyclic");
  }
  const BlockLayout layout = layout_of(data, spec);
  const std::size_t k_count = spec.blocks.size();
  const Scheme scheme = options.scheme.value_or(spec.scheme);

  // Every step below works on the indicator correlation matrix only.
  const Eigen::MatrixXd r = cross_moments(data.matrix);
  auto r_block = [&](std::size_t a, std::size_t b) {
    return r.block(layout.start[a], layout.start[b], layout.size[a], layout.size[b]);
  };

  std::vector<std::vector<int>> preds(k_count);
  std::vector<std::vector<int>> succs(k_count);
  for (std::size_t k = 0; k < k_count; ++k) {
    preds[k] = spec.predecessors(static_cast<int>(k));
    succs[k] = spec.successors(static_cast<int>(k));
  }

  // Mode B needs the inverse block correlation; check once.
  std::vector<Eigen::LDLT<Eigen::MatrixXd>> block_solvers(k_count);
  for (std::size_t k = 0; k < k_count; ++k) {
    if (layout.mode[k] == Mode::Formative) {
      const Eigen::MatrixXd r_kk = r_block(k, k);
      if (min_eigenvalue(r_kk) < kSingular) {
        throw EstimationError("singular system: formative block '" + spec.blocks[k].name +
                              "' has collinear indicators");
      }
      block_solvers[k].compute(r_kk);
    }
  }

  std::vector<Eigen::VectorXd> w(k_count);
  for (std::size_t k = 0; k < k_count; ++k) {
    if (options.initial_weights && layout.mode[k] != Mode::SingleItem &&
        layout.mode[k] != Mode::McaSingleItem) {
      w[k] = (*options.initial_weights).at(k);
      if (w[k].size() != layout.size[k]) throw ValidationError("initial weights have wrong size");
    } else {
      w[k] = Eigen::VectorXd::Ones(layout.size[k]);
    }
    normalize(w[k], r_block(k, k));
  }

  auto construct_corr = [&](const std::vector<Eigen::VectorXd>& ws) {
    Eigen::MatrixXd c(static_cast<Eigen::Index>(k_count), static_cast<Eigen::Index>(k_count));
    for (std::size_t a = 0; a < k_count; ++a) {
      for (std::size_t b = a; b < k_count; ++b) {
        const double v = ws[a].dot(r_block(a, b) * ws[b]);
        c(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = v;
        c(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = v;
      }
    }
    return c;
  };

  PlsFit fit;
  for (int iter = 1; iter <= options.max_iter; ++iter) {
    const Eigen::MatrixXd c = construct_corr(w);

    // Inner weights e(k, j): contribution of score j to the inner proxy of k.
    Eigen::MatrixXd e = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k_count),
                                              static_cast<Eigen::Index>(k_count));
    for (std::size_t k = 0; k < k_count; ++k) {
      const auto ki = static_cast<Eigen::Index>(k);
      if (preds[k].empty() && succs[k].empty()) {
        // isolated block: its own score is the proxy (first principal component)
        e(ki, ki) = 1.0;
        continue;
      }
      auto neighbour_weight = [&](int j) {
        const double cj = c(ki, j);
        if (scheme == Scheme::Centroid) return cj >= 0.0 ? 1.0 : -1.0;
        return cj;
      };
      if (scheme == Scheme::Path && !preds[k].empty()) {
        const auto m = static_cast<Eigen::Index>(preds[k].size());
        Eigen::MatrixXd c_pp(m, m);
        Eigen::VectorXd c_pk(m);
        for (Eigen::Index a = 0; a < m; ++a) {
          c_pk(a) = c(preds[k][static_cast<std::size_t>(a)], ki);
          for (Eigen::Index b = 0; b < m; ++b) {
            c_pp(a, b) = c(preds[k][static_cast<std::size_t>(a)], preds[k][static_cast<std::size_t>(b)]);
          }
        }
        if (min_eigenvalue(c_pp) < kSingular) {
          throw EstimationError("singular system: predecessors of '" + spec.blocks[k].name +
                                "' are collinear");
        }
        const Eigen::VectorXd beta = c_pp.ldlt().solve(c_pk);
        for (Eigen::Index a = 0; a < m; ++a) e(ki, preds[k][static_cast<std::size_t>(a)]) = beta(a);
      } else {
        for (int j : preds[k]) e(ki, j) = neighbour_weight(j);
      }
      for (int j : succs[k]) e(ki, j) = neighbour_weight(j);
    }

    std::vector<Eigen::VectorXd> next(k_count);
    double change = 0.0;
    for (std::size_t k = 0; k < k_count; ++k) {
      if (layout.mode[k] == Mode::SingleItem || layout.mode[k] == Mode::McaSingleItem) {
        next[k] = w[k];
        continue;
      }
      // covariances of the block's indicators with the inner proxy
      Eigen::VectorXd cov = Eigen::VectorXd::Zero(layout.size[k]);
      for (std::size_t j = 0; j < k_count; ++j) {
        const double ekj = e(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j));
        if (ekj != 0.0) cov += ekj * (r_block(k, j) * w[j]);
      }
      next[k] = layout.mode[k] == Mode::Formative ? Eigen::VectorXd(block_solvers[k].solve(cov))
                                                  : cov;
      normalize(next[k], r_block(k, k));
      change = std::max(change, (next[k] - w[k]).cwiseAbs().maxCoeff());
    }
    w = std::move(next);
    fit.iterations = iter;
    if (change < options.tol) {
      fit.converged = true;
      break;
    }
  }

  // Orientation, then everything derived from the final weights.
  for (std::size_t k = 0; k < k_count; ++k) {
    bool flip = false;
    if (options.sign_reference) {
      flip = w[k].dot((*options.sign_reference).at(k)) < 0.0;
    } else {
      flip = (r_block(k, k) * w[k]).sum() < 0.0;
    }
    if (flip) w[k] = -w[k];
  }

  fit.weights = w;
  fit.constructs.reserve(k_count);
  fit.scores.resize(data.matrix.rows(), static_cast<Eigen::Index>(k_count));
  for (std::size_t k = 0; k < k_count; ++k) {
    fit.constructs.push_back(spec.blocks[k].name);
    if (spec.blocks[k].mode == Mode::McaSingleItem) {
      fit.indicators.push_back({spec.blocks[k].name});
    } else {
      fit.indicators.push_back(spec.blocks[k].indicators);
    }
    if (layout.mode[k] == Mode::SingleItem || layout.mode[k] == Mode::McaSingleItem) {
      fit.loadings.push_back(Eigen::VectorXd::Ones(1));
    } else {
      fit.loadings.push_back(r_block(k, k) * w[k]);
    }
    fit.scores.col(static_cast<Eigen::Index>(k)) =
        data.matrix.middleCols(layout.start[k], layout.size[k]) * w[k];
  }
  fit.construct_corr = construct_corr(w);
  InnerModel inner = inner_regressions(fit.construct_corr, spec);
  fit.paths = std::move(inner.paths);
  fit.r_squared = std::move(inner.r_squared);
  return fit;
}

}  // namespace cpls
