#include "cyclicpls/simgen.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "cyclicpls/errors.hpp"

namespace cpls {

using nlohmann::json;

std::string_view to_string(Generator g) { return g == Generator::Acyclic ? "acyclic" : "cyclic"; }

int PopulationSpec::index(std::string_view name) const {
  for (std::size_t k = 0; k < constructs.size(); ++k) {
    if (constructs[k].name == name) return static_cast<int>(k);
  }
  return -1;
}

namespace {

Eigen::VectorXd to_vector(const json& v, const std::string& where) {
  if (!v.is_array()) throw ValidationError(where + " must be an array of numbers");
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) throw ValidationError(where + " must be an array of numbers");
    out(static_cast<Eigen::Index>(i)) = v[i].get<double>();
  }
  return out;
}

void check_population(const PopulationSpec& pop) {
  const Eigen::Index k = pop.size();
  if (k == 0) throw ValidationError("population has no constructs");
  if (pop.structural.rows() != k || pop.structural.cols() != k) {
    throw ValidationError("structural matrix must be K x K");
  }
  if (pop.n < 2) throw ValidationError("population sample size must be at least 2");
  for (Eigen::Index i = 0; i < k; ++i) {
    if (pop.structural(i, i) != 0.0) throw ValidationError("structural matrix must have a zero diagonal");
  }
  for (Eigen::Index i = 0; i < k; ++i) {
    const auto& c = pop.constructs[static_cast<std::size_t>(i)];
    switch (c.mode) {
      case Mode::Reflective:
        if (c.coefficients.size() == 0) throw ValidationError("construct '" + c.name + "' needs loadings");
        if ((c.coefficients.array().abs() >= 1.0).any()) {
          throw ValidationError("loadings of '" + c.name + "' must lie in (-1, 1)");
        }
        break;
      case Mode::Formative:
        if (c.coefficients.size() == 0 || c.coefficients.norm() == 0.0) {
          throw ValidationError("construct '" + c.name + "' needs nonzero weights");
        }
        if (pop.structural.row(i).any()) {
          throw ValidationError("formative construct '" + c.name + "' must be exogenous");
        }
        break;
      case Mode::SingleItem: break;
      case Mode::McaSingleItem:
        throw ValidationError("population constructs cannot be MCA blocks");
    }
  }
  if (pop.disturbances) {
    if (pop.disturbances->size() != k) throw ValidationError("disturbances must have K entries");
    if ((pop.disturbances->array() <= 0.0).any()) {
      throw ValidationError("disturbance variances must be positive");
    }
  }
}

}  // namespace

PopulationSpec parse_population(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document.begin(), document.end());
  } catch (const json::parse_error& e) {
    throw ValidationError("population syntax error at byte " + std::to_string(e.byte) + ": " + e.what());
  }
  if (!doc.is_object()) throw ValidationError("population document must be an object");
  for (const auto& [key, value] : doc.items()) {
    if (key != "generator" && key != "n" && key != "seed" && key != "constructs" && key != "paths" &&
        key != "disturbances") {
      throw ValidationError("population: unknown field '" + key + "'");
    }
  }

  PopulationSpec pop;
  if (doc.contains("generator")) {
    const auto g = doc["generator"].get<std::string>();
    if (g == "acyclic") {
      pop.generator = Generator::Acyclic;
    } else if (g == "cyclic") {
      pop.generator = Generator::Cyclic;
    } else {
      throw ValidationError("unknown generator '" + g + "'");
    }
  }
  if (doc.contains("n")) pop.n = doc["n"].get<Eigen::Index>();
  if (doc.contains("seed")) pop.seed = doc["seed"].get<std::uint64_t>();

  if (!doc.contains("constructs") || !doc["constructs"].is_array()) {
    throw ValidationError("population: 'constructs' must be an array");
  }
  for (const auto& c : doc["constructs"]) {
    PopulationConstruct pc;
    pc.name = c.at("name").get<std::string>();
    pc.mode = c.contains("mode") ? parse_mode(c["mode"].get<std::string>()) : Mode::Reflective;
    if (c.contains("loadings")) pc.coefficients = to_vector(c["loadings"], pc.name + ".loadings");
    if (c.contains("weights")) pc.coefficients = to_vector(c["weights"], pc.name + ".weights");
    if (pop.index(pc.name) >= 0) throw ValidationError("duplicate construct '" + pc.name + "'");
    pop.constructs.push_back(std::move(pc));
  }
  pop.structural = Eigen::MatrixXd::Zero(pop.size(), pop.size());
  if (doc.contains("paths")) {
    for (const auto& p : doc["paths"]) {
      const int s = pop.index(p.at("source").get<std::string>());
      const int t = pop.index(p.at("target").get<std::string>());
      if (s < 0 || t < 0) throw ValidationError("population path references an unknown construct");
      pop.structural(t, s) = p.at("beta").get<double>();
    }
  }
  if (doc.contains("disturbances")) pop.disturbances = to_vector(doc["disturbances"], "disturbances");
  check_population(pop);
  return pop;
}

PopulationSpec load_population(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read population file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_population(buf.str());
}

json population_to_json(const PopulationSpec& pop) {
  json doc;
  doc["generator"] = to_string(pop.generator);
  doc["n"] = pop.n;
  doc["seed"] = pop.seed;
  doc["constructs"] = json::array();
  for (const auto& c : pop.constructs) {
    json entry = {{"name", c.name}, {"mode", to_string(c.mode)}};
    std::vector<double> coef(c.coefficients.data(), c.coefficients.data() + c.coefficients.size());
    if (c.mode == Mode::Reflective) entry["loadings"] = coef;
    if (c.mode == Mode::Formative) entry["weights"] = coef;
    doc["constructs"].push_back(entry);
  }
  doc["paths"] = json::array();
  for (Eigen::Index t = 0; t < pop.size(); ++t) {
    for (Eigen::Index s = 0; s < pop.size(); ++s) {
      if (pop.structural(t, s) != 0.0) {
        doc["paths"].push_back({{"source", pop.constructs[static_cast<std::size_t>(s)].name},
                                {"target", pop.constructs[static_cast<std::size_t>(t)].name},
                                {"beta", pop.structural(t, s)}});
      }
    }
  }
  if (pop.disturbances) {
    doc["disturbances"] = std::vector<double>(pop.disturbances->data(),
                                              pop.disturbances->data() + pop.disturbances->size());
  }
  return doc;
}

std::vector<std::string> indicator_names(const PopulationSpec& pop) {
  std::vector<std::string> names;
  for (const auto& c : pop.constructs) {
    if (c.mode == Mode::SingleItem) {
      names.push_back(c.name);
    } else {
      for (Eigen::Index p = 0; p < c.coefficients.size(); ++p) {
        names.push_back(c.name + "_" + std::to_string(p + 1));
      }
    }
  }
  return names;
}

double spectral_radius(const Eigen::MatrixXd& b) {
  if (b.size() == 0) return 0.0;
  Eigen::EigenSolver<Eigen::MatrixXd> eig(b, false);
  return eig.eigenvalues().cwiseAbs().maxCoeff();
}

Eigen::VectorXd unit_variance_disturbances(const Eigen::MatrixXd& b) {
  const Eigen::Index k = b.rows();
  // Kahn order on the graph j -> i for b(i, j) != 0
  std::vector<int> indegree(static_cast<std::size_t>(k), 0);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) {
      if (b(i, j) != 0.0) ++indegree[static_cast<std::size_t>(i)];
    }
  }
  std::vector<Eigen::Index> order;
  std::vector<bool> done(static_cast<std::size_t>(k), false);
  while (static_cast<Eigen::Index>(order.size()) < k) {
    Eigen::Index next = -1;
    for (Eigen::Index i = 0; i < k && next < 0; ++i) {
      if (!done[static_cast<std::size_t>(i)] && indegree[static_cast<std::size_t>(i)] == 0) next = i;
    }
    if (next < 0) throw ValidationError("acyclic generation needs a triangularizable structural matrix");
    done[static_cast<std::size_t>(next)] = true;
    order.push_back(next);
    for (Eigen::Index i = 0; i < k; ++i) {
      if (b(i, next) != 0.0) --indegree[static_cast<std::size_t>(i)];
    }
  }

  Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(k, k);
  Eigen::VectorXd psi(k);
  for (Eigen::Index pos = 0; pos < k; ++pos) {
    const Eigen::Index i = order[static_cast<std::size_t>(pos)];
    // covariances of xi_i with every construct placed before it
    for (Eigen::Index q = 0; q < pos; ++q) {
      const Eigen::Index j = order[static_cast<std::size_t>(q)];
      double cov = 0.0;
      for (Eigen::Index m = 0; m < k; ++m) cov += b(i, m) * sigma(m, j);
      sigma(i, j) = sigma(j, i) = cov;
    }
    double explained = 0.0;
    for (Eigen::Index m = 0; m < k; ++m) explained += b(i, m) * sigma(i, m);
    psi(i) = 1.0 - explained;
    if (!(psi(i) > 0.0)) {
      throw ValidationError("invalid variance bookkeeping: structural effects explain at least all "
                            "variance of construct " + std::to_string(i + 1));
    }
    sigma(i, i) = 1.0;
  }
  return psi;
}

Eigen::MatrixXd construct_covariance(const Eigen::MatrixXd& b, const Eigen::VectorXd& psi) {
  const Eigen::Index k = b.rows();
  const Eigen::MatrixXd inv = (Eigen::MatrixXd::Identity(k, k) - b).inverse();
  return inv * psi.asDiagonal() * inv.transpose();
}

namespace {

Eigen::VectorXd disturbances_for(const PopulationSpec& pop, Generator g) {
  if (g == Generator::Acyclic) return unit_variance_disturbances(pop.structural);
  // a radius that rounds to just below 1 still has no stable equilibrium
  if (spectral_radius(pop.structural) >= 1.0 - 1e-10) {
    throw ValidationError("no equilibrium: spectral radius of the structural matrix is >= 1");
  }
  return pop.disturbances.value_or(Eigen::VectorXd::Ones(pop.size()));
}

RawTable simulate(const PopulationSpec& pop, Generator g) {
  check_population(pop);
  const Eigen::Index k = pop.size();
  const Eigen::VectorXd psi = disturbances_for(pop, g);
  const Eigen::MatrixXd sigma = construct_covariance(pop.structural, psi);
  const Eigen::MatrixXd solve = (Eigen::MatrixXd::Identity(k, k) - pop.structural).inverse();
  const Eigen::VectorXd scale = sigma.diagonal().cwiseSqrt().cwiseInverse();

  RawTable table;
  table.header = indicator_names(pop);
  table.values.resize(pop.n, static_cast<Eigen::Index>(table.header.size()));

  std::mt19937_64 rng(pop.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd zeta(k);
  std::vector<Eigen::VectorXd> formative(static_cast<std::size_t>(k));
  for (Eigen::Index r = 0; r < pop.n; ++r) {
    for (Eigen::Index i = 0; i < k; ++i) {
      const auto& c = pop.constructs[static_cast<std::size_t>(i)];
      if (c.mode == Mode::Formative) {
        Eigen::VectorXd x(c.coefficients.size());
        for (Eigen::Index p = 0; p < x.size(); ++p) x(p) = normal(rng);
        zeta(i) = std::sqrt(psi(i)) * c.coefficients.dot(x) / c.coefficients.norm();
        formative[static_cast<std::size_t>(i)] = std::move(x);
      } else {
        zeta(i) = std::sqrt(psi(i)) * normal(rng);
      }
    }
    const Eigen::VectorXd xi = (solve * zeta).cwiseProduct(scale);

    Eigen::Index col = 0;
    for (Eigen::Index i = 0; i < k; ++i) {
      const auto& c = pop.constructs[static_cast<std::size_t>(i)];
      switch (c.mode) {
        case Mode::SingleItem:
          table.values(r, col++) = xi(i);
          break;
        case Mode::Formative:
          for (Eigen::Index p = 0; p < c.coefficients.size(); ++p) {
            table.values(r, col++) = formative[static_cast<std::size_t>(i)](p);
          }
          break;
        default:
          for (Eigen::Index p = 0; p < c.coefficients.size(); ++p) {
            const double l = c.coefficients(p);
            table.values(r, col++) = l * xi(i) + std::sqrt(1.0 - l * l) * normal(rng);
          }
      }
    }
  }
  return table;
}

}  // namespace

Eigen::MatrixXd population_correlation(const PopulationSpec& pop) {
  const Eigen::MatrixXd sigma =
      construct_covariance(pop.structural, disturbances_for(pop, pop.generator));
  const Eigen::VectorXd sd = sigma.diagonal().cwiseSqrt();
  return sd.cwiseInverse().asDiagonal() * sigma * sd.cwiseInverse().asDiagonal();
}

RawTable gen_acyclic(const PopulationSpec& pop) { return simulate(pop, Generator::Acyclic); }

RawTable gen_cyclic_equilibrium(const PopulationSpec& pop) { return simulate(pop, Generator::Cyclic); }

RawTable generate(const PopulationSpec& pop) { return simulate(pop, pop.generator); }

json population_sidecar(const PopulationSpec& pop) {
  json doc = population_to_json(pop);
  const Eigen::MatrixXd corr = population_correlation(pop);
  const Eigen::VectorXd psi = disturbances_for(pop, pop.generator);
  doc["implied_disturbances"] = std::vector<double>(psi.data(), psi.data() + psi.size());
  doc["construct_correlation"] = json::array();
  for (Eigen::Index i = 0; i < corr.rows(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(corr.cols()));
    for (Eigen::Index j = 0; j < corr.cols(); ++j) row[static_cast<std::size_t>(j)] = corr(i, j);
    doc["construct_correlation"].push_back(row);
  }
  doc["columns"] = indicator_names(pop);
  return doc;
}

ModelSpec model_for(const PopulationSpec& pop) {
  ModelSpec spec;
  const auto names = indicator_names(pop);
  std::size_t at = 0;
  for (const auto& c : pop.constructs) {
    BlockSpec b;
    b.name = c.name;
    b.mode = c.mode;
    const std::size_t p = c.mode == Mode::SingleItem ? 1 : static_cast<std::size_t>(c.coefficients.size());
    b.indicators.assign(names.begin() + static_cast<std::ptrdiff_t>(at),
                        names.begin() + static_cast<std::ptrdiff_t>(at + p));
    at += p;
    spec.blocks.push_back(std::move(b));
  }
  for (Eigen::Index t = 0; t < pop.size(); ++t) {
    for (Eigen::Index s = 0; s < pop.size(); ++s) {
      if (pop.structural(t, s) != 0.0) {
        spec.paths.push_back({pop.constructs[static_cast<std::size_t>(s)].name,
                              pop.constructs[static_cast<std::size_t>(t)].name});
      }
    }
  }
  return spec;
}

}  // namespace cpls
