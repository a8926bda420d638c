#include "cyclicpls/report.hpp"

#include <cmath>
#include <cstdio>
#include <iomanip>
#include <set>
#include <sstream>

#include "cyclicpls/errors.hpp"

namespace cpls {

using nlohmann::json;

namespace {

std::set<std::string> column_set(const RawTable& raw) {
  return {raw.header.begin(), raw.header.end()};
}

RunResult run(const ModelSpec& spec, const RawTable& raw, const RunConfig& config, bool cyclic) {
  if (cyclic && !spec.cyclic) throw ValidationError("no cyclic specification");
  ModelSpec model = spec;
  if (!cyclic) model.cyclic.reset();
  if (config.pls.scheme) model.scheme = *config.pls.scheme;
  const ValidationReport report = validate_model(model, column_set(raw));
  if (report.has("cyclic_no_intermediate")) throw ValidationError(std::string(kTwoConstructDiagnostic));
  if (!report.ok()) throw ValidationError(report.summary());

  RunResult out;
  out.spec = model;
  out.data = prepare_blocks(raw, model, config.missing);
  out.fit = fit_pls(out.data, model, config.pls);
  if (!out.fit.converged) {
    throw EstimationError("PLS did not converge in " + std::to_string(out.fit.iterations) +
                          " iterations");
  }

  CyclicOptions cyc_opts;
  cyc_opts.pls = config.pls;
  cyc_opts.include_target_paths = config.include_target_paths;
  if (cyclic) out.cyclic = estimate_cyclic(out.data, out.fit, model, cyc_opts);

  if (config.bootstrap > 0) {
    BootstrapOptions opts;
    opts.replicates = config.bootstrap;
    opts.level = config.level;
    opts.seed = config.seed;
    opts.pls = config.pls;
    opts.threads = config.threads;
    if (cyclic) opts.cyclic = cyc_opts;
    out.boot = bootstrap(out.data, model, opts);
  }
  out.reliability = assess(out.fit, out.data, model, out.boot ? &*out.boot : nullptr);
  if (cyclic) {
    out.reinforcement = reinforcement_rows(*out.cyclic, out.boot ? &*out.boot : nullptr,
                                           static_cast<long long>(out.data.n_effective),
                                           config.direction);
  }
  return out;
}

std::string fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  // avoid "-0.000"
  if (std::string(buf) == "-0.000") return "0.000";
  return buf;
}

std::string pad(const std::string& s, std::size_t width) {
  // width counts code points so the arrow glyph aligns
  std::size_t cps = 0;
  for (unsigned char ch : s) cps += (ch & 0xC0) != 0x80;
  return s + std::string(width > cps ? width - cps : 0, ' ');
}

std::string table(const std::vector<std::string>& header,
                  const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width(header.size(), 0);
  auto cp_len = [](const std::string& s) {
    std::size_t n = 0;
    for (unsigned char ch : s) n += (ch & 0xC0) != 0x80;
    return n;
  };
  for (std::size_t j = 0; j < header.size(); ++j) width[j] = cp_len(header[j]);
  for (const auto& r : rows) {
    for (std::size_t j = 0; j < r.size(); ++j) width[j] = std::max(width[j], cp_len(r[j]));
  }
  std::ostringstream out;
  auto line = [&](const std::vector<std::string>& cells) {
    std::string l;
    for (std::size_t j = 0; j < cells.size(); ++j) {
      if (j) l += "  ";
      l += pad(cells[j], width[j]);
    }
    while (!l.empty() && l.back() == ' ') l.pop_back();
    out << l << '\n';
  };
  line(header);
  std::size_t total = 0;
  for (auto w : width) total += w;
  out << std::string(total + 2 * (width.size() - 1), '-') << '\n';
  for (const auto& r : rows) line(r);
  return out.str();
}

json interval_json(const Interval& ci) { return {{"lower", ci.lower}, {"upper", ci.upper}}; }

void attach_bootstrap(json& entry, const BootstrapResult* boot, const std::string& key) {
  if (!boot) return;
  if (const auto* c = boot->find(key)) {
    entry["se"] = c->se;
    entry["ci"] = interval_json(c->ci);
    entry["significant"] = c->significant;
  }
}

json fit_json(const PlsFit& fit, const ModelSpec& spec, const BootstrapResult* boot) {
  json j;
  j["converged"] = fit.converged;
  j["iterations"] = fit.iterations;
  j["constructs"] = json::array();
  for (std::size_t k = 0; k < fit.constructs.size(); ++k) {
    json c;
    c["name"] = fit.constructs[k];
    c["mode"] = to_string(spec.blocks[k].mode);
    c["indicators"] = json::array();
    for (std::size_t p = 0; p < fit.indicators[k].size(); ++p) {
      const auto pi = static_cast<Eigen::Index>(p);
      json ind = {{"name", fit.indicators[k][p]},
                  {"weight", fit.weights[k](pi)},
                  {"loading", fit.loadings[k](pi)},
                  {"location", 0.0}};
      attach_bootstrap(ind, boot, loading_key(fit.constructs[k], fit.indicators[k][p]));
      c["indicators"].push_back(ind);
    }
    const double r2 = fit.r_squared(static_cast<Eigen::Index>(k));
    if (!std::isnan(r2)) {
      c["r_squared"] = r2;
      c["intercept"] = 0.0;
    }
    j["constructs"].push_back(c);
  }
  j["paths"] = json::array();
  for (const auto& p : spec.paths) {
    json e = {{"source", p.source}, {"target", p.target}, {"beta", fit.path(p.source, p.target)}};
    attach_bootstrap(e, boot, path_key(p.source, p.target));
    j["paths"].push_back(e);
  }
  return j;
}

json assessment_json(const ReliabilityReport& report) {
  json out = json::array();
  auto opt = [](json& j, const char* key, const std::optional<double>& v) {
    if (v) j[key] = *v;
  };
  for (const auto& c : report.constructs) {
    json j;
    j["name"] = c.name;
    j["exempt"] = c.exempt;
    opt(j, "alpha", c.alpha);
    opt(j, "composite_reliability", c.composite_reliability);
    opt(j, "rho_a", c.rho_a);
    opt(j, "ave", c.ave);
    if (c.eigen) {
      j["eig1"] = c.eigen->eig1;
      j["eig2"] = c.eigen->eig2;
    }
    j["flags"] = json::object();
    for (const auto& [key, flag] : c.flags) j["flags"][key] = to_string(flag);
    j["indicators"] = json::array();
    for (const auto& ind : c.indicators) {
      json e = {{"name", ind.name}, {"loading", ind.loading}, {"flag", to_string(ind.flag)}};
      if (ind.ci) e["ci"] = interval_json(*ind.ci);
      if (ind.significant) e["significant"] = *ind.significant;
      j["indicators"].push_back(e);
    }
    out.push_back(j);
  }
  return out;
}

std::string effect_label(const ReinforcementRow& r) { return r.target + " ⇌ " + r.source; }

}  // namespace

RunResult run_fit(const ModelSpec& spec, const RawTable& raw, const RunConfig& config) {
  return run(spec, raw, config, false);
}

RunResult run_cyclic(const ModelSpec& spec, const RawTable& raw, const RunConfig& config) {
  return run(spec, raw, config, true);
}

std::vector<ReinforcementRow> reinforcement_rows(const CyclicFit& cyclic, const BootstrapResult* boot,
                                                 long long n, Direction direction) {
  std::vector<ReinforcementRow> rows;
  for (const auto& p : cyclic.paths) {
    ReinforcementRow row;
    row.source = p.source;
    row.target = p.target;
    row.beta_ce = p.beta_ce;
    row.beta_se = p.beta_se;
    row.diagnostic = p.diagnostic;
    if (p.beta_se && boot) {
      const auto* se = boot->find(path_key(p.target, p.source));
      const auto* ce = boot->find(cyclic_key(p.source, p.target));
      if (se && ce) {
        row.sigma_se = se->se;
        row.sigma_ce = ce->se;
        if (se->se > 0.0 && ce->se > 0.0) {
          row.test = reinforcement_test(*p.beta_se, p.beta_ce, se->se, ce->se, n, direction);
        } else {
          row.diagnostic = "zero bootstrap standard error; reinforcement test skipped";
        }
      }
    } else if (p.beta_se) {
      row.diagnostic = "bootstrap disabled; reinforcement test needs standard errors";
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

json report_json(const RunResult& run, const RunConfig& config) {
  const BootstrapResult* boot = run.boot ? &*run.boot : nullptr;
  json j;
  j["tool"] = {{"name", kToolName}, {"version", kToolVersion}};
  j["seed"] = config.seed;
  j["model"] = model_to_json(run.spec);
  json data = {{"n", run.data.n_raw}, {"n_effective", run.data.n_effective}};
  data["missing_cells"] = json::object();
  for (const auto& [block, count] : run.data.missing_cells) data["missing_cells"][block] = count;
  j["data"] = data;
  j["settings"] = {{"scheme", to_string(run.spec.scheme)},
                   {"tol", config.pls.tol},
                   {"max_iter", config.pls.max_iter},
                   {"missing", config.missing == MissingPolicy::Listwise ? "listwise" : "mean"}};
  j["fit"] = fit_json(run.fit, run.spec, boot);
  j["assessment"] = assessment_json(run.reliability);
  if (boot) {
    j["bootstrap"] = {{"replicates", boot->replicates},
                      {"failed", boot->failed},
                      {"level", boot->level},
                      {"seed", boot->seed}};
  }
  if (!run.data.mca.empty()) {
    j["mca"] = json::object();
    for (const auto& [block, mca] : run.data.mca) {
      j["mca"][block] = {{"inertia_share", mca.inertia_share},
                         {"inertias", std::vector<double>(mca.inertias.data(),
                                                          mca.inertias.data() + mca.inertias.size())}};
    }
  }
  if (run.cyclic) {
    json c;
    c["direction"] = to_string(config.direction);
    c["step2_model"] = model_to_json(run.cyclic->step2_spec);
    c["step2_fit"] = fit_json(run.cyclic->step2, run.cyclic->step2_spec, nullptr);
    c["paths"] = json::array();
    for (const auto& p : run.cyclic->paths) {
      json e = {{"source", p.source}, {"target", p.target}, {"beta", p.beta_ce}};
      attach_bootstrap(e, boot, cyclic_key(p.source, p.target));
      c["paths"].push_back(e);
    }
    c["pairs"] = json::array();
    for (const auto& r : run.reinforcement) {
      json e = {{"effect", effect_label(r)}, {"source", r.source}, {"target", r.target},
                {"beta_ce", r.beta_ce}};
      if (r.beta_se) {
        e["beta_se"] = *r.beta_se;
        e["abs_diff"] = std::abs(*r.beta_se - r.beta_ce);
      }
      if (r.sigma_se) e["sigma_se"] = *r.sigma_se;
      if (r.sigma_ce) e["sigma_ce"] = *r.sigma_ce;
      if (r.test) {
        e["t"] = r.test->t;
        e["df"] = r.test->df;
        e["p"] = r.test->p;
        e["decision"] = r.test->reject ? "reinforcement" : "no reinforcement";
      }
      if (!r.diagnostic.empty()) e["diagnostic"] = r.diagnostic;
      c["pairs"].push_back(e);
    }
    j["cyclic"] = c;
  }
  return j;
}

std::string reinforcement_table(const std::vector<ReinforcementRow>& rows) {
  std::vector<std::vector<std::string>> cells;
  for (const auto& r : rows) {
    std::vector<std::string> line{effect_label(r)};
    line.push_back(r.beta_se ? fixed3(*r.beta_se) : "-");
    line.push_back(fixed3(r.beta_ce));
    line.push_back(r.beta_se ? fixed3(std::abs(*r.beta_se - r.beta_ce)) : "-");
    line.push_back(r.test ? fixed3(r.test->t) : "-");
    line.push_back(r.test ? fixed3(r.test->p) : "-");
    cells.push_back(std::move(line));
  }
  std::string out = table({"Effects", "SE", "CE", "Abs (diff.)", "t-statistic", "p-value"}, cells);
  out += "SE = sequential path, CE = cyclic path.\n";
  return out;
}

std::string report_text(const RunResult& run, const RunConfig& config) {
  const BootstrapResult* boot = run.boot ? &*run.boot : nullptr;
  std::ostringstream out;
  out << kToolName << ' ' << kToolVersion << "  seed " << config.seed << '\n';
  out << "N = " << run.data.n_raw << ", n_effective = " << run.data.n_effective << ", "
      << (run.fit.converged ? "converged" : "not converged") << " in " << run.fit.iterations
      << " iterations\n\n";

  out << "Inner model (sequential)\n";
  std::vector<std::vector<std::string>> rows;
  for (const auto& p : run.spec.paths) {
    std::vector<std::string> r{p.source + " -> " + p.target, fixed3(run.fit.path(p.source, p.target))};
    const auto* c = boot ? boot->find(path_key(p.source, p.target)) : nullptr;
    r.push_back(c ? fixed3(c->ci.lower) + " " + fixed3(c->ci.upper) : "-");
    r.push_back(c ? (c->significant ? "*" : "") : "");
    rows.push_back(std::move(r));
  }
  out << table({"Path", "beta", "CI", "Sig."}, rows) << '\n';

  rows.clear();
  for (std::size_t k = 0; k < run.fit.constructs.size(); ++k) {
    const double r2 = run.fit.r_squared(static_cast<Eigen::Index>(k));
    if (!std::isnan(r2)) rows.push_back({run.fit.constructs[k], fixed3(r2)});
  }
  if (!rows.empty()) out << table({"Construct", "R2"}, rows) << '\n';

  out << "Measurement quality\n";
  rows.clear();
  auto opt3 = [](const std::optional<double>& v) { return v ? fixed3(*v) : std::string(); };
  for (const auto& c : run.reliability.constructs) {
    rows.push_back({c.name, "", opt3(c.alpha), opt3(c.composite_reliability),
                    c.eigen ? fixed3(c.eigen->eig1) : "", c.eigen ? fixed3(c.eigen->eig2) : "",
                    opt3(c.rho_a), opt3(c.ave), "", ""});
    for (const auto& ind : c.indicators) {
      rows.push_back({"", ind.name, "", "", "", "", "", "", fixed3(ind.loading),
                      ind.ci ? fixed3(ind.ci->lower) + " " + fixed3(ind.ci->upper) : ""});
    }
  }
  out << table({"LV", "Indicator", "alpha", "CR", "eig1", "eig2", "rho_A", "AVE", "Orig.", "CI"}, rows)
      << '\n';

  if (!run.data.mca.empty()) {
    for (const auto& [block, mca] : run.data.mca) {
      out << "MCA " << block << ": first dimension inertia share " << fixed3(mca.inertia_share) << '\n';
    }
    out << '\n';
  }

  if (run.cyclic) {
    out << "Cyclic effects (step 2)\n";
    rows.clear();
    for (const auto& p : run.cyclic->paths) {
      const auto* c = boot ? boot->find(cyclic_key(p.source, p.target)) : nullptr;
      rows.push_back({p.source + " -> " + p.target, fixed3(p.beta_ce),
                      c ? fixed3(c->ci.lower) + " " + fixed3(c->ci.upper) : "-",
                      c ? (c->significant ? "*" : "") : ""});
    }
    out << table({"Path", "beta", "CI", "Sig."}, rows) << '\n';
    out << "Reinforcement tests (" << to_string(config.direction) << ")\n";
    out << reinforcement_table(run.reinforcement);
    for (const auto& r : run.reinforcement) {
      if (!r.diagnostic.empty()) out << "note: " << effect_label(r) << ": " << r.diagnostic << '\n';
    }
  }
  return out.str();
}

}  // namespace cpls
