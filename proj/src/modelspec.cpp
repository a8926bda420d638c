#include "cyclicpls/modelspec.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "cyclicpls/errors.hpp"

namespace cpls {

using nlohmann::json;

std::string_view to_string(Mode mode) {
  switch (mode) {
    case Mode::Reflective: return "reflective";
    case Mode::Formative: return "formative";
    case Mode::SingleItem: return "single-item";
    case Mode::McaSingleItem: return "mca-single-item";
  }
  return "reflective";
}

std::string_view to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::Centroid: return "centroid";
    case Scheme::Factorial: return "factorial";
    case Scheme::Path: return "path";
  }
  return "path";
}

Mode parse_mode(std::string_view keyword) {
  for (Mode m : {Mode::Reflective, Mode::Formative, Mode::SingleItem,
                 Mode::McaSingleItem}) {
    if (keyword == to_string(m)) return m;
  }
  throw ValidationError("unknown mode keyword '" + std::string(keyword) + "'");
}

Scheme parse_scheme(std::string_view keyword) {
  for (Scheme s : {Scheme::Centroid, Scheme::Factorial, Scheme::Path}) {
    if (keyword == to_string(s)) return s;
  }
  throw ValidationError("unknown scheme keyword '" + std::string(keyword) +
                        "'");
}

// ---------------------------------------------------------------------------
// graph queries

int ModelSpec::block_index(std::string_view name) const {
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    if (blocks[k].name == name) return static_cast<int>(k);
  }
  return -1;
}

const BlockSpec& ModelSpec::block(std::string_view name) const {
  const int k = block_index(name);
  if (k < 0) throw ValidationError("unknown construct '" + std::string(name) + "'");
  return blocks[static_cast<std::size_t>(k)];
}

std::vector<int> ModelSpec::predecessors(int k) const {
  std::vector<int> out;
  for (const auto& p : paths) {
    if (block_index(p.target) == k) {
      const int s = block_index(p.source);
      if (s >= 0 && std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<int> ModelSpec::successors(int k) const {
  std::vector<int> out;
  for (const auto& p : paths) {
    if (block_index(p.source) == k) {
      const int t = block_index(p.target);
      if (t >= 0 && std::find(out.begin(), out.end(), t) == out.end()) out.push_back(t);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<int> ModelSpec::antecedents(int k) const {
  std::vector<bool> seen(blocks.size(), false);
  std::vector<int> stack = predecessors(k);
  while (!stack.empty()) {
    const int j = stack.back();
    stack.pop_back();
    if (seen[static_cast<std::size_t>(j)]) continue;
    seen[static_cast<std::size_t>(j)] = true;
    for (int i : predecessors(j)) stack.push_back(i);
  }
  std::vector<int> out;
  for (std::size_t j = 0; j < seen.size(); ++j) {
    if (seen[j] && static_cast<int>(j) != k) out.push_back(static_cast<int>(j));
  }
  return out;
}

std::optional<std::vector<int>> ModelSpec::topological_order() const {
  const std::size_t n = blocks.size();
  std::vector<int> indegree(n, 0);
  std::vector<std::vector<int>> out_edges(n);
  for (const auto& p : paths) {
    const int s = block_index(p.source);
    const int t = block_index(p.target);
    if (s < 0 || t < 0) return std::nullopt;
    out_edges[static_cast<std::size_t>(s)].push_back(t);
    ++indegree[static_cast<std::size_t>(t)];
  }
  std::vector<int> order;
  std::vector<int> ready;
  for (std::size_t k = 0; k < n; ++k) {
    if (indegree[k] == 0) ready.push_back(static_cast<int>(k));
  }
  while (!ready.empty()) {
    // lowest index first keeps the order stable
    auto it = std::min_element(ready.begin(), ready.end());
    const int k = *it;
    ready.erase(it);
    order.push_back(k);
    for (int t : out_edges[static_cast<std::size_t>(k)]) {
      if (--indegree[static_cast<std::size_t>(t)] == 0) ready.push_back(t);
    }
  }
  if (order.size() != n) return std::nullopt;
  return order;
}

// ---------------------------------------------------------------------------
// parsing

namespace {

void require_keys(const json& obj, std::initializer_list<std::string_view> allowed,
                  const std::string& where) {
  if (!obj.is_object()) throw ValidationError(where + ": expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ValidationError(where + ": unknown field '" + key + "'");
    }
  }
}

std::string get_string(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw ValidationError(where + ": missing field '" + key + "'");
  const json& v = obj.at(key);
  if (!v.is_string()) throw ValidationError(where + ": field '" + key + "' must be a string");
  return v.get<std::string>();
}

std::vector<std::string> get_string_list(const json& v, const std::string& where) {
  if (!v.is_array()) throw ValidationError(where + ": expected an array of strings");
  std::vector<std::string> out;
  for (const auto& item : v) {
    if (!item.is_string()) throw ValidationError(where + ": expected an array of strings");
    out.push_back(item.get<std::string>());
  }
  return out;
}

}  // namespace

ModelSpec parse_model(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document.begin(), document.end());
  } catch (const json::parse_error& e) {
    throw ValidationError("model syntax error at byte " + std::to_string(e.byte) +
                          ": " + e.what());
  }
  require_keys(doc, {"blocks", "paths", "cyclic", "scheme"}, "model");

  ModelSpec spec;
  if (!doc.contains("blocks") || !doc["blocks"].is_array()) {
    throw ValidationError("model: 'blocks' must be an array");
  }
  for (std::size_t i = 0; i < doc["blocks"].size(); ++i) {
    const json& b = doc["blocks"][i];
    const std::string where = "blocks[" + std::to_string(i) + "]";
    require_keys(b, {"name", "mode", "indicators"}, where);
    BlockSpec block;
    block.name = get_string(b, "name", where);
    block.mode = b.contains("mode") ? parse_mode(get_string(b, "mode", where))
                                    : Mode::Reflective;
    if (!b.contains("indicators")) {
      throw ValidationError(where + ": missing field 'indicators'");
    }
    block.indicators = get_string_list(b["indicators"], where + ".indicators");
    if (spec.block_index(block.name) >= 0) {
      throw ValidationError("duplicate construct '" + block.name + "'");
    }
    spec.blocks.push_back(std::move(block));
  }

  if (doc.contains("paths")) {
    if (!doc["paths"].is_array()) throw ValidationError("model: 'paths' must be an array");
    for (std::size_t i = 0; i < doc["paths"].size(); ++i) {
      const json& p = doc["paths"][i];
      const std::string where = "paths[" + std::to_string(i) + "]";
      require_keys(p, {"source", "target"}, where);
      spec.paths.push_back({get_string(p, "source", where), get_string(p, "target", where)});
    }
  }

  if (doc.contains("cyclic") && !doc["cyclic"].is_null()) {
    const json& c = doc["cyclic"];
    require_keys(c, {"source", "targets"}, "cyclic");
    CyclicSpec cyc;
    cyc.source = get_string(c, "source", "cyclic");
    if (c.contains("targets")) {
      cyc.targets = get_string_list(c["targets"], "cyclic.targets");
    } else {
      const int s = spec.block_index(cyc.source);
      if (s >= 0) {
        for (int j : spec.antecedents(s)) {
          cyc.targets.push_back(spec.blocks[static_cast<std::size_t>(j)].name);
        }
      }
    }
    spec.cyclic = std::move(cyc);
  }

  if (doc.contains("scheme")) {
    if (!doc["scheme"].is_string()) throw ValidationError("model: 'scheme' must be a string");
    spec.scheme = parse_scheme(doc["scheme"].get<std::string>());
  }
  return spec;
}

ModelSpec load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read model file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_model(buf.str());
}

json model_to_json(const ModelSpec& spec) {
  json doc;
  doc["blocks"] = json::array();
  for (const auto& b : spec.blocks) {
    doc["blocks"].push_back(
        {{"name", b.name}, {"mode", to_string(b.mode)}, {"indicators", b.indicators}});
  }
  doc["paths"] = json::array();
  for (const auto& p : spec.paths) {
    doc["paths"].push_back({{"source", p.source}, {"target", p.target}});
  }
  if (spec.cyclic) {
    doc["cyclic"] = {{"source", spec.cyclic->source}, {"targets", spec.cyclic->targets}};
  }
  doc["scheme"] = to_string(spec.scheme);
  return doc;
}

std::string serialize_model(const ModelSpec& spec) { return model_to_json(spec).dump(2); }

// ---------------------------------------------------------------------------
// validation

bool ValidationReport::has(std::string_view code) const {
  return std::any_of(violations.begin(), violations.end(),
                     [&](const Violation& v) { return v.code == code; });
}

std::string ValidationReport::summary() const {
  std::string out;
  for (const auto& v : violations) {
    if (!out.empty()) out += "; ";
    out += v.message;
  }
  return out;
}

ValidationReport validate_model(const ModelSpec& spec) {
  ValidationReport report;
  auto add = [&](std::string code, std::string message) {
    report.violations.push_back({std::move(code), std::move(message)});
  };

  std::map<std::string, std::string> owner;
  for (const auto& b : spec.blocks) {
    if (b.indicators.empty()) {
      add("empty_block", "block '" + b.name + "' has no indicators");
    }
    if (b.mode == Mode::SingleItem && b.indicators.size() != 1) {
      add("single_item_arity",
          "single-item block '" + b.name + "' must have exactly one indicator");
    }
    std::set<std::string> seen;
    for (const auto& ind : b.indicators) {
      if (!seen.insert(ind).second) {
        add("duplicate_indicator",
            "block '" + b.name + "' lists indicator '" + ind + "' twice");
      }
      auto [it, inserted] = owner.emplace(ind, b.name);
      if (!inserted && it->second != b.name) {
        add("shared_indicator", "indicator '" + ind + "' belongs to both '" +
                                    it->second + "' and '" + b.name + "'");
      }
    }
  }

  bool paths_resolved = true;
  std::set<std::pair<std::string, std::string>> edges;
  for (const auto& p : spec.paths) {
    for (const auto* name : {&p.source, &p.target}) {
      if (spec.block_index(*name) < 0) {
        add("unknown_construct", "path references unknown construct '" + *name + "'");
        paths_resolved = false;
      }
    }
    if (p.source == p.target) {
      add("self_loop", "path " + p.source + "->" + p.target + " has source equal to target");
    }
    if (!edges.emplace(p.source, p.target).second) {
      add("duplicate_path", "path " + p.source + "->" + p.target + " declared twice");
    }
  }
  if (paths_resolved && !spec.topological_order()) {
    add("sequential_cycle", "sequential graph must be acyclic");
  }

  if (spec.cyclic) {
    const auto& cyc = *spec.cyclic;
    const int s = spec.block_index(cyc.source);
    if (s < 0) {
      add("unknown_construct", "cyclic source '" + cyc.source + "' is not a declared construct");
    } else if (paths_resolved) {
      if (spec.predecessors(s).empty()) {
        add("cyclic_source_exogenous", "cyclic source must be endogenous");
      }
      const auto ante = spec.antecedents(s);
      if (cyc.targets.empty()) {
        add("cyclic_no_targets", "cyclic specification has no targets");
      }
      for (const auto& t : cyc.targets) {
        const int k = spec.block_index(t);
        if (k < 0) {
          add("unknown_construct", "cyclic target '" + t + "' is not a declared construct");
        } else if (std::find(ante.begin(), ante.end(), k) == ante.end()) {
          add("cyclic_target_not_antecedent",
              "cyclic target '" + t + "' is not an antecedent of '" + cyc.source + "'");
        }
      }
      // An intermediate construct is an antecedent of the source that itself
      // has an antecedent, i.e. some path into the source spans two edges.
      const bool has_intermediate =
          spec.blocks.size() >= 3 &&
          std::any_of(ante.begin(), ante.end(),
                      [&](int j) { return !spec.predecessors(j).empty(); });
      if (!has_intermediate) add("cyclic_no_intermediate", std::string(kTwoConstructDiagnostic));
    }
  }
  return report;
}

ValidationReport validate_model(const ModelSpec& spec, const std::set<std::string>& columns) {
  ValidationReport report = validate_model(spec);
  for (const auto& b : spec.blocks) {
    for (const auto& ind : b.indicators) {
      if (!columns.contains(ind)) {
        report.violations.push_back(
            {"missing_column", "indicator '" + ind + "' of block '" + b.name +
                                   "' is not a data column"});
      }
    }
  }
  return report;
}

}  // namespace cpls
