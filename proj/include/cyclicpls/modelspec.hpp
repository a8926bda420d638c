#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace cpls {

enum class Mode { Reflective, Formative, SingleItem, McaSingleItem };

enum class Scheme { Centroid, Factorial, Path };

std::string_view to_string(Mode mode);
std::string_view to_string(Scheme scheme);
Mode parse_mode(std::string_view keyword);
Scheme parse_scheme(std::string_view keyword);

/// A construct and the ordered indicator columns that measure it.
struct BlockSpec {
  std::string name;
  std::vector<std::string> indicators;
  Mode mode = Mode::Reflective;

  /// Single-item and MCA blocks enter the inner model as one score column.
  bool yields_single_column() const {
    return mode == Mode::SingleItem || mode == Mode::McaSingleItem;
  }

  bool operator==(const BlockSpec&) const = default;
};

struct PathSpec {
  std::string source;
  std::string target;

  bool operator==(const PathSpec&) const = default;
};

/// Feedback edges from a step-1 dependent construct back to its antecedents.
struct CyclicSpec {
  std::string source;
  std::vector<std::string> targets;

  bool operator==(const CyclicSpec&) const = default;
};

struct ModelSpec {
  std::vector<BlockSpec> blocks;
  std::vector<PathSpec> paths;
  std::optional<CyclicSpec> cyclic;
  Scheme scheme = Scheme::Path;

  /// Index of the named block, or -1.
  int block_index(std::string_view name) const;
  const BlockSpec& block(std::string_view name) const;

  /// Indices of blocks with a path into / out of block k.
  std::vector<int> predecessors(int k) const;
  std::vector<int> successors(int k) const;

  /// All direct and indirect antecedents of block k, ordered by block index.
  std::vector<int> antecedents(int k) const;

  /// Kahn topological order of the sequential graph; nullopt when it has a
  /// cycle (or a path references an unknown block).
  std::optional<std::vector<int>> topological_order() const;

  bool operator==(const ModelSpec&) const = default;
};

/// Parses the JSON model document. Throws ValidationError on syntax errors
/// (with byte position), unknown fields, unknown mode/scheme keywords and
/// duplicate construct names. Omitted cyclic targets default to every
/// antecedent of the cyclic source.
ModelSpec parse_model(std::string_view document);
ModelSpec load_model(const std::string& path);

nlohmann::json model_to_json(const ModelSpec& spec);
std::string serialize_model(const ModelSpec& spec);

struct Violation {
  std::string code;
  std::string message;

  bool operator==(const Violation&) const = default;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  bool has(std::string_view code) const;
  std::string summary() const;

  bool operator==(const ValidationReport&) const = default;
};

// Diagnostic raised whenever a feedback model lacks an intermediate construct.
inline constexpr std::string_view kTwoConstructDiagnostic =
    "cyclic estimation requires an intermediate construct: with only two "
    "constructs the acyclic and cyclic estimates are the same correlation "
    "coefficient";

/// Structural checks only (graph shape, block declarations).
ValidationReport validate_model(const ModelSpec& spec);

/// Structural checks plus presence of every indicator among the columns.
ValidationReport validate_model(const ModelSpec& spec,
                                const std::set<std::string>& columns);

}  // namespace cpls
