#include <doctest.h>

#include <string>

#include "cyclicpls/errors.hpp"
#include "cyclicpls/modelspec.hpp"
#include "fixtures.hpp"

using namespace cpls;

namespace {

bool throws_with(const std::string& doc, const std::string& needle) {
  try {
    parse_model(doc);
  } catch (const ValidationError& e) {
    return std::string(e.what()).find(needle) != std::string::npos;
  }
  return false;
}

ModelSpec two_construct_cyclic() {
  return parse_model(R"({"blocks": [
      {"name": "A", "mode": "reflective", "indicators": ["a1", "a2"]},
      {"name": "B", "mode": "reflective", "indicators": ["b1", "b2"]}],
    "paths": [{"source": "A", "target": "B"}],
    "cyclic": {"source": "B", "targets": ["A"]}})");
}

}  // namespace

TEST_SUITE("modelspec") {
  TEST_CASE("feedback document parses into three blocks, three paths and feedback to both antecedents") {
    const ModelSpec m = parse_model(fixtures::kFeedbackModel);
    REQUIRE(m.blocks.size() == 3);
    CHECK(m.blocks[0].name == "PA");
    CHECK(m.blocks[2].indicators.size() == 4);
    CHECK(m.paths.size() == 3);
    CHECK(m.paths[2] == PathSpec{"DS", "IU"});
    REQUIRE(m.cyclic);
    CHECK(m.cyclic->source == "IU");
    CHECK(m.cyclic->targets == std::vector<std::string>{"PA", "DS"});
    CHECK(m.scheme == Scheme::Path);
    CHECK(validate_model(m).ok());
  }

  TEST_CASE("single block without paths is well formed") {
    const ModelSpec m =
        parse_model(R"({"blocks": [{"name": "A", "mode": "reflective", "indicators": ["x", "y"]}]})");
    CHECK(m.blocks.size() == 1);
    CHECK(m.paths.empty());
    CHECK_FALSE(m.cyclic);
    CHECK(validate_model(m).ok());
  }

  TEST_CASE("duplicate block name is rejected") {
    CHECK(throws_with(R"({"blocks": [
        {"name": "A", "mode": "reflective", "indicators": ["x"]},
        {"name": "A", "mode": "reflective", "indicators": ["y"]}]})",
                      "duplicate construct"));
  }

  TEST_CASE("malformed documents report the problem") {
    CHECK(throws_with(R"({"blocks": [)", "syntax error at byte"));
    CHECK(throws_with(R"({"blocks": [], "extra": 1})", "unknown field 'extra'"));
    CHECK(throws_with(R"({"blocks": [{"name": "A", "mode": "Reflective", "indicators": ["x"]}]})",
                      "unknown mode keyword"));
    CHECK(throws_with(R"({"blocks": [], "scheme": "gradient"})", "unknown scheme keyword"));
    CHECK(throws_with(R"({"blocks": [{"name": "A", "mode": "reflective"}]})",
                      "missing field 'indicators'"));
  }

  TEST_CASE("omitted cyclic targets default to every antecedent") {
    const ModelSpec m = parse_model(R"({"blocks": [
        {"name": "A", "mode": "reflective", "indicators": ["a"]},
        {"name": "B", "mode": "reflective", "indicators": ["b"]},
        {"name": "C", "mode": "reflective", "indicators": ["c"]},
        {"name": "D", "mode": "reflective", "indicators": ["d"]}],
      "paths": [{"source": "A", "target": "B"}, {"source": "B", "target": "C"}],
      "cyclic": {"source": "C"}})");
    REQUIRE(m.cyclic);
    CHECK(m.cyclic->targets == std::vector<std::string>{"A", "B"});
  }

  TEST_CASE("serialization round-trips") {
    const ModelSpec m = parse_model(fixtures::kFeedbackModel);
    CHECK(parse_model(serialize_model(m)) == m);
    ModelSpec n = m;
    n.scheme = Scheme::Factorial;
    n.blocks[0].mode = Mode::McaSingleItem;
    CHECK(parse_model(serialize_model(n)) == n);
  }

  TEST_CASE("graph queries") {
    const ModelSpec m = parse_model(fixtures::kFeedbackModel);
    CHECK(m.predecessors(2) == std::vector<int>{0, 1});
    CHECK(m.successors(0) == std::vector<int>{1, 2});
    CHECK(m.antecedents(2) == std::vector<int>{0, 1});
    CHECK(m.antecedents(0).empty());
    const auto order = m.topological_order();
    REQUIRE(order);
    CHECK(*order == std::vector<int>{0, 1, 2});
  }

  TEST_CASE("two-construct feedback model carries the intermediate-construct diagnostic") {
    const ValidationReport r = validate_model(two_construct_cyclic());
    CHECK(r.has("cyclic_no_intermediate"));
    CHECK(r.summary().find("cyclic estimation requires an intermediate construct") != std::string::npos);
  }

  TEST_CASE("three constructs without an intermediate antecedent are rejected too") {
    // A -> C, B -> C: the source C has antecedents but none of them is itself
    // explained by another construct.
    const ModelSpec m = parse_model(R"({"blocks": [
        {"name": "A", "mode": "reflective", "indicators": ["a"]},
        {"name": "B", "mode": "reflective", "indicators": ["b"]},
        {"name": "C", "mode": "reflective", "indicators": ["c"]}],
      "paths": [{"source": "A", "target": "C"}, {"source": "B", "target": "C"}],
      "cyclic": {"source": "C"}})");
    CHECK(validate_model(m).has("cyclic_no_intermediate"));
  }

  TEST_CASE("sequential cycle is a violation") {
    const ModelSpec m = parse_model(R"({"blocks": [
        {"name": "PA", "mode": "reflective", "indicators": ["a"]},
        {"name": "DS", "mode": "reflective", "indicators": ["b"]}],
      "paths": [{"source": "PA", "target": "DS"}, {"source": "DS", "target": "PA"}]})");
    const ValidationReport r = validate_model(m);
    CHECK(r.has("sequential_cycle"));
    CHECK(r.summary().find("sequential graph must be acyclic") != std::string::npos);
    CHECK_FALSE(m.topological_order());
  }

  TEST_CASE("exogenous cyclic source is a violation") {
    const ModelSpec m = parse_model(R"({"blocks": [
        {"name": "A", "mode": "reflective", "indicators": ["a"]},
        {"name": "B", "mode": "reflective", "indicators": ["b"]},
        {"name": "C", "mode": "reflective", "indicators": ["c"]}],
      "paths": [{"source": "A", "target": "B"}, {"source": "B", "target": "C"}],
      "cyclic": {"source": "A", "targets": ["B"]}})");
    const ValidationReport r = validate_model(m);
    CHECK(r.has("cyclic_source_exogenous"));
    CHECK(r.summary().find("cyclic source must be endogenous") != std::string::npos);
  }

  TEST_CASE("cyclic target must be an antecedent") {
    const ModelSpec m = parse_model(R"({"blocks": [
        {"name": "A", "mode": "reflective", "indicators": ["a"]},
        {"name": "B", "mode": "reflective", "indicators": ["b"]},
        {"name": "C", "mode": "reflective", "indicators": ["c"]},
        {"name": "D", "mode": "reflective", "indicators": ["d"]}],
      "paths": [{"source": "A", "target": "B"}, {"source": "B", "target": "C"}],
      "cyclic": {"source": "C", "targets": ["D"]}})");
    CHECK(validate_model(m).has("cyclic_target_not_antecedent"));
  }

  TEST_CASE("block and path shape violations") {
    ModelSpec m;
    m.blocks = {{"A", {}, Mode::Reflective},
                {"B", {"x", "y"}, Mode::SingleItem},
                {"C", {"z", "z"}, Mode::Reflective},
                {"D", {"x"}, Mode::Reflective}};
    m.paths = {{"A", "A"}, {"B", "C"}, {"B", "C"}, {"C", "Q"}};
    const ValidationReport r = validate_model(m);
    CHECK(r.has("empty_block"));
    CHECK(r.has("single_item_arity"));
    CHECK(r.has("duplicate_indicator"));
    CHECK(r.has("shared_indicator"));
    CHECK(r.has("self_loop"));
    CHECK(r.has("duplicate_path"));
    CHECK(r.has("unknown_construct"));
  }

  TEST_CASE("missing data column is reported") {
    const ModelSpec m = parse_model(fixtures::kFeedbackModel);
    std::set<std::string> cols;
    for (const auto& b : m.blocks) cols.insert(b.indicators.begin(), b.indicators.end());
    CHECK(validate_model(m, cols).ok());
    cols.erase("DS_3");
    const ValidationReport r = validate_model(m, cols);
    CHECK(r.has("missing_column"));
    CHECK(r.violations.size() == 1);
  }
}
