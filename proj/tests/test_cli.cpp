#include <doctest.h>

#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "commands.hpp"
#include "fixtures.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Workdir {
  fs::path root;

  explicit Workdir(const std::string& tag) {
    root = fs::temp_directory_path() / ("cyclicpls_cli_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(root);
    fs::create_directories(root);
  }
  ~Workdir() { fs::remove_all(root); }

  std::string file(const std::string& name, const std::string& content) const {
    const fs::path p = root / name;
    std::ofstream(p) << content;
    return p.string();
  }
  std::string path(const std::string& name) const { return (root / name).string(); }
};

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome call(std::vector<std::string> args) {
  args.insert(args.begin(), "cyclicpls");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cpls::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// Simulates feedback-model data into the work directory; returns the CSV path.
std::string simulate(const Workdir& w, long n) {
  const std::string pop = w.file("pop.json", fixtures::feedback_population(n, 17));
  const std::string csv = w.path("data.csv");
  REQUIRE(call({"simulate", "--population", pop, "--out", csv}).code == 0);
  return csv;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("fit on simulated data reports paths and R2") {
    Workdir w("fit");
    const std::string csv = simulate(w, 400);
    const std::string model = w.file("model.json", fixtures::kFeedbackModel);
    const Outcome o = call({"fit", "--model", model, "--data", csv, "--bootstrap", "100", "--seed", "3"});
    REQUIRE(o.code == 0);
    const json j = json::parse(o.out);
    CHECK(j["fit"]["paths"].size() == 3);
    CHECK(j["fit"]["paths"][0].contains("se"));
    CHECK(j["fit"]["constructs"][2].contains("r_squared"));
    CHECK_FALSE(j.contains("cyclic"));
    CHECK(j["tool"]["name"] == "cyclicpls");
  }

  TEST_CASE("bootstrap 0 gives a fit-only report") {
    Workdir w("noboot");
    const std::string csv = simulate(w, 300);
    const std::string model = w.file("model.json", fixtures::kFeedbackModel);
    const Outcome o = call({"fit", "--model", model, "--data", csv, "--bootstrap", "0"});
    REQUIRE(o.code == 0);
    const json j = json::parse(o.out);
    CHECK_FALSE(j.contains("bootstrap"));
    for (const auto& p : j["fit"]["paths"]) {
      CHECK_FALSE(p.contains("se"));
      CHECK_FALSE(p.contains("significant"));
    }
  }

  TEST_CASE("missing column exits 2") {
    Workdir w("missing");
    const std::string csv = w.file("d.csv", "PA_1,PA_2\n1,2\n2,3\n3,5\n");
    const std::string model = w.file("model.json", fixtures::kFeedbackModel);
    const Outcome o = call({"fit", "--model", model, "--data", csv});
    CHECK(o.code == 2);
    CHECK(o.err.find("validation error") != std::string::npos);
  }

  TEST_CASE("unreadable files exit 4, bad flags exit 2") {
    Workdir w("io");
    const std::string model = w.file("model.json", fixtures::kFeedbackModel);
    CHECK(call({"fit", "--model", model, "--data", w.path("nope.csv")}).code == 4);
    CHECK(call({"fit", "--model", model, "--data", model, "--scheme", "bogus"}).code == 2);
    CHECK(call({"fit", "--model", model, "--data", model, "--bootstrap", "50"}).code == 2);
    CHECK(call({}).code == 2);
    CHECK(call({"--version"}).out == "1.0.0\n");
  }

  TEST_CASE("cyclic run: paths, pairs and the pair table") {
    Workdir w("cyclic");
    const std::string csv = simulate(w, 500);
    const std::string model = w.file("model.json", fixtures::kFeedbackModel);
    const std::string out = w.path("report.json");
    const Outcome o = call({"cyclic", "--model", model, "--data", csv, "--bootstrap", "100", "--out", out,
                            "--format", "both"});
    REQUIRE(o.code == 0);
    const json j = json::parse(slurp(out));
    CHECK(j["fit"]["paths"].size() == 3);
    CHECK(j["cyclic"]["paths"].size() == 2);
    REQUIRE(j["cyclic"]["pairs"].size() == 2);
    for (const auto& pair : j["cyclic"]["pairs"]) {
      for (const char* key : {"beta_se", "beta_ce", "abs_diff", "sigma_se", "sigma_ce", "t", "df", "p", "decision"}) {
        CHECK_MESSAGE(pair.contains(key), key);
      }
    }
    const std::string text = slurp(out + ".txt");
    CHECK(text.find("Effects") != std::string::npos);
    CHECK(text.find("Abs (diff.)") != std::string::npos);
    CHECK(text.find("PA ⇌ IU") != std::string::npos);
  }

  TEST_CASE("two-sided p is twice the smaller one-sided p") {
    Workdir w("direction");
    const std::string pop = w.file("pop.json", R"({"n": 150, "seed": 2,
      "constructs": [
        {"name": "PA", "mode": "reflective", "loadings": [0.7, 0.7, 0.7, 0.7]},
        {"name": "DS", "mode": "reflective", "loadings": [0.7, 0.7, 0.7, 0.7]},
        {"name": "IU", "mode": "reflective", "loadings": [0.7, 0.7, 0.7, 0.7]}],
      "paths": [{"source": "PA", "target": "DS", "beta": 0.3},
                {"source": "PA", "target": "IU", "beta": 0.3},
                {"source": "DS", "target": "IU", "beta": 0.3}]})");
    const std::string csv = w.path("d.csv");
    REQUIRE(call({"simulate", "--population", pop, "--out", csv}).code == 0);
    const std::string model = w.file("model.json", fixtures::kFeedbackModel);
    auto pvalues = [&](const std::string& dir) {
      const Outcome o = call({"cyclic", "--model", model, "--data", csv, "--bootstrap", "200", "--seed", "5",
                              "--direction", dir});
      REQUIRE(o.code == 0);
      const json j = json::parse(o.out);
      std::vector<double> p;
      for (const auto& pair : j["cyclic"]["pairs"]) p.push_back(pair["p"].get<double>());
      return p;
    };
    const auto up = pvalues("ce_gt_se");
    const auto down = pvalues("se_gt_ce");
    const auto two = pvalues("two_sided");
    REQUIRE(two.size() == 2);
    for (std::size_t i = 0; i < two.size(); ++i) {
      CHECK(two[i] == doctest::Approx(2.0 * std::min(up[i], down[i])).epsilon(1e-12));
      CHECK(up[i] + down[i] == doctest::Approx(1.0).epsilon(1e-12));
    }
  }

  TEST_CASE("cyclic without a cyclic section exits 2") {
    Workdir w("nocyc");
    const std::string csv = simulate(w, 200);
    json m = json::parse(fixtures::kFeedbackModel);
    m.erase("cyclic");
    const std::string model = w.file("model.json", m.dump());
    const Outcome o = call({"cyclic", "--model", model, "--data", csv, "--bootstrap", "0"});
    CHECK(o.code == 2);
    CHECK(o.err.find("no cyclic specification") != std::string::npos);
  }

  TEST_CASE("two-construct cyclic model exits 2 with the diagnostic") {
    Workdir w("two");
    const std::string csv = w.file("d.csv", "a,b\n1,2\n2,1\n3,4\n4,3\n5,6\n6,5\n7,8\n8,7\n9,10\n10,9\n11,12\n");
    const std::string model = w.file("model.json", R"({"blocks": [
        {"name": "A", "mode": "single-item", "indicators": ["a"]},
        {"name": "B", "mode": "single-item", "indicators": ["b"]}],
      "paths": [{"source": "A", "target": "B"}], "cyclic": {"source": "B"}})");
    const Outcome o = call({"cyclic", "--model", model, "--data", csv, "--bootstrap", "0"});
    CHECK(o.code == 2);
    CHECK(o.err.find("intermediate construct") != std::string::npos);
  }

  TEST_CASE("simulate: shape, sidecar, determinism, divergent loop") {
    Workdir w("sim");
    const std::string pop = w.file("pop.json", fixtures::feedback_population(120, 9));
    REQUIRE(call({"simulate", "--population", pop, "--out", w.path("a.csv")}).code == 0);
    REQUIRE(call({"simulate", "--population", pop, "--out", w.path("b.csv")}).code == 0);
    CHECK(slurp(w.path("a.csv")) == slurp(w.path("b.csv")));
    const std::string header = slurp(w.path("a.csv")).substr(0, slurp(w.path("a.csv")).find('\n'));
    CHECK(std::count(header.begin(), header.end(), ',') == 11);
    CHECK(fs::exists(w.path("a.truth.json")));
    REQUIRE(call({"simulate", "--population", pop, "--out", w.path("c.csv"), "--seed", "10"}).code == 0);
    CHECK(slurp(w.path("a.csv")) != slurp(w.path("c.csv")));

    const std::string loop = w.file("loop.json", R"({"generator": "cyclic", "n": 50,
      "constructs": [{"name": "A", "mode": "single-item"}, {"name": "B", "mode": "single-item"}],
      "paths": [{"source": "A", "target": "B", "beta": 1.0}, {"source": "B", "target": "A", "beta": 1.0}]})");
    CHECK(call({"simulate", "--population", loop, "--out", w.path("l.csv")}).code == 2);
  }

  TEST_CASE("validate subcommand") {
    Workdir w("validate");
    const std::string good = w.file("good.json", fixtures::kFeedbackModel);
    const Outcome ok = call({"validate", "--model", good});
    CHECK(ok.code == 0);
    CHECK(ok.out == "model is estimable\n");
    const std::string bad = w.file("bad.json", R"({"blocks": [
        {"name": "A", "mode": "reflective", "indicators": ["a"]},
        {"name": "B", "mode": "reflective", "indicators": ["b"]}],
      "paths": [{"source": "A", "target": "B"}, {"source": "B", "target": "A"}]})");
    const Outcome no = call({"validate", "--model", bad});
    CHECK(no.code == 2);
    CHECK(no.out.find("sequential_cycle") != std::string::npos);
  }
}
