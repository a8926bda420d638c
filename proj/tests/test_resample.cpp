#include <doctest.h>

#include <cmath>
#include <numeric>
#include <set>

#include "cyclicpls/errors.hpp"
#include "cyclicpls/resample.hpp"
#include "cyclicpls/simgen.hpp"
#include "fixtures.hpp"

using namespace cpls;

namespace {

struct Prepared {
  ModelSpec spec;
  PreparedData data;
};

Prepared from_population(const std::string& doc, const char* model = nullptr) {
  const PopulationSpec pop = parse_population(doc);
  Prepared p{model ? parse_model(model) : model_for(pop), {}};
  p.data = prepare_blocks(generate(pop), p.spec);
  return p;
}

const char* kSinglePredictor = R"({"n": 5000, "seed": 77,
  "constructs": [{"name": "X", "mode": "single-item"}, {"name": "Y", "mode": "single-item"}],
  "paths": [{"source": "X", "target": "Y", "beta": 0.6}]})";

}  // namespace

TEST_SUITE("resample") {
  TEST_CASE("nearest-rank interval of 1..100") {
    std::vector<double> r(100);
    std::iota(r.begin(), r.end(), 1.0);
    const Interval ci = percentile_ci(r, 0.95);
    CHECK(ci.lower == 3.0);
    CHECK(ci.upper == 98.0);
    const Interval ninety = percentile_ci(r, 0.90);
    CHECK(ninety.lower == 5.0);
    CHECK(ninety.upper == 95.0);
  }

  TEST_CASE("constant replicates give a zero-width interval and zero SE") {
    const std::vector<double> r(250, 0.4321);
    const Interval ci = percentile_ci(r, 0.95);
    CHECK(ci.lower == 0.4321);
    CHECK(ci.upper == 0.4321);
    CHECK(standard_error(r) == 0.0);
  }

  TEST_CASE("precondition violations") {
    CHECK_THROWS_AS(percentile_ci({1.0, 2.0}, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(percentile_ci({1.0, 2.0}, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(percentile_ci({}, 0.95), std::invalid_argument);
  }

  TEST_CASE("standard error is the sample standard deviation") {
    CHECK(standard_error({1.0, 2.0, 3.0, 4.0}) == doctest::Approx(std::sqrt(5.0 / 3.0)).epsilon(1e-14));
  }

  TEST_CASE("resample indices depend only on seed and replicate") {
    const auto a = resample_indices(5, 3, 1000);
    CHECK(a == resample_indices(5, 3, 1000));
    CHECK(a != resample_indices(5, 4, 1000));
    CHECK(a != resample_indices(6, 3, 1000));
    CHECK(a.size() == 1000);
    const std::set<Eigen::Index> distinct(a.begin(), a.end());
    // Expected share of distinct rows is 1 - 1/e.
    CHECK(std::abs(static_cast<double>(distinct.size()) / 1000.0 - 0.632) < 0.04);
    for (Eigen::Index i : a) CHECK((i >= 0 && i < 1000));
  }

  TEST_CASE("single-predictor bootstrap SE matches the OLS asymptotic value") {
    const Prepared p = from_population(kSinglePredictor);
    BootstrapOptions o;
    o.replicates = 500;
    o.seed = 2024;
    const BootstrapResult b = bootstrap(p.data, p.spec, o);
    CHECK(b.failed == 0);
    const BootstrapCoefficient* c = b.find(path_key("X", "Y"));
    REQUIRE(c);
    CHECK(c->replicates.size() == 500);
    const double analytic = (1.0 - 0.36) / std::sqrt(5000.0);
    CHECK(std::abs(c->se / analytic - 1.0) < 0.2);
    CHECK(c->ci.lower < c->estimate);
    CHECK(c->ci.upper > c->estimate);
    CHECK(c->significant);
  }

  TEST_CASE("same seed twice gives bit-identical results, thread count irrelevant") {
    const Prepared p = from_population(fixtures::feedback_population(300, 4), fixtures::kFeedbackModel);
    BootstrapOptions o;
    o.replicates = 100;
    o.seed = 99;
    o.cyclic = CyclicOptions{};
    o.threads = 1;
    const BootstrapResult a = bootstrap(p.data, p.spec, o);
    o.threads = 3;
    const BootstrapResult b = bootstrap(p.data, p.spec, o);
    REQUIRE(a.coefficients.size() == b.coefficients.size());
    for (std::size_t i = 0; i < a.coefficients.size(); ++i) {
      CHECK(a.coefficients[i].name == b.coefficients[i].name);
      CHECK(a.coefficients[i].replicates == b.coefficients[i].replicates);
      CHECK(a.coefficients[i].se == b.coefficients[i].se);
    }
    CHECK(a.find(cyclic_key("IU", "PA")));
    CHECK(a.find(cyclic_key("IU", "DS")));
    CHECK(a.find(loading_key("DS", "DS_2")));
    CHECK(a.find(path_key("PA", "DS")));
  }

  TEST_CASE("fewer than 100 replicates is rejected") {
    const Prepared p = from_population(kSinglePredictor);
    BootstrapOptions o;
    o.replicates = 50;
    CHECK_THROWS(bootstrap(p.data, p.spec, o));
  }

  TEST_CASE("degenerate single-item chain: identical replicates give zero SE") {
    // B is an exact copy of A, so every resample yields the path 1.
    Eigen::MatrixXd v(40, 2);
    for (Eigen::Index i = 0; i < 40; ++i) v(i, 0) = v(i, 1) = std::sin(1.0 + i);
    ModelSpec spec;
    spec.blocks = {{"A", {"a"}, Mode::SingleItem}, {"B", {"b"}, Mode::SingleItem}};
    spec.paths = {{"A", "B"}};
    const PreparedData d = prepare_blocks(fixtures::table({"a", "b"}, v), spec);
    BootstrapOptions o;
    o.replicates = 100;
    const BootstrapResult b = bootstrap(d, spec, o);
    const BootstrapCoefficient* c = b.find(path_key("A", "B"));
    REQUIRE(c);
    CHECK(c->se == 0.0);
    CHECK(c->ci.lower == c->ci.upper);
  }
}
