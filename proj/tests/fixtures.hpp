#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cyclicpls/dataset.hpp"
#include "cyclicpls/simgen.hpp"

namespace fixtures {

// Three-construct internet-appropriation model with usage feeding back to
// both antecedents.
inline const char* kFeedbackModel = R"({
  "blocks": [
    {"name": "PA", "mode": "reflective", "indicators": ["PA_1", "PA_2", "PA_3", "PA_4"]},
    {"name": "DS", "mode": "reflective", "indicators": ["DS_1", "DS_2", "DS_3", "DS_4"]},
    {"name": "IU", "mode": "reflective", "indicators": ["IU_1", "IU_2", "IU_3", "IU_4"]}
  ],
  "paths": [
    {"source": "PA", "target": "DS"},
    {"source": "PA", "target": "IU"},
    {"source": "DS", "target": "IU"}
  ],
  "cyclic": {"source": "IU", "targets": ["PA", "DS"]},
  "scheme": "path"
})";

// Population matching kFeedbackModel: 4 indicators per construct, loadings
// 0.8, paths PA->DS 0.5, PA->IU 0.2, DS->IU 0.6.
inline std::string feedback_population(long n, unsigned long seed) {
  return R"({"generator": "acyclic", "n": )" + std::to_string(n) + R"(, "seed": )" +
         std::to_string(seed) + R"(,
    "constructs": [
      {"name": "PA", "mode": "reflective", "loadings": [0.8, 0.8, 0.8, 0.8]},
      {"name": "DS", "mode": "reflective", "loadings": [0.8, 0.8, 0.8, 0.8]},
      {"name": "IU", "mode": "reflective", "loadings": [0.8, 0.8, 0.8, 0.8]}
    ],
    "paths": [
      {"source": "PA", "target": "DS", "beta": 0.5},
      {"source": "PA", "target": "IU", "beta": 0.2},
      {"source": "DS", "target": "IU", "beta": 0.6}
    ]})";
}

// Chain of single-item constructs A -> B -> C.
inline std::string single_item_chain(long n, unsigned long seed, double ab, double bc) {
  return R"({"generator": "acyclic", "n": )" + std::to_string(n) + R"(, "seed": )" +
         std::to_string(seed) + R"(,
    "constructs": [
      {"name": "A", "mode": "single-item"},
      {"name": "B", "mode": "single-item"},
      {"name": "C", "mode": "single-item"}
    ],
    "paths": [
      {"source": "A", "target": "B", "beta": )" +
         std::to_string(ab) + R"(},
      {"source": "B", "target": "C", "beta": )" +
         std::to_string(bc) + R"(}
    ]})";
}

inline cpls::RawTable table(std::vector<std::string> header, const Eigen::MatrixXd& values) {
  cpls::RawTable t;
  t.header = std::move(header);
  t.values = values;
  return t;
}

// Binary block used by the correspondence-analysis checks.
inline Eigen::MatrixXd mca_fixture() {
  Eigen::MatrixXd m(6, 3);
  m << 1, 1, 1,
       1, 1, 0,
       1, 0, 0,
       0, 1, 1,
       0, 0, 1,
       0, 0, 0;
  return m;
}

}  // namespace fixtures
