#pragma once

#include <istream>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cyclicpls/modelspec.hpp"

namespace cpls {

/// Parsed CSV: one column per header entry, missing cells stored as NaN.
struct RawTable {
  std::vector<std::string> header;
  Eigen::MatrixXd values;

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }
  int column_index(const std::string& name) const;
  static bool is_missing(double cell);
};

RawTable parse_table(std::istream& in);
RawTable load_table(const std::string& path);
void write_table(std::ostream& out, const RawTable& table);

enum class MissingPolicy { Listwise, MeanImpute };

MissingPolicy parse_missing_policy(std::string_view keyword);

struct ColumnRange {
  Eigen::Index start = 0;
  Eigen::Index count = 0;
};

struct McaResult {
  Eigen::VectorXd scores;    // standard row coordinates, first dimension
  Eigen::VectorXd inertias;  // principal inertias, descending
  double inertia_share = 0.0;
};

/// Standardized indicator matrix partitioned into blocks. MCA blocks occupy a
/// single column named after the block.
struct PreparedData {
  Eigen::MatrixXd matrix;
  std::vector<std::string> columns;
  std::map<std::string, ColumnRange> block_index;
  Eigen::Index n_raw = 0;
  Eigen::Index n_effective = 0;
  std::map<std::string, Eigen::Index> missing_cells;  // per block, before policy
  std::map<std::string, McaResult> mca;

  Eigen::MatrixXd block(const std::string& name) const;
  const ColumnRange& range(const std::string& name) const;

  /// Copy with one more single-column block appended; the column is
  /// standardized first.
  PreparedData with_block(const std::string& name, const Eigen::VectorXd& column) const;

  /// Copy holding the given rows (repeats allowed), re-standardized.
  PreparedData resampled(const std::vector<Eigen::Index>& rows) const;
};

/// z-scores with divisor N. Throws ValidationError on zero variance.
Eigen::VectorXd standardize(const Eigen::VectorXd& column, const std::string& label = "column");

PreparedData prepare_blocks(const RawTable& raw, const ModelSpec& spec,
                            MissingPolicy policy = MissingPolicy::Listwise);

/// Correspondence analysis of the disjunctive coding of a binary block; the
/// first-dimension row coordinates are oriented to correlate positively with
/// the row sums.
McaResult mca_first_dimension(const Eigen::MatrixXd& block);

}  // namespace cpls
