#include "cyclicpls/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "cyclicpls/errors.hpp"
#include "cyclicpls/moments.hpp"

namespace cpls {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      return out;
    }
    out.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
}

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

}  // namespace

int RawTable::column_index(const std::string& name) const {
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] == name) return static_cast<int>(j);
  }
  return -1;
}

bool RawTable::is_missing(double cell) { return std::isnan(cell); }

RawTable parse_table(std::istream& in) {
  RawTable table;
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("empty CSV: header row is mandatory");
  for (auto name : split(line)) {
    if (name.empty()) throw ValidationError("empty column name in header");
    table.header.emplace_back(name);
  }
  std::set<std::string> unique(table.header.begin(), table.header.end());
  if (unique.size() != table.header.size()) {
    throw ValidationError("duplicate column name in header");
  }

  const std::size_t p = table.header.size();
  std::vector<double> cells;
  std::size_t line_no = 1;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split(line);
    if (fields.size() != p) {
      throw ValidationError("ragged row at line " + std::to_string(line_no));
    }
    for (std::size_t j = 0; j < p; ++j) {
      const std::string_view f = fields[j];
      if (f.empty() || f == "NA") {
        cells.push_back(kMissing);
        continue;
      }
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc() || ptr != f.data() + f.size() || !std::isfinite(v)) {
        throw ValidationError("non-numeric cell '" + std::string(f) + "' at line " +
                              std::to_string(line_no) + ", column '" + table.header[j] + "'");
      }
      cells.push_back(v);
    }
    ++n;
  }
  if (n < 2) throw ValidationError("table needs at least 2 data rows");
  table.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      table.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = cells[i * p + j];
    }
  }
  return table;
}

RawTable load_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read data file '" + path + "'");
  return parse_table(in);
}

void write_table(std::ostream& out, const RawTable& table) {
  for (std::size_t j = 0; j < table.header.size(); ++j) {
    if (j) out << ',';
    out << table.header[j];
  }
  out << '\n';
  char buf[64];
  for (Eigen::Index i = 0; i < table.rows(); ++i) {
    for (Eigen::Index j = 0; j < table.cols(); ++j) {
      if (j) out << ',';
      const double v = table.values(i, j);
      if (RawTable::is_missing(v)) {
        out << "NA";
      } else {
        const auto res = std::to_chars(buf, buf + sizeof(buf), v);
        out.write(buf, res.ptr - buf);
      }
    }
    out << '\n';
  }
}

MissingPolicy parse_missing_policy(std::string_view keyword) {
  if (keyword == "listwise") return MissingPolicy::Listwise;
  if (keyword == "mean" || keyword == "mean-impute") return MissingPolicy::MeanImpute;
  throw ValidationError("unknown missing-data policy '" + std::string(keyword) + "'");
}

// ---------------------------------------------------------------------------

Eigen::VectorXd standardize(const Eigen::VectorXd& column, const std::string& label) {
  // Exact sums keep the result independent of row order.
  const double n = static_cast<double>(column.size());
  auto exact_mean = [n](const Eigen::VectorXd& v) {
    ExactSum s;
    for (double x : v) s.add(x);
    return s.value() / n;
  };
  auto exact_msq = [n](const Eigen::VectorXd& v) {
    ExactSum s;
    for (double x : v) s.add(x * x);
    return s.value() / n;
  };
  const double mean = exact_mean(column);
  Eigen::VectorXd centered = column.array() - mean;
  const double var = exact_msq(centered);
  if (!(var > 1e-12 * std::max(1.0, mean * mean))) {
    throw ValidationError("zero variance in " + label);
  }
  centered /= std::sqrt(var);
  // second pass removes the residual rounding in mean and scale
  centered.array() -= exact_mean(centered);
  centered /= std::sqrt(exact_msq(centered));
  return centered;
}

const ColumnRange& PreparedData::range(const std::string& name) const {
  const auto it = block_index.find(name);
  if (it == block_index.end()) throw ValidationError("no block '" + name + "' in prepared data");
  return it->second;
}

Eigen::MatrixXd PreparedData::block(const std::string& name) const {
  const ColumnRange& r = range(name);
  return matrix.middleCols(r.start, r.count);
}

PreparedData PreparedData::with_block(const std::string& name,
                                      const Eigen::VectorXd& column) const {
  if (column.size() != matrix.rows()) {
    throw ValidationError("appended column has wrong length");
  }
  if (block_index.contains(name)) throw ValidationError("block '" + name + "' already present");
  PreparedData out = *this;
  out.matrix.conservativeResize(Eigen::NoChange, matrix.cols() + 1);
  out.matrix.col(matrix.cols()) = standardize(column, "block '" + name + "'");
  out.columns.push_back(name);
  out.block_index[name] = {matrix.cols(), 1};
  return out;
}

PreparedData PreparedData::resampled(const std::vector<Eigen::Index>& rows) const {
  PreparedData out = *this;
  out.matrix.resize(static_cast<Eigen::Index>(rows.size()), matrix.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.matrix.row(static_cast<Eigen::Index>(i)) = matrix.row(rows[i]);
  }
  for (Eigen::Index j = 0; j < out.matrix.cols(); ++j) {
    out.matrix.col(j) = standardize(out.matrix.col(j), "column '" + columns[static_cast<std::size_t>(j)] + "'");
  }
  out.n_effective = out.matrix.rows();
  return out;
}

PreparedData prepare_blocks(const RawTable& raw, const ModelSpec& spec, MissingPolicy policy) {
  // Resolve every indicator to a raw column.
  std::vector<int> used;
  for (const auto& b : spec.blocks) {
    for (const auto& ind : b.indicators) {
      const int j = raw.column_index(ind);
      if (j < 0) throw ValidationError("indicator '" + ind + "' is not a data column");
      used.push_back(j);
    }
  }

  PreparedData out;
  out.n_raw = raw.rows();
  for (const auto& b : spec.blocks) {
    Eigen::Index count = 0;
    for (const auto& ind : b.indicators) {
      const int j = raw.column_index(ind);
      for (Eigen::Index i = 0; i < raw.rows(); ++i) {
        if (RawTable::is_missing(raw.values(i, j))) ++count;
      }
    }
    out.missing_cells[b.name] = count;
  }

  // Apply the missing-data policy to the columns the model uses.
  Eigen::MatrixXd work(raw.rows(), static_cast<Eigen::Index>(used.size()));
  for (std::size_t c = 0; c < used.size(); ++c) {
    work.col(static_cast<Eigen::Index>(c)) = raw.values.col(used[c]);
  }
  if (policy == MissingPolicy::Listwise) {
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < work.rows(); ++i) {
      if (!work.row(i).array().isNaN().any()) keep.push_back(i);
    }
    Eigen::MatrixXd kept(static_cast<Eigen::Index>(keep.size()), work.cols());
    for (std::size_t i = 0; i < keep.size(); ++i) {
      kept.row(static_cast<Eigen::Index>(i)) = work.row(keep[i]);
    }
    work = std::move(kept);
  } else {
    for (Eigen::Index c = 0; c < work.cols(); ++c) {
      ExactSum sum;
      Eigen::Index observed = 0;
      for (Eigen::Index i = 0; i < work.rows(); ++i) {
        if (!RawTable::is_missing(work(i, c))) {
          sum.add(work(i, c));
          ++observed;
        }
      }
      if (observed == 0) throw ValidationError("column has no observed values");
      const double mean = sum.value() / static_cast<double>(observed);
      for (Eigen::Index i = 0; i < work.rows(); ++i) {
        if (RawTable::is_missing(work(i, c))) work(i, c) = mean;
      }
    }
  }
  out.n_effective = work.rows();
  if (out.n_effective < 10) {
    throw ValidationError("only " + std::to_string(out.n_effective) +
                          " usable rows; at least 10 are required");
  }

  std::vector<Eigen::VectorXd> cols;
  Eigen::Index src = 0;
  for (const auto& b : spec.blocks) {
    const auto p = static_cast<Eigen::Index>(b.indicators.size());
    if (b.mode == Mode::McaSingleItem) {
      McaResult mca = mca_first_dimension(work.middleCols(src, p));
      out.block_index[b.name] = {static_cast<Eigen::Index>(cols.size()), 1};
      cols.push_back(standardize(mca.scores, "MCA scores of block '" + b.name + "'"));
      out.columns.push_back(b.name);
      out.mca[b.name] = std::move(mca);
    } else {
      out.block_index[b.name] = {static_cast<Eigen::Index>(cols.size()), p};
      for (Eigen::Index j = 0; j < p; ++j) {
        const std::string& name = b.indicators[static_cast<std::size_t>(j)];
        cols.push_back(standardize(work.col(src + j), "column '" + name + "'"));
        out.columns.push_back(name);
      }
    }
    src += p;
  }
  out.matrix.resize(out.n_effective, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) out.matrix.col(static_cast<Eigen::Index>(j)) = cols[j];
  return out;
}

// ---------------------------------------------------------------------------

McaResult mca_first_dimension(const Eigen::MatrixXd& block) {
  const Eigen::Index n = block.rows();
  const Eigen::Index q = block.cols();
  if (n < 2 || q < 1) throw ValidationError("MCA needs at least 2 rows and 1 variable");
  for (Eigen::Index j = 0; j < q; ++j) {
    Eigen::Index ones = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double v = block(i, j);
      if (v != 0.0 && v != 1.0) throw ValidationError("MCA block entries must be 0 or 1");
      if (v == 1.0) ++ones;
    }
    if (ones == 0 || ones == n) {
      throw ValidationError("MCA variable " + std::to_string(j + 1) +
                            " has a single observed category");
    }
  }

  // Disjunctive coding: for each variable a "no" and a "yes" column. Every
  // row sums to q, so row masses are 1/n.
  const double total = static_cast<double>(n * q);
  Eigen::MatrixXd z(n, 2 * q);
  for (Eigen::Index j = 0; j < q; ++j) {
    z.col(2 * j) = 1.0 - block.col(j).array();
    z.col(2 * j + 1) = block.col(j);
  }
  const Eigen::RowVectorXd col_mass = z.colwise().sum() / total;
  const double row_mass = 1.0 / static_cast<double>(n);

  // Standardized residuals S = Dr^-1/2 (P - r c') Dc^-1/2.
  Eigen::MatrixXd s = z / total;
  s.rowwise() -= row_mass * col_mass;
  s /= std::sqrt(row_mass);
  s.array().rowwise() /= col_mass.array().sqrt();

  // Eigen-decompose the small column-side Gram matrix and map back to rows.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s.transpose() * s);
  const Eigen::VectorXd values = eig.eigenvalues().reverse().cwiseMax(0.0);
  const double sigma1 = std::sqrt(values(0));
  if (!(sigma1 > 0.0)) throw ValidationError("MCA block has zero inertia");

  // Unit left singular vectors u = S v / sigma for the leading inertia. When
  // that inertia is repeated the leading dimension is only defined up to a
  // rotation; take the direction of the subspace closest to the centered row
  // sums, which the sign rule below then orients.
  Eigen::Index multiplicity = 1;
  while (multiplicity < values.size() && values(multiplicity) >= values(0) * (1.0 - 1e-8)) {
    ++multiplicity;
  }
  Eigen::MatrixXd left(n, multiplicity);
  for (Eigen::Index m = 0; m < multiplicity; ++m) {
    left.col(m) = s * eig.eigenvectors().col(2 * q - 1 - m) / sigma1;
  }
  const Eigen::VectorXd row_sums = block.rowwise().sum();
  Eigen::VectorXd u = left.col(0);
  if (multiplicity > 1) {
    const Eigen::VectorXd target = row_sums.array() - row_sums.mean();
    const Eigen::VectorXd coef = left.transpose() * target;
    if (coef.norm() > 0.0) u = left * coef / coef.norm();
  }

  McaResult out;
  out.scores = u / std::sqrt(row_mass);
  if (pearson(out.scores, row_sums) < 0.0) out.scores = -out.scores;

  const double inertia_total = values.sum();
  Eigen::Index kept = 0;
  while (kept < values.size() && values(kept) > 1e-13 * inertia_total) ++kept;
  out.inertias = values.head(kept);
  out.inertia_share = values(0) / out.inertias.sum();
  return out;
}

}  // namespace cpls
