#pragma once

#include <stdexcept>
#include <string>

namespace cpls {

// Error classes map one-to-one onto CLI exit codes (validation=2,
// estimation=3, I/O=4).

/// Input that is well-formed but unusable: bad model document, unknown
/// columns, malformed CSV content, invalid population parameters.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical failure during estimation (singular systems, degenerate blocks,
/// non-convergence where convergence is required).
class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unreadable or unwritable files.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cpls
