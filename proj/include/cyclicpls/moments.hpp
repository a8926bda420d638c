#pragma once

#include <Eigen/Dense>

namespace cpls {

/// Exact accumulator for sums of finite doubles. Every addend is split into
/// its integer mantissa and binary exponent and added into a per-exponent
/// 128-bit bucket, so the accumulated state does not depend on the order of
/// the addends. value() folds the buckets in a fixed order.
class ExactSum {
 public:
  ExactSum();
  void add(double x);
  double value() const;

 private:
  // bucket i holds multiples of 2^(i - kOffset), i = biased IEEE exponent
  static constexpr int kOffset = 1075;
  static constexpr int kBuckets = 2048;
  __int128 buckets_[kBuckets];
  int lo_;
  int hi_;
};

/// X'X / N with every entry accumulated by ExactSum; permuting the rows of X
/// leaves the result bit-identical.
Eigen::MatrixXd cross_moments(const Eigen::MatrixXd& x);

/// X'Y / N, same summation guarantee.
Eigen::MatrixXd cross_moments(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y);

/// Pearson correlation with divisor N (both vectors centered internally).
double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

}  // namespace cpls
