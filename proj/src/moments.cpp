#include "cyclicpls/moments.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cmath>
#include <cstring>

namespace cpls {

ExactSum::ExactSum() : lo_(kBuckets), hi_(-1) {
  std::memset(buckets_, 0, sizeof(buckets_));
}

void ExactSum::add(double x) {
  const auto bits = std::bit_cast<std::uint64_t>(x);
  const int biased = static_cast<int>((bits >> 52) & 0x7FF);
  auto mantissa = static_cast<long long>(bits & 0xFFFFFFFFFFFFFULL);
  if (biased == 0 && mantissa == 0) return;
  // value = mantissa * 2^(idx - kOffset); subnormals share the lowest exponent
  int idx = biased;
  if (biased == 0) {
    idx = 1;
  } else {
    mantissa |= 1LL << 52;
  }
  if (bits >> 63) mantissa = -mantissa;
  buckets_[idx] += mantissa;
  lo_ = std::min(lo_, idx);
  hi_ = std::max(hi_, idx);
}

double ExactSum::value() const {
  // Carry-normalize into a base-2^32 digit expansion so the final rounding
  // sees the exact value's leading digits.
  if (hi_ < lo_) return 0.0;
  __int128 carry = 0;
  // digits_[i] represents bits [lo_ + 32 i, lo_ + 32 (i + 1)).
  constexpr int kMaxDigits = kBuckets / 32 + 8;
  long long digits[kMaxDigits] = {};
  int ndigits = 0;
  int idx = lo_;
  while (idx <= hi_ || (carry != 0 && carry != -1)) {
    __int128 acc = carry;
    for (int b = 0; b < 32; ++b) {
      const int j = idx + b;
      if (j <= hi_) acc += buckets_[j] * (static_cast<__int128>(1) << b);
    }
    // floor division by 2^32 keeps every digit in [0, 2^32)
    __int128 low = acc & 0xFFFFFFFF;
    carry = (acc - low) / (static_cast<__int128>(1) << 32);
    digits[ndigits++] = static_cast<long long>(low);
    idx += 32;
  }
  // carry is now 0 or -1 (sign of the total, in two's complement digits).
  const bool negative = carry < 0;
  if (negative) {
    // negate the digit expansion: ~d + 1
    long long c = 1;
    for (int i = 0; i < ndigits; ++i) {
      long long d = (0xFFFFFFFFLL - digits[i]) + c;
      c = d >> 32;
      digits[i] = d & 0xFFFFFFFFLL;
    }
    if (c != 0) digits[ndigits++] = c;
  }
  double total = 0.0;
  // top digits dominate; summing from the top keeps the result within an ulp
  for (int i = ndigits - 1; i >= 0; --i) {
    total += std::ldexp(static_cast<double>(digits[i]), lo_ - kOffset + 32 * i);
  }
  return negative ? -total : total;
}

Eigen::MatrixXd cross_moments(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  const Eigen::Index n = x.rows();
  Eigen::MatrixXd out(x.cols(), y.cols());
  for (Eigen::Index i = 0; i < x.cols(); ++i) {
    for (Eigen::Index j = 0; j < y.cols(); ++j) {
      ExactSum acc;
      for (Eigen::Index r = 0; r < n; ++r) acc.add(x(r, i) * y(r, j));
      out(i, j) = acc.value() / static_cast<double>(n);
    }
  }
  return out;
}

Eigen::MatrixXd cross_moments(const Eigen::MatrixXd& x) {
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  Eigen::MatrixXd out(p, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = i; j < p; ++j) {
      ExactSum acc;
      for (Eigen::Index r = 0; r < n; ++r) acc.add(x(r, i) * x(r, j));
      out(i, j) = out(j, i) = acc.value() / static_cast<double>(n);
    }
  }
  return out;
}

double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::VectorXd ca = a.array() - a.mean();
  const Eigen::VectorXd cb = b.array() - b.mean();
  return ca.dot(cb) / std::sqrt(ca.squaredNorm() * cb.squaredNorm());
}

}  // namespace cpls
