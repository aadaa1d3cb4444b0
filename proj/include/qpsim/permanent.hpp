#pragma once

#include <bit>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "qpsim/errors.hpp"

namespace qpsim {

inline constexpr int kMaxPermanentOrder = 20;

// Matrix permanent. Orders 1 and 2 are expanded directly; larger orders use
// Ryser's inclusion-exclusion formula walked in Gray-code order so each step
// updates the row sums with a single column, O(2^n n).
template <typename Derived>
typename Derived::Scalar permanent(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  if (m.rows() != m.cols()) throw DimensionError("permanent: matrix must be square");
  const int n = static_cast<int>(m.rows());
  if (n > kMaxPermanentOrder) throw DimensionError("permanent: order above 20 is not supported");
  if (n == 0) return Scalar(1);
  if (n == 1) return m(0, 0);
  if (n == 2) return m(0, 0) * m(1, 1) + m(0, 1) * m(1, 0);

  std::vector<Scalar> row_sums(static_cast<std::size_t>(n), Scalar(0));
  Scalar total(0);
  std::uint32_t gray = 0;
  const std::uint32_t subsets = 1u << n;
  for (std::uint32_t k = 1; k < subsets; ++k) {
    const std::uint32_t next = k ^ (k >> 1);
    const std::uint32_t flipped = next ^ gray;
    const int col = std::countr_zero(flipped);
    const bool added = (next & flipped) != 0;
    gray = next;
    for (int i = 0; i < n; ++i) {
      if (added)
        row_sums[static_cast<std::size_t>(i)] += m(i, col);
      else
        row_sums[static_cast<std::size_t>(i)] -= m(i, col);
    }
    Scalar product(1);
    for (const Scalar& s : row_sums) product *= s;
    // (-1)^{n - |S|}
    const bool odd = ((n - std::popcount(gray)) & 1) != 0;
    if (odd)
      total -= product;
    else
      total += product;
  }
  return total;
}

}  // namespace qpsim
