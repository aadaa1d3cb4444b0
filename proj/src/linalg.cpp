#include "qpsim/linalg.hpp"

#include <random>

namespace qpsim {

namespace {

// min over diagonal phases D1, D2 of ||a - D1 b D2||_F, by alternating
// closed-form updates of each side.
double mode_phase_aligned_residual(const ComplexMatrix& a, const ComplexMatrix& b) {
  const Eigen::Index rows = a.rows();
  const Eigen::Index cols = a.cols();
  ComplexVector left = ComplexVector::Ones(rows);
  ComplexVector right = ComplexVector::Ones(cols);
  auto unit = [](Complex z) { return std::abs(z) > 0.0 ? z / std::abs(z) : Complex(1.0, 0.0); };
  double previous = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < 500; ++iter) {
    for (Eigen::Index i = 0; i < rows; ++i) {
      Complex s = 0.0;
      for (Eigen::Index j = 0; j < cols; ++j) s += a(i, j) * std::conj(b(i, j) * right(j));
      left(i) = unit(s);
    }
    for (Eigen::Index j = 0; j < cols; ++j) {
      Complex s = 0.0;
      for (Eigen::Index i = 0; i < rows; ++i) s += a(i, j) * std::conj(left(i) * b(i, j));
      right(j) = unit(s);
    }
    const double residual = (a - left.asDiagonal() * b * right.asDiagonal()).norm();
    if (previous - residual < 1e-15) return residual;
    previous = residual;
  }
  return previous;
}

}  // namespace

double gauge_invariant_distance(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionError("gauge_invariant_distance: shape mismatch");
  if (a.size() == 0) return 0.0;
  const double direct = mode_phase_aligned_residual(a, b);
  const double conjugate = mode_phase_aligned_residual(a, b.conjugate());
  return std::min(direct, conjugate) / std::sqrt(static_cast<double>(a.rows()));
}

ComplexMatrix haar_random_unitary(int n, std::uint64_t seed) {
  if (n <= 0) throw DimensionError("haar_random_unitary: n must be at least 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  ComplexMatrix z(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) z(i, j) = Complex(normal(rng), normal(rng)) / std::sqrt(2.0);
  Eigen::HouseholderQR<ComplexMatrix> qr(z);
  ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(n, n);
  const ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < n; ++j) {
    const Complex d = r(j, j);
    const Complex phase = std::abs(d) > 0.0 ? d / std::abs(d) : Complex(1.0, 0.0);
    q.col(j) *= phase;
  }
  return q;
}

ComplexMatrix embed_two_mode(const Eigen::Matrix2cd& block, int n, int m) {
  if (m < 0 || m + 1 >= n) throw DimensionError("embed_two_mode: mode pair out of range");
  ComplexMatrix out = ComplexMatrix::Identity(n, n);
  out.block<2, 2>(m, m) = block;
  return out;
}

void apply_two_mode_left(const Eigen::Matrix2cd& block, int m, ComplexMatrix& target) {
  if (m < 0 || m + 1 >= target.rows()) throw DimensionError("apply_two_mode_left: mode pair out of range");
  const ComplexMatrix rows = target.middleRows(m, 2);
  target.middleRows(m, 2) = block * rows;
}

double canonical_phase(double angle) {
  double wrapped = std::fmod(angle, kTwoPi);
  if (wrapped < 0.0) wrapped += kTwoPi;
  if (wrapped >= kTwoPi || kTwoPi - wrapped < 1e-12) wrapped = 0.0;
  return wrapped;
}

}  // namespace qpsim
