#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>

#include <Eigen/Dense>

#include "qpsim/errors.hpp"

namespace qpsim {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (!std::isfinite(std::real(m(i, j))) || !std::isfinite(std::imag(m(i, j)))) return false;
  return true;
}

// max |(U^H U - I)_ij|
template <typename Derived>
double unitarity_defect(const Eigen::MatrixBase<Derived>& u) {
  if (u.rows() != u.cols()) throw DimensionError("unitarity_defect: matrix is not square");
  using Plain = typename Derived::PlainObject;
  const Plain gram = u.adjoint() * u;
  return (gram - Plain::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff();
}

template <typename Derived>
bool is_unitary(const Eigen::MatrixBase<Derived>& u, double tol = 1e-10) {
  return u.rows() == u.cols() && all_finite(u) && unitarity_defect(u) <= tol;
}

// All singular values at most 1 + tol; the transfer matrices of lossy
// networks satisfy this.
template <typename Derived>
bool is_subunitary(const Eigen::MatrixBase<Derived>& t, double tol = 1e-10) {
  if (!all_finite(t)) return false;
  Eigen::JacobiSVD<typename Derived::PlainObject> svd(t);
  return svd.singularValues().maxCoeff() <= 1.0 + tol;
}

// Global-phase-invariant distance
//   min_alpha ||a - e^{i alpha} b||_F / sqrt(n),
// with the minimizer alpha = arg tr(b^H a).
template <typename DerivedA, typename DerivedB>
double matrix_distance(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionError("matrix_distance: shape mismatch");
  if (a.size() == 0) return 0.0;
  const Complex overlap = (b.adjoint() * a).trace();
  const Complex phase = std::abs(overlap) > 0.0 ? overlap / std::abs(overlap) : Complex(1.0, 0.0);
  return (a - phase * b).norm() / std::sqrt(static_cast<double>(a.rows()));
}

// Distance modulo everything that photon-counting statistics cannot see:
// input and output mode phases (D1 b D2) and complex conjugation of b.
double gauge_invariant_distance(const ComplexMatrix& a, const ComplexMatrix& b);

// Haar-distributed unitary via QR of a complex Ginibre matrix, with the
// diagonal of R normalized to positive reals. Deterministic in seed.
ComplexMatrix haar_random_unitary(int n, std::uint64_t seed);

// Embeds a 2x2 block acting on modes (m, m + 1) into an n x n identity.
ComplexMatrix embed_two_mode(const Eigen::Matrix2cd& block, int n, int m);

// Left-multiplies rows (m, m + 1) of `target` by a 2x2 block in place.
void apply_two_mode_left(const Eigen::Matrix2cd& block, int m, ComplexMatrix& target);

// Wraps an angle to [0, 2 pi); values that round to 2 pi map to 0.
double canonical_phase(double angle);

}  // namespace qpsim
