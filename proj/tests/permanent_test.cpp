#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "qpsim/linalg.hpp"
#include "qpsim/permanent.hpp"

using namespace qpsim;

TEST(Permanent, OneByOne) {
  ComplexMatrix m(1, 1);
  m(0, 0) = Complex(2.5, -1.0);
  EXPECT_EQ(permanent(m), Complex(2.5, -1.0));
}

TEST(Permanent, TwoByTwoIsAdPlusBc) {
  ComplexMatrix m(2, 2);
  const Complex a(1, 2), b(-0.5, 0.3), c(2, -1), d(0.25, 4);
  m << a, b, c, d;
  EXPECT_LT(std::abs(permanent(m) - (a * d + b * c)), 1e-15);
}

TEST(Permanent, RealMatrixOfOnesIsFactorial) {
  EXPECT_DOUBLE_EQ(permanent(Eigen::MatrixXd::Ones(5, 5)), 120.0);
  EXPECT_DOUBLE_EQ(permanent(Eigen::MatrixXd::Ones(7, 7)), 5040.0);
}

TEST(Permanent, FourByFourMatchesPermutationSum) {
  std::mt19937_64 rng(2024);
  const ComplexMatrix m = oracle::random_gaussian_matrix(4, rng);
  const Complex expected = oracle::naive_permanent(m);
  EXPECT_LT(std::abs(permanent(m) - expected), 1e-12 * std::abs(expected));
}

TEST(Permanent, AgreesWithOracleUpToFive) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    for (int n = 1; n <= 5; ++n) {
      const ComplexMatrix m = oracle::random_gaussian_matrix(n, rng);
      const Complex expected = oracle::naive_permanent(m);
      EXPECT_LT(std::abs(permanent(m) - expected), 1e-12 * std::max(1.0, std::abs(expected)))
          << "n=" << n << " trial=" << trial;
    }
  }
}

TEST(Permanent, RowScalingIsMultilinear) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + trial % 6;
    ComplexMatrix m = oracle::random_gaussian_matrix(n, rng);
    const Complex c(normal(rng), normal(rng));
    const int row = trial % n;
    const Complex before = permanent(m);
    m.row(row) *= c;
    EXPECT_LT(std::abs(permanent(m) - c * before), 1e-11 * std::max(1.0, std::abs(c * before)));
  }
}

TEST(Permanent, InvariantUnderRowAndColumnPermutation) {
  std::mt19937_64 rng(3);
  const ComplexMatrix m = oracle::random_gaussian_matrix(6, rng);
  Eigen::PermutationMatrix<Eigen::Dynamic> rows(6), cols(6);
  rows.indices() << 3, 1, 5, 0, 2, 4;
  cols.indices() << 5, 4, 3, 2, 1, 0;
  const Complex p = permanent(m);
  EXPECT_LT(std::abs(permanent(ComplexMatrix(rows * m * cols)) - p), 1e-11 * std::abs(p));
}

TEST(Permanent, RejectsNonSquareAndOversized) {
  EXPECT_THROW(permanent(ComplexMatrix::Zero(2, 3)), DimensionError);
  EXPECT_THROW(permanent(ComplexMatrix::Zero(21, 21)), DimensionError);
}
