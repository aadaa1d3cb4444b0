#pragma once

// Independent reference computations used only by the test suites.

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <numeric>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Complex = std::complex<double>;

// Sum over all permutations of prod_i m(i, sigma(i)).
inline Complex naive_permanent(const Eigen::MatrixXcd& m) {
  const int n = static_cast<int>(m.rows());
  std::vector<int> sigma(static_cast<std::size_t>(n));
  std::iota(sigma.begin(), sigma.end(), 0);
  Complex total = 0.0;
  do {
    Complex term = 1.0;
    for (int i = 0; i < n; ++i) term *= m(i, sigma[static_cast<std::size_t>(i)]);
    total += term;
  } while (std::next_permutation(sigma.begin(), sigma.end()));
  return total;
}

inline Eigen::MatrixXcd random_gaussian_matrix(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXcd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = Complex(normal(rng), normal(rng));
  return m;
}

// Two photons in spatial modes k and l, each carrying an internal label. The
// first photon is in label a; the second in sqrt(x) a + sqrt(1 - x) b. Both
// creation operators are propagated through t over the 2n extended modes
// (spatial mode, label), the two-photon Fock amplitudes are collected, and
// probabilities are summed over labels to give P(i, j), i <= j.
inline std::map<std::pair<int, int>, double> fock_two_photon(const Eigen::MatrixXcd& t, int k, int l, double x) {
  const int n = static_cast<int>(t.rows());
  const int ext = 2 * n;  // extended index = 2 * mode + label
  std::vector<Complex> first(static_cast<std::size_t>(ext), 0.0);
  std::vector<Complex> second(static_cast<std::size_t>(ext), 0.0);
  for (int i = 0; i < n; ++i) {
    first[static_cast<std::size_t>(2 * i)] = t(i, k);
    second[static_cast<std::size_t>(2 * i)] = std::sqrt(x) * t(i, l);
    second[static_cast<std::size_t>(2 * i + 1)] = std::sqrt(1.0 - x) * t(i, l);
  }
  std::map<std::pair<int, int>, double> out;
  for (int p = 0; p < ext; ++p) {
    for (int q = p; q < ext; ++q) {
      double prob = 0.0;
      if (p == q) {
        // (a_p^dagger)^2 |0> = sqrt(2) |2_p>
        prob = 2.0 * std::norm(first[static_cast<std::size_t>(p)] * second[static_cast<std::size_t>(p)]);
      } else {
        const Complex amp = first[static_cast<std::size_t>(p)] * second[static_cast<std::size_t>(q)] +
                            first[static_cast<std::size_t>(q)] * second[static_cast<std::size_t>(p)];
        prob = std::norm(amp);
      }
      int i = p / 2;
      int j = q / 2;
      if (i > j) std::swap(i, j);
      out[{i, j}] += prob;
    }
  }
  return out;
}

// Bar-power extremes of a 2x2 transfer function over a uniform phase grid.
template <typename TransferFn>
std::pair<double, double> bar_power_extremes(TransferFn&& transfer, int points) {
  double lo = 1e300;
  double hi = -1e300;
  for (int i = 0; i < points; ++i) {
    const double phi = 2.0 * M_PI * i / points;
    const double p = std::norm(transfer(phi)(0, 0));
    lo = std::min(lo, p);
    hi = std::max(hi, p);
  }
  return {lo, hi};
}

}  // namespace oracle
