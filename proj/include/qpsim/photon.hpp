#pragma once

#include <span>
#include <utility>
#include <vector>

#include "qpsim/components.hpp"
#include "qpsim/distribution.hpp"
#include "qpsim/linalg.hpp"

namespace qpsim {

// Quantum-dot single-photon source. Defaults: 13.8 ns photon spacing,
// 94.5 % pairwise indistinguishability, g2(0) = 0.005.
struct SourceModel {
  double repetition_period_ns = 13.8;
  double indistinguishability = 0.945;
  double g2_zero = 0.005;
  double end_to_end_efficiency = 1.0;

  void validate() const;
};

// Per-pulse two-photon emission probability g2(0) / 2. It sets an
// accidental-coincidence floor that fringe models may add explicitly.
double accidental_coincidence_floor(const SourceModel& s);

// x_source * chip_penalty
double effective_pair_overlap(const SourceModel& s, double chip_penalty);

struct OutputPattern {
  int first = 0;
  int second = 0;
  friend bool operator==(const OutputPattern&, const OutputPattern&) = default;
};

struct TwoPhotonDistribution {
  int input_first = 0;
  int input_second = 1;
  std::vector<std::pair<OutputPattern, double>> entries;
  bool collision_free_only = false;

  double probability(int i, int j) const;
  double total() const;
  // Collision-free entries rescaled to unit total, labelled "i,j".
  ProbabilityDistribution collision_free() const;
  // All entries as a distribution (not rescaled).
  ProbabilityDistribution as_distribution() const;
};

// |t_{j, input}|^2 for every output j, labelled by output index.
ProbabilityDistribution single_photon_distribution(const ComplexMatrix& t, int input);

// Two photons injected in modes (k, l) with squared wavefunction overlap x:
//   P = x P_indistinguishable + (1 - x) P_distinguishable.
// Patterns (i, j) with i <= j are listed in lexicographic order; bunched
// patterns are omitted when `collision_free_only` is set.
TwoPhotonDistribution two_photon_distribution(const ComplexMatrix& t, int k, int l, double x,
                                              bool collision_free_only = false);

// Indistinguishable n-photon collision-free transition probability
// |perm(T[outputs, inputs])|^2.
double collision_free_probability(const ComplexMatrix& t, std::span<const int> inputs,
                                  std::span<const int> outputs);

// All collision-free input pairs (k < l) in lexicographic order.
std::vector<std::pair<int, int>> collision_free_pairs(int n_modes);

// Cross-port coincidence of two photons entering both MZI inputs, one value
// per internal phase. For ideal couplers this is [1 - x + (1 + x) cos^2 phi] / 2.
// `accidental_floor` adds a constant background probability.
std::vector<double> hom_fringe(const MZIParams& m, double x, std::span<const double> phases,
                               double accidental_floor = 0.0);

// Raw (max - min) / (max + min) contrast of the ideal fringe, (1 + x) / (3 - x).
double fringe_contrast(double x);

struct HomFitOptions {
  // Initial guess of the drive-to-phase map phase = offset + scale * drive.
  // Use pi / V_pi when the abscissa is in volts.
  double initial_scale = 1.0;
  double initial_offset = 0.0;
  // Fit the drive-to-phase map. When false it is held at the initial guess.
  bool fit_phase_calibration = true;
};

struct HomFit {
  double visibility = 0.0;
  double visibility_stderr = 0.0;
  double amplitude = 0.0;
  double scale = 0.0;
  double offset = 0.0;
  double residual_sum_squares = 0.0;
  bool converged = false;
};

// Least-squares fit of counts to A [1 - V + (1 + V) cos^2(offset + scale * drive)] / 2.
// The uncertainty is the standard error from the residual-scaled covariance.
HomFit fit_hom_visibility(std::span<const double> drive, std::span<const double> counts,
                          const HomFitOptions& options = {});

}  // namespace qpsim
