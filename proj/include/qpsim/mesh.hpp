#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "qpsim/components.hpp"
#include "qpsim/linalg.hpp"
#include "qpsim/photon.hpp"

namespace qpsim {

// One MZI of a rectangular mesh. The external phase `phi` sits on the upper
// mode in front of the cell; the internal phase `theta` sets the splitting
// (theta = pi is the bar state, theta = 0 the cross state).
struct MeshCell {
  int upper_mode = 0;  // acts on (upper_mode, upper_mode + 1)
  double theta = 0.0;
  double phi = 0.0;

  std::array<int, 2> modes() const { return {upper_mode, upper_mode + 1}; }
};

// Cells are listed in the order light traverses them; the transfer matrix is
// diag(e^{i output_phases}) * T_last * ... * T_first.
struct MeshConfig {
  int n_modes = 0;
  std::vector<MeshCell> cells;
  std::vector<double> output_phases;

  // Throws TopologyError for cells off the mode range, or a cell count other
  // than n (n - 1) / 2.
  void validate() const;
  // Wraps every phase to [0, 2 pi).
  MeshConfig canonical() const;
};

// Rectangular layout with every phase zero: column c holds the cells
// (c % 2, c % 2 + 1), (c % 2 + 2, ...). With no drive every MZI is in the
// cross state and the mesh realizes a fixed permutation.
MeshConfig rectangular_layout(int n_modes);

// T = mzi_transfer(params, theta) * diag(e^{i phi}, 1)
Eigen::Matrix2cd cell_transfer(const MZIParams& params, double theta, double phi);

ComplexMatrix compose(const MeshConfig& config);
// One MZIParams per cell, or a single entry applied to every cell.
ComplexMatrix compose(const MeshConfig& config, std::span<const MZIParams> params);

// Rectangular decomposition by alternating column (right) and row (left)
// nulling; left-side cells are then commuted through the residual diagonal.
// Entries that are already zero get identity cells (theta = phi = pi), so the
// identity maps to all-bar cells with zero output phases.
// Throws ValidationError unless u is unitary within 1e-8.
MeshConfig decompose(const ComplexMatrix& u);

enum class ModulatorRole { internal, external };

struct ModulatorSlot {
  int cell = 0;
  ModulatorRole role = ModulatorRole::internal;
};

// Physical phase modulators of the mesh: the internal phase of every cell
// and the external phase of every cell whose upper input is fed by another
// cell. External phases on mesh inputs and the output phases only shift mode
// phases, which photon-counting statistics cannot observe, so no modulator
// drives them. For four modes this is 6 internal + 4 external.
std::vector<ModulatorSlot> modulator_layout(const MeshConfig& config);
inline std::size_t phase_count(const MeshConfig& config) { return modulator_layout(config).size(); }

struct VoltageProgram {
  std::vector<ModulatorSlot> modulators;
  std::vector<double> volts;
};

// Inverts phase_from_voltage per modulator, choosing the representative in
// (-V_pi, V_pi]. `shifters` is per cell or a single shared entry. Throws
// RangeError if any |v| exceeds `compliance_limit_V`.
VoltageProgram phases_to_voltages(const MeshConfig& config, std::span<const PhaseShifterParams> shifters,
                                  double compliance_limit_V = 10.0);

// Statistics used to reconstruct an unknown interferometer.
struct MeasuredStatistics {
  int n_modes = 0;
  // single_photon(j, i): transmission from input i to output j; each column is
  // normalized before fitting, so lossy data may be passed as is.
  Eigen::MatrixXd single_photon;
  // Collision-free two-photon data, one entry per input pair k < l.
  std::vector<TwoPhotonDistribution> two_photon;
  double pair_overlap = 1.0;
};

// Noiseless statistics of `u` (single-photon matrix and all collision-free
// two-photon distributions).
MeasuredStatistics synthesize_statistics(const ComplexMatrix& u, double pair_overlap);

struct ReconstructionOptions {
  int restarts = 12;
  int max_iterations = 400;
  // Cost (half the summed squared residual) treated as an exact fit.
  double cost_tolerance = 1e-16;
  // Run restarts on separate threads; results are reduced by restart index.
  bool parallel = true;
};

struct ReconstructionResult {
  ComplexMatrix unitary;
  MeshConfig config;
  double cost = 0.0;
  // False when the best restart stopped on the iteration limit.
  bool converged = false;
  int best_restart = -1;
  std::vector<double> restart_costs;
};

// Fits the phases of a rectangular mesh to single- and collision-free
// two-photon statistics (multi-start Levenberg-Marquardt with
// finite-difference Jacobians). The result is unitary by construction and
// is determined only up to mode phases and complex conjugation.
// Throws CoverageError when inputs or input pairs are missing.
ReconstructionResult reconstruct_unitary(const MeasuredStatistics& measured, std::uint64_t seed,
                                         const ReconstructionOptions& options = {});

// Predicted collision-free distributions for every input pair, in the order
// of collision_free_pairs().
std::vector<ProbabilityDistribution> predicted_collision_free(const ComplexMatrix& u, double pair_overlap);

}  // namespace qpsim
