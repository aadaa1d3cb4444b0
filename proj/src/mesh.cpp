#include "qpsim/mesh.hpp"

#include <algorithm>
#include <future>
#include <random>
#include <string>

#include "least_squares.hpp"
#include "qpsim/errors.hpp"

namespace qpsim {

void MeshConfig::validate() const {
  if (n_modes < 1) throw TopologyError("mesh: n_modes must be at least 1");
  const auto expected = static_cast<std::size_t>(n_modes) * static_cast<std::size_t>(n_modes - 1) / 2;
  if (cells.size() != expected)
    throw TopologyError("mesh: expected " + std::to_string(expected) + " cells for " + std::to_string(n_modes) +
                        " modes, got " + std::to_string(cells.size()));
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const MeshCell& c = cells[i];
    if (c.upper_mode < 0 || c.upper_mode + 1 >= n_modes)
      throw TopologyError("mesh: cell " + std::to_string(i) + " acts outside the mode range");
    if (!std::isfinite(c.theta) || !std::isfinite(c.phi))
      throw TopologyError("mesh: cell " + std::to_string(i) + " has a non-finite phase");
  }
  if (output_phases.size() != static_cast<std::size_t>(n_modes))
    throw TopologyError("mesh: need one output phase per mode");
}

MeshConfig MeshConfig::canonical() const {
  MeshConfig out = *this;
  for (MeshCell& c : out.cells) {
    c.theta = canonical_phase(c.theta);
    c.phi = canonical_phase(c.phi);
  }
  for (double& p : out.output_phases) p = canonical_phase(p);
  return out;
}

MeshConfig rectangular_layout(int n_modes) {
  if (n_modes < 1) throw DimensionError("rectangular_layout: n_modes must be at least 1");
  MeshConfig config;
  config.n_modes = n_modes;
  config.output_phases.assign(static_cast<std::size_t>(n_modes), 0.0);
  for (int column = 0; column < n_modes; ++column)
    for (int m = column % 2; m + 1 < n_modes; m += 2) config.cells.push_back(MeshCell{m, 0.0, 0.0});
  return config;
}

Eigen::Matrix2cd cell_transfer(const MZIParams& params, double theta, double phi) {
  Eigen::Matrix2cd external = Eigen::Matrix2cd::Identity();
  external(0, 0) = std::polar(1.0, phi);
  return mzi_transfer(params, theta) * external;
}

ComplexMatrix compose(const MeshConfig& config) {
  const MZIParams ideal;
  return compose(config, std::span<const MZIParams>(&ideal, 1));
}

ComplexMatrix compose(const MeshConfig& config, std::span<const MZIParams> params) {
  config.validate();
  if (params.size() != 1 && params.size() != config.cells.size())
    throw DimensionError("compose: need one MZIParams per cell or a single shared entry");
  ComplexMatrix u = ComplexMatrix::Identity(config.n_modes, config.n_modes);
  for (std::size_t i = 0; i < config.cells.size(); ++i) {
    const MeshCell& c = config.cells[i];
    const MZIParams& p = params.size() == 1 ? params[0] : params[i];
    apply_two_mode_left(cell_transfer(p, c.theta, c.phi), c.upper_mode, u);
  }
  for (int m = 0; m < config.n_modes; ++m)
    u.row(m) *= std::polar(1.0, config.output_phases[static_cast<std::size_t>(m)]);
  return u;
}

namespace {

constexpr double kAlreadyNull = 1e-13;

// Cell that zeroes column k of the row (a, b) = (w(r, k), w(r, k + 1))
// when applied as w <- w T^{-1}.
MeshCell right_nulling_cell(int k, Complex a, Complex b) {
  if (std::abs(a) < kAlreadyNull) return MeshCell{k, kPi, kPi};
  if (std::abs(b) < kAlreadyNull) return MeshCell{k, 0.0, 0.0};
  return MeshCell{k, 2.0 * std::atan2(std::abs(b), std::abs(a)), std::arg(-a / b)};
}

// Cell that zeroes the lower entry of the column (a, b) = (w(k, j), w(k + 1, j))
// when applied as w <- T w.
MeshCell left_nulling_cell(int k, Complex a, Complex b) {
  if (std::abs(b) < kAlreadyNull) return MeshCell{k, kPi, kPi};
  if (std::abs(a) < kAlreadyNull) return MeshCell{k, 0.0, 0.0};
  return MeshCell{k, 2.0 * std::atan2(std::abs(a), std::abs(b)), std::arg(b / a)};
}

}  // namespace

MeshConfig decompose(const ComplexMatrix& u) {
  if (!is_unitary(u, 1e-8)) throw ValidationError("decompose: input is not unitary within 1e-8");
  const int n = static_cast<int>(u.rows());
  const MZIParams ideal;
  ComplexMatrix w = u;
  std::vector<MeshCell> right;
  std::vector<MeshCell> left;
  for (int i = 0; i + 1 < n; ++i) {
    if (i % 2 == 0) {
      for (int j = 0; j <= i; ++j) {
        const int row = n - 1 - j;
        const int k = i - j;
        const MeshCell cell = right_nulling_cell(k, w(row, k), w(row, k + 1));
        const Eigen::Matrix2cd t = cell_transfer(ideal, cell.theta, cell.phi);
        w.middleCols(k, 2) = (w.middleCols(k, 2) * t.adjoint()).eval();
        right.push_back(cell);
      }
    } else {
      for (int j = 0; j <= i; ++j) {
        const int row = n - 1 - i + j;
        const int k = row - 1;
        const MeshCell cell = left_nulling_cell(k, w(k, j), w(row, j));
        apply_two_mode_left(cell_transfer(ideal, cell.theta, cell.phi), k, w);
        left.push_back(cell);
      }
    }
  }

  // w is now diagonal. Move each left cell to the right of it:
  // T(theta, phi)^{-1} D = D' T(theta, phi').
  ComplexVector d = w.diagonal();
  std::vector<MeshCell> moved;
  moved.reserve(left.size());
  for (auto it = left.rbegin(); it != left.rend(); ++it) {
    const MeshCell& cell = *it;
    const int k = cell.upper_mode;
    const Complex d1 = d(k);
    const Complex d2 = d(k + 1);
    if (std::abs(std::cos(cell.theta / 2.0)) < 1e-12) {
      moved.push_back(MeshCell{k, cell.theta, -cell.phi});
    } else {
      const Complex ratio = -std::polar(1.0, -cell.theta);
      d(k) = ratio * std::polar(1.0, -cell.phi) * d2;
      d(k + 1) = ratio * d2;
      moved.push_back(MeshCell{k, cell.theta, std::arg(d1) - std::arg(d2)});
    }
  }

  MeshConfig config;
  config.n_modes = n;
  config.cells = std::move(right);
  config.cells.insert(config.cells.end(), moved.begin(), moved.end());
  config.output_phases.resize(static_cast<std::size_t>(n));
  for (int m = 0; m < n; ++m) config.output_phases[static_cast<std::size_t>(m)] = std::arg(d(m));
  return config.canonical();
}

std::vector<ModulatorSlot> modulator_layout(const MeshConfig& config) {
  config.validate();
  std::vector<bool> fed(static_cast<std::size_t>(config.n_modes), false);
  std::vector<ModulatorSlot> slots;
  for (std::size_t i = 0; i < config.cells.size(); ++i) {
    const int m = config.cells[i].upper_mode;
    slots.push_back({static_cast<int>(i), ModulatorRole::internal});
    if (fed[static_cast<std::size_t>(m)]) slots.push_back({static_cast<int>(i), ModulatorRole::external});
    fed[static_cast<std::size_t>(m)] = true;
    fed[static_cast<std::size_t>(m + 1)] = true;
  }
  return slots;
}

VoltageProgram phases_to_voltages(const MeshConfig& config, std::span<const PhaseShifterParams> shifters,
                                  double compliance_limit_V) {
  if (shifters.size() != 1 && shifters.size() != config.cells.size())
    throw DimensionError("phases_to_voltages: need one shifter per cell or a single shared entry");
  VoltageProgram program;
  program.modulators = modulator_layout(config);
  for (const ModulatorSlot& slot : program.modulators) {
    const PhaseShifterParams& s = shifters.size() == 1 ? shifters[0] : shifters[static_cast<std::size_t>(slot.cell)];
    s.validate();
    const MeshCell& cell = config.cells[static_cast<std::size_t>(slot.cell)];
    const double phase = slot.role == ModulatorRole::internal ? cell.theta : cell.phi;
    double reduced = std::remainder(phase - s.phase_offset_rad, kTwoPi);
    if (reduced <= -kPi + 1e-12) reduced += kTwoPi;
    const double volts = s.v_pi_V * reduced / kPi;
    if (std::abs(volts) > compliance_limit_V)
      throw RangeError("phases_to_voltages: cell " + std::to_string(slot.cell) + " needs " + std::to_string(volts) +
                       " V, beyond the compliance limit");
    program.volts.push_back(volts);
  }
  return program;
}

MeasuredStatistics synthesize_statistics(const ComplexMatrix& u, double pair_overlap) {
  MeasuredStatistics data;
  data.n_modes = static_cast<int>(u.rows());
  data.single_photon = u.cwiseAbs2();
  data.pair_overlap = pair_overlap;
  for (const auto& [k, l] : collision_free_pairs(data.n_modes))
    data.two_photon.push_back(two_photon_distribution(u, k, l, pair_overlap, true));
  return data;
}

std::vector<ProbabilityDistribution> predicted_collision_free(const ComplexMatrix& u, double pair_overlap) {
  std::vector<ProbabilityDistribution> out;
  for (const auto& [k, l] : collision_free_pairs(static_cast<int>(u.rows())))
    out.push_back(two_photon_distribution(u, k, l, pair_overlap, true).collision_free());
  return out;
}

namespace {

// Flattened, normalized statistics in a fixed order: single-photon columns,
// then each input pair's collision-free patterns.
Eigen::VectorXd statistics_vector(const Eigen::MatrixXd& single, const std::vector<ProbabilityDistribution>& pairs) {
  const Eigen::Index n = single.rows();
  Eigen::Index size = n * n;
  for (const auto& p : pairs) size += static_cast<Eigen::Index>(p.size());
  Eigen::VectorXd out(size);
  Eigen::Index at = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double column = single.col(i).sum();
    for (Eigen::Index j = 0; j < n; ++j) out(at++) = single(j, i) / column;
  }
  for (const auto& p : pairs)
    for (double v : p.probabilities()) out(at++) = v;
  return out;
}

std::vector<ProbabilityDistribution> measured_pairs(const MeasuredStatistics& data) {
  const int n = data.n_modes;
  if (data.single_photon.rows() != n || data.single_photon.cols() != n)
    throw CoverageError("reconstruct_unitary: single-photon data must cover every input/output pair");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!data.single_photon.col(i).allFinite() || (data.single_photon.col(i).array() < 0.0).any())
      throw CoverageError("reconstruct_unitary: single-photon data has invalid entries");
    if (!(data.single_photon.col(i).sum() > 0.0))
      throw CoverageError("reconstruct_unitary: no single-photon transmission for input " + std::to_string(i));
  }
  std::vector<ProbabilityDistribution> out;
  for (const auto& [k, l] : collision_free_pairs(n)) {
    const auto it = std::find_if(data.two_photon.begin(), data.two_photon.end(), [&](const TwoPhotonDistribution& d) {
      return d.input_first == k && d.input_second == l;
    });
    if (it == data.two_photon.end())
      throw CoverageError("reconstruct_unitary: missing two-photon data for inputs (" + std::to_string(k) + "," +
                          std::to_string(l) + ")");
    std::vector<std::string> labels;
    std::vector<double> probs;
    for (const auto& [i, j] : collision_free_pairs(n)) {
      const auto entry = std::find_if(it->entries.begin(), it->entries.end(),
                                      [&](const auto& e) { return e.first == OutputPattern{i, j}; });
      if (entry == it->entries.end())
        throw CoverageError("reconstruct_unitary: input pair (" + std::to_string(k) + "," + std::to_string(l) +
                            ") lacks output pattern (" + std::to_string(i) + "," + std::to_string(j) + ")");
      labels.push_back(std::to_string(i) + "," + std::to_string(j));
      probs.push_back(entry->second);
    }
    out.push_back(ProbabilityDistribution(std::move(labels), std::move(probs)).normalized_copy());
  }
  return out;
}

MeshConfig config_from_parameters(const MeshConfig& layout, const std::vector<ModulatorSlot>& slots,
                                  const Eigen::VectorXd& x) {
  MeshConfig config = layout;
  for (std::size_t s = 0; s < slots.size(); ++s) {
    MeshCell& cell = config.cells[static_cast<std::size_t>(slots[s].cell)];
    (slots[s].role == ModulatorRole::internal ? cell.theta : cell.phi) = x(static_cast<Eigen::Index>(s));
  }
  return config;
}

}  // namespace

ReconstructionResult reconstruct_unitary(const MeasuredStatistics& measured, std::uint64_t seed,
                                         const ReconstructionOptions& options) {
  if (measured.n_modes < 2) throw CoverageError("reconstruct_unitary: need at least two modes");
  if (options.restarts < 1) throw ArgumentError("reconstruct_unitary: at least one restart is required");
  const std::vector<ProbabilityDistribution> pairs = measured_pairs(measured);
  const Eigen::VectorXd target = statistics_vector(measured.single_photon, pairs);
  const double overlap = measured.pair_overlap;

  const MeshConfig layout = rectangular_layout(measured.n_modes);
  const std::vector<ModulatorSlot> slots = modulator_layout(layout);
  const auto n_params = static_cast<Eigen::Index>(slots.size());

  auto residual = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    const ComplexMatrix u = compose(config_from_parameters(layout, slots, x));
    return statistics_vector(u.cwiseAbs2(), predicted_collision_free(u, overlap)) - target;
  };

  auto run_restart = [&](int r) {
    std::mt19937_64 rng(seed ^ (0x9E3779B97F4A7C15ull * static_cast<std::uint64_t>(r + 1)));
    std::uniform_real_distribution<double> angle(0.0, kTwoPi);
    Eigen::VectorXd start(n_params);
    for (Eigen::Index k = 0; k < n_params; ++k) start(k) = angle(rng);
    return detail::levenberg_marquardt(residual, start, options.max_iterations, options.cost_tolerance * 1e-8);
  };

  std::vector<detail::LeastSquaresResult> results(static_cast<std::size_t>(options.restarts));
  if (options.parallel) {
    std::vector<std::future<detail::LeastSquaresResult>> futures;
    for (int r = 0; r < options.restarts; ++r) futures.push_back(std::async(std::launch::async, run_restart, r));
    for (int r = 0; r < options.restarts; ++r) results[static_cast<std::size_t>(r)] = futures[static_cast<std::size_t>(r)].get();
  } else {
    for (int r = 0; r < options.restarts; ++r) results[static_cast<std::size_t>(r)] = run_restart(r);
  }

  ReconstructionResult out;
  for (int r = 0; r < options.restarts; ++r) {
    const double cost = results[static_cast<std::size_t>(r)].cost;
    out.restart_costs.push_back(cost);
    if (out.best_restart < 0 || cost < out.restart_costs[static_cast<std::size_t>(out.best_restart)])
      out.best_restart = r;
  }
  const auto& best = results[static_cast<std::size_t>(out.best_restart)];
  out.config = config_from_parameters(layout, slots, best.x).canonical();
  out.unitary = compose(out.config);
  out.cost = best.cost;
  out.converged = best.converged || best.cost <= options.cost_tolerance;
  return out;
}

}  // namespace qpsim
