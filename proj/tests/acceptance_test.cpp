// Acceptance suite: one PASS/FAIL line per criterion. argv[1] is the qpsim
// executable used for the CLI determinism check.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "oracles.hpp"
#include "qpsim/components.hpp"
#include "qpsim/distribution.hpp"
#include "qpsim/io.hpp"
#include "qpsim/mesh.hpp"
#include "qpsim/permanent.hpp"
#include "qpsim/photon.hpp"
#include "qpsim/router.hpp"

namespace {

using namespace qpsim;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.6g", v);
  return buffer;
}

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void check(bool ok, const std::string& note) {
    pass = pass && ok;
    notes.push_back(note + (ok ? "" : " [failed]"));
  }
};

Outcome clements_round_trip() {
  Outcome out;
  const auto start = Clock::now();
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    const ComplexMatrix u = haar_random_unitary(4, seed);
    worst = std::max(worst, matrix_distance(compose(decompose(u)), u));
  }
  const double elapsed = seconds_since(start);
  out.check(worst <= 1e-9, "max distance " + fmt(worst) + " over 200 unitaries");
  out.check(elapsed < 5.0, "runtime " + fmt(elapsed) + " s");
  const std::size_t count = phase_count(decompose(haar_random_unitary(4, 99)));
  out.check(count == 10, "phase modulators for n=4: " + std::to_string(count));
  return out;
}

Outcome permanent_oracle() {
  Outcome out;
  std::mt19937_64 rng(20240521);
  double worst = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 1 + trial % 5;
    const Eigen::MatrixXcd m = oracle::random_gaussian_matrix(n, rng);
    const Complex expected = oracle::naive_permanent(m);
    worst = std::max(worst, std::abs(permanent(m) - expected) / std::abs(expected));
  }
  out.check(worst <= 1e-12, "max relative error " + fmt(worst) + " over 500 matrices");
  const Eigen::MatrixXcd big = oracle::random_gaussian_matrix(16, rng);
  const auto start = Clock::now();
  const Complex p = permanent(big);
  const double elapsed = seconds_since(start);
  out.check(std::isfinite(p.real()) && elapsed < 1.0, "n=16 permanent in " + fmt(elapsed) + " s");
  return out;
}

Outcome hom_physics() {
  Outcome out;
  const MZIParams ideal;
  const double x = 0.927;

  std::vector<double> extrema;
  for (int k = 0; k < 4; ++k) {
    extrema.push_back(kPi / 2.0 + k * kPi);
    extrema.push_back(k * kPi);
  }
  const auto at_extrema = hom_fringe(ideal, x, extrema);
  double min_err = 0.0;
  double max_err = 0.0;
  for (std::size_t i = 0; i < extrema.size(); i += 2) {
    min_err = std::max(min_err, std::abs(at_extrema[i] - (1.0 - x) / 2.0));
    max_err = std::max(max_err, std::abs(at_extrema[i + 1] - 1.0));
  }
  // Local extrema on a dense grid must sit on the grid points nearest pi/2 + k pi and k pi.
  const int grid = 4000;
  std::vector<double> phases(grid + 1);
  for (int i = 0; i <= grid; ++i) phases[static_cast<std::size_t>(i)] = 4.0 * kPi * i / grid;
  const auto fringe = hom_fringe(ideal, x, phases);
  bool located = true;
  int found = 0;
  for (int i = 1; i < grid; ++i) {
    const auto s = static_cast<std::size_t>(i);
    const bool is_min = fringe[s] < fringe[s - 1] && fringe[s] < fringe[s + 1];
    const bool is_max = fringe[s] > fringe[s - 1] && fringe[s] > fringe[s + 1];
    if (!is_min && !is_max) continue;
    ++found;
    const double target_offset = is_min ? kPi / 2.0 : 0.0;
    const double k = std::round((phases[s] - target_offset) / kPi);
    located = located && std::abs(phases[s] - (target_offset + k * kPi)) <= 0.5 * 4.0 * kPi / grid;
  }
  out.check(min_err <= 1e-12 && max_err <= 1e-12 && located && found == 7,
            "minima at pi/2 + k pi, maxima at k pi (error " + fmt(std::max(min_err, max_err)) + ")");

  const double model = hom_fringe(ideal, x, std::vector<double>{kPi / 2.0})[0];
  const double fock = oracle::fock_two_photon(mzi_transfer(ideal, kPi / 2.0), 0, 1, x).at({0, 1});
  out.check(std::abs(model - 0.0365) <= 1e-12 && std::abs(model - fock) <= 1e-12,
            "minimum " + fmt(model) + " vs Fock oracle " + fmt(fock));

  const int points = 21;
  const double v_pi = 4.5;
  std::vector<double> volts(points);
  std::vector<double> drive_phase(points);
  for (int i = 0; i < points; ++i) {
    volts[static_cast<std::size_t>(i)] = 9.0 * i / (points - 1);
    drive_phase[static_cast<std::size_t>(i)] = kPi * volts[static_cast<std::size_t>(i)] / v_pi;
  }
  const auto clean = hom_fringe(ideal, x, drive_phase);
  HomFitOptions options;
  options.initial_scale = kPi / v_pi;
  const HomFit fit = fit_hom_visibility(volts, clean, options);
  out.check(std::abs(fit.visibility - x) <= 1e-6, "noiseless fit V = " + fmt(fit.visibility));

  // Poisson resampling at 6000 expected counts per voltage point at the fringe maximum.
  const double peak_counts = 6000.0;
  std::mt19937_64 rng(7);
  std::vector<double> fitted;
  double reported = 0.0;
  const int trials = 400;
  for (int t = 0; t < trials; ++t) {
    std::vector<double> counts(points);
    for (int i = 0; i < points; ++i)
      counts[static_cast<std::size_t>(i)] = static_cast<double>(
          std::poisson_distribution<long long>(peak_counts * clean[static_cast<std::size_t>(i)])(rng));
    const HomFit f = fit_hom_visibility(volts, counts, options);
    fitted.push_back(f.visibility);
    reported += f.visibility_stderr / trials;
  }
  double mean = 0.0;
  for (double v : fitted) mean += v / trials;
  double var = 0.0;
  for (double v : fitted) var += (v - mean) * (v - mean) / (trials - 1);
  const double sigma = std::sqrt(var);
  out.check(sigma >= 0.007 / 2.0 && sigma <= 0.007 * 2.0,
            "Poisson sigma(V) = " + fmt(sigma) + " (mean V " + fmt(mean) + ", mean fit stderr " + fmt(reported) +
                ")");
  return out;
}

Outcome router_identity() {
  Outcome out;
  const double s = suppression_db(0.962);
  out.check(std::abs(s + 14.2) <= 0.05, "suppression at p=0.962: " + fmt(s) + " dB");

  const SourceModel source;
  const int frames = 3;
  const PulseProgram program = default_pulse_program(source.repetition_period_ns, 4.5, frames);
  DemuxTree er_tree;
  for (auto& m : er_tree.mzis) m = mzi_with_extinction(21.0);
  const TimeTrace trace = simulate_demux(er_tree, program, source, frames);
  const auto assignment = default_slot_assignment();
  double worst = 0.0;
  for (std::size_t k = 0; k < trace.time_ns.size(); ++k) {
    const double p = trace.probability[k][static_cast<std::size_t>(assignment.at(trace.slot(k)))];
    double sum = 0.0;
    for (double q : trace.probability[k]) sum += q;
    worst = std::max(worst, std::abs(p / sum - 0.9842));
  }
  out.check(worst <= 1e-4, "21 dB per MZI: worst per-slot |p - 0.9842| = " + fmt(worst));

  double defect = 0.0;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> offset(-0.3, 0.3);
  for (int variant = 0; variant < 6; ++variant) {
    DemuxTree tree;
    for (auto& m : tree.mzis) {
      m = variant == 0 ? MZIParams{} : mzi_with_extinction(15.0 + 3.0 * variant);
      m.shifter.phase_offset_rad = variant == 0 ? 0.0 : offset(rng);
    }
    const TimeTrace t = simulate_demux(tree, program, source, frames);
    for (const auto& probs : t.probability) {
      double sum = 0.0;
      for (double q : probs) sum += q;
      defect = std::max(defect, std::abs(sum - 1.0));
    }
  }
  out.check(defect <= 1e-9, "lossless conservation defect " + fmt(defect));
  return out;
}

Outcome eom_model() {
  Outcome out;
  const PhaseShifterParams shifter;
  const double cutoff = eom_cutoff_GHz(shifter, 1000.0);
  out.check(std::abs(cutoff - 6.5) <= 0.065, "-3 dB crossing at " + fmt(cutoff) + " GHz");
  const double s21 = eom_s21_db(shifter, 6.5, 1000.0);
  out.check(std::abs(s21 + 3.0) <= 0.1, "S21 at 6.5 GHz: " + fmt(s21) + " dB");
  return out;
}

Outcome loss_estimator() {
  Outcome out;
  const std::vector<int> external = {0, 3};
  const std::vector<int> internal = {1, 2};
  const std::array<std::array<double, 3>, 4> settings = {
      {{kPi, 0.0, 0.0}, {kPi, kPi, kPi}, {0.0, kPi, kPi}, {0.7, 2.1, 4.4}}};
  for (double loss : {0.2, 0.8, 1.2}) {
    DemuxTree tree;
    for (auto& m : tree.mzis) m.insertion_loss_db = loss;
    double worst = 0.0;
    for (const auto& phases : settings) {
      const auto t = demux_input_transmissions(tree, phases);
      worst = std::max(worst, std::abs(estimate_mzi_loss_from_demux(t, external, internal) - loss));
    }
    out.check(worst <= 0.01, fmt(loss) + " dB recovered within " + fmt(worst) + " dB");
  }
  return out;
}

Outcome two_photon_distributions() {
  Outcome out;
  double sum_err = 0.0;
  double oracle_err = 0.0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const ComplexMatrix u = haar_random_unitary(4, seed);
    const double x = 0.5 + 0.01 * static_cast<double>(seed);
    for (const auto& [k, l] : collision_free_pairs(4)) {
      const TwoPhotonDistribution d = two_photon_distribution(u, k, l, x);
      sum_err = std::max(sum_err, std::abs(d.total() - 1.0));
      const auto fock = oracle::fock_two_photon(u, k, l, x);
      for (const auto& [pattern, p] : d.entries)
        oracle_err = std::max(oracle_err, std::abs(p - fock.at({pattern.first, pattern.second})));
    }
  }
  out.check(sum_err <= 1e-9, "normalization error " + fmt(sum_err));
  out.check(oracle_err <= 1e-12, "max deviation from Fock oracle " + fmt(oracle_err));

  // No drive: every cell in the cross state maps input k to output 3 - k.
  const MeshConfig no_drive = rectangular_layout(4);
  const ComplexMatrix cross = compose(no_drive);
  double ideal_fidelity = 1.0;
  bool deterministic = true;
  std::vector<ProbabilityDistribution> reference;
  for (const auto& [k, l] : collision_free_pairs(4)) {
    const std::string label = std::to_string(3 - l) + "," + std::to_string(3 - k);
    std::vector<std::string> labels;
    std::vector<double> mass;
    for (const auto& [i, j] : collision_free_pairs(4)) {
      labels.push_back(std::to_string(i) + "," + std::to_string(j));
      mass.push_back(labels.back() == label ? 1.0 : 0.0);
    }
    const ProbabilityDistribution expected(labels, mass);
    const ProbabilityDistribution got = two_photon_distribution(cross, k, l, 0.927, true).collision_free();
    deterministic = deterministic && std::abs(got.at(label) - 1.0) <= 1e-12;
    ideal_fidelity = std::min(ideal_fidelity, statistical_fidelity(got, expected));
    reference.push_back(expected);
  }
  out.check(deterministic && std::abs(ideal_fidelity - 1.0) <= 1e-12,
            "no-drive mesh fidelity " + fmt(ideal_fidelity));

  // 21 dB extinction per cell and Gaussian phase noise of 1 % of 2 pi on every phase.
  const MZIParams leaky = mzi_with_extinction(21.0);
  std::mt19937_64 rng(11);
  std::normal_distribution<double> noise(0.0, 0.01 * kTwoPi);
  double worst = 1.0;
  double mean = 0.0;
  const int realizations = 50;
  for (int r = 0; r < realizations; ++r) {
    MeshConfig noisy = no_drive;
    for (MeshCell& c : noisy.cells) {
      c.theta += noise(rng);
      c.phi += noise(rng);
    }
    const ComplexMatrix t = compose(noisy, std::span<const MZIParams>(&leaky, 1));
    std::vector<ProbabilityDistribution> measured;
    for (const auto& [k, l] : collision_free_pairs(4))
      measured.push_back(two_photon_distribution(t, k, l, 0.927, true).collision_free());
    const double f = mean_statistical_fidelity(measured, reference);
    worst = std::min(worst, f);
    mean += f / realizations;
  }
  out.check(worst >= 0.95, "21 dB + 1% phase noise: min fidelity " + fmt(worst) + ", mean " + fmt(mean));
  return out;
}

Outcome reconstruction() {
  Outcome out;
  int successes = 0;
  double slowest = 0.0;
  double worst = 0.0;
  const int trials = 20;
  for (int trial = 0; trial < trials; ++trial) {
    const ComplexMatrix target = haar_random_unitary(4, 1000 + static_cast<std::uint64_t>(trial));
    const MeasuredStatistics stats = synthesize_statistics(target, 1.0);
    const auto start = Clock::now();
    const ReconstructionResult result = reconstruct_unitary(stats, static_cast<std::uint64_t>(trial));
    const double elapsed = seconds_since(start);
    const double distance = gauge_invariant_distance(result.unitary, target);
    slowest = std::max(slowest, elapsed);
    worst = std::max(worst, distance);
    if (distance <= 1e-3 && elapsed < 60.0) ++successes;
  }
  out.check(successes * 100 >= 95 * trials,
            std::to_string(successes) + "/" + std::to_string(trials) + " within 1e-3 (worst " + fmt(worst) + ")");
  out.check(slowest < 60.0, "slowest trial " + fmt(slowest) + " s");
  return out;
}

bool same_bytes(const fs::path& a, const fs::path& b, std::string& detail) {
  std::vector<fs::path> names;
  for (const auto& e : fs::directory_iterator(a)) names.push_back(e.path().filename());
  std::size_t count_b = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(b)) ++count_b;
  if (names.size() != count_b || names.empty()) {
    detail = "file sets differ";
    return false;
  }
  for (const auto& n : names) {
    if (!fs::exists(b / n) || io::read_text(a / n) != io::read_text(b / n)) {
      detail = n.string() + " differs";
      return false;
    }
  }
  return true;
}

Outcome cli_determinism(const std::string& tool) {
  Outcome out;
  if (tool.empty()) {
    out.check(false, "no qpsim executable given");
    return out;
  }
  const fs::path work = fs::temp_directory_path() / "qpsim_acceptance";
  fs::remove_all(work);
  fs::create_directories(work);
  int compared = 0;
  std::vector<std::string> commands;
  for (const auto& entry : fs::directory_iterator(QPSIM_EXAMPLES_DIR)) {
    const auto j = nlohmann::json::parse(io::read_text(entry.path()));
    if (!j.contains("experiment")) continue;
    commands.push_back(j.at("experiment").get<std::string>() + " " + entry.path().string() + " --seed 42");
  }
  commands.push_back("mesh decompose " + (fs::path(QPSIM_EXAMPLES_DIR) / "identity4.json").string());
  std::sort(commands.begin(), commands.end());
  for (const std::string& args : commands) {
    std::array<fs::path, 2> dirs = {work / (std::to_string(compared) + "a"), work / (std::to_string(compared) + "b")};
    bool ran = true;
    for (const auto& d : dirs) {
      const std::string cmd = tool + " " + args + " --quiet --output-dir " + d.string() + " > /dev/null 2>&1";
      ran = ran && std::system(cmd.c_str()) == 0;
    }
    std::string detail;
    const bool same = ran && same_bytes(dirs[0], dirs[1], detail);
    if (!same) out.check(false, args + ": " + (ran ? detail : "run failed"));
    ++compared;
  }
  fs::remove_all(work);
  out.check(compared >= 6, std::to_string(compared) + " CLI runs reproduced byte for byte");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string tool = argc > 1 ? argv[1] : "";
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"Clements round-trip", clements_round_trip},
      {"Permanent oracle", permanent_oracle},
      {"HOM physics", hom_physics},
      {"Router identity", router_identity},
      {"EOM model", eom_model},
      {"Loss estimator round-trip", loss_estimator},
      {"Two-photon distributions", two_photon_distributions},
      {"Reconstruction", reconstruction},
      {"Determinism", [&] { return cli_determinism(tool); }},
  };
  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.check(false, std::string("exception: ") + e.what());
    }
    all = all && o.pass;
    std::string notes;
    for (const auto& n : o.notes) notes += (notes.empty() ? "" : "; ") + n;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << i + 1 << " (" << criteria[i].first << "): " << notes
              << std::endl;
  }
  return all ? EXIT_SUCCESS : EXIT_FAILURE;
}
