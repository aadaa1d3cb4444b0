#include "qpsim/router.hpp"

#include <algorithm>
#include <limits>
#include <set>

#include <boost/math/tools/roots.hpp>

#include "qpsim/errors.hpp"

namespace qpsim {

namespace {

constexpr int kFirstLayerMode = 1;
constexpr std::array<int, 3> kMziUpperMode = {kFirstLayerMode, 0, 2};

// Internal phase settings (as multiples of pi on top of each shifter's
// offset) that route slot k of a frame to output k.
constexpr std::array<std::array<int, 3>, kSlotsPerFrame> kSlotHalfTurns = {{
    {1, 0, 0},
    {1, 1, 1},
    {0, 1, 1},
    {0, 0, 0},
}};

}  // namespace

ComplexMatrix demux_transfer(const DemuxTree& tree, const std::array<double, 3>& phases) {
  ComplexMatrix u = ComplexMatrix::Identity(kDemuxOutputs, kDemuxOutputs);
  for (std::size_t i = 0; i < 3; ++i)
    apply_two_mode_left(mzi_transfer(tree.mzis[i], phases[i]), kMziUpperMode[i], u);
  return u;
}

std::array<double, kDemuxOutputs> demux_input_transmissions(const DemuxTree& tree,
                                                            const std::array<double, 3>& phases) {
  const ComplexMatrix u = demux_transfer(tree, phases);
  std::array<double, kDemuxOutputs> out{};
  for (int i = 0; i < kDemuxOutputs; ++i) out[static_cast<std::size_t>(i)] = u.col(i).squaredNorm();
  return out;
}

void PulseProgram::validate() const {
  if (channels.empty()) throw TimingError("pulse program: no channels");
  const Waveform& ref = channels.begin()->second;
  if (ref.t_ns.size() < 2) throw TimingError("pulse program: waveforms need at least two samples");
  const double step = ref.t_ns[1] - ref.t_ns[0];
  if (!(step > 0.0)) throw TimingError("pulse program: time grid must increase");
  for (const auto& [name, w] : channels) {
    if (w.t_ns.size() != w.volts.size())
      throw TimingError("pulse program: channel '" + name + "' has mismatched time and voltage arrays");
    if (w.t_ns.size() != ref.t_ns.size())
      throw TimingError("pulse program: channel '" + name + "' is not aligned with the others");
    for (std::size_t i = 0; i < w.t_ns.size(); ++i) {
      const double expected = ref.t_ns[0] + static_cast<double>(i) * step;
      if (std::abs(w.t_ns[i] - expected) > 1e-9 * std::max(1.0, std::abs(expected)) ||
          std::abs(w.t_ns[i] - ref.t_ns[i]) > 1e-12 * std::max(1.0, std::abs(expected)))
        throw TimingError("pulse program: channel '" + name + "' has a non-uniform or misaligned time grid");
      if (!std::isfinite(w.volts[i])) throw TimingError("pulse program: channel '" + name + "' has non-finite voltage");
    }
  }
  std::array<int, 3> driven{};
  for (const auto& [name, mzis] : routing) {
    if (!channels.contains(name)) throw TimingError("pulse program: routing names unknown channel '" + name + "'");
    for (int m : mzis) {
      if (m < 0 || m > 2) throw TimingError("pulse program: routing targets MZI outside 0..2");
      ++driven[static_cast<std::size_t>(m)];
    }
  }
  for (int d : driven)
    if (d != 1) throw TimingError("pulse program: every MZI must be driven by exactly one channel");
}

double PulseProgram::start_ns() const { return channels.begin()->second.t_ns.front(); }

double PulseProgram::step_ns() const {
  const auto& t = channels.begin()->second.t_ns;
  return (t.back() - t.front()) / static_cast<double>(t.size() - 1);
}

std::size_t PulseProgram::samples() const { return channels.begin()->second.t_ns.size(); }

PulseProgram default_pulse_program(double repetition_period_ns, double v_pi_V, int n_frames, int samples_per_slot) {
  if (!(repetition_period_ns > 0.0)) throw RangeError("default_pulse_program: repetition period must be > 0");
  if (n_frames < 1 || samples_per_slot < 2) throw ArgumentError("default_pulse_program: need frames and samples");
  const double dt = repetition_period_ns / samples_per_slot;
  const std::size_t n = static_cast<std::size_t>(n_frames) * kSlotsPerFrame * static_cast<std::size_t>(samples_per_slot) + 1;
  Waveform layer1;
  Waveform layer2;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * dt;
    const auto slot = (i / static_cast<std::size_t>(samples_per_slot)) % kSlotsPerFrame;
    layer1.t_ns.push_back(t);
    layer2.t_ns.push_back(t);
    layer1.volts.push_back(slot < 2 ? v_pi_V : 0.0);
    layer2.volts.push_back(slot == 1 || slot == 2 ? v_pi_V : 0.0);
  }
  PulseProgram program;
  program.channels.emplace("layer1", std::move(layer1));
  program.channels.emplace("layer2", std::move(layer2));
  program.routing["layer1"] = {0};
  program.routing["layer2"] = {1, 2};
  return program;
}

TimeTrace simulate_demux(const DemuxTree& tree, const PulseProgram& program, const SourceModel& source, int n_frames,
                         const DemuxOptions& options) {
  for (const MZIParams& m : tree.mzis) m.validate();
  source.validate();
  program.validate();
  if (n_frames < 1) throw ArgumentError("simulate_demux: n_frames must be >= 1");
  const double period = source.repetition_period_ns;
  const double start = program.start_ns();
  const double step = program.step_ns();
  const double end = start + step * static_cast<double>(program.samples() - 1);
  const double needed_end = options.arrival_origin_ns + n_frames * kSlotsPerFrame * period;
  const double slack = 1e-9 * std::max(1.0, std::abs(needed_end));
  if (options.arrival_origin_ns < start - slack || needed_end > end + slack)
    throw TimingError("simulate_demux: program does not cover the requested photon frames");

  const double sample_rate = 1.0 / step;
  std::array<std::vector<double>, 3> filtered;
  for (const auto& [name, mzis] : program.routing) {
    const Waveform& w = program.channels.at(name);
    for (int m : mzis)
      filtered[static_cast<std::size_t>(m)] = eom_response(tree.mzis[static_cast<std::size_t>(m)].shifter, w.volts, sample_rate);
  }

  auto sample_at = [&](const std::vector<double>& v, double t) {
    const double pos = std::clamp((t - start) / step, 0.0, static_cast<double>(v.size() - 1));
    const auto i = static_cast<std::size_t>(std::floor(pos));
    if (i + 1 >= v.size()) return v.back();
    const double frac = pos - static_cast<double>(i);
    return (1.0 - frac) * v[i] + frac * v[i + 1];
  };

  TimeTrace trace;
  trace.frame_period_ns = kSlotsPerFrame * period;
  const int arrivals = n_frames * kSlotsPerFrame;
  for (int k = 0; k < arrivals; ++k) {
    const double t = options.arrival_origin_ns + (k + 0.5) * period;
    std::array<double, 3> phases{};
    for (std::size_t m = 0; m < 3; ++m)
      phases[m] = phase_from_voltage(tree.mzis[m].shifter, sample_at(filtered[m], t));
    const ComplexMatrix u = demux_transfer(tree, phases);
    std::array<double, kDemuxOutputs> probs{};
    for (int o = 0; o < kDemuxOutputs; ++o) probs[static_cast<std::size_t>(o)] = std::norm(u(o, kDemuxInputMode));
    trace.time_ns.push_back(t);
    trace.probability.push_back(probs);
  }
  return trace;
}

double suppression_db(double switching_probability) {
  const double wrong = 1.0 - switching_probability;
  if (wrong <= 0.0) return -std::numeric_limits<double>::infinity();
  return power_to_db(wrong);
}

std::map<int, int> default_slot_assignment() { return {{0, 0}, {1, 1}, {2, 2}, {3, 3}}; }

SwitchMetrics switch_metrics(const TimeTrace& trace, const std::map<int, int>& assignment) {
  for (int s = 0; s < kSlotsPerFrame; ++s) {
    const auto it = assignment.find(s);
    if (it == assignment.end()) throw ArgumentError("switch_metrics: slot " + std::to_string(s) + " is unassigned");
    if (it->second < 0 || it->second >= kDemuxOutputs)
      throw ArgumentError("switch_metrics: slot " + std::to_string(s) + " assigned to an invalid output");
  }
  if (trace.probability.empty()) throw ArgumentError("switch_metrics: empty trace");
  std::array<double, kSlotsPerFrame> sum{};
  std::array<int, kSlotsPerFrame> count{};
  for (std::size_t a = 0; a < trace.probability.size(); ++a) {
    const auto& probs = trace.probability[a];
    double total = 0.0;
    for (double p : probs) total += p;
    if (!(total > 0.0)) continue;
    const int s = trace.slot(a);
    sum[static_cast<std::size_t>(s)] += probs[static_cast<std::size_t>(assignment.at(s))] / total;
    ++count[static_cast<std::size_t>(s)];
  }
  SwitchMetrics metrics;
  double mean = 0.0;
  for (std::size_t s = 0; s < kSlotsPerFrame; ++s) {
    if (count[s] == 0) throw ArgumentError("switch_metrics: trace has no detected photons in some slot");
    metrics.slot_probability[s] = sum[s] / count[s];
    mean += metrics.slot_probability[s];
  }
  metrics.switching_probability = mean / kSlotsPerFrame;
  metrics.suppression_db = suppression_db(metrics.switching_probability);
  return metrics;
}

double static_switching_probability(const DemuxTree& tree) {
  double mean = 0.0;
  for (int s = 0; s < kSlotsPerFrame; ++s) {
    std::array<double, 3> phases{};
    for (std::size_t m = 0; m < 3; ++m)
      phases[m] = tree.mzis[m].shifter.phase_offset_rad + kPi * kSlotHalfTurns[static_cast<std::size_t>(s)][m];
    const ComplexMatrix u = demux_transfer(tree, phases);
    const double total = u.col(kDemuxInputMode).squaredNorm();
    mean += std::norm(u(s, kDemuxInputMode)) / total;
  }
  return mean / kSlotsPerFrame;
}

DemuxTree calibrate_to_switching_probability(const DemuxTree& tree, double target) {
  auto with_error = [&](double error) {
    DemuxTree t = tree;
    for (MZIParams& m : t.mzis) m.shifter.phase_offset_rad += error;
    return t;
  };
  auto excess = [&](double error) { return static_switching_probability(with_error(error)) - target; };
  const double at_zero = excess(0.0);
  if (at_zero < 0.0) throw RangeError("calibrate_to_switching_probability: target above the error-free value");
  if (at_zero == 0.0) return tree;
  if (excess(kPi / 2.0) > 0.0) throw RangeError("calibrate_to_switching_probability: target unreachable");
  std::uintmax_t iterations = 200;
  const auto root = boost::math::tools::toms748_solve(excess, 0.0, kPi / 2.0,
                                                      boost::math::tools::eps_tolerance<double>(50), iterations);
  return with_error(0.5 * (root.first + root.second));
}

}  // namespace qpsim
