#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "qpsim/components.hpp"
#include "qpsim/linalg.hpp"
#include "qpsim/photon.hpp"

namespace qpsim {

inline constexpr int kDemuxOutputs = 4;
inline constexpr int kSlotsPerFrame = 4;

// Three-MZI 1x4 tree on four waveguides. The first-layer MZI acts on modes
// (1, 2), the second layer on (0, 1) and (2, 3). Modes 1 and 2 are the
// internal inputs (two MZIs to any output), modes 0 and 3 the external ones
// (one MZI). The photon stream enters mode 1.
struct DemuxTree {
  std::array<MZIParams, 3> mzis;  // first layer, upper second layer, lower second layer
};

inline constexpr int kDemuxInputMode = 1;

ComplexMatrix demux_transfer(const DemuxTree& tree, const std::array<double, 3>& phases);

// Total output power per input mode for fixed internal phases.
std::array<double, kDemuxOutputs> demux_input_transmissions(const DemuxTree& tree,
                                                            const std::array<double, 3>& phases);

struct Waveform {
  std::vector<double> t_ns;
  std::vector<double> volts;
};

// Named drive channels and the MZIs each one feeds (0: first layer,
// 1 and 2: second layer).
struct PulseProgram {
  std::map<std::string, Waveform> channels;
  std::map<std::string, std::vector<int>> routing;

  // Checks aligned uniform grids and that every MZI is driven exactly once.
  void validate() const;
  double start_ns() const;
  double step_ns() const;
  std::size_t samples() const;
};

// Two-channel square-wave program for n_frames four-photon frames. Slot k of
// a frame spans [k T, (k + 1) T). "layer1" holds V_pi for slots 0-1 and 0 V
// for slots 2-3 (edges every 2T); "layer2" drives both second-layer MZIs with
// 0, V_pi, V_pi, 0 (period 4T). Slot k then exits output k.
PulseProgram default_pulse_program(double repetition_period_ns, double v_pi_V, int n_frames = 1,
                                   int samples_per_slot = 1380);

struct TimeTrace {
  std::vector<double> time_ns;                                 // photon arrival instants
  std::vector<std::array<double, kDemuxOutputs>> probability;  // per output at each arrival
  double frame_period_ns = 0.0;

  int slot(std::size_t arrival) const { return static_cast<int>(arrival % kSlotsPerFrame); }
};

struct DemuxOptions {
  // First photon arrives at origin + T / 2 (slot centres).
  double arrival_origin_ns = 0.0;
};

// Filters each channel through its MZIs' EOM response, samples the phase at
// every photon arrival and records the output probabilities of the tree.
// Throws TimingError when the program does not cover n_frames frames.
TimeTrace simulate_demux(const DemuxTree& tree, const PulseProgram& program, const SourceModel& source,
                         int n_frames, const DemuxOptions& options = {});

struct SwitchMetrics {
  std::array<double, kSlotsPerFrame> slot_probability{};
  double switching_probability = 0.0;
  double suppression_db = 0.0;  // -infinity when switching is perfect
};

// Correct-port probability (normalized to the detected total at each
// arrival) averaged per slot and overall; suppression is 10 log10(1 - p).
// Throws ArgumentError unless every slot is assigned a valid output.
SwitchMetrics switch_metrics(const TimeTrace& trace, const std::map<int, int>& assignment);
std::map<int, int> default_slot_assignment();

double suppression_db(double switching_probability);

// Common static phase error added to all three MZIs so that the ideal-timing
// switching probability of default_pulse_program equals `target`. Returns the
// tree with the error applied to each shifter's phase offset.
DemuxTree calibrate_to_switching_probability(const DemuxTree& tree, double target);

// Switching probability with phases held at the ideal per-slot settings
// (no EOM dynamics).
double static_switching_probability(const DemuxTree& tree);

}  // namespace qpsim
