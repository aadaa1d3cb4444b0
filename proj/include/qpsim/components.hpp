#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "qpsim/linalg.hpp"

namespace qpsim {

// Electro-optic phase shifter. Defaults are the fabricated LNOI modulator:
// V_pi 4.5 V at V_pi*L 0.6 V cm, 6.5 GHz electro-optic bandwidth.
struct PhaseShifterParams {
  double v_pi_V = 4.5;
  double length_cm = 0.6 / 4.5;
  double phase_offset_rad = 0.0;
  double f3db_GHz = 6.5;

  double voltage_length_product() const { return v_pi_V * length_cm; }
  void validate() const;
};

// Directional coupler; `splitting_ratio` is the power fraction coupled to
// the opposite waveguide.
struct CouplerParams {
  double splitting_ratio = 0.5;
  double imbalance = 0.0;

  double effective_ratio() const { return splitting_ratio + imbalance; }
  void validate() const;
};

struct MZIParams {
  PhaseShifterParams shifter;
  CouplerParams coupler_in;
  CouplerParams coupler_out;
  double insertion_loss_db = 0.0;

  void validate() const;
};

struct WaveguideLossParams {
  double alpha_db_per_cm = 0.84;
  double length_cm = 0.0;

  double loss_db() const;
};

// phase_offset + pi * v / v_pi
double phase_from_voltage(const PhaseShifterParams& p, double volts);

// [[t, i k], [i k, t]] with t = sqrt(1 - r), k = sqrt(r).
Eigen::Matrix2cd coupler_matrix(const CouplerParams& c);

// C_out * diag(e^{i phase}, 1) * C_in, scaled by the insertion-loss amplitude.
// Mode 0 carries the phase shifter. With ideal couplers the bar power
// |M_00|^2 is sin^2(phase / 2): phase 0 is the cross state, pi the bar state.
Eigen::Matrix2cd mzi_transfer(const MZIParams& m, double phase);

// Sentinel returned by extinction_ratio() for perfectly balanced couplers.
inline constexpr double kExtinctionCapDb = 200.0;

// 10 log10(max bar power / min bar power) over the internal phase.
double extinction_ratio(const MZIParams& m);

// Smallest fraction of the transmitted light that stays in the bar port
// (min over phase of |M_00|^2 / (|M_00|^2 + |M_10|^2)).
double leakage_floor(const MZIParams& m);

// Returns `base` with the input-coupler imbalance solved so that
// leakage_floor() equals 10^(-er_db / 10).
MZIParams mzi_with_extinction(double er_db, MZIParams base = {});

// Single-pole low-pass with the shifter's f3db. Each drive sample is held
// over the interval that ends at it, so steady inputs pass with gain 1 and a
// step reaches 1 - exp(-t / tau), tau = 1 / (2 pi f3db), from the last low
// sample. Throws AliasingError unless sample_rate > 2 f3db.
std::vector<double> eom_response(const PhaseShifterParams& p, std::span<const double> drive,
                                 double sample_rate_GHz);

// Simulated small-signal S21 (power gain, dB) obtained by driving
// eom_response() with a sinusoid and demodulating its steady state.
double eom_s21_db(const PhaseShifterParams& p, double frequency_GHz, double sample_rate_GHz);

// Frequency where the simulated S21 crosses -3 dB.
double eom_cutoff_GHz(const PhaseShifterParams& p, double sample_rate_GHz);

// Grating coupler spectrum: either a parabola in dB around the peak
// (parameterized by its 1 dB full bandwidth) or a sampled curve with linear
// interpolation.
class GratingSpectrum {
 public:
  GratingSpectrum() = default;
  GratingSpectrum(double center_nm, double peak_db, double bandwidth_1db_nm, double band_min_nm,
                  double band_max_nm);

  static GratingSpectrum sampled(std::vector<double> wavelengths_nm, std::vector<double> efficiency_db);
  // Two-column CSV (wavelength_nm, efficiency_db) with a header line.
  static GratingSpectrum from_csv(const std::filesystem::path& path);

  double efficiency_db(double wavelength_nm) const;
  double center_nm() const { return center_nm_; }
  double peak_db() const { return peak_db_; }
  double band_min_nm() const { return band_min_nm_; }
  double band_max_nm() const { return band_max_nm_; }
  double bandwidth_1db_nm() const { return bandwidth_1db_nm_; }
  bool is_sampled() const { return !samples_nm_.empty(); }

  // Detuning from the center at which the efficiency is `drop_db` below the
  // peak (parabolic model only).
  double detuning_for_drop(double drop_db) const;

 private:
  double center_nm_ = 930.0;
  double peak_db_ = -3.4;
  double bandwidth_1db_nm_ = 20.0;
  double band_min_nm_ = 900.0;
  double band_max_nm_ = 960.0;
  std::vector<double> samples_nm_;
  std::vector<double> samples_db_;
};

inline double grating_efficiency(const GratingSpectrum& g, double wavelength_nm) {
  return g.efficiency_db(wavelength_nm);
}

// Per-coupler efficiency from a two-coupler loopback: half the loopback dB
// after adding back the (positive) waveguide loss budget.
double coupler_efficiency_from_loopback(double total_transmission_db, double waveguide_loss_db = 0.0);

// Per-MZI insertion loss from a demultiplexer characterisation: inputs that
// traverse one MZI (external) against inputs that traverse two (internal).
// `transmissions` holds each input's linear power summed over all outputs.
double estimate_mzi_loss_from_demux(std::span<const double> transmissions,
                                    std::span<const int> external_inputs,
                                    std::span<const int> internal_inputs);

inline double db_to_power(double db) { return std::pow(10.0, db / 10.0); }
inline double power_to_db(double power) { return 10.0 * std::log10(power); }

}  // namespace qpsim
