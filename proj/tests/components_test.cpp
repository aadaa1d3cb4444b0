#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "oracles.hpp"
#include "qpsim/components.hpp"
#include "qpsim/router.hpp"

using namespace qpsim;

TEST(PhaseFromVoltage, LinearInVoltage) {
  PhaseShifterParams p;
  p.v_pi_V = 4.5;
  EXPECT_DOUBLE_EQ(phase_from_voltage(p, 0.0), 0.0);
  EXPECT_NEAR(phase_from_voltage(p, 4.5), kPi, 1e-15);
  EXPECT_NEAR(phase_from_voltage(p, 2.25), kPi / 2.0, 1e-15);
  p.phase_offset_rad = 0.3;
  EXPECT_NEAR(phase_from_voltage(p, 4.5), kPi + 0.3, 1e-15);
}

TEST(PhaseShifter, VoltageLengthProductAndValidation) {
  PhaseShifterParams p;
  EXPECT_NEAR(p.voltage_length_product(), 0.6, 1e-12);
  p.v_pi_V = 0.0;
  EXPECT_THROW(p.validate(), RangeError);
}

TEST(MziTransfer, IdealExtremesAndHalfSplit) {
  const MZIParams ideal;
  EXPECT_NEAR(std::norm(mzi_transfer(ideal, 0.0)(0, 0)), 0.0, 1e-15);
  EXPECT_NEAR(std::norm(mzi_transfer(ideal, 0.0)(1, 0)), 1.0, 1e-15);
  EXPECT_NEAR(std::norm(mzi_transfer(ideal, kPi)(0, 0)), 1.0, 1e-15);
  // |M_00|^2 = |e^{i pi/2} - 1|^2 / 4 = 0.5
  EXPECT_NEAR(std::norm(mzi_transfer(ideal, kPi / 2.0)(0, 0)), 0.5, 1e-15);
}

TEST(MziTransfer, IdealIsUnitaryAndFollowsSinSquared) {
  const MZIParams ideal;
  for (int i = 0; i <= 2000; ++i) {
    const double phi = -2.0 * kPi + 4.0 * kPi * i / 2000.0;
    const Eigen::Matrix2cd m = mzi_transfer(ideal, phi);
    EXPECT_LT(unitarity_defect(m), 1e-12);
    EXPECT_NEAR(std::norm(m(0, 0)), std::pow(std::sin(phi / 2.0), 2), 1e-12);
  }
}

TEST(MziTransfer, InsertionLossScalesPower) {
  MZIParams m;
  m.insertion_loss_db = 0.8;
  const Eigen::Matrix2cd t = mzi_transfer(m, 1.234);
  EXPECT_NEAR(t.col(0).squaredNorm(), std::pow(10.0, -0.08), 1e-14);
  EXPECT_TRUE(is_subunitary(t));
  EXPECT_FALSE(is_unitary(t));
}

TEST(ExtinctionRatio, BalancedCouplersHitTheCap) { EXPECT_GE(extinction_ratio(MZIParams{}), 100.0); }

TEST(ExtinctionRatio, ImbalanceMatchesDenseSweepOracle) {
  MZIParams m;
  m.coupler_in.imbalance = 0.05;
  const auto [lo, hi] = oracle::bar_power_extremes([&](double phi) { return mzi_transfer(m, phi); }, 10000);
  const double oracle_db = 10.0 * std::log10(hi / lo);
  EXPECT_NEAR(extinction_ratio(m), oracle_db, 1e-3);
}

TEST(ExtinctionRatio, TwentyOneDecibelLeakage) {
  const MZIParams m = mzi_with_extinction(21.0);
  EXPECT_NEAR(leakage_floor(m), std::pow(10.0, -2.1), 1e-12);
  // Max bar power is 1 - leakage, so the ratio sits 10 log10(1 - L) below 21 dB.
  EXPECT_NEAR(extinction_ratio(m), 21.0 + 10.0 * std::log10(1.0 - std::pow(10.0, -2.1)), 1e-6);
  EXPECT_NEAR(extinction_ratio(m), 21.0, 0.05);
}

TEST(ExtinctionRatio, MinLeakageConsistentWithRatio) {
  for (double imbalance : {0.01, 0.03, 0.1}) {
    MZIParams m;
    m.coupler_out.imbalance = imbalance;
    const double er = extinction_ratio(m);
    const auto [lo, hi] = oracle::bar_power_extremes([&](double phi) { return mzi_transfer(m, phi); }, 20000);
    EXPECT_GT(lo, 0.0);
    EXPECT_NEAR(lo / hi, std::pow(10.0, -er / 10.0), 1e-6);
  }
}

TEST(EomResponse, ConstantDrivePassesUnchanged) {
  const PhaseShifterParams p;
  const std::vector<double> drive(500, 3.3);
  for (double y : eom_response(p, drive, 100.0)) EXPECT_DOUBLE_EQ(y, 3.3);
}

TEST(EomResponse, StepMatchesExponentialSettling) {
  const PhaseShifterParams p;
  const double fs = 200.0;
  std::vector<double> drive(400, 0.0);
  const std::size_t edge = 50;
  for (std::size_t i = edge; i < drive.size(); ++i) drive[i] = 1.0;
  const auto y = eom_response(p, drive, fs);
  const double tau = 1.0 / (kTwoPi * p.f3db_GHz);
  for (std::size_t i = edge; i < drive.size(); ++i) {
    const double t = static_cast<double>(i - (edge - 1)) / fs;  // held since the last low sample
    EXPECT_NEAR(y[i], 1.0 - std::exp(-t / tau), 1e-12);
  }
}

TEST(EomResponse, SinusoidAtCutoffLosesThreeDecibels) {
  const PhaseShifterParams p;
  EXPECT_NEAR(eom_s21_db(p, p.f3db_GHz, 1000.0), -3.0, 0.1);
}

TEST(EomResponse, IsLinear) {
  const PhaseShifterParams p;
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n;
  std::vector<double> x(300), y(300), mix(300);
  const double a = 1.7, b = -0.4;
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = n(rng);
    y[i] = n(rng);
    mix[i] = a * x[i] + b * y[i];
  }
  const auto rx = eom_response(p, x, 50.0);
  const auto ry = eom_response(p, y, 50.0);
  const auto rm = eom_response(p, mix, 50.0);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(rm[i], a * rx[i] + b * ry[i], 1e-12);
}

TEST(EomResponse, RejectsAliasedSampleRate) {
  const PhaseShifterParams p;
  const std::vector<double> drive(10, 1.0);
  EXPECT_THROW(eom_response(p, drive, 13.0), AliasingError);
  EXPECT_NO_THROW(eom_response(p, drive, 13.1));
}

TEST(Grating, PeakAndSymmetry) {
  const GratingSpectrum g;
  EXPECT_DOUBLE_EQ(grating_efficiency(g, 930.0), -3.4);
  for (double d : {1.0, 5.0, 12.5}) EXPECT_DOUBLE_EQ(grating_efficiency(g, 930.0 + d), grating_efficiency(g, 930.0 - d));
  EXPECT_THROW(grating_efficiency(g, 850.0), RangeError);
}

TEST(Grating, HalfMaxDetuningDropsThreeDecibels) {
  const GratingSpectrum g;
  const double d = g.detuning_for_drop(3.0);
  EXPECT_NEAR(grating_efficiency(g, 930.0 + d), -6.4, 1e-12);
  EXPECT_NEAR(grating_efficiency(g, 930.0 + 10.0), -4.4, 1e-12);  // 1 dB at half the 1 dB bandwidth
}

TEST(Grating, SampledCsvInterpolates) {
  const auto path = std::filesystem::temp_directory_path() / "qpsim_grating_test.csv";
  {
    std::ofstream out(path);
    out << "wavelength_nm,efficiency_db\n910,-6\n930,-3.4\n950,-5\n";
  }
  const GratingSpectrum g = GratingSpectrum::from_csv(path);
  EXPECT_DOUBLE_EQ(g.center_nm(), 930.0);
  EXPECT_DOUBLE_EQ(g.peak_db(), -3.4);
  EXPECT_NEAR(g.efficiency_db(920.0), -4.7, 1e-12);
  EXPECT_THROW(g.efficiency_db(960.0), RangeError);
  for (double wl = 910.0; wl <= 950.0; wl += 0.5) EXPECT_LE(g.efficiency_db(wl), g.peak_db());
  std::filesystem::remove(path);
}

TEST(Grating, CsvWithoutHeaderOrBadRowFails) {
  const auto path = std::filesystem::temp_directory_path() / "qpsim_grating_bad.csv";
  {
    std::ofstream out(path);
    out << "wavelength_nm,efficiency_db\n910;-6\n";
  }
  EXPECT_THROW(GratingSpectrum::from_csv(path), ParseError);
  std::filesystem::remove(path);
}

TEST(CouplerLoopback, HalvesTheDecibels) {
  EXPECT_DOUBLE_EQ(coupler_efficiency_from_loopback(-6.8), -3.4);
  EXPECT_DOUBLE_EQ(coupler_efficiency_from_loopback(0.0), 0.0);
  EXPECT_NEAR(coupler_efficiency_from_loopback(-10.0, 0.3), -4.85, 1e-12);
  EXPECT_THROW(coupler_efficiency_from_loopback(0.5), RangeError);
}

TEST(MziLossFromDemux, FabricatedDeviceNumbers) {
  const std::vector<double> t = {db_to_power(-5.0), db_to_power(-5.8), db_to_power(-5.8), db_to_power(-5.0)};
  const std::vector<int> external = {0, 3};
  const std::vector<int> internal = {1, 2};
  EXPECT_NEAR(estimate_mzi_loss_from_demux(t, external, internal), 0.8, 1e-12);
  const std::vector<double> flat(4, 0.3);
  EXPECT_NEAR(estimate_mzi_loss_from_demux(flat, external, internal), 0.0, 1e-12);
  EXPECT_THROW(estimate_mzi_loss_from_demux(t, std::vector<int>{}, internal), ArgumentError);
}

TEST(MziLossFromDemux, RecoversLossFromSimulatedTree) {
  for (double loss : {0.2, 0.8, 1.2, 2.5}) {
    DemuxTree tree;
    for (auto& m : tree.mzis) m.insertion_loss_db = loss;
    const auto t = demux_input_transmissions(tree, {0.4, 1.3, 2.2});
    const std::vector<int> external = {0, 3};
    const std::vector<int> internal = {1, 2};
    EXPECT_NEAR(estimate_mzi_loss_from_demux(t, external, internal), loss, 1e-9);
  }
}
