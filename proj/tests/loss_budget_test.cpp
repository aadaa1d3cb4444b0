#include <gtest/gtest.h>

#include <random>

#include "qpsim/loss_budget.hpp"

using namespace qpsim;

namespace {

LossBudget device_chain() {
  LossBudget b;
  b.add("grating in", 3.4, true);
  b.add("grating out", 3.4, true);
  b.add_waveguide("waveguide", WaveguideLossParams{0.84, 0.5});
  b.add("mzi", 0.8);
  return b;
}

}  // namespace

TEST(LossBudget, EmptyIsLossless) { EXPECT_DOUBLE_EQ(end_to_end_transmission(LossBudget{}), 1.0); }

TEST(LossBudget, DeviceComponentChain) {
  const LossBudget b = device_chain();
  EXPECT_NEAR(b.total_db(), 8.02, 1e-12);
  EXPECT_NEAR(end_to_end_transmission(b), 0.158, 5e-4);
}

TEST(LossBudget, DoublingSquaresTransmission) {
  const LossBudget b = device_chain();
  LossBudget doubled;
  for (const auto& e : b.entries()) doubled.add(e.label, 2.0 * e.loss_db);
  EXPECT_NEAR(end_to_end_transmission(doubled), std::pow(end_to_end_transmission(b), 2), 1e-15);
}

TEST(LossBudget, DecibelAdditivityIsMultiplicative) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> loss(0.0, 3.0);
  for (int trial = 0; trial < 100; ++trial) {
    LossBudget b;
    double product = 1.0;
    for (int i = 0; i < 1 + trial % 7; ++i) {
      const double l = loss(rng);
      b.add("c" + std::to_string(i), l);
      product *= std::pow(10.0, -l / 10.0);
    }
    EXPECT_NEAR(end_to_end_transmission(b), product, 1e-12 * product);
  }
}

TEST(LossBudget, RejectsNegativeLoss) { EXPECT_THROW(LossBudget{}.add("gain", -1.0), RangeError); }

TEST(SweepWavelength, PeakAtGratingCentre) {
  const GratingSpectrum g;
  const LossBudget b = device_chain();
  const LossBudget at_centre = budget_at_wavelength(b, g, 930.0);
  EXPECT_DOUBLE_EQ(at_centre.entries()[0].loss_db, 3.4);
  std::vector<double> wl;
  for (double w = 905.0; w <= 955.0; w += 0.5) wl.push_back(w);
  const auto t = sweep_wavelength(b, g, wl);
  const auto best = std::max_element(t.begin(), t.end()) - t.begin();
  EXPECT_DOUBLE_EQ(wl[static_cast<std::size_t>(best)], 930.0);
}

TEST(SweepWavelength, HalfEfficiencyDetuningCostsSixDecibels) {
  const GratingSpectrum g;
  const LossBudget b = device_chain();
  const std::vector<double> wl = {930.0, 930.0 + g.detuning_for_drop(3.0)};
  const auto t = sweep_wavelength(b, g, wl);
  EXPECT_NEAR(10.0 * std::log10(t[0] / t[1]), 6.0, 1e-12);
}

TEST(SweepWavelength, SingleWavelengthMatchesStaticBudget) {
  const GratingSpectrum g;
  const std::vector<double> wl = {930.0};
  EXPECT_NEAR(sweep_wavelength(device_chain(), g, wl)[0], end_to_end_transmission(device_chain()), 1e-15);
  const std::vector<double> outside = {990.0};
  EXPECT_THROW(sweep_wavelength(device_chain(), g, outside), RangeError);
}
