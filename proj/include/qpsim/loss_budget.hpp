#pragma once

#include <span>
#include <string>
#include <vector>

#include "qpsim/components.hpp"

namespace qpsim {

struct LossEntry {
  std::string label;
  double loss_db = 0.0;           // positive magnitude
  bool grating_coupler = false;   // recomputed from the spectrum in sweeps
};

class LossBudget {
 public:
  LossBudget() = default;
  explicit LossBudget(std::vector<LossEntry> entries);

  void add(std::string label, double loss_db, bool grating_coupler = false);
  void add_waveguide(std::string label, const WaveguideLossParams& w);

  const std::vector<LossEntry>& entries() const { return entries_; }
  double total_db() const;

 private:
  std::vector<LossEntry> entries_;
};

// 10^(-total_db / 10)
double end_to_end_transmission(const LossBudget& budget);

// Copy of `budget_template` with every grating-coupler entry set to the
// spectrum's loss at `wavelength_nm`.
LossBudget budget_at_wavelength(const LossBudget& budget_template, const GratingSpectrum& grating,
                                double wavelength_nm);

std::vector<double> sweep_wavelength(const LossBudget& budget_template, const GratingSpectrum& grating,
                                     std::span<const double> wavelengths_nm);

}  // namespace qpsim
