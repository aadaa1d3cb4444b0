#include "qpsim/loss_budget.hpp"

#include <numeric>

#include "qpsim/errors.hpp"

namespace qpsim {

LossBudget::LossBudget(std::vector<LossEntry> entries) {
  for (LossEntry& e : entries) add(std::move(e.label), e.loss_db, e.grating_coupler);
}

void LossBudget::add(std::string label, double loss_db, bool grating_coupler) {
  if (!(loss_db >= 0.0) || !std::isfinite(loss_db))
    throw RangeError("loss budget: entry '" + label + "' must be a finite, non-negative loss magnitude");
  entries_.push_back({std::move(label), loss_db, grating_coupler});
}

void LossBudget::add_waveguide(std::string label, const WaveguideLossParams& w) { add(std::move(label), w.loss_db()); }

double LossBudget::total_db() const {
  return std::accumulate(entries_.begin(), entries_.end(), 0.0,
                         [](double acc, const LossEntry& e) { return acc + e.loss_db; });
}

double end_to_end_transmission(const LossBudget& budget) { return std::pow(10.0, -budget.total_db() / 10.0); }

LossBudget budget_at_wavelength(const LossBudget& budget_template, const GratingSpectrum& grating,
                                double wavelength_nm) {
  LossBudget out;
  for (const LossEntry& e : budget_template.entries())
    out.add(e.label, e.grating_coupler ? -grating.efficiency_db(wavelength_nm) : e.loss_db, e.grating_coupler);
  return out;
}

std::vector<double> sweep_wavelength(const LossBudget& budget_template, const GratingSpectrum& grating,
                                     std::span<const double> wavelengths_nm) {
  std::vector<double> out;
  out.reserve(wavelengths_nm.size());
  for (double wl : wavelengths_nm) out.push_back(end_to_end_transmission(budget_at_wavelength(budget_template, grating, wl)));
  return out;
}

}  // namespace qpsim
