#include "qpsim/components.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include "qpsim/errors.hpp"

namespace qpsim {

void PhaseShifterParams::validate() const {
  if (!(v_pi_V > 0.0)) throw RangeError("phase shifter: v_pi must be > 0");
  if (!(length_cm > 0.0)) throw RangeError("phase shifter: length must be > 0");
  if (!(f3db_GHz > 0.0)) throw RangeError("phase shifter: f3db must be > 0");
  if (!std::isfinite(phase_offset_rad)) throw RangeError("phase shifter: phase offset must be finite");
}

void CouplerParams::validate() const {
  const double r = effective_ratio();
  if (!(r >= 0.0 && r <= 1.0)) throw RangeError("coupler: effective splitting ratio must lie in [0, 1]");
}

void MZIParams::validate() const {
  shifter.validate();
  coupler_in.validate();
  coupler_out.validate();
  if (!(insertion_loss_db >= 0.0)) throw RangeError("MZI: insertion loss must be >= 0 dB");
}

double WaveguideLossParams::loss_db() const {
  if (!(alpha_db_per_cm >= 0.0)) throw RangeError("waveguide: loss coefficient must be >= 0");
  if (!(length_cm >= 0.0)) throw RangeError("waveguide: length must be >= 0");
  return alpha_db_per_cm * length_cm;
}

double phase_from_voltage(const PhaseShifterParams& p, double volts) {
  return p.phase_offset_rad + kPi * volts / p.v_pi_V;
}

Eigen::Matrix2cd coupler_matrix(const CouplerParams& c) {
  const double r = std::clamp(c.effective_ratio(), 0.0, 1.0);
  const double t = std::sqrt(1.0 - r);
  const double k = std::sqrt(r);
  Eigen::Matrix2cd m;
  m << Complex(t, 0.0), Complex(0.0, k), Complex(0.0, k), Complex(t, 0.0);
  return m;
}

Eigen::Matrix2cd mzi_transfer(const MZIParams& m, double phase) {
  Eigen::Matrix2cd arm = Eigen::Matrix2cd::Identity();
  arm(0, 0) = std::polar(1.0, phase);
  const double amplitude = std::pow(10.0, -m.insertion_loss_db / 20.0);
  return amplitude * (coupler_matrix(m.coupler_out) * arm * coupler_matrix(m.coupler_in));
}

namespace {

double bar_power(const MZIParams& m, double phase) { return std::norm(mzi_transfer(m, phase)(0, 0)); }

// Sweeps one period and polishes the best grid point with Brent's method.
template <typename Objective>
double polished_minimum(Objective&& objective) {
  constexpr int kGrid = 720;
  const double step = kTwoPi / kGrid;
  int best = 0;
  double best_value = objective(0.0);
  for (int i = 1; i < kGrid; ++i) {
    const double v = objective(i * step);
    if (v < best_value) {
      best_value = v;
      best = i;
    }
  }
  const double centre = best * step;
  const auto refined = boost::math::tools::brent_find_minima(objective, centre - step, centre + step,
                                                             std::numeric_limits<double>::digits / 2);
  return std::min(best_value, refined.second);
}

}  // namespace

double extinction_ratio(const MZIParams& m) {
  const double min_bar = polished_minimum([&](double phi) { return bar_power(m, phi); });
  const double max_bar = -polished_minimum([&](double phi) { return -bar_power(m, phi); });
  if (!(max_bar > 0.0)) return 0.0;
  const double floor = max_bar * std::pow(10.0, -kExtinctionCapDb / 10.0);
  return power_to_db(max_bar / std::max(min_bar, floor));
}

double leakage_floor(const MZIParams& m) {
  const double total = std::pow(10.0, -m.insertion_loss_db / 10.0);
  const double min_bar = polished_minimum([&](double phi) { return bar_power(m, phi); });
  return std::max(min_bar, 0.0) / total;
}

MZIParams mzi_with_extinction(double er_db, MZIParams base) {
  if (!(er_db > 0.0)) throw RangeError("mzi_with_extinction: extinction ratio must be > 0 dB");
  const double target = std::pow(10.0, -er_db / 10.0);
  base.coupler_in.imbalance = 0.0;
  const double headroom = 1.0 - base.coupler_in.splitting_ratio;
  auto excess = [&](double imbalance) {
    MZIParams trial = base;
    trial.coupler_in.imbalance = imbalance;
    return leakage_floor(trial) - target;
  };
  if (excess(0.0) > 0.0)
    throw RangeError("mzi_with_extinction: base MZI already leaks more than the requested extinction");
  if (excess(headroom) < 0.0) throw RangeError("mzi_with_extinction: extinction unreachable by imbalance");
  std::uintmax_t iterations = 200;
  const auto bracket = boost::math::tools::toms748_solve(excess, 0.0, headroom,
                                                         boost::math::tools::eps_tolerance<double>(50),
                                                         iterations);
  base.coupler_in.imbalance = 0.5 * (bracket.first + bracket.second);
  return base;
}

std::vector<double> eom_response(const PhaseShifterParams& p, std::span<const double> drive,
                                 double sample_rate_GHz) {
  if (!(sample_rate_GHz > 2.0 * p.f3db_GHz))
    throw AliasingError("eom_response: sample rate must exceed twice the 3 dB bandwidth");
  std::vector<double> out(drive.size());
  if (drive.empty()) return out;
  const double decay = std::exp(-kTwoPi * p.f3db_GHz / sample_rate_GHz);
  double state = drive[0];
  out[0] = state;
  for (std::size_t i = 1; i < drive.size(); ++i) {
    state = decay * state + (1.0 - decay) * drive[i];
    out[i] = state;
  }
  return out;
}

double eom_s21_db(const PhaseShifterParams& p, double frequency_GHz, double sample_rate_GHz) {
  if (!(frequency_GHz > 0.0)) throw RangeError("eom_s21_db: frequency must be > 0");
  if (!(frequency_GHz < 0.5 * sample_rate_GHz)) throw AliasingError("eom_s21_db: frequency above Nyquist");
  const double tau_ns = 1.0 / (kTwoPi * p.f3db_GHz);
  const double period_ns = 1.0 / frequency_GHz;
  const double settle_ns = 30.0 * tau_ns;
  const double window_ns = 20.0 * period_ns;
  const auto total = static_cast<std::size_t>(std::ceil((settle_ns + window_ns) * sample_rate_GHz)) + 1;
  const auto first = static_cast<std::size_t>(std::floor(settle_ns * sample_rate_GHz));
  std::vector<double> drive(total);
  for (std::size_t i = 0; i < total; ++i)
    drive[i] = std::sin(kTwoPi * frequency_GHz * static_cast<double>(i) / sample_rate_GHz);
  const std::vector<double> response = eom_response(p, drive, sample_rate_GHz);

  // Least-squares projection onto sin, cos and a constant.
  const auto rows = static_cast<Eigen::Index>(total - first);
  Eigen::MatrixXd basis(rows, 3);
  Eigen::VectorXd y(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const double t = static_cast<double>(first + static_cast<std::size_t>(r)) / sample_rate_GHz;
    basis(r, 0) = std::sin(kTwoPi * frequency_GHz * t);
    basis(r, 1) = std::cos(kTwoPi * frequency_GHz * t);
    basis(r, 2) = 1.0;
    y(r) = response[first + static_cast<std::size_t>(r)];
  }
  const Eigen::Vector3d coeff = basis.colPivHouseholderQr().solve(y);
  const double amplitude = std::hypot(coeff(0), coeff(1));
  return 20.0 * std::log10(amplitude);
}

double eom_cutoff_GHz(const PhaseShifterParams& p, double sample_rate_GHz) {
  const double half_power_db = 10.0 * std::log10(0.5);
  auto excess = [&](double f) { return eom_s21_db(p, f, sample_rate_GHz) - half_power_db; };
  double lo = p.f3db_GHz / 100.0;
  double hi = std::min(100.0 * p.f3db_GHz, 0.49 * sample_rate_GHz);
  if (excess(lo) < 0.0 || excess(hi) > 0.0)
    throw RangeError("eom_cutoff_GHz: -3 dB point not bracketed below Nyquist");
  std::uintmax_t iterations = 200;
  const auto root = boost::math::tools::toms748_solve(excess, lo, hi, boost::math::tools::eps_tolerance<double>(40),
                                                      iterations);
  return 0.5 * (root.first + root.second);
}

GratingSpectrum::GratingSpectrum(double center_nm, double peak_db, double bandwidth_1db_nm, double band_min_nm,
                                 double band_max_nm)
    : center_nm_(center_nm),
      peak_db_(peak_db),
      bandwidth_1db_nm_(bandwidth_1db_nm),
      band_min_nm_(band_min_nm),
      band_max_nm_(band_max_nm) {
  if (!(peak_db <= 0.0)) throw RangeError("grating: peak efficiency must be <= 0 dB");
  if (!(bandwidth_1db_nm > 0.0)) throw RangeError("grating: 1 dB bandwidth must be > 0");
  if (!(band_min_nm <= center_nm && center_nm <= band_max_nm))
    throw RangeError("grating: centre wavelength must lie inside the modelled band");
}

GratingSpectrum GratingSpectrum::sampled(std::vector<double> wavelengths_nm, std::vector<double> efficiency_db) {
  if (wavelengths_nm.size() != efficiency_db.size() || wavelengths_nm.size() < 2)
    throw ParseError("grating: sampled spectrum needs at least two aligned samples");
  for (std::size_t i = 1; i < wavelengths_nm.size(); ++i)
    if (!(wavelengths_nm[i] > wavelengths_nm[i - 1]))
      throw ParseError("grating: sample wavelengths must be strictly increasing");
  for (double e : efficiency_db)
    if (!(e <= 0.0)) throw RangeError("grating: sampled efficiencies must be <= 0 dB");
  GratingSpectrum g;
  const auto peak = std::max_element(efficiency_db.begin(), efficiency_db.end());
  g.center_nm_ = wavelengths_nm[static_cast<std::size_t>(peak - efficiency_db.begin())];
  g.peak_db_ = *peak;
  g.band_min_nm_ = wavelengths_nm.front();
  g.band_max_nm_ = wavelengths_nm.back();
  g.bandwidth_1db_nm_ = 0.0;
  g.samples_nm_ = std::move(wavelengths_nm);
  g.samples_db_ = std::move(efficiency_db);
  return g;
}

GratingSpectrum GratingSpectrum::from_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("grating: cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ParseError("grating: missing header line in " + path.string());
  std::vector<double> nm;
  std::vector<double> db;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream fields(line);
    std::string a;
    std::string b;
    if (!std::getline(fields, a, ',') || !std::getline(fields, b))
      throw ParseError("grating: line " + std::to_string(line_no) + " is not two comma-separated columns");
    try {
      nm.push_back(std::stod(a));
      db.push_back(std::stod(b));
    } catch (const std::exception&) {
      throw ParseError("grating: line " + std::to_string(line_no) + " has a non-numeric field");
    }
  }
  return sampled(std::move(nm), std::move(db));
}

double GratingSpectrum::efficiency_db(double wavelength_nm) const {
  if (!(wavelength_nm >= band_min_nm_ && wavelength_nm <= band_max_nm_))
    throw RangeError("grating: wavelength " + std::to_string(wavelength_nm) + " nm outside modelled band");
  if (is_sampled()) {
    const auto hi = std::lower_bound(samples_nm_.begin(), samples_nm_.end(), wavelength_nm);
    const auto i = static_cast<std::size_t>(hi - samples_nm_.begin());
    if (i == 0) return samples_db_.front();
    const double w = (wavelength_nm - samples_nm_[i - 1]) / (samples_nm_[i] - samples_nm_[i - 1]);
    return (1.0 - w) * samples_db_[i - 1] + w * samples_db_[i];
  }
  const double u = (wavelength_nm - center_nm_) / (0.5 * bandwidth_1db_nm_);
  return peak_db_ - u * u;
}

double GratingSpectrum::detuning_for_drop(double drop_db) const {
  if (is_sampled()) throw ArgumentError("grating: detuning_for_drop needs the parabolic model");
  if (!(drop_db >= 0.0)) throw RangeError("grating: drop must be >= 0 dB");
  return 0.5 * bandwidth_1db_nm_ * std::sqrt(drop_db);
}

double coupler_efficiency_from_loopback(double total_transmission_db, double waveguide_loss_db) {
  if (total_transmission_db > 0.0)
    throw RangeError("coupler_efficiency_from_loopback: loopback transmission must be <= 0 dB");
  if (waveguide_loss_db < 0.0)
    throw RangeError("coupler_efficiency_from_loopback: waveguide loss is a positive magnitude");
  return (total_transmission_db + waveguide_loss_db) / 2.0;
}

double estimate_mzi_loss_from_demux(std::span<const double> transmissions, std::span<const int> external_inputs,
                                    std::span<const int> internal_inputs) {
  if (external_inputs.empty() || internal_inputs.empty())
    throw ArgumentError("estimate_mzi_loss_from_demux: both input sets must be non-empty");
  auto mean_db = [&](std::span<const int> inputs) {
    double sum = 0.0;
    for (int i : inputs) {
      if (i < 0 || static_cast<std::size_t>(i) >= transmissions.size())
        throw ArgumentError("estimate_mzi_loss_from_demux: input index out of range");
      if (!(transmissions[static_cast<std::size_t>(i)] > 0.0))
        throw RangeError("estimate_mzi_loss_from_demux: transmissions must be positive");
      sum += power_to_db(transmissions[static_cast<std::size_t>(i)]);
    }
    return sum / static_cast<double>(inputs.size());
  };
  return mean_db(external_inputs) - mean_db(internal_inputs);
}

}  // namespace qpsim
