#include "qpsim/photon.hpp"

#include <algorithm>
#include <string>

#include "least_squares.hpp"
#include "qpsim/errors.hpp"
#include "qpsim/permanent.hpp"

namespace qpsim {

void SourceModel::validate() const {
  if (!(repetition_period_ns > 0.0)) throw RangeError("source: repetition period must be > 0");
  if (!(indistinguishability >= 0.0 && indistinguishability <= 1.0))
    throw RangeError("source: indistinguishability must lie in [0, 1]");
  if (!(g2_zero >= 0.0 && g2_zero < 1.0)) throw RangeError("source: g2(0) must lie in [0, 1)");
  if (!(end_to_end_efficiency > 0.0 && end_to_end_efficiency <= 1.0))
    throw RangeError("source: efficiency must lie in (0, 1]");
}

double accidental_coincidence_floor(const SourceModel& s) {
  s.validate();
  return s.g2_zero / 2.0;
}

double effective_pair_overlap(const SourceModel& s, double chip_penalty) {
  if (!(chip_penalty >= 0.0 && chip_penalty <= 1.0))
    throw RangeError("effective_pair_overlap: chip penalty must lie in [0, 1]");
  s.validate();
  return s.indistinguishability * chip_penalty;
}

namespace {

std::string pattern_label(const OutputPattern& p) {
  return std::to_string(p.first) + "," + std::to_string(p.second);
}

void check_mode(const ComplexMatrix& t, int mode, const char* what) {
  if (mode < 0 || mode >= t.cols()) throw DimensionError(std::string(what) + ": mode index out of range");
}

}  // namespace

double TwoPhotonDistribution::probability(int i, int j) const {
  if (i > j) std::swap(i, j);
  for (const auto& [pattern, p] : entries)
    if (pattern.first == i && pattern.second == j) return p;
  return 0.0;
}

double TwoPhotonDistribution::total() const {
  double sum = 0.0;
  for (const auto& entry : entries) sum += entry.second;
  return sum;
}

ProbabilityDistribution TwoPhotonDistribution::collision_free() const {
  std::vector<std::string> labels;
  std::vector<double> probs;
  for (const auto& [pattern, p] : entries) {
    if (pattern.first == pattern.second) continue;
    labels.push_back(pattern_label(pattern));
    probs.push_back(p);
  }
  return ProbabilityDistribution(std::move(labels), std::move(probs)).normalized_copy();
}

ProbabilityDistribution TwoPhotonDistribution::as_distribution() const {
  std::vector<std::string> labels;
  std::vector<double> probs;
  for (const auto& [pattern, p] : entries) {
    labels.push_back(pattern_label(pattern));
    probs.push_back(p);
  }
  return {std::move(labels), std::move(probs)};
}

ProbabilityDistribution single_photon_distribution(const ComplexMatrix& t, int input) {
  check_mode(t, input, "single_photon_distribution");
  std::vector<std::string> labels;
  std::vector<double> probs;
  for (Eigen::Index j = 0; j < t.rows(); ++j) {
    labels.push_back(std::to_string(j));
    probs.push_back(std::norm(t(j, input)));
  }
  return {std::move(labels), std::move(probs)};
}

TwoPhotonDistribution two_photon_distribution(const ComplexMatrix& t, int k, int l, double x,
                                              bool collision_free_only) {
  if (k == l) throw ArgumentError("two_photon_distribution: input modes must differ");
  check_mode(t, k, "two_photon_distribution");
  check_mode(t, l, "two_photon_distribution");
  if (!(x >= 0.0 && x <= 1.0)) throw RangeError("two_photon_distribution: overlap must lie in [0, 1]");
  if (k > l) std::swap(k, l);
  TwoPhotonDistribution out;
  out.input_first = k;
  out.input_second = l;
  out.collision_free_only = collision_free_only;
  const int n = static_cast<int>(t.rows());
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      double p = 0.0;
      if (i == j) {
        // Indistinguishable photons bunch with weight 2|t_ik t_il|^2; distinguishable
        // ones land together with |t_ik|^2 |t_il|^2.
        const double single = std::norm(t(i, k) * t(i, l));
        if (collision_free_only) continue;
        p = x * 2.0 * single + (1.0 - x) * single;
      } else {
        Eigen::Matrix2cd sub;
        sub << t(i, k), t(i, l), t(j, k), t(j, l);
        const double indistinguishable = std::norm(permanent(sub));
        const double distinguishable = std::norm(t(i, k) * t(j, l)) + std::norm(t(i, l) * t(j, k));
        p = x * indistinguishable + (1.0 - x) * distinguishable;
      }
      out.entries.push_back({OutputPattern{i, j}, p});
    }
  }
  return out;
}

double collision_free_probability(const ComplexMatrix& t, std::span<const int> inputs,
                                  std::span<const int> outputs) {
  if (inputs.size() != outputs.size()) throw DimensionError("collision_free_probability: photon count mismatch");
  const auto n = static_cast<Eigen::Index>(inputs.size());
  ComplexMatrix sub(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    check_mode(t, outputs[static_cast<std::size_t>(r)], "collision_free_probability");
    for (Eigen::Index c = 0; c < n; ++c) {
      check_mode(t, inputs[static_cast<std::size_t>(c)], "collision_free_probability");
      sub(r, c) = t(outputs[static_cast<std::size_t>(r)], inputs[static_cast<std::size_t>(c)]);
    }
  }
  return std::norm(permanent(sub));
}

std::vector<std::pair<int, int>> collision_free_pairs(int n_modes) {
  std::vector<std::pair<int, int>> pairs;
  for (int k = 0; k < n_modes; ++k)
    for (int l = k + 1; l < n_modes; ++l) pairs.emplace_back(k, l);
  return pairs;
}

std::vector<double> hom_fringe(const MZIParams& m, double x, std::span<const double> phases,
                               double accidental_floor) {
  if (phases.empty()) throw ArgumentError("hom_fringe: no phases given");
  std::vector<double> out;
  out.reserve(phases.size());
  for (double phi : phases) {
    const Eigen::Matrix2cd mzi = mzi_transfer(m, phi);
    const ComplexMatrix t = mzi;
    out.push_back(two_photon_distribution(t, 0, 1, x).probability(0, 1) + accidental_floor);
  }
  return out;
}

double fringe_contrast(double x) { return (1.0 + x) / (3.0 - x); }

HomFit fit_hom_visibility(std::span<const double> drive, std::span<const double> counts,
                          const HomFitOptions& options) {
  if (drive.size() != counts.size()) throw ArgumentError("fit_hom_visibility: drive and counts differ in length");
  if (drive.size() < 5) throw FitError("fit_hom_visibility: at least 5 samples are required");
  const auto [lo, hi] = std::minmax_element(drive.begin(), drive.end());
  if (*hi - *lo <= 0.0) throw FitError("fit_hom_visibility: degenerate sampling, all drive values equal");
  if ((*hi - *lo) * std::abs(options.initial_scale) < kPi / 2.0 - 1e-9)
    throw FitError("fit_hom_visibility: samples must span at least half a fringe period");
  const double peak = *std::max_element(counts.begin(), counts.end());
  if (!(peak > 0.0)) throw FitError("fit_hom_visibility: counts are all zero");

  const auto m = static_cast<Eigen::Index>(drive.size());
  Eigen::Map<const Eigen::VectorXd> xs(drive.data(), m);
  Eigen::Map<const Eigen::VectorXd> ys(counts.data(), m);

  // Parameters: amplitude, visibility, offset, scale. Counts are fitted in
  // units of the peak so the problem is scale-free.
  auto model = [&](const Eigen::VectorXd& p) -> Eigen::VectorXd {
    const double scale = options.fit_phase_calibration ? p(3) : options.initial_scale;
    const double offset = options.fit_phase_calibration ? p(2) : options.initial_offset;
    Eigen::VectorXd out(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      const double c = std::cos(offset + scale * xs(i));
      out(i) = p(0) * (1.0 - p(1) + (1.0 + p(1)) * c * c) / 2.0 - ys(i) / peak;
    }
    return out;
  };

  const double trough = *std::min_element(counts.begin(), counts.end());
  const double v0 = std::clamp(1.0 - 2.0 * trough / peak, 0.0, 1.0);
  const int n_params = options.fit_phase_calibration ? 4 : 2;
  detail::LeastSquaresResult best;
  best.cost = std::numeric_limits<double>::infinity();
  // Scan the phase offset, since cos^2 has a local minimum for every quarter-period misalignment.
  const int offset_starts = options.fit_phase_calibration ? 8 : 1;
  for (int s = 0; s < offset_starts; ++s) {
    Eigen::VectorXd start(4);
    start << 1.0, v0, options.initial_offset + s * kPi / offset_starts, options.initial_scale;
    auto residual = [&](const Eigen::VectorXd& p) {
      Eigen::VectorXd full = start;
      full.head(n_params) = p;
      return model(full);
    };
    auto result = detail::levenberg_marquardt(residual, start.head(n_params), 500);
    if (result.cost < best.cost) {
      Eigen::VectorXd full = start;
      full.head(n_params) = result.x;
      result.x = full;
      best = std::move(result);
    }
  }

  // A quarter-period shift of the offset fits the same curve with
  // V' = -(3 + V) / (1 - V); map that branch back so |V| <= 1 and refine there.
  if (options.fit_phase_calibration && best.x(1) < -1.0) {
    const double a = best.x(0);
    const double v = best.x(1);
    Eigen::VectorXd mapped(4);
    mapped << a * (1.0 - v) / 2.0, -(3.0 + v) / (1.0 - v), best.x(2) - kPi / 2.0, best.x(3);
    best = detail::levenberg_marquardt(model, mapped, 500);
  }

  HomFit fit;
  fit.amplitude = best.x(0) * peak;
  fit.visibility = best.x(1);
  fit.offset = best.x(2);
  fit.scale = best.x(3);
  fit.residual_sum_squares = 2.0 * best.cost * peak * peak;
  fit.converged = best.converged;
  const Eigen::Index dof = m - n_params;
  if (dof > 0) {
    const double sigma2 = 2.0 * best.cost / static_cast<double>(dof);
    const Eigen::MatrixXd jtj = best.jacobian.transpose() * best.jacobian;
    const Eigen::MatrixXd cov = sigma2 * jtj.completeOrthogonalDecomposition().pseudoInverse();
    fit.visibility_stderr = std::sqrt(std::max(cov(1, 1), 0.0));
  }
  return fit;
}

}  // namespace qpsim
