#include "qpsim/distribution.hpp"

#include <cmath>
#include <numeric>
#include <unordered_map>

#include "qpsim/errors.hpp"

namespace qpsim {

ProbabilityDistribution::ProbabilityDistribution(std::vector<std::string> outcomes,
                                                 std::vector<double> probabilities)
    : outcomes_(std::move(outcomes)), probabilities_(std::move(probabilities)) {
  if (outcomes_.size() != probabilities_.size())
    throw DimensionError("ProbabilityDistribution: outcome and probability counts differ");
  for (double p : probabilities_)
    if (!(p >= 0.0) || !std::isfinite(p))
      throw RangeError("ProbabilityDistribution: probabilities must be finite and non-negative");
}

double ProbabilityDistribution::total() const {
  return std::accumulate(probabilities_.begin(), probabilities_.end(), 0.0);
}

bool ProbabilityDistribution::normalized() const {
  return std::abs(total() - 1.0) <= kNormalizationTolerance;
}

double ProbabilityDistribution::at(const std::string& label) const {
  for (std::size_t i = 0; i < outcomes_.size(); ++i)
    if (outcomes_[i] == label) return probabilities_[i];
  return 0.0;
}

ProbabilityDistribution ProbabilityDistribution::normalized_copy() const {
  const double sum = total();
  if (!(sum > 0.0)) throw NormalizationError("normalized_copy: distribution has zero total");
  std::vector<double> scaled = probabilities_;
  for (double& p : scaled) p /= sum;
  return {outcomes_, std::move(scaled)};
}

double statistical_fidelity(const ProbabilityDistribution& p, const ProbabilityDistribution& q) {
  if (p.size() != q.size()) throw LabelError("statistical_fidelity: outcome sets differ in size");
  if (!p.normalized() || !q.normalized())
    throw NormalizationError("statistical_fidelity: both distributions must be normalized");
  std::unordered_map<std::string, double> lookup;
  lookup.reserve(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) lookup.emplace(q.outcomes()[i], q.probabilities()[i]);
  if (lookup.size() != q.size()) throw LabelError("statistical_fidelity: duplicate outcome labels");
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto it = lookup.find(p.outcomes()[i]);
    if (it == lookup.end()) throw LabelError("statistical_fidelity: outcome '" + p.outcomes()[i] + "' missing");
    sum += std::sqrt(p.probabilities()[i] * it->second);
  }
  return std::min(sum, 1.0);
}

double mean_statistical_fidelity(const std::vector<ProbabilityDistribution>& p,
                                 const std::vector<ProbabilityDistribution>& q) {
  if (p.size() != q.size() || p.empty())
    throw ArgumentError("mean_statistical_fidelity: lists must be non-empty and aligned");
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) sum += statistical_fidelity(p[i], q[i]);
  return sum / static_cast<double>(p.size());
}

}  // namespace qpsim
