#pragma once

#include <string>
#include <vector>

namespace qpsim {

inline constexpr double kNormalizationTolerance = 1e-9;

// Probabilities over a labelled, ordered outcome set. `normalized()` is set
// when the probabilities sum to one within kNormalizationTolerance.
class ProbabilityDistribution {
 public:
  ProbabilityDistribution() = default;
  ProbabilityDistribution(std::vector<std::string> outcomes, std::vector<double> probabilities);

  const std::vector<std::string>& outcomes() const { return outcomes_; }
  const std::vector<double>& probabilities() const { return probabilities_; }
  std::size_t size() const { return outcomes_.size(); }
  double total() const;
  bool normalized() const;

  // Probability of `label`, or 0 when the label is absent.
  double at(const std::string& label) const;

  // Copy rescaled to unit total. Throws NormalizationError when the total is 0.
  ProbabilityDistribution normalized_copy() const;

 private:
  std::vector<std::string> outcomes_;
  std::vector<double> probabilities_;
};

// Classical (Bhattacharyya) fidelity sum_i sqrt(p_i q_i). Outcomes are
// matched by label, so the two distributions may list them in any order.
double statistical_fidelity(const ProbabilityDistribution& p, const ProbabilityDistribution& q);

// Arithmetic mean of pairwise fidelities; the lists must be aligned.
double mean_statistical_fidelity(const std::vector<ProbabilityDistribution>& p,
                                 const std::vector<ProbabilityDistribution>& q);

}  // namespace qpsim
