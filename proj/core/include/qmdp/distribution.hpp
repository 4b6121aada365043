#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "qmdp/extended_real.hpp"

namespace qmdp {

// Tolerance for CDF comparisons, relative at unit scale: cumulative
// floating-point drift must not flip a quantile index.
inline constexpr double kCdfTol = 1e-12;

// Finite list of (value, probability) atoms. Canonical after construction:
// sorted ascending by value, exact duplicates merged, zero-probability atoms
// dropped, probabilities renormalized to sum 1.
class discrete_distribution {
 public:
  // pairs: nonempty, probabilities >= 0 summing to 1 within 1e-9.
  static discrete_distribution from_pairs(
      const std::vector<std::pair<double, double>>& pairs);

  // Skips the sum check, then renormalizes; for callers that build mixtures
  // whose weights are exact by construction.
  static discrete_distribution from_sorted_unchecked(std::vector<double> values,
                                                     std::vector<double> probs);

  std::size_t size() const { return values_.size(); }
  const std::vector<double>& values() const { return values_; }
  const std::vector<double>& probabilities() const { return probs_; }

  // q^-_alpha: smallest tau with Pr[x <= tau] >= alpha; -inf at alpha = 0.
  extended_real quantile_lower(double alpha) const;
  // q^+_alpha: largest tau with Pr[x < tau] <= alpha; +inf at alpha = 1.
  extended_real quantile_upper(double alpha) const;
  // VaR_alpha = q^+_alpha.
  extended_real var(double alpha) const;

  friend bool operator==(const discrete_distribution&,
                         const discrete_distribution&) = default;

 private:
  discrete_distribution() = default;
  std::vector<double> values_;
  std::vector<double> probs_;
};

// Convenience matching the spec operation names.
discrete_distribution dist_new(
    const std::vector<std::pair<double, double>>& pairs);
extended_real quantile_lower(const discrete_distribution& d, double alpha);
extended_real quantile_upper(const discrete_distribution& d, double alpha);
extended_real var(const discrete_distribution& d, double alpha);

// Mean absolute difference between two quantile-function vectors on a shared
// grid (the W1 diagnostic). Lengths must match and entries be finite.
double wasserstein1(const std::vector<double>& u, const std::vector<double>& v);

}  // namespace qmdp
