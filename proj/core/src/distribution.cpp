#include "qmdp/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qmdp/errors.hpp"
#include "qmdp/format.hpp"

namespace qmdp {

namespace {

void check_alpha(double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw alpha_out_of_range("alpha=" + format_double(alpha));
  }
}

// Scales probs to sum 1, then pins the last atom to the complement of the
// running prefix, so a left-to-right sum lands on 1.0 exactly.
void renormalize(std::vector<double>& probs) {
  double sum = std::accumulate(probs.begin(), probs.end(), 0.0);
  for (double& p : probs) p /= sum;
  double rest = 0.0;
  for (std::size_t i = 0; i + 1 < probs.size(); ++i) rest += probs[i];
  if (rest + probs.back() == 1.0) return;
  double pinned = 1.0 - rest;
  if (pinned > 0.0) probs.back() = pinned;
}

}  // namespace

discrete_distribution discrete_distribution::from_pairs(
    const std::vector<std::pair<double, double>>& pairs) {
  if (pairs.empty()) throw empty_distribution("no atoms");
  double sum = 0.0;
  for (const auto& [v, p] : pairs) {
    if (!std::isfinite(v) || !std::isfinite(p)) {
      throw non_finite_input("atom (" + format_double(v) + ", " +
                             format_double(p) + ")");
    }
    if (p < 0.0) throw negative_probability(format_double(p));
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw probability_sum_mismatch("sum=" + format_double(sum));
  }

  auto sorted = pairs;
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> values;
  std::vector<double> probs;
  for (const auto& [v, p] : sorted) {
    if (!values.empty() && values.back() == v) {
      probs.back() += p;
    } else {
      values.push_back(v);
      probs.push_back(p);
    }
  }
  return from_sorted_unchecked(std::move(values), std::move(probs));
}

discrete_distribution discrete_distribution::from_sorted_unchecked(
    std::vector<double> values, std::vector<double> probs) {
  discrete_distribution d;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (probs[i] > 0.0) {
      d.values_.push_back(values[i]);
      d.probs_.push_back(probs[i]);
    }
  }
  if (d.values_.empty()) throw empty_distribution("all atoms zero-probability");
  renormalize(d.probs_);
  return d;
}

extended_real discrete_distribution::quantile_lower(double alpha) const {
  check_alpha(alpha);
  if (alpha == 0.0) return extended_real::neg_inf();
  // Kahan-compensated CDF scan; the top cumulative is exactly 1.
  double cum = 0.0, comp = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    double y = probs_[i] - comp;
    double t = cum + y;
    comp = (t - cum) - y;
    cum = t;
    if (i + 1 == values_.size()) cum = 1.0;
    if (cum >= alpha - kCdfTol) return extended_real::finite(values_[i]);
  }
  return extended_real::finite(values_.back());
}

extended_real discrete_distribution::quantile_upper(double alpha) const {
  check_alpha(alpha);
  if (alpha == 1.0) return extended_real::pos_inf();
  // before(i) = Pr[x < v_i]; pick the largest i with before(i) <= alpha.
  std::size_t pick = 0;
  double before = 0.0, comp = 0.0;
  for (std::size_t i = 1; i < values_.size(); ++i) {
    double y = probs_[i - 1] - comp;
    double t = before + y;
    comp = (t - before) - y;
    before = t;
    if (before <= alpha + kCdfTol) pick = i;
  }
  return extended_real::finite(values_[pick]);
}

extended_real discrete_distribution::var(double alpha) const {
  return quantile_upper(alpha);
}

discrete_distribution dist_new(
    const std::vector<std::pair<double, double>>& pairs) {
  return discrete_distribution::from_pairs(pairs);
}

extended_real quantile_lower(const discrete_distribution& d, double alpha) {
  return d.quantile_lower(alpha);
}

extended_real quantile_upper(const discrete_distribution& d, double alpha) {
  return d.quantile_upper(alpha);
}

extended_real var(const discrete_distribution& d, double alpha) {
  return d.quantile_upper(alpha);
}

double wasserstein1(const std::vector<double>& u,
                    const std::vector<double>& v) {
  if (u.size() != v.size() || u.empty()) {
    throw length_mismatch("sizes " + std::to_string(u.size()) + " vs " +
                          std::to_string(v.size()));
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (!std::isfinite(u[i]) || !std::isfinite(v[i])) {
      throw non_finite_input("index " + std::to_string(i));
    }
    acc += std::abs(u[i] - v[i]);
  }
  return acc / static_cast<double>(u.size());
}

}  // namespace qmdp
