#include "qmdp/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qmdp/errors.hpp"
#include "qmdp/format.hpp"

namespace qmdp {

bool operator==(const transition& a, const transition& b) {
  return a.next == b.next && a.prob == b.prob && a.reward == b.reward;
}

mdp::mdp(int n_states, int n_actions,
         std::vector<std::vector<transition>> rows, double gamma)
    : n_states_(n_states), n_actions_(n_actions), gamma_(gamma),
      rows_(std::move(rows)) {
  if (n_states_ < 1 || n_actions_ < 1) {
    throw param_out_of_range("empty state or action set");
  }
  if (!(gamma_ >= 0.0 && gamma_ <= 1.0)) {
    throw param_out_of_range("gamma=" + format_double(gamma_));
  }
  if (rows_.size() != static_cast<std::size_t>(n_states_) * n_actions_) {
    throw stochasticity_violation("missing state-action rows");
  }
  r_min_ = std::numeric_limits<double>::infinity();
  r_max_ = -std::numeric_limits<double>::infinity();
  for (int s = 0; s < n_states_; ++s) {
    for (int a = 0; a < n_actions_; ++a) {
      auto& row = rows_[static_cast<std::size_t>(s) * n_actions_ + a];
      double sum = 0.0;
      for (const transition& t : row) {
        if (t.next < 0 || t.next >= n_states_) {
          throw dangling_index("(" + std::to_string(s) + "," +
                               std::to_string(a) + ") -> " +
                               std::to_string(t.next));
        }
        if (!(t.prob > 0.0) || !std::isfinite(t.prob)) {
          throw row_probability_negative(format_double(t.prob));
        }
        if (!std::isfinite(t.reward)) {
          throw non_finite_input("reward at (" + std::to_string(s) + "," +
                                 std::to_string(a) + ")");
        }
        sum += t.prob;
        r_min_ = std::min(r_min_, t.reward);
        r_max_ = std::max(r_max_, t.reward);
      }
      if (std::abs(sum - 1.0) > 1e-6) {
        throw stochasticity_violation("(" + std::to_string(s) + "," +
                                      std::to_string(a) +
                                      ") sum=" + format_double(sum));
      }
      // Renormalize, pinning the last branch so the row sums to exact 1.
      for (transition& t : row) t.prob /= sum;
      double rest = 0.0;
      for (std::size_t i = 0; i + 1 < row.size(); ++i) rest += row[i].prob;
      if (rest + row.back().prob != 1.0) {
        double pinned = 1.0 - rest;
        if (pinned > 0.0) row.back().prob = pinned;
      }
    }
  }
}

mdp mdp::with_discount(double gamma) const {
  mdp copy = *this;
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    throw param_out_of_range("gamma=" + format_double(gamma));
  }
  copy.gamma_ = gamma;
  return copy;
}

double mdp::reward(int s, int a, int next) const {
  for (const transition& t : transitions(s, a)) {
    if (t.next == next) return t.reward;
  }
  throw index_out_of_range("no branch (" + std::to_string(s) + "," +
                           std::to_string(a) + ") -> " + std::to_string(next));
}

const transition& mdp::sample(int s, int a, double u) const {
  auto row = transitions(s, a);
  double cum = 0.0;
  for (const transition& t : row) {
    cum += t.prob;
    if (u < cum) return t;
  }
  return row.back();
}

bool operator==(const mdp& a, const mdp& b) {
  return a.n_states_ == b.n_states_ && a.n_actions_ == b.n_actions_ &&
         a.gamma_ == b.gamma_ && a.rows_ == b.rows_;
}

}  // namespace qmdp
