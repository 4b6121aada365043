#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qmdp/rng.hpp"

namespace qmdp {

// One outgoing branch of a state-action pair. Rewards live on transitions:
// the CSV schema carries a reward per (s,a,s') row and the cliff-style
// domains need the reward to depend on where the step lands.
struct transition {
  int next;
  double prob;
  double reward;
};

// Finite MDP with a sparse kernel. Immutable after construction: transition
// probabilities per (s,a) are validated to sum to 1 within 1e-6 and then
// renormalized to an exact 1.
class mdp {
 public:
  // rows indexed s*n_actions+a; every (s,a) must have at least one branch.
  mdp(int n_states, int n_actions,
      std::vector<std::vector<transition>> rows, double gamma);

  int n_states() const { return n_states_; }
  int n_actions() const { return n_actions_; }
  double gamma() const { return gamma_; }
  double r_min() const { return r_min_; }
  double r_max() const { return r_max_; }

  std::span<const transition> transitions(int s, int a) const {
    return rows_[static_cast<std::size_t>(s) * n_actions_ + a];
  }

  // Copy with a different discount factor.
  mdp with_discount(double gamma) const;

  // Samples a branch of (s,a) with u uniform in [0,1).
  const transition& sample(int s, int a, double u) const;

  // Reward on the (s,a) -> next branch; next must be a positive-probability
  // successor.
  double reward(int s, int a, int next) const;

  friend bool operator==(const mdp&, const mdp&);

 private:
  int n_states_;
  int n_actions_;
  double gamma_;
  double r_min_;
  double r_max_;
  std::vector<std::vector<transition>> rows_;
};

bool operator==(const transition& a, const transition& b);

}  // namespace qmdp
