#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "qmdp/distribution.hpp"
#include "qmdp/mdp.hpp"

namespace qmdp {

// A prefix (s0, a0, s1, ..., sk) of an episode. states has one more entry
// than actions.
struct history {
  std::vector<int> states;
  std::vector<int> actions;
};

// Deterministic history-dependent decision rule; must be defined on every
// reachable history.
using history_policy = std::function<int(const history&)>;

// Exact distribution of the discounted T-step return under pi from s0, by
// full enumeration of positive-probability trajectories. Atoms closer than
// 1e-12 merge. Throws budget_exceeded past max_leaves trajectories.
discrete_distribution policy_return_distribution(const mdp& m,
                                                 const history_policy& pi,
                                                 int s0, int T,
                                                 std::int64_t max_leaves =
                                                     1000000);

// Number of history-dependent deterministic policies from (s0, a0) over
// horizon T, counting only positive-probability branches; saturates at cap.
std::int64_t count_history_policies(const mdp& m, int T, int s0, int a0,
                                    std::int64_t cap);

// max over all history-dependent deterministic policies with pi_0(s0) = a0
// of VaR_alpha of the T-step return, for each alpha in (0,1). Ground truth
// at desk scale; throws budget_exceeded if the policy count passes
// policy_budget.
std::vector<double> brute_force_qstar(const mdp& m, int T, int s0, int a0,
                                      const std::vector<double>& alphas,
                                      std::int64_t policy_budget = 1 << 22);

// Same maximum restricted to (time-dependent) Markov policies, enumerated
// over reachable (step, state) pairs. Witness that Markov policies can be
// strictly suboptimal for the static VaR objective.
std::vector<double> best_markov_var(const mdp& m, int T, int s0,
                                    const std::vector<double>& alphas,
                                    std::int64_t policy_budget = 1 << 22);

}  // namespace qmdp
