#pragma once

#include <cstdint>
#include <vector>

#include "qmdp/dp.hpp"
#include "qmdp/mdp.hpp"
#include "qmdp/qtensor.hpp"

namespace qmdp {

struct step_record {
  int t;
  int s;
  int j;
  int a;
  double r;
};

struct episode_result {
  double discounted_return = 0.0;
  std::vector<step_record> trace;  // filled only when requested
};

// Precomputes the per-(t,s,j) action maxima of a value tensor so episodes
// are cheap; shared across rollouts of the same tensor.
class var_executor {
 public:
  // Tensor may be time-indexed (horizon >= T required at run time) or
  // time_free (the same slice is used at every step).
  var_executor(const mdp& m, const qtensor& q);

  // One episode of the static VaR policy: start risk index floor(J*alpha0);
  // each step takes the greedy action, observes (r, s'), and moves to the
  // smallest j' whose best next value covers tau = (q - r)/gamma, with a
  // 1e-14 relative slack; J-1 when no index qualifies.
  episode_result run(int s0, double alpha0, int T, std::uint64_t seed,
                     bool record_trace = false) const;

 private:
  double value(int t, int s, int j, int a) const;
  double best_value(int t, int s, int j) const;
  int best_action(int t, int s, int j) const;
  int risk_update(int t_next, int s_next, double threshold) const;

  const mdp& m_;
  const qtensor& q_;
  std::vector<double> vmax_;  // (slices, S, J)
  bool monotone_;             // vmax non-decreasing in j everywhere
};

episode_result exec_var_episode(const mdp& m, const qtensor& q, int s0,
                                double alpha0, int T, std::uint64_t seed,
                                bool record_trace = false);

// Seeded rollout of a per-step Markov action table.
episode_result simulate_markov(const mdp& m, const markov_policy& policy,
                               int s0, int T, std::uint64_t seed,
                               bool record_trace = false);

struct quantile_estimate {
  double point;
  double ci_lo;
  double ci_hi;
};

// Empirical quantile: ascending order statistic at index floor(alpha*n)
// (the q^+ convention on the empirical distribution), with a distribution-
// free 99% confidence interval from binomial bounds on the quantile rank.
// Needs n >= 20 and alpha in (0,1).
quantile_estimate mc_quantile(std::vector<double> returns, double alpha);

struct eval_row {
  double alpha;
  double point;
  double ci_lo;
  double ci_hi;
  int n;
  std::uint64_t seed;
};

using eval_report = std::vector<eval_row>;

// Runs `episodes` seeded rollouts (per-episode seeds derived from the master
// seed by counter) and aggregates mc_quantile per alpha. episodes >= 100.
eval_report evaluate_var_policy(const mdp& m, const qtensor& q, int s0, int T,
                                const std::vector<double>& alphas,
                                int episodes, std::uint64_t seed);
eval_report evaluate_markov_policy(const mdp& m, const markov_policy& policy,
                                   int s0, int T,
                                   const std::vector<double>& alphas,
                                   int episodes, std::uint64_t seed);

}  // namespace qmdp
