#pragma once

#include <vector>

#include "qmdp/mdp.hpp"
#include "qmdp/qtensor.hpp"

namespace qmdp {

// One backup of the discretized lower-bound operator. q_prev is a flat
// (S, J, A) table, finite and non-decreasing in j. Index j >= 1 holds the
// upper quantile q^+ at level j/J of the mixture over S*J atoms
// r(s,a,s') + gamma * max_a' q_prev(s',j',a') weighted p(s,a,s')/J;
// index 0 holds r_min + min over (s,a) of q_prev(s,0,a).
std::vector<double> bellman_lower_sweep(const mdp& m, const risk_grid& grid,
                                        const std::vector<double>& q_prev);

// Mirror image: index j < J-1 holds the lower quantile q^- at level
// (j+1)/J; index J-1 holds r_max + max over (s,a) of q_prev(s,J-1,a).
std::vector<double> bellman_upper_sweep(const mdp& m, const risk_grid& grid,
                                        const std::vector<double>& q_prev);

// Soft backup: index j >= 1 (for t >= 1) holds the shortfall root of the
// same mixture at level j/J; j = 0 or t = 0 cells hold r_min * t.
// q_prev need not be monotone.
std::vector<double> bellman_soft_sweep(const mdp& m, const risk_grid& grid,
                                       double kappa,
                                       const std::vector<double>& q_prev,
                                       int t);

// T applications of the chosen sweep from the all-zero table. Slice t of the
// result is the t-step table; slice 0 is zero.
qtensor solve_var_dp(const mdp& m, const risk_grid& grid, int T,
                     bound_kind kind, double kappa = 0.0);

// The soft operator applied to a whole time-stacked tensor at once:
// out slice t = soft sweep of x slice t-1, out slice 0 = 0. This is the
// operator whose unique fixed point Q-learning targets.
qtensor apply_soft_operator(const mdp& m, double kappa, const qtensor& x);

// Stationary analog without the time index (gamma < 1): iterate the soft
// sweep with the j=0 slice pinned at r_min/(1-gamma) until the sup change
// drops below tol. Diagnostic target for time-free training.
qtensor solve_soft_stationary(const mdp& m, const risk_grid& grid,
                              double kappa, double tol = 1e-12,
                              int max_iters = 100000);

// Risk-neutral backup q_{t+1}(s,a) = E[r + gamma * max_a' q_t(s',a')],
// flat (T+1, S, A).
std::vector<double> solve_neutral_dp(const mdp& m, int T);

// Per-step action table; step k of T uses the rule computed for horizon T-k.
struct markov_policy {
  int T = 0;
  int S = 0;
  std::vector<int> action;  // (T, S)
  int at(int k, int s) const { return action[static_cast<std::size_t>(k) * S + s]; }
};

markov_policy neutral_policy(const mdp& m, const std::vector<double>& q, int T);

// Nested VaR baseline: v_{t+1}(s) = max_a VaR_alpha0 over the successor
// distribution of r + gamma * v_t(s'). greedy row h is the argmax attaining
// v_h (lowest action index on ties).
struct nvar_solution {
  std::vector<double> values;  // (T+1, S)
  std::vector<int> greedy;     // (T+1, S); row 0 unused
};
nvar_solution solve_nvar_dp(const mdp& m, int T, double alpha0);
markov_policy nvar_policy(const nvar_solution& sol, const mdp& m, int T);

// Distributional VaR baseline on midpoint levels (2j+1)/(2J): the j' axis of
// the successor is collapsed by VaR at alpha0 over the discrete-uniform
// atoms, maximized over a', then the outer VaR is taken per level.
struct dvar_solution {
  int J = 0;
  std::vector<double> values;  // (T+1, S, J, A)
  std::vector<int> greedy;     // (T+1, S); row 0 unused
};
dvar_solution solve_dvar_dp(const mdp& m, const risk_grid& grid, int T,
                            double alpha0);
markov_policy dvar_policy(const dvar_solution& sol, const mdp& m, int T);

// Weighted maximum norm with weights 2^t.
struct weighted_norm {
  double weight(int t) const { return std::ldexp(1.0, t); }
};

// max over cells of |x - y| / 2^t; shapes must match.
double weighted_norm_dist(const qtensor& x, const qtensor& y,
                          const weighted_norm& norm = weighted_norm{});

}  // namespace qmdp
