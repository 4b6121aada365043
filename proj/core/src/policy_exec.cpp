#include "qmdp/policy_exec.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "qmdp/errors.hpp"
#include "qmdp/format.hpp"
#include "qmdp/parallel.hpp"
#include "qmdp/rng.hpp"

namespace qmdp {

namespace {

constexpr double kRiskUpdateEps = 1e-14;

std::vector<double> rollout_returns(int episodes, std::uint64_t seed,
                                    const std::function<double(std::uint64_t)>&
                                        one_episode) {
  std::vector<double> returns(episodes);
  parallel_for(static_cast<std::size_t>(episodes),
               [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      returns[i] = one_episode(derive_seed(seed, i));
    }
  });
  return returns;
}

}  // namespace

var_executor::var_executor(const mdp& m, const qtensor& q) : m_(m), q_(q) {
  if (q.n_states() != m.n_states() || q.n_actions() != m.n_actions()) {
    throw shape_mismatch("tensor does not match the MDP");
  }
  const int J = q.grid().J;
  int slices = q.time_free() ? 1 : q.horizon() + 1;
  vmax_.resize(static_cast<std::size_t>(slices) * q.n_states() * J);
  monotone_ = true;
  for (int t = 0; t < slices; ++t) {
    for (int s = 0; s < q.n_states(); ++s) {
      for (int j = 0; j < J; ++j) {
        double best = q.at(t, s, j, 0);
        for (int a = 1; a < q.n_actions(); ++a) {
          best = std::max(best, q.at(t, s, j, a));
        }
        std::size_t idx =
            (static_cast<std::size_t>(t) * q.n_states() + s) * J + j;
        vmax_[idx] = best;
        if (j > 0 && best < vmax_[idx - 1]) monotone_ = false;
      }
    }
  }
}

double var_executor::value(int t, int s, int j, int a) const {
  return q_.at(q_.time_free() ? 0 : t, s, j, a);
}

double var_executor::best_value(int t, int s, int j) const {
  int slice = q_.time_free() ? 0 : t;
  return vmax_[(static_cast<std::size_t>(slice) * q_.n_states() + s) *
                   q_.grid().J +
               j];
}

int var_executor::best_action(int t, int s, int j) const {
  int best = 0;
  double best_v = value(t, s, j, 0);
  for (int a = 1; a < q_.n_actions(); ++a) {
    double v = value(t, s, j, a);
    if (v > best_v) {
      best_v = v;
      best = a;
    }
  }
  return best;
}

int var_executor::risk_update(int t_next, int s_next, double threshold) const {
  const int J = q_.grid().J;
  int slice = q_.time_free() ? 0 : t_next;
  const double* row =
      vmax_.data() +
      (static_cast<std::size_t>(slice) * q_.n_states() + s_next) * J;
  if (monotone_) {
    const double* it = std::lower_bound(row, row + J, threshold);
    if (it == row + J) return J - 1;  // empty set: arbitrary initialization
    return static_cast<int>(it - row);
  }
  for (int j = 0; j < J; ++j) {
    if (row[j] >= threshold) return j;
  }
  return J - 1;
}

episode_result var_executor::run(int s0, double alpha0, int T,
                                 std::uint64_t seed,
                                 bool record_trace) const {
  if (!(alpha0 > 0.0 && alpha0 < 1.0)) {
    throw alpha_out_of_range("alpha0=" + format_double(alpha0));
  }
  if (!q_.time_free() && q_.horizon() < T) {
    throw horizon_mismatch("tensor horizon " + std::to_string(q_.horizon()) +
                           " < T=" + std::to_string(T));
  }
  if (m_.gamma() == 0.0) throw gamma_zero("risk update needs gamma > 0");
  if (s0 < 0 || s0 >= m_.n_states()) {
    throw param_out_of_range("s0=" + std::to_string(s0));
  }

  rng_stream rng(seed);
  episode_result out;
  int s = s0;
  int j = q_.grid().lower_index(alpha0);
  double disc = 1.0;
  for (int t = T; t >= 1; --t) {
    int a = best_action(t, s, j);
    const transition& tr = m_.sample(s, a, rng.next_double());
    if (record_trace) out.trace.push_back({t, s, j, a, tr.reward});
    out.discounted_return += disc * tr.reward;
    disc *= m_.gamma();
    double tau = (value(t, s, j, a) - tr.reward) / m_.gamma();
    j = risk_update(t - 1, tr.next, tau - kRiskUpdateEps * std::abs(tau));
    s = tr.next;
  }
  return out;
}

episode_result exec_var_episode(const mdp& m, const qtensor& q, int s0,
                                double alpha0, int T, std::uint64_t seed,
                                bool record_trace) {
  return var_executor(m, q).run(s0, alpha0, T, seed, record_trace);
}

episode_result simulate_markov(const mdp& m, const markov_policy& policy,
                               int s0, int T, std::uint64_t seed,
                               bool record_trace) {
  if (policy.T < T || policy.S != m.n_states()) {
    throw horizon_mismatch("policy table does not cover T=" +
                           std::to_string(T));
  }
  rng_stream rng(seed);
  episode_result out;
  int s = s0;
  double disc = 1.0;
  for (int k = 0; k < T; ++k) {
    int a = policy.at(k, s);
    const transition& tr = m.sample(s, a, rng.next_double());
    if (record_trace) out.trace.push_back({T - k, s, -1, a, tr.reward});
    out.discounted_return += disc * tr.reward;
    disc *= m.gamma();
    s = tr.next;
  }
  return out;
}

namespace {

// log C(n,k) + k log p + (n-k) log(1-p)
double log_binom_pmf(int n, int k, double p) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) -
         std::lgamma(n - k + 1.0) + k * std::log(p) +
         (n - k) * std::log1p(-p);
}

}  // namespace

quantile_estimate mc_quantile(std::vector<double> returns, double alpha) {
  const int n = static_cast<int>(returns.size());
  if (n < 20) throw too_few_samples("n=" + std::to_string(n));
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw alpha_out_of_range("alpha=" + format_double(alpha));
  }
  std::sort(returns.begin(), returns.end());
  int point_idx = std::min(n - 1, static_cast<int>(std::floor(alpha * n)));

  // 99% two-sided distribution-free interval: order statistics at ranks
  // l and u with P[Bin(n,alpha) < l] <= 0.005 and P[Bin(n,alpha) >= u] <= 0.005.
  double cdf = 0.0;
  int lo_rank = 0;  // largest l with P[X <= l-1] <= 0.005
  int hi_rank = n;  // smallest u with P[X <= u-1] >= 0.995
  bool hi_found = false;
  for (int k = 0; k < n; ++k) {
    cdf += std::exp(log_binom_pmf(n, k, alpha));
    if (cdf <= 0.005) lo_rank = k + 1;
    if (!hi_found && cdf >= 0.995) {
      hi_rank = k + 1;
      hi_found = true;
    }
  }
  int lo_idx = std::max(0, lo_rank - 1);
  int hi_idx = std::min(n - 1, hi_rank - 1);
  lo_idx = std::min(lo_idx, point_idx);
  hi_idx = std::max(hi_idx, point_idx);
  return {returns[point_idx], returns[lo_idx], returns[hi_idx]};
}

// The VaR policy's behavior depends on the initial risk level, so each alpha
// row gets its own episode batch executed at alpha0 = alpha; episode seeds
// advance through one global counter so rows stay independent.
eval_report evaluate_var_policy(const mdp& m, const qtensor& q, int s0, int T,
                                const std::vector<double>& alphas,
                                int episodes, std::uint64_t seed) {
  if (episodes < 100) {
    throw too_few_samples("episodes=" + std::to_string(episodes));
  }
  var_executor exec(m, q);
  eval_report report;
  std::uint64_t counter = 0;
  for (double alpha : alphas) {
    std::uint64_t row_seed = derive_seed(seed, counter++);
    std::vector<double> returns =
        rollout_returns(episodes, row_seed, [&](std::uint64_t ep_seed) {
          return exec.run(s0, alpha, T, ep_seed).discounted_return;
        });
    quantile_estimate est = mc_quantile(std::move(returns), alpha);
    report.push_back({alpha, est.point, est.ci_lo, est.ci_hi, episodes, seed});
  }
  return report;
}

eval_report evaluate_markov_policy(const mdp& m, const markov_policy& policy,
                                   int s0, int T,
                                   const std::vector<double>& alphas,
                                   int episodes, std::uint64_t seed) {
  if (episodes < 100) {
    throw too_few_samples("episodes=" + std::to_string(episodes));
  }
  std::vector<double> returns =
      rollout_returns(episodes, seed, [&](std::uint64_t ep_seed) {
        return simulate_markov(m, policy, s0, T, ep_seed).discounted_return;
      });
  eval_report report;
  for (double alpha : alphas) {
    quantile_estimate est = mc_quantile(returns, alpha);
    report.push_back({alpha, est.point, est.ci_lo, est.ci_hi, episodes, seed});
  }
  return report;
}

}  // namespace qmdp
