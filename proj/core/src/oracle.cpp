#include "qmdp/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "qmdp/errors.hpp"

namespace qmdp {

namespace {

constexpr double kAtomMergeTol = 1e-12;

// Sorted (value, prob) atom list with tolerance merging; the oracle's
// working representation before the public distribution is built.
using atoms_t = std::vector<std::pair<double, double>>;

atoms_t merge_atoms(atoms_t atoms) {
  std::sort(atoms.begin(), atoms.end());
  atoms_t out;
  for (const auto& [v, p] : atoms) {
    if (!out.empty() && v - out.back().first <= kAtomMergeTol) {
      out.back().second += p;
    } else {
      out.emplace_back(v, p);
    }
  }
  return out;
}

// q^+ on a sorted atom list, matching the core CDF tolerance.
double var_sorted(const atoms_t& atoms, double alpha) {
  std::size_t pick = 0;
  double before = 0.0;
  for (std::size_t i = 1; i < atoms.size(); ++i) {
    before += atoms[i - 1].second;
    if (before <= alpha + kCdfTol) pick = i;
  }
  return atoms[pick].first;
}

struct trajectory_walker {
  const mdp& m;
  const history_policy& pi;
  std::int64_t max_leaves;
  std::int64_t leaves = 0;
  atoms_t atoms;
  history h;

  void walk(int s, int steps_left, double prob, double acc, double disc) {
    if (steps_left == 0) {
      if (++leaves > max_leaves) throw budget_exceeded("trajectory leaves");
      atoms.emplace_back(acc, prob);
      return;
    }
    int a = pi(h);
    if (a < 0 || a >= m.n_actions()) {
      throw index_out_of_range("policy action " + std::to_string(a));
    }
    h.actions.push_back(a);
    for (const transition& tr : m.transitions(s, a)) {
      h.states.push_back(tr.next);
      walk(tr.next, steps_left - 1, prob * tr.prob, acc + disc * tr.reward,
           disc * m.gamma());
      h.states.pop_back();
    }
    h.actions.pop_back();
  }
};

std::int64_t sat_mul(std::int64_t a, std::int64_t b, std::int64_t cap) {
  if (a > cap / b) return cap + 1;
  return std::min(a * b, cap + 1);
}

}  // namespace

discrete_distribution policy_return_distribution(const mdp& m,
                                                 const history_policy& pi,
                                                 int s0, int T,
                                                 std::int64_t max_leaves) {
  if (s0 < 0 || s0 >= m.n_states() || T < 1) {
    throw param_out_of_range("return distribution at s0=" +
                             std::to_string(s0));
  }
  trajectory_walker w{m, pi, max_leaves, 0, {}, {}};
  w.h.states.push_back(s0);
  w.walk(s0, T, 1.0, 0.0, 1.0);
  atoms_t merged = merge_atoms(std::move(w.atoms));
  std::vector<std::pair<double, double>> pairs(merged.begin(), merged.end());
  return dist_new(pairs);
}

namespace {

// Policy-subtree counting: N_0(s) = 1, N_t(s) = sum_a prod_{s'} N_{t-1}(s').
std::int64_t count_subtrees(const mdp& m, int s, int t, std::int64_t cap,
                            std::map<std::pair<int, int>, std::int64_t>& memo) {
  if (t == 0) return 1;
  auto key = std::make_pair(s, t);
  auto it = memo.find(key);
  if (it != memo.end()) return it->second;
  std::int64_t total = 0;
  for (int a = 0; a < m.n_actions(); ++a) {
    std::int64_t prod = 1;
    for (const transition& tr : m.transitions(s, a)) {
      prod = sat_mul(prod, count_subtrees(m, tr.next, t - 1, cap, memo), cap);
      if (prod > cap) break;
    }
    total = std::min(total + prod, cap + 1);
    if (total > cap) break;
  }
  memo[key] = total;
  return total;
}

// All return distributions of t-step decision trees rooted at s, one per
// policy subtree. Memoized across (s, t).
const std::vector<atoms_t>& subtree_dists(
    const mdp& m, int s, int t,
    std::map<std::pair<int, int>, std::vector<atoms_t>>& memo) {
  auto key = std::make_pair(s, t);
  auto it = memo.find(key);
  if (it != memo.end()) return it->second;

  std::vector<atoms_t> result;
  if (t == 0) {
    result.push_back({{0.0, 1.0}});
  } else {
    for (int a = 0; a < m.n_actions(); ++a) {
      auto row = m.transitions(s, a);
      // Cartesian product of continuation choices across successors.
      std::vector<const std::vector<atoms_t>*> lists;
      lists.reserve(row.size());
      for (const transition& tr : row) {
        lists.push_back(&subtree_dists(m, tr.next, t - 1, memo));
      }
      std::vector<std::size_t> pick(row.size(), 0);
      while (true) {
        atoms_t combined;
        for (std::size_t b = 0; b < row.size(); ++b) {
          for (const auto& [v, p] : (*lists[b])[pick[b]]) {
            combined.emplace_back(row[b].reward + m.gamma() * v,
                                  row[b].prob * p);
          }
        }
        result.push_back(merge_atoms(std::move(combined)));
        std::size_t d = 0;
        while (d < pick.size() && ++pick[d] == lists[d]->size()) {
          pick[d] = 0;
          ++d;
        }
        if (d == pick.size()) break;
      }
    }
  }
  return memo.emplace(key, std::move(result)).first->second;
}

}  // namespace

std::int64_t count_history_policies(const mdp& m, int T, int s0, int a0,
                                    std::int64_t cap) {
  std::map<std::pair<int, int>, std::int64_t> memo;
  std::int64_t prod = 1;
  for (const transition& tr : m.transitions(s0, a0)) {
    prod = sat_mul(prod, count_subtrees(m, tr.next, T - 1, cap, memo), cap);
    if (prod > cap) break;
  }
  return prod;
}

std::vector<double> brute_force_qstar(const mdp& m, int T, int s0, int a0,
                                      const std::vector<double>& alphas,
                                      std::int64_t policy_budget) {
  if (T < 1 || s0 < 0 || s0 >= m.n_states() || a0 < 0 ||
      a0 >= m.n_actions()) {
    throw param_out_of_range("brute_force_qstar inputs");
  }
  for (double alpha : alphas) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw alpha_out_of_range("qstar alpha");
  }
  if (count_history_policies(m, T, s0, a0, policy_budget) > policy_budget) {
    throw budget_exceeded("history policy count");
  }

  std::map<std::pair<int, int>, std::vector<atoms_t>> memo;
  auto row = m.transitions(s0, a0);
  std::vector<const std::vector<atoms_t>*> lists;
  for (const transition& tr : row) {
    lists.push_back(&subtree_dists(m, tr.next, T - 1, memo));
  }

  std::vector<double> best(alphas.size(),
                           -std::numeric_limits<double>::infinity());
  std::vector<std::size_t> pick(row.size(), 0);
  while (true) {
    atoms_t combined;
    for (std::size_t b = 0; b < row.size(); ++b) {
      for (const auto& [v, p] : (*lists[b])[pick[b]]) {
        combined.emplace_back(row[b].reward + m.gamma() * v,
                              row[b].prob * p);
      }
    }
    atoms_t dist = merge_atoms(std::move(combined));
    for (std::size_t i = 0; i < alphas.size(); ++i) {
      best[i] = std::max(best[i], var_sorted(dist, alphas[i]));
    }
    std::size_t d = 0;
    while (d < pick.size() && ++pick[d] == lists[d]->size()) {
      pick[d] = 0;
      ++d;
    }
    if (d == pick.size()) break;
  }
  return best;
}

std::vector<double> best_markov_var(const mdp& m, int T, int s0,
                                    const std::vector<double>& alphas,
                                    std::int64_t policy_budget) {
  if (T < 1 || s0 < 0 || s0 >= m.n_states()) {
    throw param_out_of_range("best_markov_var inputs");
  }
  // Reachable (step, state) pairs under any action sequence.
  std::vector<std::vector<char>> reachable(
      T, std::vector<char>(m.n_states(), 0));
  reachable[0][s0] = 1;
  for (int k = 0; k + 1 < T; ++k) {
    for (int s = 0; s < m.n_states(); ++s) {
      if (!reachable[k][s]) continue;
      for (int a = 0; a < m.n_actions(); ++a) {
        for (const transition& tr : m.transitions(s, a)) {
          reachable[k + 1][tr.next] = 1;
        }
      }
    }
  }
  std::vector<std::pair<int, int>> slots;
  for (int k = 0; k < T; ++k) {
    for (int s = 0; s < m.n_states(); ++s) {
      if (reachable[k][s]) slots.emplace_back(k, s);
    }
  }
  std::int64_t count = 1;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    count = sat_mul(count, m.n_actions(), policy_budget);
  }
  if (count > policy_budget) throw budget_exceeded("markov policy count");

  std::vector<int> table(static_cast<std::size_t>(T) * m.n_states(), 0);
  std::vector<int> assign(slots.size(), 0);
  std::vector<double> best(alphas.size(),
                           -std::numeric_limits<double>::infinity());
  while (true) {
    for (std::size_t i = 0; i < slots.size(); ++i) {
      table[static_cast<std::size_t>(slots[i].first) * m.n_states() +
            slots[i].second] = assign[i];
    }
    history_policy pi = [&](const history& h) {
      int k = static_cast<int>(h.actions.size());
      return table[static_cast<std::size_t>(k) * m.n_states() +
                   h.states.back()];
    };
    discrete_distribution dist = policy_return_distribution(m, pi, s0, T);
    for (std::size_t i = 0; i < alphas.size(); ++i) {
      best[i] = std::max(best[i], dist.var(alphas[i]).as_double());
    }
    std::size_t d = 0;
    while (d < assign.size() && ++assign[d] == m.n_actions()) {
      assign[d] = 0;
      ++d;
    }
    if (d == assign.size()) break;
  }
  return best;
}

}  // namespace qmdp
