#include "qmdp/domains.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qmdp/errors.hpp"
#include "qmdp/format.hpp"
#include "qmdp/mdp_io.hpp"

namespace qmdp {

namespace {

// Adds a branch, merging with an existing branch to the same destination.
// Rewards of merged branches must agree; the probability-weighted fallback
// only fires in degenerate geometries (e.g. a 2-row cliffwalk where the
// teleport target sits next to the cliff).
void add_branch(std::vector<transition>& row, int next, double prob,
                double reward) {
  if (prob <= 0.0) return;
  for (transition& t : row) {
    if (t.next == next) {
      if (t.reward != reward) {
        t.reward = (t.prob * t.reward + prob * reward) / (t.prob + prob);
      }
      t.prob += prob;
      return;
    }
  }
  row.push_back({next, prob, reward});
}

}  // namespace

int cliffwalk_start_state(int rows, int cols) { return (rows - 1) * cols + 1; }
int cliffwalk_goal_state(int /*rows*/, int cols) { return cols - 1; }

mdp gen_cliffwalk(int rows, int cols, double slip) {
  if (rows < 2 || cols < 2 || !(slip >= 0.0 && slip <= 1.0 / 3.0)) {
    throw param_out_of_range("cliffwalk rows=" + std::to_string(rows) +
                             " cols=" + std::to_string(cols) +
                             " slip=" + format_double(slip));
  }
  const int S = rows * cols;
  const int A = 4;
  const int start = cliffwalk_start_state(rows, cols);
  const int goal = cliffwalk_goal_state(rows, cols);
  auto is_cliff = [&](int r, int c) { return r == 0 && c > 0 && c < cols - 1; };
  const int dr[4] = {+1, -1, 0, 0};  // up, down, left, right (row 0 = bottom)
  const int dc[4] = {0, 0, -1, +1};

  std::vector<std::vector<transition>> table(
      static_cast<std::size_t>(S) * A);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      int s = r * cols + c;
      for (int a = 0; a < A; ++a) {
        auto& row = table[static_cast<std::size_t>(s) * A + a];
        if (s == goal || is_cliff(r, c)) {
          // Goal is absorbing; cliff cells are unreachable placeholders.
          row.push_back({s, 1.0, 0.0});
          continue;
        }
        for (int d = 0; d < 4; ++d) {
          double p = (d == a) ? 1.0 - 3.0 * slip : slip;
          int nr = r + dr[d];
          int nc = c + dc[d];
          if (nr < 0 || nr >= rows || nc < 0 || nc >= cols) {
            nr = r;
            nc = c;
          }
          if (is_cliff(nr, nc)) {
            add_branch(row, start, p, -100.0);
          } else {
            add_branch(row, nr * cols + nc, p, -1.0);
          }
        }
      }
    }
  }
  return mdp(S, A, std::move(table), 0.9);
}

mdp gen_gamblers_ruin(int capital_max, double win_prob) {
  if (capital_max < 2 || !(win_prob > 0.0 && win_prob < 1.0)) {
    throw param_out_of_range("gamblers_ruin capital_max=" +
                             std::to_string(capital_max) +
                             " win_prob=" + format_double(win_prob));
  }
  const int S = capital_max + 1;
  const int A = capital_max / 2 + 1;  // bet sizes 0..floor(C/2)
  std::vector<std::vector<transition>> table(
      static_cast<std::size_t>(S) * A);
  for (int c = 0; c < S; ++c) {
    for (int a = 0; a < A; ++a) {
      auto& row = table[static_cast<std::size_t>(c) * A + a];
      if (c == 0 || c == capital_max) {
        row.push_back({c, 1.0, 0.0});
        continue;
      }
      int bet = std::min(a, std::min(c, capital_max - c));
      if (bet == 0) {
        row.push_back({c, 1.0, 0.0});
        continue;
      }
      int up = c + bet;
      int down = c - bet;
      add_branch(row, up, win_prob, up == capital_max ? 1.0 : 0.0);
      add_branch(row, down, 1.0 - win_prob, 0.0);
    }
  }
  return mdp(S, A, std::move(table), 0.9);
}

mdp gen_inventory(int capacity, const discrete_distribution& demand,
                  const inventory_prices& prices) {
  if (capacity < 1) {
    throw param_out_of_range("inventory capacity=" + std::to_string(capacity));
  }
  std::vector<int> demand_levels;
  for (double v : demand.values()) {
    double rounded = std::round(v);
    if (v < 0.0 || std::abs(v - rounded) > 1e-9) {
      throw param_out_of_range("demand atom " + format_double(v) +
                               " is not a non-negative integer");
    }
    demand_levels.push_back(static_cast<int>(rounded));
  }

  const int S = capacity + 1;
  const int A = capacity + 1;  // order quantities 0..capacity
  std::vector<std::vector<transition>> table(
      static_cast<std::size_t>(S) * A);
  for (int stock = 0; stock < S; ++stock) {
    for (int order = 0; order < A; ++order) {
      auto& row = table[static_cast<std::size_t>(stock) * A + order];
      int filled = std::min(order, capacity - stock);
      int available = stock + filled;
      for (std::size_t i = 0; i < demand_levels.size(); ++i) {
        int sales = std::min(demand_levels[i], available);
        int next = available - sales;
        double reward = prices.revenue * sales - prices.cost * filled -
                        prices.holding * next;
        add_branch(row, next, demand.probabilities()[i], reward);
      }
    }
  }
  return mdp(S, A, std::move(table), 0.9);
}

mdp gen_random_mdp(std::uint64_t seed, int n_states, int n_actions,
                   int branching, double reward_lo, double reward_hi) {
  if (n_states < 1 || n_actions < 1 || branching < 1 ||
      branching > n_states || reward_lo > reward_hi) {
    throw param_out_of_range("random mdp shape");
  }
  rng_stream rng(seed);
  std::vector<std::vector<transition>> table(
      static_cast<std::size_t>(n_states) * n_actions);
  std::vector<int> perm(n_states);
  for (int s = 0; s < n_states; ++s) {
    for (int a = 0; a < n_actions; ++a) {
      auto& row = table[static_cast<std::size_t>(s) * n_actions + a];
      // Partial Fisher-Yates picks `branching` distinct successors.
      std::iota(perm.begin(), perm.end(), 0);
      for (int k = 0; k < branching; ++k) {
        int j = k + static_cast<int>(rng.next_below(n_states - k));
        std::swap(perm[k], perm[j]);
      }
      double reward =
          reward_lo + rng.next_double() * (reward_hi - reward_lo);
      double total = 0.0;
      std::vector<double> weights(branching);
      for (int k = 0; k < branching; ++k) {
        weights[k] = rng.next_double_open();
        total += weights[k];
      }
      for (int k = 0; k < branching; ++k) {
        row.push_back({perm[k], weights[k] / total, reward});
      }
      std::sort(row.begin(), row.end(),
                [](const transition& x, const transition& y) {
                  return x.next < y.next;
                });
    }
  }
  return mdp(n_states, n_actions, std::move(table), 0.9);
}

namespace {

double param_or(const domain_spec& spec, const std::string& key,
                double fallback) {
  auto it = spec.parameters.find(key);
  if (it == spec.parameters.end()) return fallback;
  double v;
  if (!parse_double(it->second, v)) {
    throw type_mismatch("domain parameter " + key + "=" + it->second);
  }
  return v;
}

}  // namespace

mdp make_domain(const domain_spec& spec) {
  if (spec.kind == "cliffwalk") {
    return gen_cliffwalk(static_cast<int>(param_or(spec, "rows", 4)),
                         static_cast<int>(param_or(spec, "cols", 12)),
                         param_or(spec, "slip", 0.1));
  }
  if (spec.kind == "gamblers_ruin") {
    return gen_gamblers_ruin(
        static_cast<int>(param_or(spec, "capital_max", 7)),
        param_or(spec, "win_prob", 0.7));
  }
  if (spec.kind == "inventory") {
    int capacity = static_cast<int>(param_or(spec, "capacity", 5));
    int mean = static_cast<int>(param_or(spec, "demand_mean", 2));
    // Default demand: uniform over 0..2*mean.
    std::vector<std::pair<double, double>> atoms;
    int hi = std::max(1, 2 * mean);
    for (int d = 0; d <= hi; ++d) {
      atoms.emplace_back(d, 1.0 / (hi + 1));
    }
    inventory_prices prices{param_or(spec, "revenue", 3.0),
                            param_or(spec, "cost", 1.0),
                            param_or(spec, "holding", 0.2)};
    return gen_inventory(capacity, dist_new(atoms), prices);
  }
  if (spec.kind == "random") {
    return gen_random_mdp(spec.seed,
                          static_cast<int>(param_or(spec, "S", 3)),
                          static_cast<int>(param_or(spec, "A", 2)),
                          static_cast<int>(param_or(spec, "branching", 2)),
                          param_or(spec, "reward_lo", -1.0),
                          param_or(spec, "reward_hi", 1.0));
  }
  if (spec.kind == "csv") {
    auto it = spec.parameters.find("path");
    if (it == spec.parameters.end()) {
      throw missing_required("csv domain needs path");
    }
    return load_mdp_csv_file(it->second);
  }
  throw unknown_key("domain kind " + spec.kind);
}

int default_initial_state(const domain_spec& spec) {
  if (spec.kind == "cliffwalk") {
    return cliffwalk_start_state(static_cast<int>(param_or(spec, "rows", 4)),
                                 static_cast<int>(param_or(spec, "cols", 12)));
  }
  if (spec.kind == "gamblers_ruin") return 5;
  return 0;
}

}  // namespace qmdp
