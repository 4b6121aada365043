#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "qmdp/distribution.hpp"
#include "qmdp/mdp.hpp"

namespace qmdp {

// Grid world with a cliff along the bottom row. Rows are numbered from the
// bottom (row 0 holds the cliff and the goal), cells are id = row*cols + col.
// Goal is the bottom-right corner, absorbing with reward 0; cells (0, c) for
// 0 < c < cols-1 are cliff cells. Stepping into the cliff costs -100 and
// teleports to the start cell (rows-1)*cols + 1, every other step costs -1.
// A move into a wall leaves the agent in place. The chosen direction is
// taken with probability 1-3*slip, each other direction with slip.
// For the default 4x12 grid the start cell is state 37.
mdp gen_cliffwalk(int rows, int cols, double slip);

// Cliffwalk action order.
enum cliff_action { cliff_up = 0, cliff_down = 1, cliff_left = 2, cliff_right = 3 };

int cliffwalk_start_state(int rows, int cols);
int cliffwalk_goal_state(int rows, int cols);

// Gambler's ruin: states are capital levels 0..capital_max, actions are bet
// sizes (a bet larger than min(c, capital_max-c) plays as bet 0). A bet b
// moves c -> c+b with win_prob, c -> c-b otherwise. Reaching capital_max
// pays a one-time reward of 1 on entry; 0 and capital_max are absorbing.
mdp gen_gamblers_ruin(int capital_max, double win_prob);

struct inventory_prices {
  double revenue;
  double cost;
  double holding;
};

// Newsvendor chain: state = stock 0..capacity, action = order quantity
// (clamped to free capacity). Demand atoms must be non-negative integers.
// reward = revenue*sales - cost*order - holding*(next stock).
mdp gen_inventory(int capacity, const discrete_distribution& demand,
                  const inventory_prices& prices);

// Seeded random MDP: exactly `branching` distinct successors per (s,a) with
// renormalized-uniform probabilities, rewards uniform in reward_range shared
// across branches. Same seed gives a bit-identical MDP on every platform.
mdp gen_random_mdp(std::uint64_t seed, int n_states, int n_actions,
                   int branching, double reward_lo, double reward_hi);

// Parsed `--domain` request: one generator kind plus its parameter map.
struct domain_spec {
  std::string kind;  // cliffwalk | gamblers_ruin | inventory | random | csv
  std::map<std::string, std::string> parameters;
  std::uint64_t seed = 0;
};

// Builds the requested domain; validates that the parameters fit the kind.
mdp make_domain(const domain_spec& spec);

// The conventional initial state of a domain (cliffwalk start cell,
// gambler's ruin capital 5, otherwise state 0).
int default_initial_state(const domain_spec& spec);

}  // namespace qmdp
