#include <doctest.h>

#include <cmath>

#include "qmdp/domains.hpp"
#include "qmdp/errors.hpp"

using namespace qmdp;

TEST_SUITE("domains") {

TEST_CASE("cliffwalk shape and start cell") {
  mdp m = gen_cliffwalk(4, 12, 0.1);
  CHECK(m.n_states() == 48);
  CHECK(m.n_actions() == 4);
  CHECK(cliffwalk_start_state(4, 12) == 37);
  // 37 sits in the top row, away from the cliff.
  int start = cliffwalk_start_state(4, 12);
  for (int a = 0; a < 4; ++a) {
    for (const transition& t : m.transitions(start, a)) {
      CHECK(t.reward == -1.0);
    }
  }
  CHECK(m.r_min() == -100.0);
  CHECK(m.r_max() == 0.0);
}

TEST_CASE("cliffwalk slip mass sums to one on interior cells") {
  mdp m = gen_cliffwalk(4, 12, 0.1);
  int interior = 2 * 12 + 5;
  for (int a = 0; a < 4; ++a) {
    double sum = 0.0;
    for (const transition& t : m.transitions(interior, a)) sum += t.prob;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m.transitions(interior, a).size() == 4);
  }
}

TEST_CASE("cliffwalk slip=0 is deterministic") {
  mdp m = gen_cliffwalk(4, 12, 0.0);
  for (int s = 0; s < m.n_states(); ++s) {
    for (int a = 0; a < 4; ++a) {
      CHECK(m.transitions(s, a).size() == 1);
    }
  }
}

TEST_CASE("cliffwalk cliff steps cost 100 and teleport to start") {
  mdp m = gen_cliffwalk(4, 12, 0.1);
  int above_cliff = 1 * 12 + 5;  // row 1, over cliff cell (0,5)
  bool found = false;
  for (const transition& t : m.transitions(above_cliff, cliff_down)) {
    if (t.reward == -100.0) {
      found = true;
      CHECK(t.next == cliffwalk_start_state(4, 12));
      CHECK(t.prob == doctest::Approx(0.7));
    }
  }
  CHECK(found);
  // Goal absorbs at zero reward.
  int goal = cliffwalk_goal_state(4, 12);
  for (int a = 0; a < 4; ++a) {
    CHECK(m.transitions(goal, a).size() == 1);
    CHECK(m.transitions(goal, a)[0].next == goal);
    CHECK(m.transitions(goal, a)[0].reward == 0.0);
  }
}

TEST_CASE("cliffwalk rejects bad parameters") {
  CHECK_THROWS_AS(gen_cliffwalk(1, 12, 0.1), param_out_of_range);
  CHECK_THROWS_AS(gen_cliffwalk(4, 12, 0.4), param_out_of_range);
}

TEST_CASE("gamblers ruin moves and rewards") {
  mdp m = gen_gamblers_ruin(7, 0.7);
  CHECK(m.n_states() == 8);
  CHECK(m.n_actions() == 4);
  // Bet 0 at capital 3 self-loops.
  CHECK(m.transitions(3, 0).size() == 1);
  CHECK(m.transitions(3, 0)[0].next == 3);
  CHECK(m.transitions(3, 0)[0].prob == 1.0);
  // Bet 3 at capital 3 hits 0 or 6.
  auto row = m.transitions(3, 3);
  CHECK(row.size() == 2);
  CHECK(row[0].next == 6);
  CHECK(row[0].prob == doctest::Approx(0.7));
  CHECK(row[1].next == 0);
  CHECK(row[1].prob == doctest::Approx(0.3));
  // Entering the top pays one, once.
  CHECK(m.reward(4, 3, 7) == 1.0);
  CHECK(m.reward(7, 0, 7) == 0.0);
  CHECK_THROWS_AS(gen_gamblers_ruin(1, 0.7), param_out_of_range);
}

TEST_CASE("inventory chain") {
  inventory_prices prices{3.0, 1.0, 0.5};
  SUBCASE("zero demand only pays holding") {
    mdp m = gen_inventory(1, dist_new({{0.0, 1.0}}), prices);
    CHECK(m.reward(1, 0, 1) == doctest::Approx(-0.5));
    CHECK(m.reward(0, 0, 0) == 0.0);
  }
  SUBCASE("deterministic unit demand drains stock") {
    mdp m = gen_inventory(2, dist_new({{1.0, 1.0}}), prices);
    auto row = m.transitions(2, 0);
    CHECK(row.size() == 1);
    CHECK(row[0].next == 1);
    CHECK(row[0].reward == doctest::Approx(3.0 - 0.5));
  }
  SUBCASE("fractional demand atoms are rejected") {
    CHECK_THROWS_AS(gen_inventory(2, dist_new({{0.5, 1.0}}), prices),
                    param_out_of_range);
  }
}

TEST_CASE("random mdp is a deterministic function of the seed") {
  mdp a = gen_random_mdp(42, 5, 3, 2, -1.0, 1.0);
  mdp b = gen_random_mdp(42, 5, 3, 2, -1.0, 1.0);
  CHECK(a == b);
  mdp c = gen_random_mdp(43, 5, 3, 2, -1.0, 1.0);
  CHECK_FALSE(a == c);
  for (int s = 0; s < 5; ++s) {
    for (int act = 0; act < 3; ++act) {
      CHECK(a.transitions(s, act).size() == 2);
    }
  }
}

TEST_CASE("random mdp parameter checks") {
  CHECK(gen_random_mdp(1, 3, 2, 1, 0.0, 0.0).transitions(0, 0).size() == 1);
  CHECK_THROWS_AS(gen_random_mdp(1, 3, 2, 4, 0.0, 1.0), param_out_of_range);
  CHECK_THROWS_AS(gen_random_mdp(1, 0, 2, 1, 0.0, 1.0), param_out_of_range);
}

TEST_CASE("domain specs resolve defaults") {
  domain_spec cw{"cliffwalk", {}, 0};
  CHECK(default_initial_state(cw) == 37);
  domain_spec gr{"gamblers_ruin", {}, 0};
  CHECK(default_initial_state(gr) == 5);
  CHECK(make_domain(gr).n_states() == 8);
  domain_spec bad{"nope", {}, 0};
  CHECK_THROWS_AS(make_domain(bad), unknown_key);
}

}  // TEST_SUITE
