#include <doctest.h>

#include <sstream>

#include "helpers.hpp"
#include "qmdp/domains.hpp"
#include "qmdp/errors.hpp"
#include "qmdp/mdp.hpp"
#include "qmdp/mdp_io.hpp"

using namespace qmdp;

namespace {

mdp from_csv(const std::string& body, double gamma = 0.9) {
  std::istringstream in(body);
  return load_mdp_csv(in, gamma);
}

constexpr const char* kHeader =
    "idstatefrom,idaction,idstateto,probability,reward\n";

}  // namespace

TEST_SUITE("mdp") {

TEST_CASE("loads a deterministic two-state chain") {
  mdp m = from_csv(std::string(kHeader) +
                   "0,0,1,1.0,2.0\n"
                   "1,0,1,1.0,-1.0\n");
  CHECK(m.n_states() == 2);
  CHECK(m.n_actions() == 1);
  CHECK(m.gamma() == 0.9);
  CHECK(m.r_min() == -1.0);
  CHECK(m.r_max() == 2.0);
  CHECK(m.transitions(0, 0)[0].next == 1);
  CHECK(m.reward(0, 0, 1) == 2.0);
}

TEST_CASE("accepts CRLF line endings") {
  mdp m = from_csv(std::string(kHeader) + "0,0,0,1.0,0.5\r\n");
  CHECK(m.n_states() == 1);
}

TEST_CASE("rejects malformed input with typed errors") {
  CHECK_THROWS_AS(from_csv("idstatefrom,idaction\n"), bad_header);
  CHECK_THROWS_AS(from_csv(std::string(kHeader) + "0,0,0,0.98,0\n"),
                  stochasticity_violation);
  CHECK_THROWS_AS(from_csv(std::string(kHeader) + "0,0,0,x,0\n"),
                  non_numeric_field);
  CHECK_THROWS_AS(from_csv(std::string(kHeader) + "0,0,0,-0.5,0\n"),
                  row_probability_negative);
  CHECK_THROWS_AS(from_csv(std::string(kHeader) +
                           "0,0,0,0.5,1\n0,0,0,0.5,2\n"),
                  duplicate_reward_conflict);
  // State 1 appears only as a destination.
  CHECK_THROWS_AS(from_csv(std::string(kHeader) + "0,0,1,1.0,0\n"),
                  dangling_index);
}

TEST_CASE("duplicate rows with agreeing rewards merge") {
  mdp m = from_csv(std::string(kHeader) +
                   "0,0,0,0.5,1.0\n"
                   "0,0,0,0.5,1.0\n");
  CHECK(m.transitions(0, 0).size() == 1);
  CHECK(m.transitions(0, 0)[0].prob == 1.0);
}

TEST_CASE("row sums renormalize to exactly one") {
  mdp m = from_csv(std::string(kHeader) +
                   "0,0,0,0.3333331,0\n"
                   "0,0,1,0.6666666,0\n"
                   "1,0,1,1.0,0\n");
  double sum = 0.0;
  for (const transition& t : m.transitions(0, 0)) sum += t.prob;
  CHECK(sum == 1.0);
}

TEST_CASE("csv round-trips generated models") {
  rng_stream rng(101);
  for (int rep = 0; rep < 20; ++rep) {
    mdp m = gen_random_mdp(rng.next_u64(), 4, 3, 2, -2.0, 2.0);
    std::ostringstream out;
    save_mdp_csv(m, out);
    mdp back = from_csv(out.str(), m.gamma());
    CHECK(m == back);
  }
}

TEST_CASE("fuzzed csv input never crashes") {
  rng_stream rng(103);
  const std::string charset = "0123456789,.-\nxyz";
  int parsed = 0;
  for (int rep = 0; rep < 500; ++rep) {
    std::string body = kHeader;
    int len = static_cast<int>(rng.next_below(200));
    for (int i = 0; i < len; ++i) {
      body.push_back(charset[rng.next_below(charset.size())]);
    }
    try {
      from_csv(body);
      ++parsed;
    } catch (const error&) {
      // typed failure is the expected outcome
    }
  }
  CHECK(parsed >= 0);
}

TEST_CASE("discount override copies the model") {
  mdp m = qmdp::testing::two_state_chain(1.0, 0.0, 0.9);
  mdp g1 = m.with_discount(1.0);
  CHECK(g1.gamma() == 1.0);
  CHECK(m.gamma() == 0.9);
  CHECK_THROWS_AS(m.with_discount(1.5), param_out_of_range);
}

}  // TEST_SUITE
