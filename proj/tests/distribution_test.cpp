#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "helpers.hpp"
#include "qmdp/distribution.hpp"
#include "qmdp/errors.hpp"

using namespace qmdp;
using qmdp::testing::alpha_off_breakpoints;
using qmdp::testing::random_dist;

TEST_SUITE("distribution") {

TEST_CASE("construction canonicalizes atoms") {
  auto d = dist_new({{1.0, 0.5}, {1.0, 0.5}});
  CHECK(d.size() == 1);
  CHECK(d.values()[0] == 1.0);
  CHECK(d.probabilities()[0] == 1.0);

  auto e = dist_new({{2.0, 0.3}, {-1.0, 0.7}});
  CHECK(e.values() == std::vector<double>{-1.0, 2.0});
  CHECK(e.probabilities() == std::vector<double>{0.7, 0.3});
}

TEST_CASE("construction errors") {
  CHECK_THROWS_AS(dist_new({{0.0, 0.5}, {1.0, 0.6}}), probability_sum_mismatch);
  CHECK_THROWS_AS(dist_new({}), empty_distribution);
  CHECK_THROWS_AS(dist_new({{0.0, -0.1}, {1.0, 1.1}}), negative_probability);
}

TEST_CASE("probabilities renormalize to an exact unit sum") {
  rng_stream rng(7);
  for (int i = 0; i < 200; ++i) {
    auto d = random_dist(rng, 8);
    double sum = std::accumulate(d.probabilities().begin(),
                                 d.probabilities().end(), 0.0);
    CHECK(sum == 1.0);
    for (double p : d.probabilities()) CHECK(p > 0.0);
    CHECK(std::is_sorted(d.values().begin(), d.values().end()));
  }
}

TEST_CASE("lower quantile") {
  auto d = dist_new({{-1.0, 0.5}, {1.0, 0.5}});
  CHECK(d.quantile_lower(0.5) == extended_real::finite(-1.0));
  CHECK(d.quantile_lower(0.0).is_neg_inf());
  CHECK(dist_new({{3.0, 1.0}}).quantile_lower(1.0) ==
        extended_real::finite(3.0));
  CHECK_THROWS_AS(d.quantile_lower(1.5), alpha_out_of_range);
}

TEST_CASE("upper quantile") {
  auto d = dist_new({{-1.0, 0.5}, {1.0, 0.5}});
  CHECK(d.quantile_upper(0.5) == extended_real::finite(1.0));
  CHECK(d.quantile_upper(1.0).is_pos_inf());
  CHECK(d.quantile_upper(0.0) == extended_real::finite(-1.0));
  CHECK_THROWS_AS(d.quantile_upper(-0.1), alpha_out_of_range);
}

TEST_CASE("var is the upper quantile") {
  CHECK(dist_new({{0.0, 1.0}}).var(0.3) == extended_real::finite(0.0));
  CHECK(dist_new({{-1.0, 0.5}, {1.0, 0.5}}).var(0.25) ==
        extended_real::finite(-1.0));
  CHECK(dist_new({{5.0, 1.0}}).var(1.0).is_pos_inf());
}

// Reference implementation straight from the definitions: scan all atom
// values as candidate tau.
static double ref_quantile_lower(const discrete_distribution& d,
                                 double alpha) {
  for (std::size_t i = 0; i < d.size(); ++i) {
    double cdf = 0.0;
    for (std::size_t k = 0; k <= i; ++k) cdf += d.probabilities()[k];
    if (cdf >= alpha) return d.values()[i];
  }
  return d.values().back();
}

static double ref_quantile_upper(const discrete_distribution& d,
                                 double alpha) {
  double best = d.values().front();
  for (std::size_t i = 0; i < d.size(); ++i) {
    double below = 0.0;
    for (std::size_t k = 0; k < i; ++k) below += d.probabilities()[k];
    if (below <= alpha) best = d.values()[i];
  }
  return best;
}

TEST_CASE("quantiles agree with the definitional scan") {
  rng_stream rng(11);
  for (int i = 0; i < 500; ++i) {
    auto d = random_dist(rng);
    double alpha = alpha_off_breakpoints(rng, d);
    CHECK(d.quantile_lower(alpha).as_double() ==
          ref_quantile_lower(d, alpha));
    CHECK(d.quantile_upper(alpha).as_double() ==
          ref_quantile_upper(d, alpha));
  }
}

TEST_CASE("lower quantile never exceeds upper quantile") {
  rng_stream rng(13);
  for (int i = 0; i < 500; ++i) {
    auto d = random_dist(rng);
    double alpha = rng.next_double();
    CHECK(d.quantile_lower(alpha) <= d.quantile_upper(alpha));
  }
}

TEST_CASE("extended reals follow the augmented order") {
  auto ninf = extended_real::neg_inf();
  auto pinf = extended_real::pos_inf();
  auto mid = extended_real::finite(3.0);
  CHECK(ninf < mid);
  CHECK(mid < pinf);
  CHECK(std::min(pinf, mid) == mid);
  CHECK(std::max(ninf, mid) == mid);
  CHECK_THROWS_AS(extended_real::finite(
                      std::numeric_limits<double>::quiet_NaN()),
                  non_finite_input);
}

TEST_CASE("wasserstein1") {
  CHECK(wasserstein1({1.0, 2.0}, {1.0, 2.0}) == 0.0);
  CHECK(wasserstein1({0.0, 0.0}, {1.0, 3.0}) == 2.0);
  CHECK(wasserstein1({1.0, 2.0, 3.0}, {2.0, 2.0, 2.0}) ==
        doctest::Approx(2.0 / 3.0));
  CHECK_THROWS_AS(wasserstein1({1.0}, {1.0, 2.0}), length_mismatch);
  CHECK_THROWS_AS(
      wasserstein1({std::numeric_limits<double>::infinity()}, {0.0}),
      non_finite_input);
}

}  // TEST_SUITE
