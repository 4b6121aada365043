#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "helpers.hpp"
#include "qmdp/distribution.hpp"
#include "qmdp/errors.hpp"
#include "qmdp/losses.hpp"
#include "qmdp/risk_grid.hpp"

using namespace qmdp;
using qmdp::testing::alpha_off_breakpoints;
using qmdp::testing::expected_quantile_loss;
using qmdp::testing::random_dist;
using qmdp::testing::shortfall_bisect;

TEST_SUITE("losses") {

TEST_CASE("pinball loss values") {
  CHECK(quantile_loss(0.25, 4.0) == 1.0);
  CHECK(quantile_loss(0.7, 0.0) == 0.0);
  CHECK(quantile_loss(0.25, -4.0) == 3.0);
  CHECK_THROWS_AS(quantile_loss(1.5, 0.0), alpha_out_of_range);
  rng_stream rng(3);
  for (int i = 0; i < 200; ++i) {
    CHECK(quantile_loss(rng.next_double(), 10.0 * (rng.next_double() - 0.5)) >=
          0.0);
  }
}

TEST_CASE("pinball subgradient") {
  CHECK(quantile_loss_subgrad(0.3, 2.0) == 0.3);
  CHECK(quantile_loss_subgrad(0.3, -2.0) == doctest::Approx(-0.7));
  CHECK(quantile_loss_subgrad(0.3, 0.0) == 0.0);
}

TEST_CASE("soft loss values") {
  CHECK(soft_loss(0.4, 0.2, 0.0) == 0.0);
  CHECK(soft_loss(0.5, 0.5, 0.25) == doctest::Approx(0.03125));
  // Fourth branch at alpha=0.5, kappa=1, delta=2:
  // (0.5*1/2) * ((2-1)^2 + 2*2/1 - 1) = 0.25 * 4 = 1.
  CHECK(soft_loss(0.5, 1.0, 2.0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(soft_loss(0.0, 0.5, 1.0), alpha_out_of_range);
  CHECK_THROWS_AS(soft_loss(0.5, 0.0, 1.0), kappa_out_of_range);
  CHECK_THROWS_AS(soft_loss(0.5, 1.5, 1.0), kappa_out_of_range);
}

TEST_CASE("soft loss is continuous across branch boundaries") {
  rng_stream rng(5);
  for (int i = 0; i < 100; ++i) {
    double alpha = 0.01 + 0.98 * rng.next_double();
    double kappa = 0.05 + 0.95 * rng.next_double();
    for (double b : {-kappa, 0.0, kappa}) {
      double eps = 1e-9;
      double left = soft_loss(alpha, kappa, b - eps);
      double right = soft_loss(alpha, kappa, b + eps);
      CHECK(std::abs(left - right) < 1e-7);
    }
  }
}

TEST_CASE("soft loss gradient values") {
  CHECK(soft_loss_grad(0.6, 0.3, 0.0) == 0.0);
  CHECK(soft_loss_grad(0.3, 0.1, 0.1) == doctest::Approx(0.3));
  CHECK(soft_loss_grad(0.3, 0.1, -0.1) == doctest::Approx(-0.7));
}

TEST_CASE("soft loss gradient is non-decreasing in delta") {
  rng_stream rng(17);
  for (int i = 0; i < 300; ++i) {
    double alpha = 0.01 + 0.98 * rng.next_double();
    double kappa = 0.01 + 0.99 * rng.next_double();
    double d1 = 8.0 * (rng.next_double() - 0.5);
    double d2 = 8.0 * (rng.next_double() - 0.5);
    if (d1 > d2) std::swap(d1, d2);
    CHECK(soft_loss_grad(alpha, kappa, d1) <=
          soft_loss_grad(alpha, kappa, d2) + 1e-15);
  }
}

TEST_CASE("finite differences match the gradient") {
  for (int ia = 1; ia <= 9; ++ia) {
    double alpha = ia / 10.0;
    for (double kappa : {0.05, 0.2, 0.5, 1.0}) {
      double h = 2e-6 * kappa;
      for (int id = -20; id <= 20; ++id) {
        double delta = id * 0.15;
        double fd = (soft_loss(alpha, kappa, delta + h) -
                     soft_loss(alpha, kappa, delta - h)) /
                    (2.0 * h);
        CHECK(std::abs(fd - soft_loss_grad(alpha, kappa, delta)) < 1e-6);
      }
    }
  }
}

TEST_CASE("gradient slope stays within the convexity constants") {
  rng_stream rng(23);
  for (int i = 0; i < 2000; ++i) {
    double alpha = 0.02 + 0.96 * rng.next_double();
    double kappa = 0.02 + 0.98 * rng.next_double();
    double d1 = 8.0 * (rng.next_double() - 0.5);
    double d2 = d1 + 1e-5 + 4.0 * rng.next_double();
    double slope = (soft_loss_grad(alpha, kappa, d2) -
                    soft_loss_grad(alpha, kappa, d1)) /
                   (d2 - d1);
    CHECK(slope >= soft_loss_mu(alpha, kappa) * (1.0 - 1e-9) - 1e-12);
    CHECK(slope <= soft_loss_lipschitz(alpha, kappa) * (1.0 + 1e-9));
  }
}

TEST_CASE("huber loss values") {
  CHECK(huber_loss(0.4, 0.3, 0.0) == 0.0);
  CHECK(huber_loss(0.5, 0.5, 1.0) == doctest::Approx(0.375));
  CHECK(huber_loss(0.5, 0.5, 0.25) == doctest::Approx(0.03125));
  CHECK_THROWS_AS(huber_loss(0.5, 0.0, 1.0), param_out_of_range);
}

TEST_CASE("expected huber loss can have a flat minimizer set") {
  auto d = dist_new({{-1.0, 0.5}, {1.0, 0.5}});
  auto expected = [&](double m) {
    double acc = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
      acc += d.probabilities()[i] * huber_loss(0.5, 0.5, d.values()[i] - m);
    }
    return acc;
  };
  double at_zero = expected(0.0);
  for (int i = 0; i <= 100; ++i) {
    double m = -0.5 + i * 0.01;
    CHECK(std::abs(expected(m) - at_zero) <= 1e-12);
  }
  CHECK(expected(0.6) > at_zero + 1e-3);
  CHECK(expected(-0.6) > at_zero + 1e-3);
}

TEST_CASE("shortfall of a point mass is its value") {
  rng_stream rng(29);
  for (int i = 0; i < 50; ++i) {
    double c = 10.0 * (rng.next_double() - 0.5);
    double alpha = 0.01 + 0.98 * rng.next_double();
    double kappa = 0.01 + 0.99 * rng.next_double();
    CHECK(shortfall_value(dist_new({{c, 1.0}}), alpha, kappa) == c);
  }
}

TEST_CASE("shortfall at the symmetric level is the midpoint") {
  auto d = dist_new({{-1.0, 0.5}, {1.0, 0.5}});
  CHECK(shortfall_value(d, 0.5, 0.5) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("shortfall matches 200-step bisection") {
  auto d = dist_new({{-1.0, 0.5}, {1.0, 0.5}});
  double v = shortfall_value(d, 0.9, 0.5);
  CHECK(v > 0.0);
  CHECK(v < 1.0);
  CHECK(v == doctest::Approx(shortfall_bisect(d, 0.9, 0.5)).epsilon(1e-12));

  rng_stream rng(31);
  for (int i = 0; i < 300; ++i) {
    auto dist = random_dist(rng);
    double alpha = 0.02 + 0.96 * rng.next_double();
    double kappa = 0.02 + 0.98 * rng.next_double();
    double mine = shortfall_value(dist, alpha, kappa);
    double ref = shortfall_bisect(dist, alpha, kappa);
    CHECK(std::abs(mine - ref) <= 1e-10 * std::max(1.0, std::abs(ref)));
  }
}

TEST_CASE("shortfall_levels equals per-level roots") {
  rng_stream rng(37);
  for (int i = 0; i < 100; ++i) {
    auto dist = random_dist(rng);
    double kappa = 0.02 + 0.98 * rng.next_double();
    std::vector<double> levels = {0.1, 0.25, 0.5, 0.75, 0.9};
    auto multi = shortfall_levels(dist.values(), dist.probabilities(), levels,
                                  kappa);
    for (std::size_t k = 0; k < levels.size(); ++k) {
      double single = shortfall_root(dist.values(), dist.probabilities(),
                                     levels[k], kappa);
      CHECK(multi[k] == doctest::Approx(single).epsilon(1e-12));
    }
  }
}

TEST_CASE("shortfall is translation invariant and monotone") {
  rng_stream rng(41);
  for (int i = 0; i < 300; ++i) {
    auto dist = random_dist(rng);
    double alpha = 0.02 + 0.96 * rng.next_double();
    double kappa = 0.02 + 0.98 * rng.next_double();
    double base = shortfall_value(dist, alpha, kappa);

    double c = 4.0 * (rng.next_double() - 0.5);
    std::vector<double> shifted = dist.values();
    std::vector<double> dominating = dist.values();
    for (std::size_t k = 0; k < dist.size(); ++k) {
      shifted[k] += c;
      dominating[k] += rng.next_double();
    }
    double tr = shortfall_root(shifted, dist.probabilities(), alpha, kappa);
    CHECK(tr == doctest::Approx(base + c).epsilon(1e-9));
    double dom =
        shortfall_root(dominating, dist.probabilities(), alpha, kappa);
    CHECK(dom >= base - 1e-12);
  }
}

TEST_CASE("shortfall is nonexpansive in the sup distance") {
  rng_stream rng(43);
  for (int i = 0; i < 300; ++i) {
    auto dist = random_dist(rng);
    double alpha = 0.02 + 0.96 * rng.next_double();
    double kappa = 0.02 + 0.98 * rng.next_double();
    std::vector<double> bumped = dist.values();
    double sup = 0.0;
    for (double& v : bumped) {
      double e = 2.0 * (rng.next_double() - 0.5);
      v += e;
      sup = std::max(sup, std::abs(e));
    }
    double a = shortfall_root(dist.values(), dist.probabilities(), alpha,
                              kappa);
    double b = shortfall_root(bumped, dist.probabilities(), alpha, kappa);
    CHECK(std::abs(a - b) <= sup + 1e-10);
  }
}

TEST_CASE("pinball loss elicits exactly the quantile interval") {
  rng_stream rng(47);
  for (int i = 0; i < 100; ++i) {
    auto d = random_dist(rng);
    double alpha = alpha_off_breakpoints(rng, d);
    double lo = d.quantile_lower(alpha).as_double();
    double hi = d.quantile_upper(alpha).as_double();

    double grid_min = std::numeric_limits<double>::infinity();
    double span_lo = d.values().front() - 1.0;
    double span_hi = d.values().back() + 1.0;
    for (int k = 0; k <= 800; ++k) {
      double m = span_lo + (span_hi - span_lo) * k / 800.0;
      grid_min = std::min(grid_min, expected_quantile_loss(d, alpha, m));
    }
    for (double m : {lo, hi, 0.5 * (lo + hi)}) {
      CHECK(expected_quantile_loss(d, alpha, m) <= grid_min + 1e-10);
    }
    CHECK(expected_quantile_loss(d, alpha, lo - 0.05) > grid_min + 1e-9);
    CHECK(expected_quantile_loss(d, alpha, hi + 0.05) > grid_min + 1e-9);
  }
}

TEST_CASE("floor and ceiling grid maps bracket the VaR") {
  rng_stream rng(53);
  for (int i = 0; i < 300; ++i) {
    auto d = random_dist(rng);
    double alpha = alpha_off_breakpoints(rng, d);
    risk_grid grid(2 + static_cast<int>(rng.next_below(63)));
    double lower = d.quantile_upper(grid.f_lower(alpha)).as_double();
    double mid = d.var(alpha).as_double();
    double upper_level = grid.f_upper(alpha);
    double upper = upper_level >= 1.0
                       ? d.values().back()
                       : d.quantile_lower(upper_level).as_double();
    CHECK(lower <= mid);
    CHECK(mid <= upper);
  }
}

TEST_CASE("VaR commutes with the max of step functions on a shared grid") {
  rng_stream rng(59);
  for (int rep = 0; rep < 100; ++rep) {
    int J = 2 + static_cast<int>(rng.next_below(15));
    int S = 2 + static_cast<int>(rng.next_below(3));
    std::vector<std::vector<double>> f(S, std::vector<double>(J));
    for (int i = 0; i < S; ++i) {
      double acc = 4.0 * (rng.next_double() - 0.5);
      for (int j = 0; j < J; ++j) {
        acc += rng.next_double();
        f[i][j] = acc;
      }
    }
    std::vector<std::pair<double, double>> max_atoms;
    for (int j = 0; j < J; ++j) {
      double g = f[0][j];
      for (int i = 1; i < S; ++i) g = std::max(g, f[i][j]);
      max_atoms.emplace_back(g, 1.0 / J);
    }
    auto max_dist = dist_new(max_atoms);
    for (int j = 0; j < J; ++j) {
      double alpha = static_cast<double>(j) / J;
      double lhs = max_dist.var(alpha).as_double();
      double rhs = -std::numeric_limits<double>::infinity();
      for (int i = 0; i < S; ++i) {
        std::vector<std::pair<double, double>> atoms;
        for (int jj = 0; jj < J; ++jj) atoms.emplace_back(f[i][jj], 1.0 / J);
        rhs = std::max(rhs, dist_new(atoms).var(alpha).as_double());
      }
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
  }
}

}  // TEST_SUITE
