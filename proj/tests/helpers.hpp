#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "qmdp/distribution.hpp"
#include "qmdp/losses.hpp"
#include "qmdp/mdp.hpp"
#include "qmdp/rng.hpp"

namespace qmdp::testing {

inline discrete_distribution random_dist(rng_stream& rng, int max_atoms = 6,
                                         double lo = -5.0, double hi = 5.0) {
  int n = 1 + static_cast<int>(rng.next_below(max_atoms));
  std::vector<std::pair<double, double>> pairs;
  double total = 0.0;
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) {
    w[i] = rng.next_double_open();
    total += w[i];
  }
  for (int i = 0; i < n; ++i) {
    pairs.emplace_back(lo + rng.next_double() * (hi - lo), w[i] / total);
  }
  return dist_new(pairs);
}

// Draws alpha in (0,1) at least `gap` away from every CDF breakpoint, so
// quantile comparisons are unambiguous.
inline double alpha_off_breakpoints(rng_stream& rng,
                                    const discrete_distribution& d,
                                    double gap = 1e-6) {
  std::vector<double> cums;
  double c = 0.0;
  for (double p : d.probabilities()) {
    c += p;
    cums.push_back(c);
  }
  for (int tries = 0; tries < 1000; ++tries) {
    double a = rng.next_double();
    if (a <= gap || a >= 1.0 - gap) continue;
    bool ok = true;
    for (double b : cums) {
      if (std::abs(a - b) < gap) ok = false;
    }
    if (ok) return a;
  }
  return 0.5;
}

inline double expected_quantile_loss(const discrete_distribution& d,
                                     double alpha, double m) {
  double acc = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    acc += d.probabilities()[i] * quantile_loss(alpha, d.values()[i] - m);
  }
  return acc;
}

inline double expected_soft_grad(const discrete_distribution& d, double alpha,
                                 double kappa, double m) {
  double acc = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    acc += d.probabilities()[i] *
           soft_loss_grad(alpha, kappa, d.values()[i] - m);
  }
  return acc;
}

// Independent root finder for the shortfall value: 200 bisection steps on
// the strictly decreasing expected derivative.
inline double shortfall_bisect(const discrete_distribution& d, double alpha,
                               double kappa) {
  double lo = d.values().front() - kappa - 1.0;
  double hi = d.values().back() + kappa + 1.0;
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    if (expected_soft_grad(d, alpha, kappa, mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Two-state chain 0 -> 1 -> 1 with per-step rewards; handy deterministic
// fixture.
inline mdp two_state_chain(double r0, double r1, double gamma) {
  std::vector<std::vector<transition>> rows(2);
  rows[0].push_back({1, 1.0, r0});
  rows[1].push_back({1, 1.0, r1});
  return mdp(2, 1, std::move(rows), gamma);
}

inline mdp coin_mdp(double p_heads, double r_heads, double r_tails,
                    double gamma) {
  // State 0 flips to an absorbing sink (state 1 or 2); sink steps pay 0.
  std::vector<std::vector<transition>> rows(3);
  rows[0].push_back({1, p_heads, r_heads});
  rows[0].push_back({2, 1.0 - p_heads, r_tails});
  rows[1].push_back({1, 1.0, 0.0});
  rows[2].push_back({2, 1.0, 0.0});
  return mdp(3, 1, std::move(rows), gamma);
}

}  // namespace qmdp::testing
