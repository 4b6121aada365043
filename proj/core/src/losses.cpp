#include "qmdp/losses.hpp"

#include <algorithm>
#include <cmath>

#include "qmdp/errors.hpp"
#include "qmdp/format.hpp"

namespace qmdp {

namespace {

void check_alpha_closed(double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw alpha_out_of_range("alpha=" + format_double(alpha));
  }
}

void check_alpha_open(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw alpha_out_of_range("alpha=" + format_double(alpha));
  }
}

void check_kappa(double kappa) {
  if (!(kappa > 0.0 && kappa <= 1.0)) {
    throw kappa_out_of_range("kappa=" + format_double(kappa));
  }
}

}  // namespace

double quantile_loss(double alpha, double delta) {
  check_alpha_closed(alpha);
  return std::max(alpha * delta, -(1.0 - alpha) * delta);
}

double quantile_loss_subgrad(double alpha, double delta) {
  check_alpha_closed(alpha);
  if (delta > 0.0) return alpha;
  if (delta < 0.0) return -(1.0 - alpha);
  return 0.0;
}

double soft_loss(double alpha, double kappa, double delta) {
  check_alpha_open(alpha);
  check_kappa(kappa);
  if (delta < -kappa) {
    return 0.5 * (1.0 - alpha) * kappa *
           ((delta + kappa) * (delta + kappa) - 2.0 * delta / kappa - 1.0);
  }
  if (delta < 0.0) {
    return (1.0 - alpha) * delta * delta / (2.0 * kappa);
  }
  if (delta < kappa) {
    return alpha * delta * delta / (2.0 * kappa);
  }
  return 0.5 * alpha * kappa *
         ((delta - kappa) * (delta - kappa) + 2.0 * delta / kappa - 1.0);
}

double soft_loss_grad(double alpha, double kappa, double delta) {
  check_alpha_open(alpha);
  check_kappa(kappa);
  if (delta < -kappa) {
    return (1.0 - alpha) * (kappa * delta + kappa * kappa - 1.0);
  }
  if (delta < 0.0) {
    return (1.0 - alpha) / kappa * delta;
  }
  if (delta < kappa) {
    return alpha / kappa * delta;
  }
  return alpha * (kappa * delta - kappa * kappa + 1.0);
}

double soft_loss_mu(double alpha, double kappa) {
  check_alpha_open(alpha);
  check_kappa(kappa);
  return std::min(alpha, 1.0 - alpha) * kappa;
}

double soft_loss_lipschitz(double alpha, double kappa) {
  check_alpha_open(alpha);
  check_kappa(kappa);
  return std::max(alpha, 1.0 - alpha) / kappa;
}

double huber_loss(double alpha, double h, double delta) {
  check_alpha_closed(alpha);
  if (!(h > 0.0)) throw param_out_of_range("huber h=" + format_double(h));
  if (delta < -h) {
    return -(1.0 - alpha) * (delta + h) + 0.5 * (1.0 - alpha) * h;
  }
  if (delta <= 0.0) {
    return (1.0 - alpha) * delta * delta / (2.0 * h);
  }
  if (delta < h) {
    return alpha * delta * delta / (2.0 * h);
  }
  return alpha * (delta - h) + 0.5 * alpha * h;
}

namespace {

// Running regime sums for g(m) = E[soft_loss_grad(x - m)]. Atoms live in one
// of four regimes depending on delta = z - m; each regime's contribution is
// linear in m through (sum p, sum p*z).
struct regime_sums {
  double p4 = 0.0, m4 = 0.0;  // delta >= kappa
  double p3 = 0.0, m3 = 0.0;  // delta in [0, kappa)
  double p2 = 0.0, m2 = 0.0;  // delta in [-kappa, 0)
  double p1 = 0.0, m1 = 0.0;  // delta < -kappa

  double eval(double alpha, double kappa, double m) const {
    double g = 0.0;
    g += alpha * kappa * (m4 - m * p4) + alpha * (1.0 - kappa * kappa) * p4;
    g += alpha / kappa * (m3 - m * p3);
    g += (1.0 - alpha) / kappa * (m2 - m * p2);
    g += (1.0 - alpha) * kappa * (m1 - m * p1) +
         (1.0 - alpha) * (kappa * kappa - 1.0) * p1;
    return g;
  }
};

struct breakpoint {
  double m;
  int stage;  // 0: R4->R3 at z-kappa, 1: R3->R2 at z, 2: R2->R1 at z+kappa
  std::size_t atom;
};

}  // namespace

double shortfall_root(const std::vector<double>& values,
                      const std::vector<double>& probs, double alpha,
                      double kappa) {
  check_alpha_open(alpha);
  check_kappa(kappa);
  if (values.empty() || values.size() != probs.size()) {
    throw empty_distribution("shortfall over empty support");
  }
  if (values.size() == 1) return values[0];

  std::vector<breakpoint> events;
  events.reserve(values.size() * 3);
  regime_sums sums;
  for (std::size_t i = 0; i < values.size(); ++i) {
    double z = values[i];
    sums.p4 += probs[i];
    sums.m4 += probs[i] * z;
    events.push_back({z - kappa, 0, i});
    events.push_back({z, 1, i});
    events.push_back({z + kappa, 2, i});
  }
  std::sort(events.begin(), events.end(), [](const breakpoint& a,
                                             const breakpoint& b) {
    if (a.m != b.m) return a.m < b.m;
    if (a.stage != b.stage) return a.stage < b.stage;
    return a.atom < b.atom;
  });

  // g is strictly decreasing, positive at the first breakpoint and negative
  // at the last, so exactly one piece brackets the root.
  double prev_m = events.front().m;
  double prev_g = sums.eval(alpha, kappa, prev_m);
  for (const breakpoint& e : events) {
    double g_here = sums.eval(alpha, kappa, e.m);
    if (g_here <= 0.0) {
      if (prev_g == g_here) return prev_m;
      return prev_m + prev_g * (e.m - prev_m) / (prev_g - g_here);
    }
    double p = probs[e.atom];
    double pz = probs[e.atom] * values[e.atom];
    switch (e.stage) {
      case 0:
        sums.p4 -= p; sums.m4 -= pz;
        sums.p3 += p; sums.m3 += pz;
        break;
      case 1:
        sums.p3 -= p; sums.m3 -= pz;
        sums.p2 += p; sums.m2 += pz;
        break;
      default:
        sums.p2 -= p; sums.m2 -= pz;
        sums.p1 += p; sums.m1 += pz;
        break;
    }
    prev_m = e.m;
    prev_g = sums.eval(alpha, kappa, e.m);
  }
  return events.back().m;
}

std::vector<double> shortfall_levels(const std::vector<double>& values,
                                     const std::vector<double>& probs,
                                     const std::vector<double>& alphas,
                                     double kappa) {
  check_kappa(kappa);
  for (std::size_t i = 1; i < alphas.size(); ++i) {
    if (alphas[i] < alphas[i - 1]) {
      throw param_out_of_range("levels must be ascending");
    }
  }
  std::vector<double> out(alphas.size());
  if (values.empty() || values.size() != probs.size()) {
    throw empty_distribution("shortfall over empty support");
  }
  if (values.size() == 1) {
    for (double alpha : alphas) check_alpha_open(alpha);
    std::fill(out.begin(), out.end(), values[0]);
    return out;
  }

  std::vector<breakpoint> events;
  events.reserve(values.size() * 3);
  regime_sums sums;
  for (std::size_t i = 0; i < values.size(); ++i) {
    sums.p4 += probs[i];
    sums.m4 += probs[i] * values[i];
    events.push_back({values[i] - kappa, 0, i});
    events.push_back({values[i], 1, i});
    events.push_back({values[i] + kappa, 2, i});
  }
  std::sort(events.begin(), events.end(), [](const breakpoint& a,
                                             const breakpoint& b) {
    if (a.m != b.m) return a.m < b.m;
    if (a.stage != b.stage) return a.stage < b.stage;
    return a.atom < b.atom;
  });

  // The root is non-decreasing in alpha, so the event pointer only moves
  // forward across levels.
  std::size_t k = 0;  // events applied; sums valid up to events[k].m
  for (std::size_t li = 0; li < alphas.size(); ++li) {
    double alpha = alphas[li];
    check_alpha_open(alpha);
    while (k + 1 < events.size() && sums.eval(alpha, kappa, events[k].m) > 0.0) {
      const breakpoint& e = events[k];
      double p = probs[e.atom];
      double pz = probs[e.atom] * values[e.atom];
      switch (e.stage) {
        case 0:
          sums.p4 -= p; sums.m4 -= pz;
          sums.p3 += p; sums.m3 += pz;
          break;
        case 1:
          sums.p3 -= p; sums.m3 -= pz;
          sums.p2 += p; sums.m2 += pz;
          break;
        default:
          sums.p2 -= p; sums.m2 -= pz;
          sums.p1 += p; sums.m1 += pz;
          break;
      }
      ++k;
    }
    double right_m = events[k].m;
    double right_g = sums.eval(alpha, kappa, right_m);
    if (right_g > 0.0) {
      out[li] = right_m;  // exhausted events; g < 0 at the tail in exact math
      continue;
    }
    double left_m = k == 0 ? right_m : events[k - 1].m;
    double left_g = sums.eval(alpha, kappa, left_m);
    out[li] = left_g == right_g
                  ? left_m
                  : left_m + left_g * (right_m - left_m) / (left_g - right_g);
  }
  return out;
}

double shortfall_value(const discrete_distribution& d, double alpha,
                       double kappa) {
  return shortfall_root(d.values(), d.probabilities(), alpha, kappa);
}

}  // namespace qmdp
