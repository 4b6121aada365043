#include "qmdp/qlearn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qmdp/distribution.hpp"
#include "qmdp/errors.hpp"
#include "qmdp/format.hpp"
#include "qmdp/losses.hpp"
#include "qmdp/rng.hpp"

namespace qmdp {

void validate(const train_config& cfg) {
  if (cfg.J < 2) throw param_out_of_range("J=" + std::to_string(cfg.J));
  if (cfg.sweeps < 1) {
    throw param_out_of_range("sweeps=" + std::to_string(cfg.sweeps));
  }
  if (!(cfg.kappa >= 0.0 && cfg.kappa <= 1.0)) {
    throw kappa_out_of_range("kappa=" + format_double(cfg.kappa));
  }
  if (cfg.T && *cfg.T < 1) {
    throw param_out_of_range("T=" + std::to_string(*cfg.T));
  }
  if (!(cfg.lr_scale > 0.0) || cfg.lr_decay < 0.0) {
    throw param_out_of_range("learning-rate schedule");
  }
}

qtensor ql_init(const mdp& m, const train_config& cfg) {
  validate(cfg);
  risk_grid grid(cfg.J);
  if (cfg.T) {
    qtensor q(bound_kind::soft, *cfg.T, m.n_states(), grid, m.n_actions(),
              cfg.kappa);
    for (int t = 0; t <= *cfg.T; ++t) {
      double v = t * m.r_min();
      double* slice = q.slice(t);
      std::fill(slice, slice + q.slice_size(), v);
    }
    return q;
  }
  if (m.gamma() >= 1.0) throw gamma_one("time-free init needs gamma < 1");
  qtensor q(bound_kind::time_free, 0, m.n_states(), grid, m.n_actions(),
            cfg.kappa);
  double v = 1.0 / (1.0 - m.gamma());
  std::fill(q.values().begin(), q.values().end(), v);
  return q;
}

double step_size(std::int64_t i, const train_config& cfg) {
  if (cfg.robbins_monro) return cfg.lr_scale / (1.0 + static_cast<double>(i));
  return cfg.lr_scale * std::pow(0.1, cfg.lr_decay * static_cast<double>(i));
}

namespace {

double loss_grad(double alpha, double kappa, double delta) {
  return kappa > 0.0 ? soft_loss_grad(alpha, kappa, delta)
                     : quantile_loss_subgrad(alpha, delta);
}

double boundary_target(const qtensor& q, const mdp& m, int t) {
  if (q.time_free()) {
    if (m.gamma() >= 1.0) throw gamma_one("time-free boundary");
    return m.r_min() / (1.0 - m.gamma());
  }
  return t * m.r_min();
}

}  // namespace

double ql_update(qtensor& q, const sample_event& ev, double beta, double kappa,
                 const mdp& m) {
  const int J = q.grid().J;
  bool timed = !q.time_free();
  if (timed && (ev.t < 0 || ev.t > q.horizon())) {
    throw index_out_of_range("t=" + std::to_string(ev.t));
  }
  if (ev.s < 0 || ev.s >= q.n_states() || ev.j < 0 || ev.j >= J ||
      ev.a < 0 || ev.a >= q.n_actions() || ev.s_next < 0 ||
      ev.s_next >= q.n_states()) {
    throw index_out_of_range("sample event indices");
  }
  int t = timed ? ev.t : 0;
  double old = q.at(t, ev.s, ev.j, ev.a);

  if (ev.j > 0 && (!timed || ev.t > 0)) {
    int t_prev = timed ? ev.t - 1 : 0;
    double r = m.reward(ev.s, ev.a, ev.s_next);
    double alpha = q.grid().level_of(ev.j);
    double sum = 0.0;
    for (int j2 = 0; j2 < J; ++j2) {
      double best = q.at(t_prev, ev.s_next, j2, 0);
      for (int a2 = 1; a2 < q.n_actions(); ++a2) {
        best = std::max(best, q.at(t_prev, ev.s_next, j2, a2));
      }
      sum += loss_grad(alpha, kappa, r + m.gamma() * best - old);
    }
    double next = old + beta / J * sum;
    q.at(t, ev.s, ev.j, ev.a) = next;
    return next;
  }

  if (beta > 1.0) {
    throw beta_out_of_range("boundary relaxation beta=" + format_double(beta));
  }
  double next = old + beta * (boundary_target(q, m, t) - old);
  q.at(t, ev.s, ev.j, ev.a) = next;
  return next;
}

train_result train(const mdp& m, const train_config& cfg,
                   const qtensor* target) {
  validate(cfg);
  const bool timed = cfg.T.has_value();
  const double span = m.r_max() - m.r_min();
  const bool scaled = !timed && cfg.scale_rewards;

  // Time-free training optionally runs on rewards mapped to [0,1]; the
  // tensor is mapped back on output (and on the fly for diagnostics).
  mdp train_mdp = m;
  if (scaled) {
    std::vector<std::vector<transition>> rows;
    rows.reserve(static_cast<std::size_t>(m.n_states()) * m.n_actions());
    for (int s = 0; s < m.n_states(); ++s) {
      for (int a = 0; a < m.n_actions(); ++a) {
        auto row = m.transitions(s, a);
        std::vector<transition> copy(row.begin(), row.end());
        for (transition& tr : copy) {
          tr.reward = span > 0.0 ? (tr.reward - m.r_min()) / span : 0.0;
        }
        rows.push_back(std::move(copy));
      }
    }
    train_mdp = mdp(m.n_states(), m.n_actions(), std::move(rows), m.gamma());
  }
  const double unscale_mul = scaled ? span : 1.0;
  const double unscale_add =
      scaled ? m.r_min() / (1.0 - m.gamma()) : 0.0;

  qtensor q = ql_init(train_mdp, cfg);
  const int S = m.n_states();
  const int A = m.n_actions();
  const int J = cfg.J;
  const int slices = timed ? *cfg.T + 1 : 1;
  if (target && !(target->n_states() == S && target->grid().J == J)) {
    throw shape_mismatch("diagnostic target");
  }
  if (cfg.s0 < 0 || cfg.s0 >= S) throw param_out_of_range("s0");

  // max over actions per (slice, s, j), kept in sync after every write so
  // each update sees the latest table.
  std::vector<double> vmax(static_cast<std::size_t>(slices) * S * J);
  auto refresh_vmax = [&](int t, int s, int j) {
    double best = q.at(t, s, j, 0);
    for (int a = 1; a < A; ++a) best = std::max(best, q.at(t, s, j, a));
    vmax[(static_cast<std::size_t>(t) * S + s) * J + j] = best;
  };
  for (int t = 0; t < slices; ++t) {
    for (int s = 0; s < S; ++s) {
      for (int j = 0; j < J; ++j) refresh_vmax(t, s, j);
    }
  }

  std::vector<std::int64_t> pair_counter(static_cast<std::size_t>(S) * A, 0);
  std::vector<std::int64_t> cell_counter;
  if (cfg.per_cell_counters) {
    cell_counter.assign(static_cast<std::size_t>(slices) * S * J * A, 0);
  }
  std::vector<int> sampled(static_cast<std::size_t>(S) * A);
  std::vector<double> pair_beta(static_cast<std::size_t>(S) * A);

  rng_stream rng(cfg.seed);
  train_result result{std::move(q), {}};
  qtensor& table = result.tensor;
  const double floor_target = boundary_target(table, train_mdp, 0);

  for (int sweep = 1; sweep <= cfg.sweeps; ++sweep) {
    // One sampled transition per (s,a) pair per sweep; the pair's occurrence
    // counter advances once per sweep.
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A; ++a) {
        std::size_t sa = static_cast<std::size_t>(s) * A + a;
        sampled[sa] = train_mdp.sample(s, a, rng.next_double()).next;
        pair_beta[sa] = step_size(pair_counter[sa]++, cfg);
      }
    }
    for (int t = 0; t < slices; ++t) {
      for (int s = 0; s < S; ++s) {
        for (int j = 0; j < J; ++j) {
          for (int a = 0; a < A; ++a) {
            std::size_t sa = static_cast<std::size_t>(s) * A + a;
            double beta = pair_beta[sa];
            if (cfg.per_cell_counters) {
              std::size_t cell =
                  ((static_cast<std::size_t>(t) * S + s) * J + j) * A + a;
              beta = step_size(cell_counter[cell]++, cfg);
            }
            double old = table.at(t, s, j, a);
            double next;
            if (j > 0 && (!timed || t > 0)) {
              int t_prev = timed ? t - 1 : 0;
              double r = train_mdp.reward(s, a, sampled[sa]);
              double alpha = table.grid().level_of(j);
              const double* row =
                  vmax.data() +
                  (static_cast<std::size_t>(t_prev) * S + sampled[sa]) * J;
              double sum = 0.0;
              for (int j2 = 0; j2 < J; ++j2) {
                sum += loss_grad(alpha, cfg.kappa,
                                 r + train_mdp.gamma() * row[j2] - old);
              }
              next = old + beta / J * sum;
            } else {
              double target_v = timed ? t * train_mdp.r_min() : floor_target;
              next = old + std::min(beta, 1.0) * (target_v - old);
            }
            table.at(t, s, j, a) = next;
            refresh_vmax(t, s, j);
          }
        }
      }
    }
    if (target) {
      std::vector<double> mine(J), theirs(J);
      int top = timed ? *cfg.T : 0;
      for (int j = 0; j < J; ++j) {
        double best = table.at(top, cfg.s0, j, 0);
        for (int a = 1; a < A; ++a) {
          best = std::max(best, table.at(top, cfg.s0, j, a));
        }
        mine[j] = best * unscale_mul + unscale_add;
        int tt = target->time_free() ? 0 : std::min(top, target->horizon());
        double tbest = target->at(tt, cfg.s0, j, 0);
        for (int a = 1; a < target->n_actions(); ++a) {
          tbest = std::max(tbest, target->at(tt, cfg.s0, j, a));
        }
        theirs[j] = tbest;
      }
      result.diagnostics.emplace_back(sweep, wasserstein1(mine, theirs));
    }
  }

  if (scaled) {
    for (double& v : table.values()) v = v * unscale_mul + unscale_add;
  }
  return result;
}

double risk_sampled_loss(const qtensor& q, const mdp& m, int t, int s, int a,
                         int s_next, int K, int K_next, double kappa,
                         std::uint64_t seed) {
  if (K < 1 || K_next < 1) throw param_out_of_range("K, K' >= 1");
  if (q.time_free() || t < 1 || t > q.horizon()) {
    throw index_out_of_range("needs a time slice t >= 1");
  }
  const int J = q.grid().J;
  rng_stream rng(seed);
  std::vector<double> tau(K), tau_next(K_next);
  for (double& x : tau) x = rng.next_double();
  for (double& x : tau_next) x = rng.next_double();

  std::vector<int> greedy(K_next);
  std::vector<double> next_value(K_next);
  for (int k2 = 0; k2 < K_next; ++k2) {
    int j2 = std::min(J - 1, static_cast<int>(tau_next[k2] * J));
    int best = 0;
    for (int a2 = 1; a2 < q.n_actions(); ++a2) {
      if (q.at(t - 1, s_next, j2, a2) > q.at(t - 1, s_next, j2, best)) {
        best = a2;
      }
    }
    greedy[k2] = best;
    next_value[k2] = q.at(t - 1, s_next, j2, best);
  }

  const double r = m.reward(s, a, s_next);
  double total = 0.0;
  for (int k = 0; k < K; ++k) {
    int jk = std::min(J - 1, static_cast<int>(tau[k] * J));
    double contribution = 0.0;
    if (tau[k] >= 1.0 / J) {
      double alpha = q.grid().level_of(jk);
      for (int k2 = 0; k2 < K_next; ++k2) {
        double delta =
            r + m.gamma() * next_value[k2] - q.at(t, s, jk, a);
        contribution += soft_loss(alpha, kappa, delta);
      }
    } else {
      double gap = q.at(t, s, 0, a) - m.r_min() * t;
      contribution = gap * gap;
    }
    total += contribution / K;
  }
  return total;
}

double iqn_loss(const qtensor& q, const mdp& m, int t, int s, int a,
                int s_next, int K, int K_next, double h,
                const std::vector<double>& distortion, std::uint64_t seed) {
  if (K < 1 || K_next < 1) throw param_out_of_range("K, K' >= 1");
  if (q.time_free() || t < 1 || t > q.horizon()) {
    throw index_out_of_range("needs a time slice t >= 1");
  }
  const int J = q.grid().J;
  if (static_cast<int>(distortion.size()) != J) {
    throw length_mismatch("distortion weights");
  }
  rng_stream rng(seed);
  std::vector<double> tau(K), tau_next(K_next);
  for (double& x : tau) x = rng.next_double();
  for (double& x : tau_next) x = rng.next_double();

  int best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (int a2 = 0; a2 < q.n_actions(); ++a2) {
    double score = 0.0;
    for (int j2 = 0; j2 < J; ++j2) {
      score += distortion[j2] * q.at(t - 1, s_next, j2, a2);
    }
    score /= J;
    if (score > best_score) {
      best_score = score;
      best = a2;
    }
  }

  const double r = m.reward(s, a, s_next);
  double total = 0.0;
  for (int k = 0; k < K; ++k) {
    int jk = std::min(J - 1, static_cast<int>(tau[k] * J));
    double inner = 0.0;
    for (int k2 = 0; k2 < K_next; ++k2) {
      int j2 = std::min(J - 1, static_cast<int>(tau_next[k2] * J));
      double delta = r + m.gamma() * q.at(t - 1, s_next, j2, best) -
                     q.at(t, s, jk, a);
      inner += huber_loss(tau[k], h, delta);
    }
    total += inner / K_next;  // 1/K' normalization, as printed
  }
  return total;
}

}  // namespace qmdp
