#include "qmdp/dp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qmdp/distribution.hpp"
#include "qmdp/errors.hpp"
#include "qmdp/losses.hpp"
#include "qmdp/parallel.hpp"

namespace qmdp {

namespace {

struct atom {
  double value;
  double weight;
};

bool atom_less(const atom& a, const atom& b) { return a.value < b.value; }

void check_slice(const std::vector<double>& q, const risk_grid& grid,
                 const mdp& m, bool require_monotone) {
  std::size_t expect = static_cast<std::size_t>(m.n_states()) * grid.J *
                       m.n_actions();
  if (q.size() != expect) throw shape_mismatch("q_prev size");
  for (double v : q) {
    if (!std::isfinite(v)) throw non_finite_value("q_prev entry");
  }
  if (!require_monotone) return;
  const int J = grid.J;
  const int A = m.n_actions();
  for (int s = 0; s < m.n_states(); ++s) {
    for (int a = 0; a < A; ++a) {
      for (int j = 1; j < J; ++j) {
        double lo = q[(static_cast<std::size_t>(s) * J + j - 1) * A + a];
        double hi = q[(static_cast<std::size_t>(s) * J + j) * A + a];
        if (hi < lo) {
          throw monotonicity_violation("q_prev at (" + std::to_string(s) +
                                       "," + std::to_string(j) + "," +
                                       std::to_string(a) + ")");
        }
      }
    }
  }
}

// max over actions, flattened to (S, J).
std::vector<double> action_max(const std::vector<double>& q, int S, int J,
                               int A) {
  std::vector<double> vmax(static_cast<std::size_t>(S) * J);
  for (int s = 0; s < S; ++s) {
    for (int j = 0; j < J; ++j) {
      const double* cell = q.data() + (static_cast<std::size_t>(s) * J + j) * A;
      double best = cell[0];
      for (int a = 1; a < A; ++a) best = std::max(best, cell[a]);
      vmax[static_cast<std::size_t>(s) * J + j] = best;
    }
  }
  return vmax;
}

// Builds the sorted S*J-atom mixture for one (s,a).
std::vector<atom> build_mixture(const mdp& m, int s, int a, int J,
                                const std::vector<double>& vmax) {
  auto row = m.transitions(s, a);
  std::vector<atom> atoms;
  atoms.reserve(row.size() * J);
  const double g = m.gamma();
  for (const transition& tr : row) {
    const double* v = vmax.data() + static_cast<std::size_t>(tr.next) * J;
    double w = tr.prob / J;
    for (int j = 0; j < J; ++j) {
      atoms.push_back({tr.reward + g * v[j], w});
    }
  }
  std::sort(atoms.begin(), atoms.end(), atom_less);
  return atoms;
}

// Neumaier-compensated prefix masses: prefix[i] = sum of the first i
// weights. Keeps cumulative drift well under the CDF tolerance even for
// mixtures with tens of thousands of atoms.
std::vector<double> prefix_masses(const std::vector<atom>& atoms) {
  std::vector<double> prefix(atoms.size() + 1);
  double sum = 0.0, comp = 0.0;
  prefix[0] = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    double w = atoms[i].weight;
    double t = sum + w;
    comp += std::abs(sum) >= std::abs(w) ? (sum - t) + w : (w - t) + sum;
    sum = t;
    prefix[i + 1] = sum + comp;
  }
  return prefix;
}

// q^+ at each ascending level: the value of the last atom whose
// strictly-before mass stays within level + tolerance.
void upper_quantiles(const std::vector<atom>& atoms,
                     const std::vector<double>& prefix,
                     const std::vector<double>& levels, double* out) {
  std::size_t i = 0;
  for (std::size_t li = 0; li < levels.size(); ++li) {
    while (i + 1 < atoms.size() && prefix[i + 1] <= levels[li] + kCdfTol) ++i;
    out[li] = atoms[i].value;
  }
}

// q^- at each ascending level: the first atom whose inclusive mass reaches
// level - tolerance.
void lower_quantiles(const std::vector<atom>& atoms,
                     const std::vector<double>& prefix,
                     const std::vector<double>& levels, double* out) {
  std::size_t i = 0;
  for (std::size_t li = 0; li < levels.size(); ++li) {
    while (i + 1 < atoms.size() && prefix[i + 1] < levels[li] - kCdfTol) ++i;
    out[li] = atoms[i].value;
  }
}

enum class sweep_kind { lower, upper, soft };

std::vector<double> sweep(const mdp& m, const risk_grid& grid,
                          const std::vector<double>& q_prev, sweep_kind kind,
                          double kappa, int t) {
  check_slice(q_prev, grid, m, kind != sweep_kind::soft);
  const int S = m.n_states();
  const int A = m.n_actions();
  const int J = grid.J;
  std::vector<double> vmax = action_max(q_prev, S, J, A);
  std::vector<double> out(q_prev.size());

  // Boundary values shared by the whole slice.
  double boundary = 0.0;
  if (kind == sweep_kind::lower) {
    double lo = std::numeric_limits<double>::infinity();
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A; ++a) {
        lo = std::min(lo,
                      q_prev[(static_cast<std::size_t>(s) * J) * A + a]);
      }
    }
    boundary = m.r_min() + lo;
  } else if (kind == sweep_kind::upper) {
    double hi = -std::numeric_limits<double>::infinity();
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A; ++a) {
        hi = std::max(
            hi, q_prev[(static_cast<std::size_t>(s) * J + J - 1) * A + a]);
      }
    }
    boundary = m.r_max() + hi;
  } else {
    boundary = m.r_min() * t;
  }

  // The lower sweep reads q^+ at j/J for j >= 1; the upper sweep reads q^-
  // at (j+1)/J for j <= J-2. Both walk the same ascending level list.
  std::vector<double> levels;
  for (int j = 1; j < J; ++j) levels.push_back(grid.level_of(j));

  const bool soft_zero_t = kind == sweep_kind::soft && t == 0;
  parallel_for(static_cast<std::size_t>(S) * A, [&](std::size_t lo_i,
                                                    std::size_t hi_i) {
    std::vector<double> cell_out(J > 1 ? J - 1 : 0);
    for (std::size_t sa = lo_i; sa < hi_i; ++sa) {
      int s = static_cast<int>(sa) / A;
      int a = static_cast<int>(sa) % A;
      auto write = [&](int j, double v) {
        out[(static_cast<std::size_t>(s) * J + j) * A + a] = v;
      };
      if (soft_zero_t) {
        for (int j = 0; j < J; ++j) write(j, boundary);
        continue;
      }
      std::vector<atom> atoms = build_mixture(m, s, a, J, vmax);
      switch (kind) {
        case sweep_kind::lower: {
          upper_quantiles(atoms, prefix_masses(atoms), levels,
                          cell_out.data());
          write(0, boundary);
          for (int j = 1; j < J; ++j) write(j, cell_out[j - 1]);
          break;
        }
        case sweep_kind::upper: {
          lower_quantiles(atoms, prefix_masses(atoms), levels,
                          cell_out.data());
          for (int j = 0; j < J - 1; ++j) write(j, cell_out[j]);
          write(J - 1, boundary);
          break;
        }
        case sweep_kind::soft: {
          std::vector<double> values(atoms.size()), probs(atoms.size());
          for (std::size_t i = 0; i < atoms.size(); ++i) {
            values[i] = atoms[i].value;
            probs[i] = atoms[i].weight;
          }
          std::vector<double> roots =
              shortfall_levels(values, probs, levels, kappa);
          write(0, boundary);
          for (int j = 1; j < J; ++j) write(j, roots[j - 1]);
          break;
        }
      }
    }
  });
  return out;
}

}  // namespace

std::vector<double> bellman_lower_sweep(const mdp& m, const risk_grid& grid,
                                        const std::vector<double>& q_prev) {
  return sweep(m, grid, q_prev, sweep_kind::lower, 0.0, 0);
}

std::vector<double> bellman_upper_sweep(const mdp& m, const risk_grid& grid,
                                        const std::vector<double>& q_prev) {
  return sweep(m, grid, q_prev, sweep_kind::upper, 0.0, 0);
}

std::vector<double> bellman_soft_sweep(const mdp& m, const risk_grid& grid,
                                       double kappa,
                                       const std::vector<double>& q_prev,
                                       int t) {
  if (t < 0) throw param_out_of_range("t=" + std::to_string(t));
  return sweep(m, grid, q_prev, sweep_kind::soft, kappa, t);
}

qtensor solve_var_dp(const mdp& m, const risk_grid& grid, int T,
                     bound_kind kind, double kappa) {
  if (T < 1) throw param_out_of_range("T=" + std::to_string(T));
  if (kind == bound_kind::time_free) {
    throw param_out_of_range("time_free is not a DP kind");
  }
  qtensor out(kind, T, m.n_states(), grid, m.n_actions(),
              kind == bound_kind::soft ? kappa : 0.0);
  std::vector<double> cur(out.slice_size(), 0.0);
  for (int t = 1; t <= T; ++t) {
    switch (kind) {
      case bound_kind::lower:
        cur = bellman_lower_sweep(m, grid, cur);
        break;
      case bound_kind::upper:
        cur = bellman_upper_sweep(m, grid, cur);
        break;
      default:
        cur = bellman_soft_sweep(m, grid, kappa, cur, t);
        break;
    }
    std::copy(cur.begin(), cur.end(), out.slice(t));
  }
  return out;
}

qtensor apply_soft_operator(const mdp& m, double kappa, const qtensor& x) {
  if (x.time_free()) throw shape_mismatch("stacked operator needs time slices");
  qtensor out(x.kind(), x.horizon(), x.n_states(), x.grid(), x.n_actions(),
              kappa);
  for (int t = 1; t <= x.horizon(); ++t) {
    std::vector<double> prev(x.slice(t - 1),
                             x.slice(t - 1) + x.slice_size());
    std::vector<double> next = bellman_soft_sweep(m, x.grid(), kappa, prev, t);
    std::copy(next.begin(), next.end(), out.slice(t));
  }
  return out;
}

qtensor solve_soft_stationary(const mdp& m, const risk_grid& grid,
                              double kappa, double tol, int max_iters) {
  if (m.gamma() >= 1.0) throw gamma_one("stationary solve needs gamma < 1");
  const int S = m.n_states();
  const int A = m.n_actions();
  const int J = grid.J;
  const double floor = m.r_min() / (1.0 - m.gamma());

  std::vector<double> levels;
  for (int j = 1; j < J; ++j) levels.push_back(grid.level_of(j));

  std::vector<double> cur(static_cast<std::size_t>(S) * J * A, 0.0);
  for (int it = 0; it < max_iters; ++it) {
    std::vector<double> vmax = action_max(cur, S, J, A);
    std::vector<double> next(cur.size());
    parallel_for(static_cast<std::size_t>(S) * A,
                 [&](std::size_t lo_i, std::size_t hi_i) {
      for (std::size_t sa = lo_i; sa < hi_i; ++sa) {
        int s = static_cast<int>(sa) / A;
        int a = static_cast<int>(sa) % A;
        std::vector<atom> atoms = build_mixture(m, s, a, J, vmax);
        std::vector<double> values(atoms.size()), probs(atoms.size());
        for (std::size_t i = 0; i < atoms.size(); ++i) {
          values[i] = atoms[i].value;
          probs[i] = atoms[i].weight;
        }
        std::vector<double> roots =
            shortfall_levels(values, probs, levels, kappa);
        next[(static_cast<std::size_t>(s) * J) * A + a] = floor;
        for (int j = 1; j < J; ++j) {
          next[(static_cast<std::size_t>(s) * J + j) * A + a] = roots[j - 1];
        }
      }
    });
    double change = 0.0;
    for (std::size_t i = 0; i < cur.size(); ++i) {
      change = std::max(change, std::abs(next[i] - cur[i]));
    }
    cur.swap(next);
    if (change <= tol) break;
  }
  qtensor out(bound_kind::time_free, 0, S, grid, A, kappa);
  std::copy(cur.begin(), cur.end(), out.slice(0));
  return out;
}

std::vector<double> solve_neutral_dp(const mdp& m, int T) {
  if (T < 1) throw param_out_of_range("T=" + std::to_string(T));
  const int S = m.n_states();
  const int A = m.n_actions();
  std::vector<double> q(static_cast<std::size_t>(T + 1) * S * A, 0.0);
  for (int t = 0; t < T; ++t) {
    const double* prev = q.data() + static_cast<std::size_t>(t) * S * A;
    double* next = q.data() + static_cast<std::size_t>(t + 1) * S * A;
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A; ++a) {
        double acc = 0.0;
        for (const transition& tr : m.transitions(s, a)) {
          const double* row = prev + static_cast<std::size_t>(tr.next) * A;
          double best = row[0];
          for (int a2 = 1; a2 < A; ++a2) best = std::max(best, row[a2]);
          acc += tr.prob * (tr.reward + m.gamma() * best);
        }
        next[static_cast<std::size_t>(s) * A + a] = acc;
        if (!std::isfinite(acc)) throw non_finite_value("neutral dp");
      }
    }
  }
  return q;
}

namespace {

// q^+ of a tiny explicit distribution given as (value, prob) pairs.
double var_of_atoms(std::vector<atom>& atoms, double alpha) {
  std::sort(atoms.begin(), atoms.end(), atom_less);
  std::size_t pick = 0;
  double before = 0.0;
  for (std::size_t i = 1; i < atoms.size(); ++i) {
    before += atoms[i - 1].weight;
    if (before <= alpha + kCdfTol) pick = i;
  }
  return atoms[pick].value;
}

int greedy_from_scores(const std::vector<double>& scores) {
  int best = 0;
  for (std::size_t a = 1; a < scores.size(); ++a) {
    if (scores[a] > scores[best]) best = static_cast<int>(a);
  }
  return best;
}

}  // namespace

markov_policy neutral_policy(const mdp& m, const std::vector<double>& q,
                             int T) {
  const int S = m.n_states();
  const int A = m.n_actions();
  markov_policy pol;
  pol.T = T;
  pol.S = S;
  pol.action.resize(static_cast<std::size_t>(T) * S);
  for (int k = 0; k < T; ++k) {
    int h = T - k;
    const double* slice = q.data() + static_cast<std::size_t>(h) * S * A;
    for (int s = 0; s < S; ++s) {
      std::vector<double> scores(slice + static_cast<std::size_t>(s) * A,
                                 slice + static_cast<std::size_t>(s) * A + A);
      pol.action[static_cast<std::size_t>(k) * S + s] =
          greedy_from_scores(scores);
    }
  }
  return pol;
}

nvar_solution solve_nvar_dp(const mdp& m, int T, double alpha0) {
  if (T < 1) throw param_out_of_range("T=" + std::to_string(T));
  if (!(alpha0 > 0.0 && alpha0 < 1.0)) {
    throw alpha_out_of_range("alpha0");
  }
  const int S = m.n_states();
  const int A = m.n_actions();
  nvar_solution sol;
  sol.values.assign(static_cast<std::size_t>(T + 1) * S, 0.0);
  sol.greedy.assign(static_cast<std::size_t>(T + 1) * S, 0);
  for (int t = 0; t < T; ++t) {
    const double* prev = sol.values.data() + static_cast<std::size_t>(t) * S;
    for (int s = 0; s < S; ++s) {
      std::vector<double> scores(A);
      for (int a = 0; a < A; ++a) {
        std::vector<atom> atoms;
        for (const transition& tr : m.transitions(s, a)) {
          atoms.push_back({tr.reward + m.gamma() * prev[tr.next], tr.prob});
        }
        scores[a] = var_of_atoms(atoms, alpha0);
      }
      int best = greedy_from_scores(scores);
      sol.values[static_cast<std::size_t>(t + 1) * S + s] = scores[best];
      sol.greedy[static_cast<std::size_t>(t + 1) * S + s] = best;
    }
  }
  return sol;
}

markov_policy nvar_policy(const nvar_solution& sol, const mdp& m, int T) {
  markov_policy pol;
  pol.T = T;
  pol.S = m.n_states();
  pol.action.resize(static_cast<std::size_t>(T) * pol.S);
  for (int k = 0; k < T; ++k) {
    int h = T - k;
    for (int s = 0; s < pol.S; ++s) {
      pol.action[static_cast<std::size_t>(k) * pol.S + s] =
          sol.greedy[static_cast<std::size_t>(h) * pol.S + s];
    }
  }
  return pol;
}

namespace {

// q^+ at alpha of the discrete-uniform distribution over J values already
// sorted ascending (the dVaR tensors are monotone in j by construction).
double uniform_upper(const double* sorted, int J, double alpha) {
  int idx = static_cast<int>(std::floor(alpha * J + J * kCdfTol));
  if (idx < 0) idx = 0;
  if (idx > J - 1) idx = J - 1;
  return sorted[idx];
}

}  // namespace

dvar_solution solve_dvar_dp(const mdp& m, const risk_grid& grid, int T,
                            double alpha0) {
  if (T < 1) throw param_out_of_range("T=" + std::to_string(T));
  if (!(alpha0 > 0.0 && alpha0 < 1.0)) {
    throw alpha_out_of_range("alpha0");
  }
  const int S = m.n_states();
  const int A = m.n_actions();
  const int J = grid.J;
  dvar_solution sol;
  sol.J = J;
  sol.values.assign(static_cast<std::size_t>(T + 1) * S * J * A, 0.0);
  sol.greedy.assign(static_cast<std::size_t>(T + 1) * S, 0);

  std::vector<double> midpoints(J);
  for (int j = 0; j < J; ++j) midpoints[j] = (2.0 * j + 1.0) / (2.0 * J);

  auto cell = [&](int t, int s, int j, int a) -> double& {
    return sol.values[((static_cast<std::size_t>(t) * S + s) * J + j) * A + a];
  };

  std::vector<double> inner_max(S);
  for (int t = 0; t < T; ++t) {
    // Collapse the j' axis at alpha0, then maximize over a'.
    for (int s = 0; s < S; ++s) {
      double best = -std::numeric_limits<double>::infinity();
      for (int a = 0; a < A; ++a) {
        std::vector<double> col(J);
        for (int j = 0; j < J; ++j) col[j] = cell(t, s, j, a);
        best = std::max(best, uniform_upper(col.data(), J, alpha0));
      }
      inner_max[s] = best;
    }
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A; ++a) {
        std::vector<atom> atoms;
        for (const transition& tr : m.transitions(s, a)) {
          atoms.push_back(
              {tr.reward + m.gamma() * inner_max[tr.next], tr.prob});
        }
        std::sort(atoms.begin(), atoms.end(), atom_less);
        // Two-pointer over ascending midpoint levels.
        std::size_t i = 0;
        double before = 0.0;
        double next_before = atoms[0].weight;
        for (int j = 0; j < J; ++j) {
          while (i + 1 < atoms.size() &&
                 next_before <= midpoints[j] + kCdfTol) {
            before = next_before;
            ++i;
            next_before = before + atoms[i].weight;
          }
          cell(t + 1, s, j, a) = atoms[i].value;
        }
      }
    }
    // Greedy rule for horizon t+1.
    for (int s = 0; s < S; ++s) {
      std::vector<double> scores(A);
      for (int a = 0; a < A; ++a) {
        std::vector<double> col(J);
        for (int j = 0; j < J; ++j) col[j] = cell(t + 1, s, j, a);
        scores[a] = uniform_upper(col.data(), J, alpha0);
      }
      sol.greedy[static_cast<std::size_t>(t + 1) * S + s] =
          greedy_from_scores(scores);
    }
  }
  return sol;
}

markov_policy dvar_policy(const dvar_solution& sol, const mdp& m, int T) {
  markov_policy pol;
  pol.T = T;
  pol.S = m.n_states();
  pol.action.resize(static_cast<std::size_t>(T) * pol.S);
  for (int k = 0; k < T; ++k) {
    int h = T - k;
    for (int s = 0; s < pol.S; ++s) {
      pol.action[static_cast<std::size_t>(k) * pol.S + s] =
          sol.greedy[static_cast<std::size_t>(h) * pol.S + s];
    }
  }
  return pol;
}

double weighted_norm_dist(const qtensor& x, const qtensor& y,
                          const weighted_norm& norm) {
  if (!x.same_shape(y)) throw shape_mismatch("weighted_norm_dist");
  double best = 0.0;
  int slices = x.time_free() ? 1 : x.horizon() + 1;
  for (int t = 0; t < slices; ++t) {
    const double* xs = x.slice(t);
    const double* ys = y.slice(t);
    double w = norm.weight(t);
    for (std::size_t i = 0; i < x.slice_size(); ++i) {
      best = std::max(best, std::abs(xs[i] - ys[i]) / w);
    }
  }
  return best;
}

}  // namespace qmdp
