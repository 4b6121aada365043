#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "qmdp/mdp.hpp"
#include "qmdp/qtensor.hpp"

namespace qmdp {

struct train_config {
  int J = 32;
  std::optional<int> T;  // absent: time-free variant
  double kappa = 1e-4;   // 0 selects the hard pinball subgradient
  int sweeps = 20000;
  double lr_scale = 100.0;
  double lr_decay = 0.0003;
  std::uint64_t seed = 1;
  bool scale_rewards = true;       // time-free only
  bool per_cell_counters = false;  // key occurrences on (t,s,j,a) instead of (s,a)
  bool robbins_monro = false;      // lr_scale/(1+i) instead of the geometric schedule
  int s0 = 0;                      // state read by the W1 diagnostic
};

void validate(const train_config& cfg);

// Initial table: time-indexed cells hold t * r_min; time-free cells hold
// 1/(1-gamma) in the training units (gamma = 1 is rejected there).
qtensor ql_init(const mdp& m, const train_config& cfg);

// Learning rate for the i-th occurrence: lr_scale * 0.1^(lr_decay * i),
// or lr_scale / (1 + i) under the Robbins-Monro flag.
double step_size(std::int64_t i, const train_config& cfg);

struct sample_event {
  int t = -1;  // -1 for time-free tensors
  int s = 0;
  int j = 0;
  int a = 0;
  int s_next = 0;
};

// One asynchronous update of cell (t,s,j,a) from a sampled successor. For
// j > 0 (and t > 0 when time-indexed) the cell moves by (beta/J) times the
// exact sum over j' of the loss derivative at r + gamma * max_a' q(prev
// slice, s', j', a') - q(cell). Otherwise the cell relaxes toward its pinned
// boundary (t * r_min, or r_min/(1-gamma) time-free); beta must be <= 1 on
// that branch. Returns the new cell value.
double ql_update(qtensor& q, const sample_event& ev, double beta,
                 double kappa, const mdp& m);

struct train_result {
  qtensor tensor;
  // (sweep, W1 between max-a slices at s0 of the tensor and the target).
  std::vector<std::pair<int, double>> diagnostics;
};

// Synchronous sweeps: each sweep samples one successor per (s,a) pair and
// applies ql_update to every cell in lexicographic order, with the step size
// taken from that pair's occurrence counter (clamped to 1 on boundary
// cells). Time-free runs train on rewards scaled to [0,1] when configured
// and the returned tensor is unscaled back. Pure function of (m, cfg).
train_result train(const mdp& m, const train_config& cfg,
                   const qtensor* target = nullptr);

// Scalar diagnostic loss over sampled risk levels (the tabular analog of a
// sampled quantile-regression loss). kappa in (0,1]; t >= 1.
double risk_sampled_loss(const qtensor& q, const mdp& m, int t, int s, int a,
                         int s_next, int K, int K_next, double kappa,
                         std::uint64_t seed);

// IQN-style diagnostic loss: one greedy action from distortion-weighted mean
// values, Huber quantile loss at the raw sampled levels, averaged over
// K_next as printed in its source.
double iqn_loss(const qtensor& q, const mdp& m, int t, int s, int a,
                int s_next, int K, int K_next, double h,
                const std::vector<double>& distortion, std::uint64_t seed);

}  // namespace qmdp
