#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "qmdp/risk_grid.hpp"

namespace qmdp {

enum class bound_kind { lower, upper, soft, time_free };

std::string bound_kind_name(bound_kind k);
bound_kind bound_kind_from_name(const std::string& name);

// Value function over (t, state, risk index, action). Time-indexed tensors
// hold T+1 slices (slice 0 is the zero-horizon table); time_free tensors
// hold a single slice and are read with the same table at every step.
class qtensor {
 public:
  // kind time_free ignores horizon and allocates a single slice.
  qtensor(bound_kind kind, int horizon, int n_states, risk_grid grid,
          int n_actions, double kappa = 0.0);

  bound_kind kind() const { return kind_; }
  bool time_free() const { return kind_ == bound_kind::time_free; }
  int horizon() const { return horizon_; }
  int n_states() const { return n_states_; }
  int n_actions() const { return n_actions_; }
  const risk_grid& grid() const { return grid_; }
  double kappa() const { return kappa_; }

  double& at(int t, int s, int j, int a) { return values_[index(t, s, j, a)]; }
  double at(int t, int s, int j, int a) const {
    return values_[index(t, s, j, a)];
  }

  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

  std::size_t slice_size() const {
    return static_cast<std::size_t>(n_states_) * grid_.J * n_actions_;
  }
  double* slice(int t) { return values_.data() + slice_size() * t; }
  const double* slice(int t) const { return values_.data() + slice_size() * t; }

  bool same_shape(const qtensor& other) const;

  // Flat CSV `t,idstate,j,idaction,value` plus a key=value header file
  // carrying kind/J/T/kappa/shape; values round-trip bit-exactly.
  void save(const std::string& csv_path, const std::string& meta_path) const;
  static qtensor load(const std::string& csv_path,
                      const std::string& meta_path);

 private:
  std::size_t index(int t, int s, int j, int a) const {
    return ((static_cast<std::size_t>(t) * n_states_ + s) * grid_.J + j) *
               n_actions_ +
           a;
  }

  bound_kind kind_;
  int horizon_;  // T; 0 for time_free
  int n_states_;
  int n_actions_;
  risk_grid grid_;
  double kappa_;
  std::vector<double> values_;
};

}  // namespace qmdp
