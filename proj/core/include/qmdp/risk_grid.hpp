#pragma once

#include <cmath>
#include <string>

#include "qmdp/errors.hpp"

namespace qmdp {

// J-uniform discretization of risk levels: grid {0, 1/J, ..., (J-1)/J} with
// the floor map f_lower(alpha) = max{j/J <= alpha} and the ceiling map
// f_upper(alpha) = f_lower(alpha) + 1/J (capped at 1).
struct risk_grid {
  int J;

  explicit risk_grid(int j_count) : J(j_count) {
    if (J < 2) throw param_out_of_range("J=" + std::to_string(J));
  }

  double level_of(int j) const { return static_cast<double>(j) / J; }

  int lower_index(double alpha) const {
    int j = static_cast<int>(std::floor(alpha * J));
    if (j < 0) j = 0;
    if (j > J - 1) j = J - 1;
    return j;
  }

  double f_lower(double alpha) const { return level_of(lower_index(alpha)); }
  double f_upper(double alpha) const { return level_of(lower_index(alpha) + 1); }
};

}  // namespace qmdp
