#pragma once

#include <cmath>
#include <compare>
#include <limits>

#include "qmdp/errors.hpp"

namespace qmdp {

// Augmented real: a finite double or one of the two infinities. NaN is
// rejected so that min/max propagate infinities by IEEE order alone,
// e.g. min(+inf, c) == c.
class extended_real {
 public:
  static extended_real neg_inf() {
    return extended_real(-std::numeric_limits<double>::infinity());
  }
  static extended_real pos_inf() {
    return extended_real(std::numeric_limits<double>::infinity());
  }
  static extended_real finite(double v) {
    if (!std::isfinite(v)) throw non_finite_input("finite() given non-finite");
    return extended_real(v);
  }

  bool is_neg_inf() const { return std::isinf(v_) && v_ < 0; }
  bool is_pos_inf() const { return std::isinf(v_) && v_ > 0; }
  bool is_finite() const { return std::isfinite(v_); }

  // Underlying value; +-inf for the infinite variants.
  double as_double() const { return v_; }

  friend bool operator==(extended_real a, extended_real b) {
    return a.v_ == b.v_;
  }
  friend auto operator<=>(extended_real a, extended_real b) {
    return a.v_ <=> b.v_;
  }

 private:
  explicit extended_real(double v) : v_(v) {}
  double v_;
};

}  // namespace qmdp
