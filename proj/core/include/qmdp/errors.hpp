#pragma once

#include <stdexcept>
#include <string>

namespace qmdp {

// Error category, used by the CLI to map failures to exit codes.
enum class error_kind { config, data, numerical };

class error : public std::runtime_error {
 public:
  error(error_kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  error_kind kind() const { return kind_; }

 private:
  error_kind kind_;
};

#define QMDP_DEFINE_ERROR(name, kind)                        \
  class name : public error {                                \
   public:                                                   \
    explicit name(const std::string& what)                   \
        : error(error_kind::kind, std::string(#name ": ") + what) {} \
  }

// Distribution and risk layer.
QMDP_DEFINE_ERROR(empty_distribution, numerical);
QMDP_DEFINE_ERROR(negative_probability, numerical);
QMDP_DEFINE_ERROR(probability_sum_mismatch, numerical);
QMDP_DEFINE_ERROR(alpha_out_of_range, config);
QMDP_DEFINE_ERROR(kappa_out_of_range, config);
QMDP_DEFINE_ERROR(length_mismatch, numerical);
QMDP_DEFINE_ERROR(non_finite_input, numerical);

// MDP model and CSV ingestion.
QMDP_DEFINE_ERROR(bad_header, data);
QMDP_DEFINE_ERROR(non_numeric_field, data);
QMDP_DEFINE_ERROR(duplicate_reward_conflict, data);
QMDP_DEFINE_ERROR(row_probability_negative, data);
QMDP_DEFINE_ERROR(stochasticity_violation, data);
QMDP_DEFINE_ERROR(dangling_index, data);
QMDP_DEFINE_ERROR(param_out_of_range, config);

// DP engine.
QMDP_DEFINE_ERROR(non_finite_value, numerical);
QMDP_DEFINE_ERROR(monotonicity_violation, numerical);
QMDP_DEFINE_ERROR(shape_mismatch, numerical);

// Oracle.
QMDP_DEFINE_ERROR(budget_exceeded, numerical);

// Policy execution.
QMDP_DEFINE_ERROR(horizon_mismatch, config);
QMDP_DEFINE_ERROR(gamma_zero, config);
QMDP_DEFINE_ERROR(too_few_samples, numerical);

// Q-learning.
QMDP_DEFINE_ERROR(gamma_one, config);
QMDP_DEFINE_ERROR(index_out_of_range, numerical);
QMDP_DEFINE_ERROR(beta_out_of_range, numerical);

// CLI / configuration.
QMDP_DEFINE_ERROR(unknown_key, config);
QMDP_DEFINE_ERROR(type_mismatch, config);
QMDP_DEFINE_ERROR(missing_required, config);
QMDP_DEFINE_ERROR(io_error, data);

#undef QMDP_DEFINE_ERROR

}  // namespace qmdp
