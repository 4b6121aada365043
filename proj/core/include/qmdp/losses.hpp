#pragma once

#include <vector>

#include "qmdp/distribution.hpp"

namespace qmdp {

// Pinball loss max(alpha*delta, -(1-alpha)*delta); alpha in [0,1].
double quantile_loss(double alpha, double delta);

// Subgradient of the pinball loss: alpha above zero, -(1-alpha) below,
// 0 at delta == 0 (the symmetric pick inside the subdifferential).
double quantile_loss_subgrad(double alpha, double delta);

// Smoothed quantile loss, four branches split at -kappa, 0, kappa.
// alpha in (0,1), kappa in (0,1].
double soft_loss(double alpha, double kappa, double delta);

// Derivative of soft_loss; continuous, strictly increasing in delta.
double soft_loss_grad(double alpha, double kappa, double delta);

// Strong-convexity and derivative-Lipschitz constants of soft_loss:
// mu = min(alpha, 1-alpha)*kappa, L = max(alpha, 1-alpha)/kappa.
double soft_loss_mu(double alpha, double kappa);
double soft_loss_lipschitz(double alpha, double kappa);

// Huber quantile regression loss; alpha in [0,1], h > 0. Kept for the
// diagnostic losses only: its expectation can have a flat set of minimizers.
double huber_loss(double alpha, double h, double delta);

// Unique root m of E[soft_loss_grad(alpha, kappa, x - m)] = 0, found by
// scanning the sorted breakpoints {z-kappa, z, z+kappa} of the piecewise
// linear expectation and solving the bracketing piece. Bit-reproducible for
// fixed input; no iterative solve.
double shortfall_value(const discrete_distribution& d, double alpha,
                       double kappa);

// Same root on raw atoms (values need not be sorted; probabilities positive,
// summing to ~1). Hot path for the soft DP sweeps.
double shortfall_root(const std::vector<double>& values,
                      const std::vector<double>& probs, double alpha,
                      double kappa);

// Roots for several levels at once over one atom set. Levels must be
// ascending; the roots are non-decreasing, so one breakpoint walk serves
// all levels. Equivalent to calling shortfall_root per level.
std::vector<double> shortfall_levels(const std::vector<double>& values,
                                     const std::vector<double>& probs,
                                     const std::vector<double>& alphas,
                                     double kappa);

}  // namespace qmdp
