#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "wn/network.hpp"

namespace wn {

/// Inputs of the uniform-convergence generalization bound. The bound is only
/// valid for activations with phi(0) = 0; phi0 carries the configured value
/// so the evaluator can enforce that precondition.
struct GenInputs {
    double rho1 = 0.0;
    int L = 1;
    int64_t n = 1;
    double delta = 0.05;
    double phi0 = 0.0;

    void validate() const;
};

/// 4 (2+rho1)(1+rho1) (sqrt(2 log(2) L) + 1) / sqrt(n)
///   + 2 (1 + (1+rho1)^2) sqrt(2 log(2/delta)) / sqrt(n).
double generalization_bound(const GenInputs& in);

/// Closed-form bound on the Rademacher complexity of the constrained
/// network family: (1+rho1) (sqrt(2 log(2) L) + 1) / sqrt(n).
double rademacher_bound(double rho1, int L, int64_t n);

/// Held-out loss minus training loss; may be negative.
double empirical_gap(const NetworkParams& params, const Matrix& X_train,
                     std::span<const double> y_train, const Matrix& X_heldout,
                     std::span<const double> y_heldout);

/// Draws the j-th member of a network family for the Rademacher estimate.
using FamilySampler = std::function<NetworkParams(int)>;

/// Monte-Carlo lower estimate of the Rademacher complexity: average over K
/// sign vectors of the max over J sampled members of |(1/n) sum_i eps_i f(x_i)|.
/// With optimize_v set, each member's output layer is optimized in closed
/// form over the rho1 ball (sup of |v^T s| over v in B_rho1(v0) is
/// |v0^T s| + rho1 ||s||), giving a tighter but still-lower estimate.
double rademacher_lower_estimate(const Matrix& X, const FamilySampler& sampler, int sign_draws,
                                 int nets, uint64_t seed, bool optimize_v = false,
                                 double rho1 = 0.0);

/// Default family sampler: hidden weights from the init scheme, v uniform in
/// the rho1 ball around a fixed unit v0.
FamilySampler default_family_sampler(int d, int m, int L, const ActivationSpec& activation,
                                     const InitScheme& init, double rho1, uint64_t seed);

}  // namespace wn
