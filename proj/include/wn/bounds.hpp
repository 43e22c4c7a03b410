#pragma once

#include <string>
#include <vector>

#include "wn/network.hpp"

namespace wn {

/// Everything the closed-form bound evaluators need. minw and rho1 should be
/// measured from the parameter snapshot under test so the dominance claims
/// refer to the actual point (see measured_bound_inputs).
struct BoundInputs {
    int m = 1;
    int L = 1;
    double phi0 = 0.0;      // |phi(0)|
    double beta_phi = 0.0;  // second-derivative bound of the activation
    double rho1 = 0.0;      // output-layer ball radius around v0
    double rho2 = 0.0;      // iterate displacement radius
    double minw = 1.0;      // minimum hidden row norm, unsquared
    double y_sq_mean = 0.0; // (1/n) sum y_i^2

    void validate() const;
};

/// ||alpha^(l)|| <= 1 + l |phi(0)| sqrt(m).
double layer_output_bound(int l, int m, double phi0);

/// Upper bound rho_theta on ||grad_theta f||:
///   rho^2 = (1 + L phi0 sqrt(m))^2
///         + 4 (1+rho1)^2 sum_{l=1..L} (1/sqrt(m) + (l-1) phi0)^2 / minw^2.
double grad_theta_bound(const BoundInputs& in);

/// Upper bound on ||grad_x f||; depth- and width-independent.
double grad_x_bound(const BoundInputs& in);

/// Upper bound on the predictor Hessian spectral norm, assembled from the
/// per-layer-pair and hidden/output cross terms with a = 1/sqrt(m) + L phi0:
///   B_hh = (1+rho1) [2(2 beta a + 3) a + 4 a (beta a + 1) + 4 L beta a^2] / minw^2
///   B_hv = 2 a / minw
///   bound = L^2 B_hh + 2 L B_hv.
double hessian_bound(const BoundInputs& in);

/// |f| <= (1+rho1)(1 + L phi0 sqrt(m)).
double predictor_output_bound(const BoundInputs& in);

/// varphi: empirical square loss bound, 2 y_sq_mean + 2 (1+rho1)^2 (1 + L phi0 sqrt(m))^2.
double loss_bound_varphi(const BoundInputs& in);

/// ||grad L|| <= 2 rho_theta sqrt(varphi).
double loss_grad_bound(const BoundInputs& in);

/// Sharper form when the loss value is known: 2 sqrt(loss) rho_theta.
double loss_grad_bound_at(const BoundInputs& in, double loss);

struct BoundReport {
    BoundInputs inputs;
    std::vector<double> layer_output;  // index l = 0..L
    double predictor_abs = 0.0;
    double grad_theta_rho = 0.0;
    double grad_x = 0.0;
    double hessian_spec = 0.0;
    double loss_varphi = 0.0;
    double loss_grad = 0.0;

    /// Flat JSON object. Keys: m, L, phi0, beta_phi, rho1, rho2, minw,
    /// y_sq_mean, layer_output, predictor_abs, grad_theta_rho, grad_x,
    /// hessian_spec, loss_varphi, loss_grad.
    std::string to_json() const;
};

BoundReport make_bound_report(const BoundInputs& in);

/// BoundInputs for a parameter snapshot: minw measured from the weights,
/// rho1 = max(rho1_config, ||v - v0||).
BoundInputs measured_bound_inputs(const NetworkParams& params, double rho1_config,
                                  double rho2, double y_sq_mean);

}  // namespace wn
