#pragma once

#include <cstdint>
#include <vector>

#include "wn/bounds.hpp"
#include "wn/deriv.hpp"
#include "wn/network.hpp"

namespace wn {

/// Curvature state of the empirical loss at one parameter snapshot.
/// alpha is the restricted lower-curvature coefficient; a positive value
/// certifies the restricted strong convexity inequality on Q_kappa within
/// the rho2 ball. beta is the matching upper coefficient. alpha < beta holds
/// whenever alpha is finite; loss == 0 is flagged with alpha = +infinity.
struct RscSnapshot {
    double loss = 0.0;
    double grad_norm_sq = 0.0;
    double ratio = 0.0;  // grad_norm_sq / loss
    double alpha = 0.0;
    double beta = 0.0;
    double kappa = 0.0;
    double rho2 = 0.0;
    double hessian_bound_used = 0.0;
};

enum class Optimizer { Gd, Sgd };

struct TrainConfig {
    double omega = 1.0;    // step rule eta = omega / beta, omega in (0,2)
    double kappa = 0.5;
    double rho1 = 0.1;
    double rho2 = 0.0;     // 0: set to 10 * eta * ||grad|| on the first step
    int batch_size = 512;
    int epochs = 20;
    Optimizer optimizer = Optimizer::Gd;
    double fixed_lr = 0.0;  // > 0 overrides the omega/beta rule
    uint64_t seed = 1;

    void validate() const;
};

/// alpha = (kappa^2 / 2) * ||grad L||^2 / L - (4 rho_theta rho2 + 2 sqrt(varphi)) * H.
/// loss == 0 returns +infinity (global minimum reached).
double alpha_theta(double loss, double grad_norm_sq, double kappa, const BoundInputs& in);

/// beta = 2 rho_theta^2 + 2 sqrt(varphi) * H; always > 2 rho_theta^2 > 0.
double beta_theta(const BoundInputs& in);

/// Per-step contraction factor 1 - (alpha/beta) * omega * (1-gamma) * (2-omega).
double rate_bound(double alpha, double beta, double omega, double gamma);

/// Snapshot of loss, gradient ratio and both curvature coefficients at the
/// current parameters against the given batch.
RscSnapshot rsc_snapshot(const NetworkParams& params, const Matrix& X, std::span<const double> y,
                         double kappa, double rho1_config, double rho2);

/// Same snapshot from an already-computed batch LossGrad.
RscSnapshot rsc_snapshot_from(const NetworkParams& params, const LossGrad& lg,
                              std::span<const double> y, double kappa, double rho1_config,
                              double rho2);

struct GdStepResult {
    NetworkParams next;
    RscSnapshot snapshot;
    double eta = 0.0;
    double step_norm = 0.0;
    int backtracks = 0;
    bool a31_ok = false;  // alpha > 0 at this step
    bool a33_ok = false;  // ||theta' - theta|| <= rho2
};

/// One gradient step theta' = theta - eta * grad. eta comes from fixed_lr
/// when set, otherwise omega / beta. If the updated v would leave the rho1
/// ball around v0, eta is halved (up to 30 times); exhaustion throws
/// StepRejectedError.
GdStepResult gd_step(const NetworkParams& params, const Matrix& X, std::span<const double> y,
                     const TrainConfig& config);

/// Parameter points theta' = theta + r (c ghat + sqrt(1-c^2) uhat) with
/// |c| >= kappa, r in (0, rho2], uhat a random direction orthogonal to the
/// gradient. Each sample satisfies the cosine predicate by construction and
/// keeps v' inside the rho1 ball (rejection). Throws on zero gradient.
std::vector<NetworkParams> sample_in_Qkappa(const NetworkParams& params,
                                            std::span<const double> grad_loss, double kappa,
                                            double rho1, double rho2, int count, uint64_t seed);

/// Acceptance fraction of the rejection loop in sample_in_Qkappa for the
/// same draw sequence.
double qkappa_acceptance_rate(const NetworkParams& params, std::span<const double> grad_loss,
                              double kappa, double rho1, double rho2, int count, uint64_t seed);

/// L(theta') - [L(theta) + <delta, grad> + alpha/2 ||delta||^2]; nonnegative
/// whenever alpha is a valid restricted lower-curvature coefficient.
double rsc_residual(const NetworkParams& params, const NetworkParams& params_prime, double alpha,
                    const Matrix& X, std::span<const double> y);

/// [L(theta) + <delta, grad> + beta/2 ||delta||^2] - L(theta').
double smoothness_residual(const NetworkParams& params, const NetworkParams& params_prime,
                           double beta, const Matrix& X, std::span<const double> y);

/// Raw second-order Taylor residuals, exposed so the arithmetic can be
/// checked against closed forms independently of the network loss.
double taylor_lower_residual(double loss0, double loss1, double inner, double dist_sq, double alpha);
double taylor_upper_residual(double loss0, double loss1, double inner, double dist_sq, double beta);

}  // namespace wn
