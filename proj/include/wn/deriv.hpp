#pragma once

#include <functional>
#include <vector>

#include "wn/network.hpp"

namespace wn {

/// Gradient of the scalar output with respect to every parameter, kept in
/// the same block shapes as NetworkParams. Flattens in theta layout.
struct GradTheta {
    std::vector<Matrix> dW;  // same shapes as params.W
    std::vector<double> dv;  // length m

    std::vector<double> flatten() const;
    double norm() const;
};

struct LossGrad {
    double loss = 0.0;
    std::vector<double> grad;  // theta layout

    double grad_norm() const { return norm2(grad); }
};

/// Analytic gradient of f(theta; x) with respect to all parameters.
/// The per-row derivative has two pieces: the plain input term scaled by
/// 1/||W_i|| and the radial correction -(W_i^T a) W_i / ||W_i||^3, so the
/// result is orthogonal to each row exactly.
GradTheta grad_theta(const NetworkParams& params, std::span<const double> x);

/// Analytic gradient of f(theta; x) with respect to the input.
std::vector<double> grad_x(const NetworkParams& params, std::span<const double> x);

/// Both gradients from one backward pass over a precomputed trace.
void backprop(const NetworkParams& params, const ForwardTrace& trace,
              GradTheta* out_theta, std::vector<double>* out_x);

/// Mean squared loss and its gradient over a batch. Rows of X must be unit
/// norm; the batch must be nonempty.
LossGrad loss_and_grad(const NetworkParams& params, const Matrix& X, std::span<const double> y);

double loss_only(const NetworkParams& params, const Matrix& X, std::span<const double> y);

/// Central-difference gradient of an arbitrary scalar function of theta.
std::vector<double> fd_grad_oracle(const std::function<double(std::span<const double>)>& fn,
                                   std::span<const double> theta, double h);

/// Scale-aware step for differentiating along direction u at theta.
double default_fd_step(std::span<const double> theta, std::span<const double> u);

/// Hessian-vector product of f(theta; x): central difference of the
/// analytic gradient along u, error O(h^2). h <= 0 throws; u = 0 returns 0.
std::vector<double> hvp(const NetworkParams& params, std::span<const double> x,
                        std::span<const double> u, double h);

/// hvp with the default_fd_step rule.
std::vector<double> hvp(const NetworkParams& params, std::span<const double> x,
                        std::span<const double> u);

struct SpectralNormResult {
    double value = 0.0;
    bool converged = false;
    int iterations = 0;
};

/// Power iteration for ||d^2 f / dtheta^2||_2 acting through hvp. Restarts
/// from a few seeded directions and reports the largest |eigenvalue|
/// estimate; non-convergence is reported, not thrown.
SpectralNormResult hessian_spectral_norm(const NetworkParams& params, std::span<const double> x,
                                         double tol = 1e-6, int max_iter = 1000,
                                         uint64_t seed = 0);

/// Jacobian of layer l's activations with respect to the previous layer's
/// (m x m, or m x d for l = 1). l is 1-based.
Matrix layer_jacobian(const NetworkParams& params, std::span<const double> x, int l);

}  // namespace wn
