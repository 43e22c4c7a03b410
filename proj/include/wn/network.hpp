#pragma once

#include <cstdint>
#include <vector>

#include "wn/activation.hpp"
#include "wn/linalg.hpp"

namespace wn {

/// Rows below this norm are rejected rather than clamped: the normalized
/// direction is pure noise down there.
inline constexpr double kMinRowNorm = 1e-8;

/// Tolerance on the unit-norm input precondition.
inline constexpr double kUnitInputTol = 1e-9;

struct InitScheme {
    enum class Kind { Uniform, Gaussian };
    Kind kind = Kind::Uniform;
    /// Uniform: entries ~ U(-scale/sqrt(m), +scale/sqrt(m)).
    /// Gaussian: entries ~ N(0, scale^2).
    double scale = 0.5;

    static InitScheme uniform(double scale) { return {Kind::Uniform, scale}; }
    static InitScheme gaussian(double sigma) { return {Kind::Gaussian, sigma}; }
};

struct NetworkDims {
    int d = 0;  // input dimension
    int m = 0;  // hidden width, uniform across layers
    int L = 0;  // number of hidden layers

    /// d*m + (L-1)*m^2 + m
    int64_t theta_size() const {
        return static_cast<int64_t>(d) * m + static_cast<int64_t>(L - 1) * m * m + m;
    }
};

/// Parameters of a weight-normalized fully connected network: L hidden
/// weight matrices (each row is normalized before use) plus the linear
/// output vector v. v0 snapshots v at initialization and stays fixed;
/// distances ||v - v0|| feed the radius rho1 in the bound formulas.
struct NetworkParams {
    NetworkDims dims;
    ActivationSpec activation;
    std::vector<Matrix> W;   // W[0] is m x d, W[l] is m x m for l >= 1
    std::vector<double> v;   // length m
    std::vector<double> v0;  // unit norm

    int d() const { return dims.d; }
    int m() const { return dims.m; }
    int L() const { return dims.L; }
    int64_t theta_size() const { return dims.theta_size(); }
};

/// Forward evaluation record: per-layer pre-activations and activations
/// plus the scalar output.
struct ForwardTrace {
    std::vector<double> x;
    std::vector<std::vector<double>> preacts;  // L vectors of length m
    std::vector<std::vector<double>> acts;     // L vectors of length m
    double output = 0.0;
};

NetworkParams make_network(int d, int m, int L, const ActivationSpec& activation,
                           const InitScheme& init, uint64_t seed);

/// Forward pass. Validates ||x|| = 1 within kUnitInputTol and all row norms
/// above kMinRowNorm; throws NormalizationError / DegenerateRowError.
ForwardTrace forward(const NetworkParams& params, std::span<const double> x);

/// Forward pass at an arbitrary point, skipping the unit-norm input check.
/// Finite-difference probes in x need off-sphere evaluations.
ForwardTrace forward_at(const NetworkParams& params, std::span<const double> x);

/// Smallest L2 norm among all hidden rows (unsquared).
double min_weight_norm(const NetworkParams& params);

/// Theta layout: vec(W[0]) row-major, ..., vec(W[L-1]) row-major, v.
std::vector<double> flatten(const NetworkParams& params);

/// Rebuild parameters from a theta vector; shapes, activation and the v0
/// snapshot are taken from `like`. Throws DimensionError on length mismatch.
NetworkParams unflatten(std::span<const double> theta, const NetworkParams& like);

}  // namespace wn
