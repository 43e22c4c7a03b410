#include "wn/deriv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "wn/errors.hpp"

namespace wn {

std::vector<double> GradTheta::flatten() const {
    std::vector<double> g;
    size_t total = dv.size();
    for (const Matrix& M : dW) total += M.data.size();
    g.reserve(total);
    for (const Matrix& M : dW) g.insert(g.end(), M.data.begin(), M.data.end());
    g.insert(g.end(), dv.begin(), dv.end());
    return g;
}

double GradTheta::norm() const {
    double s = dot(dv, dv);
    for (const Matrix& M : dW) s += dot(M.data, M.data);
    return std::sqrt(s);
}

void backprop(const NetworkParams& params, const ForwardTrace& trace,
              GradTheta* out_theta, std::vector<double>* out_x) {
    const int m = params.m();
    const int L = params.L();
    const double inv_sqrt_m = 1.0 / std::sqrt(static_cast<double>(m));

    if (out_theta) {
        // reuse block storage when the shapes already match
        bool shapes_ok = static_cast<int>(out_theta->dW.size()) == L;
        for (int l = 0; shapes_ok && l < L; ++l)
            shapes_ok = out_theta->dW[l].rows == params.W[l].rows &&
                        out_theta->dW[l].cols == params.W[l].cols;
        if (!shapes_ok) {
            out_theta->dW.clear();
            out_theta->dW.reserve(L);
            for (const Matrix& Wl : params.W) out_theta->dW.emplace_back(Wl.rows, Wl.cols);
        }
        out_theta->dv = trace.acts[L - 1];  // df/dv = alpha^(L)
    }

    // g holds df/dalpha^(l), seeded with v at the top layer.
    std::vector<double> g = params.v;
    std::vector<double> g_prev;
    for (int l = L - 1; l >= 0; --l) {
        const Matrix& W = params.W[l];
        std::span<const double> below = (l == 0) ? std::span<const double>(trace.x)
                                                 : std::span<const double>(trace.acts[l - 1]);
        g_prev.assign(below.size(), 0.0);
        for (int i = 0; i < m; ++i) {
            auto wi = W.row(i);
            double nrm = norm2(wi);
            double phi1 = params.activation.deriv1(trace.preacts[l][i]);
            double c = g[i] * phi1 * inv_sqrt_m;  // shared chain factor for row i
            if (out_theta) {
                double proj = dot(wi, below);  // W_i^T alpha^(l-1)
                auto grow = out_theta->dW[l].row(i);
                double a1 = c / nrm;
                double a2 = -c * proj / (nrm * nrm * nrm);
                for (size_t j = 0; j < grow.size(); ++j) grow[j] = a1 * below[j] + a2 * wi[j];
            }
            // accumulate J^T g into the layer below
            double b = c / nrm;
            for (size_t j = 0; j < below.size(); ++j) g_prev[j] += b * wi[j];
        }
        g.swap(g_prev);
    }
    if (out_x) *out_x = std::move(g);
}

GradTheta grad_theta(const NetworkParams& params, std::span<const double> x) {
    ForwardTrace t = forward(params, x);
    GradTheta g;
    backprop(params, t, &g, nullptr);
    return g;
}

std::vector<double> grad_x(const NetworkParams& params, std::span<const double> x) {
    ForwardTrace t = forward(params, x);
    std::vector<double> gx;
    backprop(params, t, nullptr, &gx);
    return gx;
}

LossGrad loss_and_grad(const NetworkParams& params, const Matrix& X, std::span<const double> y) {
    if (X.rows == 0) throw DimensionError("loss_and_grad: empty batch");
    if (X.rows != static_cast<int>(y.size()))
        throw DimensionError("loss_and_grad: batch size mismatch between inputs and targets");
    const int n = X.rows;
    LossGrad out;
    out.grad.assign(static_cast<size_t>(params.theta_size()), 0.0);

    GradTheta g;
    std::vector<double> flat;
    for (int i = 0; i < n; ++i) {
        ForwardTrace t = forward(params, X.row(i));
        double resid = t.output - y[i];
        out.loss += resid * resid;
        backprop(params, t, &g, nullptr);
        // d/dtheta of (y - f)^2 is 2 (f - y) df/dtheta
        double w = 2.0 * resid / n;
        size_t off = 0;
        for (const Matrix& M : g.dW) {
            for (double gv : M.data) out.grad[off++] += w * gv;
        }
        for (double gv : g.dv) out.grad[off++] += w * gv;
    }
    out.loss /= n;
    return out;
}

double loss_only(const NetworkParams& params, const Matrix& X, std::span<const double> y) {
    if (X.rows == 0) throw DimensionError("loss_only: empty batch");
    double s = 0.0;
    for (int i = 0; i < X.rows; ++i) {
        double r = forward(params, X.row(i)).output - y[i];
        s += r * r;
    }
    return s / X.rows;
}

std::vector<double> fd_grad_oracle(const std::function<double(std::span<const double>)>& fn,
                                   std::span<const double> theta, double h) {
    if (h <= 0.0) throw PreconditionError("fd_grad_oracle: h must be positive");
    std::vector<double> point(theta.begin(), theta.end());
    std::vector<double> g(theta.size());
    for (size_t k = 0; k < theta.size(); ++k) {
        double orig = point[k];
        point[k] = orig + h;
        double fp = fn(point);
        point[k] = orig - h;
        double fm = fn(point);
        point[k] = orig;
        g[k] = (fp - fm) / (2.0 * h);
    }
    return g;
}

double default_fd_step(std::span<const double> theta, std::span<const double> u) {
    double un = norm2(u);
    if (un == 0.0) return 1e-4;
    return 1e-4 * (1.0 + norm2(theta)) / un;
}

std::vector<double> hvp(const NetworkParams& params, std::span<const double> x,
                        std::span<const double> u, double h) {
    if (h <= 0.0) throw PreconditionError("hvp: h must be positive");
    if (static_cast<int64_t>(u.size()) != params.theta_size())
        throw DimensionError("hvp: direction has wrong length");
    if (norm2(u) == 0.0) return std::vector<double>(u.size(), 0.0);

    std::vector<double> theta = flatten(params);
    std::vector<double> shifted(theta.size());
    for (size_t i = 0; i < theta.size(); ++i) shifted[i] = theta[i] + h * u[i];
    std::vector<double> gp = grad_theta(unflatten(shifted, params), x).flatten();
    for (size_t i = 0; i < theta.size(); ++i) shifted[i] = theta[i] - h * u[i];
    std::vector<double> gm = grad_theta(unflatten(shifted, params), x).flatten();

    std::vector<double> out(theta.size());
    double inv = 1.0 / (2.0 * h);
    for (size_t i = 0; i < theta.size(); ++i) out[i] = (gp[i] - gm[i]) * inv;
    return out;
}

std::vector<double> hvp(const NetworkParams& params, std::span<const double> x,
                        std::span<const double> u) {
    std::vector<double> theta = flatten(params);
    return hvp(params, x, u, default_fd_step(theta, u));
}

SpectralNormResult hessian_spectral_norm(const NetworkParams& params, std::span<const double> x,
                                         double tol, int max_iter, uint64_t seed) {
    if (tol <= 0.0) throw PreconditionError("hessian_spectral_norm: tol must be positive");
    const auto p = static_cast<size_t>(params.theta_size());
    SpectralNormResult best;
    best.converged = true;

    const int restarts = 3;
    for (int run = 0; run < restarts; ++run) {
        Rng rng(seed * 1000003 + 17 * run + 1);
        std::vector<double> u = random_unit_vector(static_cast<int>(p), rng);
        double est = 0.0, prev = std::numeric_limits<double>::infinity();
        bool converged = false;
        int it = 0;
        for (; it < max_iter; ++it) {
            std::vector<double> z = hvp(params, x, u);
            double zn = norm2(z);
            est = zn;  // u is unit, so ||H u|| estimates |lambda|_max at convergence
            if (zn < 1e-14) {
                converged = true;  // (numerically) annihilated direction; treat as zero curvature
                break;
            }
            if (std::fabs(est - prev) <= tol * std::max(est, 1e-300)) {
                converged = true;
                break;
            }
            prev = est;
            scale(1.0 / zn, z);
            u.swap(z);
        }
        if (est > best.value) best.value = est;
        best.iterations = std::max(best.iterations, it);
        best.converged = best.converged && converged;
    }
    return best;
}

Matrix layer_jacobian(const NetworkParams& params, std::span<const double> x, int l) {
    if (l < 1 || l > params.L()) throw DimensionError("layer_jacobian: layer index out of range");
    ForwardTrace t = forward(params, x);
    const Matrix& W = params.W[l - 1];
    const double inv_sqrt_m = 1.0 / std::sqrt(static_cast<double>(params.m()));
    Matrix J(W.rows, W.cols);
    for (int i = 0; i < W.rows; ++i) {
        auto wi = W.row(i);
        double nrm = norm2(wi);
        double c = inv_sqrt_m * params.activation.deriv1(t.preacts[l - 1][i]) / nrm;
        auto jr = J.row(i);
        for (size_t j = 0; j < jr.size(); ++j) jr[j] = c * wi[j];
    }
    return J;
}

}  // namespace wn
