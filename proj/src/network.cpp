#include "wn/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "wn/errors.hpp"

namespace wn {
namespace {

double draw_entry(const InitScheme& init, int m, Rng& rng) {
    if (init.kind == InitScheme::Kind::Uniform) {
        double c = init.scale / std::sqrt(static_cast<double>(m));
        return rng.uniform(-c, c);
    }
    return init.scale * rng.normal();
}

void fill_rows(Matrix& W, const InitScheme& init, int m, Rng& rng) {
    for (int i = 0; i < W.rows; ++i) {
        // Resample rows whose norm is degenerate; with any sane scale this
        // never triggers, but the invariant must hold by construction.
        for (int attempt = 0; attempt < 100; ++attempt) {
            for (int j = 0; j < W.cols; ++j) W(i, j) = draw_entry(init, m, rng);
            if (norm2(W.row(i)) > kMinRowNorm) break;
        }
        if (norm2(W.row(i)) <= kMinRowNorm)
            throw DegenerateRowError("failed to draw a row with norm above " + std::to_string(kMinRowNorm));
    }
}

}  // namespace

NetworkParams make_network(int d, int m, int L, const ActivationSpec& activation,
                           const InitScheme& init, uint64_t seed) {
    if (d < 1 || m < 1 || L < 1)
        throw DimensionError("make_network: d, m, L must all be >= 1");
    NetworkParams p;
    p.dims = {d, m, L};
    p.activation = activation;
    p.W.reserve(L);
    Rng rng(seed);
    for (int l = 0; l < L; ++l) {
        Matrix W(m, l == 0 ? d : m);
        fill_rows(W, init, m, rng);
        p.W.push_back(std::move(W));
    }
    p.v.resize(m);
    double nv = 0.0;
    do {
        for (auto& x : p.v) x = draw_entry(init, m, rng);
        nv = norm2(p.v);
    } while (nv < 1e-12);
    scale(1.0 / nv, p.v);
    p.v0 = p.v;
    return p;
}

static ForwardTrace run_forward(const NetworkParams& p, std::span<const double> x) {
    if (static_cast<int>(x.size()) != p.d())
        throw DimensionError("forward: input has length " + std::to_string(x.size()) +
                             ", expected " + std::to_string(p.d()));
    const int m = p.m();
    const double inv_sqrt_m = 1.0 / std::sqrt(static_cast<double>(m));

    ForwardTrace t;
    t.x.assign(x.begin(), x.end());
    t.preacts.resize(p.L());
    t.acts.resize(p.L());

    std::span<const double> prev = t.x;
    for (int l = 0; l < p.L(); ++l) {
        const Matrix& W = p.W[l];
        auto& pre = t.preacts[l];
        auto& act = t.acts[l];
        pre.resize(m);
        act.resize(m);
        for (int i = 0; i < m; ++i) {
            auto wi = W.row(i);
            double nrm = norm2(wi);
            if (nrm <= kMinRowNorm)
                throw DegenerateRowError("forward: row " + std::to_string(i) + " of layer " +
                                         std::to_string(l + 1) + " has norm below threshold");
            pre[i] = inv_sqrt_m * dot(wi, prev) / nrm;
            act[i] = p.activation.eval(pre[i]);
        }
        prev = act;
    }
    t.output = dot(p.v, prev);
    return t;
}

ForwardTrace forward(const NetworkParams& params, std::span<const double> x) {
    double nx = norm2(x);
    if (std::fabs(nx - 1.0) > kUnitInputTol)
        throw NormalizationError("forward: input norm is " + std::to_string(nx) +
                                 ", expected 1 within " + std::to_string(kUnitInputTol));
    return run_forward(params, x);
}

ForwardTrace forward_at(const NetworkParams& params, std::span<const double> x) {
    return run_forward(params, x);
}

double min_weight_norm(const NetworkParams& params) {
    double best = std::numeric_limits<double>::infinity();
    for (const Matrix& W : params.W)
        for (int i = 0; i < W.rows; ++i) best = std::min(best, norm2(W.row(i)));
    return best;
}

std::vector<double> flatten(const NetworkParams& params) {
    std::vector<double> theta;
    theta.reserve(static_cast<size_t>(params.theta_size()));
    for (const Matrix& W : params.W) theta.insert(theta.end(), W.data.begin(), W.data.end());
    theta.insert(theta.end(), params.v.begin(), params.v.end());
    return theta;
}

NetworkParams unflatten(std::span<const double> theta, const NetworkParams& like) {
    if (static_cast<int64_t>(theta.size()) != like.theta_size())
        throw DimensionError("unflatten: theta has length " + std::to_string(theta.size()) +
                             ", expected " + std::to_string(like.theta_size()));
    NetworkParams p;
    p.dims = like.dims;
    p.activation = like.activation;
    p.v0 = like.v0;
    size_t off = 0;
    p.W.reserve(like.L());
    for (const Matrix& Wl : like.W) {
        Matrix W(Wl.rows, Wl.cols);
        std::copy(theta.begin() + off, theta.begin() + off + W.data.size(), W.data.begin());
        off += W.data.size();
        p.W.push_back(std::move(W));
    }
    p.v.assign(theta.begin() + off, theta.end());
    return p;
}

}  // namespace wn
