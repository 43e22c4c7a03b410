#include "wn/gen_bound.hpp"

#include <cmath>

#include "wn/deriv.hpp"
#include "wn/errors.hpp"

namespace wn {

void GenInputs::validate() const {
    if (n < 1) throw PreconditionError("GenInputs: n must be >= 1");
    if (L < 1) throw PreconditionError("GenInputs: L must be >= 1");
    if (!(delta > 0.0 && delta < 1.0)) throw PreconditionError("GenInputs: delta must be in (0,1)");
    if (rho1 < 0.0) throw PreconditionError("GenInputs: rho1 must be nonnegative");
    if (phi0 != 0.0)
        throw PreconditionError("GenInputs: the generalization bound requires an activation with phi(0) = 0");
}

double generalization_bound(const GenInputs& in) {
    in.validate();
    double sqn = std::sqrt(static_cast<double>(in.n));
    double rad_term = 4.0 * (2.0 + in.rho1) * (1.0 + in.rho1) *
                      (std::sqrt(2.0 * std::log(2.0) * in.L) + 1.0) / sqn;
    double conf_term = 2.0 * (1.0 + (1.0 + in.rho1) * (1.0 + in.rho1)) *
                       std::sqrt(2.0 * std::log(2.0 / in.delta)) / sqn;
    return rad_term + conf_term;
}

double rademacher_bound(double rho1, int L, int64_t n) {
    return (1.0 + rho1) * (std::sqrt(2.0 * std::log(2.0) * L) + 1.0) / std::sqrt(static_cast<double>(n));
}

double empirical_gap(const NetworkParams& params, const Matrix& X_train,
                     std::span<const double> y_train, const Matrix& X_heldout,
                     std::span<const double> y_heldout) {
    if (X_train.rows == 0 || X_heldout.rows == 0)
        throw DimensionError("empirical_gap: both sets must be nonempty");
    return loss_only(params, X_heldout, y_heldout) - loss_only(params, X_train, y_train);
}

double rademacher_lower_estimate(const Matrix& X, const FamilySampler& sampler, int sign_draws,
                                 int nets, uint64_t seed, bool optimize_v, double rho1) {
    if (sign_draws < 1 || nets < 1)
        throw PreconditionError("rademacher_lower_estimate: sign_draws and nets must be >= 1");
    const int n = X.rows;
    if (n == 0) throw DimensionError("rademacher_lower_estimate: empty data");

    // Same sign matrix for every family member.
    Rng rng(seed);
    std::vector<int8_t> eps(static_cast<size_t>(sign_draws) * n);
    for (auto& e : eps) e = rng.uniform01() < 0.5 ? -1 : 1;

    std::vector<double> best(sign_draws, 0.0);
    for (int j = 0; j < nets; ++j) {
        NetworkParams net = sampler(j);
        if (!optimize_v) {
            std::vector<double> f(n);
            for (int i = 0; i < n; ++i) f[i] = forward(net, X.row(i)).output;
            for (int k = 0; k < sign_draws; ++k) {
                double s = 0.0;
                for (int i = 0; i < n; ++i) s += eps[static_cast<size_t>(k) * n + i] * f[i];
                best[k] = std::max(best[k], std::fabs(s) / n);
            }
        } else {
            // Keep the top-layer activations so the sup over the v ball can
            // be taken exactly per sign vector.
            Matrix acts(n, net.m());
            for (int i = 0; i < n; ++i) {
                ForwardTrace t = forward(net, X.row(i));
                auto row = acts.row(i);
                std::copy(t.acts.back().begin(), t.acts.back().end(), row.begin());
            }
            std::vector<double> s(net.m());
            for (int k = 0; k < sign_draws; ++k) {
                std::fill(s.begin(), s.end(), 0.0);
                for (int i = 0; i < n; ++i)
                    axpy(static_cast<double>(eps[static_cast<size_t>(k) * n + i]), acts.row(i), s);
                scale(1.0 / n, s);
                double val = std::fabs(dot(net.v0, s)) + rho1 * norm2(s);
                best[k] = std::max(best[k], val);
            }
        }
    }
    double avg = 0.0;
    for (double b : best) avg += b;
    return avg / sign_draws;
}

FamilySampler default_family_sampler(int d, int m, int L, const ActivationSpec& activation,
                                     const InitScheme& init, double rho1, uint64_t seed) {
    // One shared v0 across the family, as the ball constraint is anchored there.
    Rng anchor(seed);
    auto v0 = random_unit_vector(m, anchor);
    return [=](int j) {
        NetworkParams p = make_network(d, m, L, activation, init, seed + 1 + static_cast<uint64_t>(j));
        p.v0 = v0;
        // v uniform in the rho1 ball around v0
        Rng r(seed ^ (0x9e3779b97f4a7c15ULL + j));
        auto dir = random_unit_vector(m, r);
        double radius = rho1 * std::pow(r.uniform01(), 1.0 / m);
        p.v = v0;
        axpy(radius, dir, p.v);
        return p;
    };
}

}  // namespace wn
