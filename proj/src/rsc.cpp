#include "wn/rsc.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "wn/errors.hpp"

namespace wn {
namespace {

double y_sq_mean_of(std::span<const double> y) {
    double s = 0.0;
    for (double v : y) s += v * v;
    return y.empty() ? 0.0 : s / y.size();
}

}  // namespace

void TrainConfig::validate() const {
    if (!(omega > 0.0 && omega < 2.0)) throw ConfigError("TrainConfig: omega must be in (0,2)");
    if (!(kappa > 0.0 && kappa <= 1.0)) throw ConfigError("TrainConfig: kappa must be in (0,1]");
    if (rho1 < 0 || rho2 < 0) throw ConfigError("TrainConfig: radii must be nonnegative");
    if (batch_size < 1 || epochs < 0) throw ConfigError("TrainConfig: batch_size/epochs out of range");
    if (fixed_lr < 0) throw ConfigError("TrainConfig: fixed_lr must be nonnegative");
}

double alpha_theta(double loss, double grad_norm_sq, double kappa, const BoundInputs& in) {
    if (loss < 0) throw PreconditionError("alpha_theta: loss must be nonnegative");
    if (!(kappa > 0.0 && kappa <= 1.0)) throw PreconditionError("alpha_theta: kappa must be in (0,1]");
    if (loss == 0.0) return std::numeric_limits<double>::infinity();
    double rho = grad_theta_bound(in);
    double varphi = loss_bound_varphi(in);
    double H = hessian_bound(in);
    return 0.5 * kappa * kappa * grad_norm_sq / loss - (4.0 * rho * in.rho2 + 2.0 * std::sqrt(varphi)) * H;
}

double beta_theta(const BoundInputs& in) {
    double rho = grad_theta_bound(in);
    return 2.0 * rho * rho + 2.0 * std::sqrt(loss_bound_varphi(in)) * hessian_bound(in);
}

double rate_bound(double alpha, double beta, double omega, double gamma) {
    if (!(omega > 0.0 && omega < 2.0)) throw PreconditionError("rate_bound: omega must be in (0,2)");
    if (!(gamma >= 0.0 && gamma < 1.0)) throw PreconditionError("rate_bound: gamma must be in [0,1)");
    if (beta <= 0.0) throw PreconditionError("rate_bound: beta must be positive");
    return 1.0 - (alpha / beta) * omega * (1.0 - gamma) * (2.0 - omega);
}

RscSnapshot rsc_snapshot_from(const NetworkParams& params, const LossGrad& lg,
                              std::span<const double> y, double kappa, double rho1_config,
                              double rho2) {
    BoundInputs in = measured_bound_inputs(params, rho1_config, rho2, y_sq_mean_of(y));
    RscSnapshot s;
    s.loss = lg.loss;
    s.grad_norm_sq = dot(lg.grad, lg.grad);
    s.ratio = lg.loss > 0 ? s.grad_norm_sq / lg.loss : 0.0;
    s.alpha = alpha_theta(lg.loss, s.grad_norm_sq, kappa, in);
    s.beta = beta_theta(in);
    s.kappa = kappa;
    s.rho2 = rho2;
    s.hessian_bound_used = hessian_bound(in);
    return s;
}

RscSnapshot rsc_snapshot(const NetworkParams& params, const Matrix& X, std::span<const double> y,
                         double kappa, double rho1_config, double rho2) {
    return rsc_snapshot_from(params, loss_and_grad(params, X, y), y, kappa, rho1_config, rho2);
}

GdStepResult gd_step(const NetworkParams& params, const Matrix& X, std::span<const double> y,
                     const TrainConfig& config) {
    config.validate();
    if (X.rows == 0) throw DimensionError("gd_step: empty batch");

    LossGrad lg = loss_and_grad(params, X, y);
    BoundInputs in = measured_bound_inputs(params, config.rho1, config.rho2, y_sq_mean_of(y));

    GdStepResult r;
    r.snapshot.loss = lg.loss;
    r.snapshot.grad_norm_sq = dot(lg.grad, lg.grad);
    r.snapshot.ratio = lg.loss > 0 ? r.snapshot.grad_norm_sq / lg.loss : 0.0;
    r.snapshot.alpha = alpha_theta(lg.loss, r.snapshot.grad_norm_sq, config.kappa, in);
    r.snapshot.beta = beta_theta(in);
    r.snapshot.kappa = config.kappa;
    r.snapshot.rho2 = config.rho2;
    r.snapshot.hessian_bound_used = hessian_bound(in);
    r.a31_ok = r.snapshot.alpha > 0.0;

    double eta = config.fixed_lr > 0.0 ? config.fixed_lr : config.omega / r.snapshot.beta;
    std::vector<double> theta = flatten(params);
    double grad_norm = std::sqrt(r.snapshot.grad_norm_sq);

    if (grad_norm == 0.0) {
        r.next = params;
        r.eta = eta;
        r.step_norm = 0.0;
        r.a33_ok = true;
        return r;
    }

    const int m = params.m();
    const size_t v_off = theta.size() - m;
    std::vector<double> candidate(theta.size());
    for (int bt = 0; bt <= 30; ++bt) {
        for (size_t i = 0; i < theta.size(); ++i) candidate[i] = theta[i] - eta * lg.grad[i];
        // A3.2: the updated output layer must stay inside the rho1 ball.
        double dv = 0.0;
        for (int i = 0; i < m; ++i) {
            double diff = candidate[v_off + i] - params.v0[i];
            dv += diff * diff;
        }
        if (std::sqrt(dv) <= config.rho1) {
            r.next = unflatten(candidate, params);
            r.eta = eta;
            r.step_norm = eta * grad_norm;
            r.backtracks = bt;
            r.a33_ok = config.rho2 <= 0.0 || r.step_norm <= config.rho2;
            return r;
        }
        eta *= 0.5;
    }
    throw StepRejectedError("gd_step: learning-rate backtracking exhausted; v cannot stay in the rho1 ball (loss=" +
                            std::to_string(lg.loss) + ", |grad|=" + std::to_string(grad_norm) + ")");
}

namespace {

NetworkParams make_perturbed(const NetworkParams& params, std::span<const double> theta,
                             std::span<const double> dir, double r) {
    std::vector<double> t(theta.size());
    for (size_t i = 0; i < t.size(); ++i) t[i] = theta[i] + r * dir[i];
    return unflatten(t, params);
}

}  // namespace

std::vector<NetworkParams> sample_in_Qkappa(const NetworkParams& params,
                                            std::span<const double> grad_loss, double kappa,
                                            double rho1, double rho2, int count, uint64_t seed) {
    double gn = norm2(grad_loss);
    if (gn == 0.0) throw PreconditionError("sample_in_Qkappa: gradient is zero");
    if (!(kappa > 0.0 && kappa <= 1.0)) throw PreconditionError("sample_in_Qkappa: kappa must be in (0,1]");
    if (rho2 <= 0.0) throw PreconditionError("sample_in_Qkappa: rho2 must be positive");

    std::vector<double> ghat(grad_loss.begin(), grad_loss.end());
    scale(1.0 / gn, ghat);
    std::vector<double> theta = flatten(params);
    const int m = params.m();
    const size_t v_off = theta.size() - m;

    Rng rng(seed);
    std::vector<NetworkParams> out;
    out.reserve(count);
    int guard = 0;
    while (static_cast<int>(out.size()) < count) {
        if (++guard > 1000 * count)
            throw PreconditionError("sample_in_Qkappa: rejection rate too high; shrink rho2 or rho1 slack");
        double c = rng.uniform(kappa, 1.0) * (rng.uniform01() < 0.5 ? -1.0 : 1.0);
        double r = rho2 * std::max(rng.uniform01(), 1e-12);
        std::vector<double> dir;
        if (std::fabs(c) >= 1.0 - 1e-15) {
            dir = ghat;
            scale(c, dir);
        } else {
            std::vector<double> u = random_unit_vector(static_cast<int>(theta.size()), rng);
            double proj = dot(u, ghat);
            axpy(-proj, ghat, u);
            double un = norm2(u);
            if (un < 1e-12) continue;
            scale(1.0 / un, u);
            dir = ghat;
            scale(c, dir);
            axpy(std::sqrt(1.0 - c * c), u, dir);
        }
        // rejection: keep v' inside the rho1 ball around v0
        double dv = 0.0;
        for (int i = 0; i < m; ++i) {
            double vi = theta[v_off + i] + r * dir[v_off + i] - params.v0[i];
            dv += vi * vi;
        }
        if (std::sqrt(dv) > rho1) continue;
        double cosv = std::fabs(dot(dir, ghat)) / norm2(dir);
        if (cosv < kappa - 1e-12) continue;
        out.push_back(make_perturbed(params, theta, dir, r));
    }
    return out;
}

double qkappa_acceptance_rate(const NetworkParams& params, std::span<const double> grad_loss,
                              double kappa, double rho1, double rho2, int count, uint64_t seed) {
    double gn = norm2(grad_loss);
    if (gn == 0.0) throw PreconditionError("qkappa_acceptance_rate: gradient is zero");
    std::vector<double> ghat(grad_loss.begin(), grad_loss.end());
    scale(1.0 / gn, ghat);
    std::vector<double> theta = flatten(params);
    const int m = params.m();
    const size_t v_off = theta.size() - m;

    Rng rng(seed);
    int accepted = 0;
    for (int k = 0; k < count; ++k) {
        double c = rng.uniform(kappa, 1.0) * (rng.uniform01() < 0.5 ? -1.0 : 1.0);
        double r = rho2 * std::max(rng.uniform01(), 1e-12);
        std::vector<double> u = random_unit_vector(static_cast<int>(theta.size()), rng);
        double proj = dot(u, ghat);
        axpy(-proj, ghat, u);
        double un = norm2(u);
        if (un < 1e-12) continue;
        scale(1.0 / un, u);
        std::vector<double> dir = ghat;
        scale(c, dir);
        axpy(std::sqrt(1.0 - c * c), u, dir);
        double dv = 0.0;
        for (int i = 0; i < m; ++i) {
            double vi = theta[v_off + i] + r * dir[v_off + i] - params.v0[i];
            dv += vi * vi;
        }
        if (std::sqrt(dv) <= rho1) ++accepted;
    }
    return static_cast<double>(accepted) / count;
}

double taylor_lower_residual(double loss0, double loss1, double inner, double dist_sq, double alpha) {
    return loss1 - loss0 - inner - 0.5 * alpha * dist_sq;
}

double taylor_upper_residual(double loss0, double loss1, double inner, double dist_sq, double beta) {
    return loss0 + inner + 0.5 * beta * dist_sq - loss1;
}

namespace {

struct TaylorPieces {
    double loss0, loss1, inner, dist_sq;
};

TaylorPieces taylor_pieces(const NetworkParams& params, const NetworkParams& params_prime,
                           const Matrix& X, std::span<const double> y) {
    LossGrad lg = loss_and_grad(params, X, y);
    std::vector<double> delta = sub(flatten(params_prime), flatten(params));
    TaylorPieces t;
    t.loss0 = lg.loss;
    t.loss1 = loss_only(params_prime, X, y);
    t.inner = dot(delta, lg.grad);
    t.dist_sq = dot(delta, delta);
    return t;
}

}  // namespace

double rsc_residual(const NetworkParams& params, const NetworkParams& params_prime, double alpha,
                    const Matrix& X, std::span<const double> y) {
    TaylorPieces t = taylor_pieces(params, params_prime, X, y);
    return taylor_lower_residual(t.loss0, t.loss1, t.inner, t.dist_sq, alpha);
}

double smoothness_residual(const NetworkParams& params, const NetworkParams& params_prime,
                           double beta, const Matrix& X, std::span<const double> y) {
    TaylorPieces t = taylor_pieces(params, params_prime, X, y);
    return taylor_upper_residual(t.loss0, t.loss1, t.inner, t.dist_sq, beta);
}

}  // namespace wn
