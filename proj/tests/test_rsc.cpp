#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "wn/dataset.hpp"
#include "wn/errors.hpp"
#include "wn/harness.hpp"
#include "wn/rsc.hpp"

using namespace wn;

namespace {

BoundInputs plain_inputs() {
    BoundInputs in;
    in.m = 16;
    in.L = 2;
    in.phi0 = 0.0;
    in.beta_phi = 0.77;
    in.rho1 = 0.2;
    in.rho2 = 0.05;
    in.minw = 1.0;
    in.y_sq_mean = 0.25;
    return in;
}

}  // namespace

TEST_CASE("alpha closed-form pieces") {
    auto in = plain_inputs();
    double H = hessian_bound(in);
    double rho = grad_theta_bound(in);
    double varphi = loss_bound_varphi(in);

    // zero gradient: only the negative term remains
    double a0 = alpha_theta(0.5, 0.0, 0.5, in);
    CHECK(a0 == doctest::Approx(-(4 * rho * in.rho2 + 2 * std::sqrt(varphi)) * H).epsilon(1e-13));
    CHECK(a0 < 0.0);

    // zero loss flags the global minimum
    CHECK(std::isinf(alpha_theta(0.0, 0.0, 0.5, in)));

    // growing minw strictly increases alpha at fixed first term
    auto in2 = in;
    in2.minw = 2.0;
    CHECK(alpha_theta(0.5, 1.0, 0.5, in2) > alpha_theta(0.5, 1.0, 0.5, in));

    CHECK_THROWS_AS(alpha_theta(-1.0, 0.0, 0.5, in), PreconditionError);
    CHECK_THROWS_AS(alpha_theta(0.5, 0.0, 0.0, in), PreconditionError);
}

TEST_CASE("alpha is positive on the constructed instance") {
    RscFavorableInstance inst = make_rsc_favorable_instance(7);
    RscSnapshot s = rsc_snapshot(inst.params, inst.data.inputs, inst.data.targets,
                                 inst.config.kappa, inst.config.rho1, inst.config.rho2);
    CHECK(s.alpha > 0.0);
    CHECK(s.alpha < s.beta);
    CHECK(s.loss > 0.0);
}

TEST_CASE("beta exceeds twice the squared gradient bound") {
    auto in = plain_inputs();
    double rho = grad_theta_bound(in);
    CHECK(beta_theta(in) > 2.0 * rho * rho);
    // huge rows, phi0=0, rho1=0: beta approaches 2 from above
    BoundInputs tight;
    tight.m = 4096;
    tight.L = 1;
    tight.phi0 = 0.0;
    tight.beta_phi = 0.77;
    tight.rho1 = 0.0;
    tight.rho2 = 0.0;
    tight.minw = 1e6;
    tight.y_sq_mean = 0.0;
    CHECK(beta_theta(tight) == doctest::Approx(2.0).epsilon(1e-3));
    CHECK(beta_theta(tight) > 2.0);
}

TEST_CASE("alpha < beta and ratio <= 4 rho^2 on random snapshots") {
    for (int k = 0; k < 8; ++k) {
        auto net = make_network(5, 8, 2, ActivationSpec::tanh(), InitScheme::uniform(1.0 + 0.2 * k),
                                40 + k);
        Dataset data = make_random_dataset(6, 5, 100 + k);
        RscSnapshot s = rsc_snapshot(net, data.inputs, data.targets, 0.5, 0.1, 0.05);
        CHECK(s.alpha < s.beta);
        BoundInputs in = measured_bound_inputs(net, 0.1, 0.05, 0.0);
        double rho = grad_theta_bound(in);
        CHECK(s.ratio <= 4.0 * rho * rho + 1e-12);
    }
}

TEST_CASE("rate bound closed form") {
    CHECK(rate_bound(0.3, 1.2, 1.0, 0.0) == doctest::Approx(1.0 - 0.25).epsilon(1e-15));
    CHECK(rate_bound(2.0, 2.0, 1.0, 0.0) == doctest::Approx(0.0));
    CHECK(rate_bound(0.5, 1.0, 0.5, 0.5) == doctest::Approx(1.0 - 0.5 * 0.5 * 0.5 * 1.5).epsilon(1e-15));
    CHECK_THROWS_AS(rate_bound(0.1, 1.0, 2.0, 0.0), PreconditionError);
    CHECK_THROWS_AS(rate_bound(0.1, 1.0, 1.0, 1.0), PreconditionError);
    CHECK_THROWS_AS(rate_bound(0.1, 0.0, 1.0, 0.0), PreconditionError);
}

TEST_CASE("gd_step on an interpolating batch is a fixpoint") {
    auto net = make_network(4, 6, 2, ActivationSpec::tanh(), InitScheme::uniform(1), 77);
    Dataset data = make_random_dataset(4, 4, 9);
    for (int i = 0; i < data.n(); ++i)
        data.targets[i] = forward(net, data.inputs.row(i)).output;
    TrainConfig tc;
    tc.rho1 = 0.1;
    tc.rho2 = 0.01;
    GdStepResult st = gd_step(net, data.inputs, data.targets, tc);
    CHECK(st.snapshot.loss == 0.0);
    CHECK(std::isinf(st.snapshot.alpha));
    CHECK(st.step_norm == 0.0);
    CHECK(flatten(st.next) == flatten(net));
}

TEST_CASE("gd_step backtracks to keep v inside the rho1 ball") {
    auto net = make_network(4, 6, 1, ActivationSpec::tanh(), InitScheme::uniform(1), 3);
    Dataset data = make_random_dataset(8, 4, 10);
    TrainConfig tc;
    tc.fixed_lr = 500.0;  // absurd step; must be halved down
    tc.rho1 = 0.05;
    tc.rho2 = 1e9;
    GdStepResult st = gd_step(net, data.inputs, data.targets, tc);
    CHECK(st.backtracks > 0);
    CHECK(norm2(sub(st.next.v, st.next.v0)) <= 0.05 + 1e-15);
    CHECK(st.eta < 500.0);
}

TEST_CASE("gd_step reports exhausted backtracking") {
    auto net = make_network(4, 6, 1, ActivationSpec::tanh(), InitScheme::uniform(1), 3);
    Dataset data = make_random_dataset(8, 4, 10);
    TrainConfig tc;
    tc.fixed_lr = 1e12;
    tc.rho1 = 1e-14;  // essentially no room
    tc.rho2 = 1e9;
    CHECK_THROWS_AS(gd_step(net, data.inputs, data.targets, tc), StepRejectedError);
}

TEST_CASE("full-batch descent decreases the loss while alpha > 0") {
    RscFavorableInstance inst = make_rsc_favorable_instance(11);
    NetworkParams net = inst.params;
    double prev = loss_only(net, inst.data.inputs, inst.data.targets);
    for (int t = 0; t < 10; ++t) {
        GdStepResult st = gd_step(net, inst.data.inputs, inst.data.targets, inst.config);
        REQUIRE(st.snapshot.alpha > 0.0);
        net = std::move(st.next);
        double cur = loss_only(net, inst.data.inputs, inst.data.targets);
        CHECK(cur < prev);
        double bound = rate_bound(st.snapshot.alpha, st.snapshot.beta, inst.config.omega, 0.0);
        CHECK(cur / st.snapshot.loss <= bound + 1e-12);
        prev = cur;
    }
}

TEST_CASE("Q_kappa sampler satisfies its predicate") {
    auto net = make_network(4, 8, 2, ActivationSpec::tanh(), InitScheme::uniform(1), 21);
    Dataset data = make_random_dataset(6, 4, 22);
    LossGrad lg = loss_and_grad(net, data.inputs, data.targets);
    REQUIRE(lg.grad_norm() > 0.0);
    double kappa = 0.6, rho1 = 0.3, rho2 = 0.02;
    auto theta0 = flatten(net);
    std::vector<double> ghat = lg.grad;
    scale(1.0 / norm2(ghat), ghat);

    auto samples = sample_in_Qkappa(net, lg.grad, kappa, rho1, rho2, 50, 77);
    CHECK(samples.size() == 50);
    for (const auto& sp : samples) {
        auto delta = sub(flatten(sp), theta0);
        double dn = norm2(delta);
        CHECK(dn <= rho2 + 1e-12);
        CHECK(dn > 0.0);
        CHECK(std::fabs(dot(delta, ghat)) / dn >= kappa - 1e-12);
        CHECK(norm2(sub(sp.v, sp.v0)) <= rho1 + 1e-12);
    }

    // kappa = 1 forces collinearity with the gradient
    auto collinear = sample_in_Qkappa(net, lg.grad, 1.0, rho1, rho2, 10, 78);
    for (const auto& sp : collinear) {
        auto delta = sub(flatten(sp), theta0);
        CHECK(std::fabs(dot(delta, ghat)) / norm2(delta) >= 1.0 - 1e-12);
    }

    std::vector<double> zero(lg.grad.size(), 0.0);
    CHECK_THROWS_AS(sample_in_Qkappa(net, zero, kappa, rho1, rho2, 1, 1), PreconditionError);

    // small rho2 relative to the rho1 slack keeps the acceptance rate high
    CHECK(qkappa_acceptance_rate(net, lg.grad, kappa, rho1, rho2, 400, 79) >= 0.95);
}

TEST_CASE("taylor residual arithmetic is exact on quadratics") {
    // Scalar quadratic q(t) = q0 + g t + (c/2) t^2: the lower residual with
    // alpha = c is exactly zero, and (c - alpha)/2 t^2 otherwise.
    double q0 = 0.7, g = -1.3, c = 2.4, t = 0.31;
    double q1 = q0 + g * t + 0.5 * c * t * t;
    CHECK(taylor_lower_residual(q0, q1, g * t, t * t, c) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(taylor_upper_residual(q0, q1, g * t, t * t, c) == doctest::Approx(0.0).epsilon(1e-15));
    double alpha = 1.0;
    CHECK(taylor_lower_residual(q0, q1, g * t, t * t, alpha) ==
          doctest::Approx(0.5 * (c - alpha) * t * t).epsilon(1e-12));
    double beta = 5.0;
    CHECK(taylor_upper_residual(q0, q1, g * t, t * t, beta) ==
          doctest::Approx(0.5 * (beta - c) * t * t).epsilon(1e-12));
}

TEST_CASE("weak coefficients make the residuals trivially nonnegative") {
    auto net = make_network(4, 6, 2, ActivationSpec::tanh(), InitScheme::uniform(1), 31);
    Dataset data = make_random_dataset(6, 4, 32);
    LossGrad lg = loss_and_grad(net, data.inputs, data.targets);
    auto samples = sample_in_Qkappa(net, lg.grad, 0.5, 0.3, 0.05, 10, 5);
    for (const auto& sp : samples) {
        CHECK(rsc_residual(net, sp, -1e9, data.inputs, data.targets) >= 0.0);
        CHECK(smoothness_residual(net, sp, 1e9, data.inputs, data.targets) >= 0.0);
    }
}

TEST_CASE("sampled residuals stay above the slack with computed alpha and beta") {
    for (int k = 0; k < 4; ++k) {
        auto net = make_network(5, 10, 1 + k % 2, ActivationSpec::tanh(),
                                InitScheme::uniform(1.5), 400 + k);
        Dataset data = make_random_dataset(8, 5, 500 + k);
        double kappa = 0.5, rho1 = 0.2, rho2 = 0.05;
        LossGrad lg = loss_and_grad(net, data.inputs, data.targets);
        BoundInputs in = measured_bound_inputs(net, rho1, rho2, 0.5);
        double alpha = alpha_theta(lg.loss, dot(lg.grad, lg.grad), kappa, in);
        double beta = beta_theta(in);
        auto samples = sample_in_Qkappa(net, lg.grad, kappa, rho1, rho2, 40, 600 + k);
        for (const auto& sp : samples) {
            CHECK(rsc_residual(net, sp, alpha, data.inputs, data.targets) >= -1e-8);
            CHECK(smoothness_residual(net, sp, beta, data.inputs, data.targets) >= -1e-8);
        }
    }
}

TEST_CASE("loss and outputs are invariant to radial row rescaling") {
    auto net = make_network(5, 8, 2, ActivationSpec::tanh(), InitScheme::uniform(1), 61);
    Dataset data = make_random_dataset(6, 5, 62);
    LossGrad a = loss_and_grad(net, data.inputs, data.targets);
    auto scaled = net;
    Rng rng(63);
    for (auto& W : scaled.W)
        for (int i = 0; i < W.rows; ++i) scale(0.5 + 2.0 * rng.uniform01(), W.row(i));
    LossGrad b = loss_and_grad(scaled, data.inputs, data.targets);
    CHECK(b.loss == doctest::Approx(a.loss).epsilon(1e-12));
}
