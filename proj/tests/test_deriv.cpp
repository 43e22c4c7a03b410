#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "support/oracles.hpp"
#include "wn/deriv.hpp"
#include "wn/errors.hpp"

using namespace wn;
using wn::testing::rel_err_vec;

namespace {

NetworkParams sample_net(int d, int m, int L, bool gelu, uint64_t seed, double scale = 1.0) {
    auto act = gelu ? ActivationSpec::gelu() : ActivationSpec::tanh();
    return make_network(d, m, L, act, InitScheme::uniform(scale), seed);
}

}  // namespace

TEST_CASE("analytic theta-gradient matches central differences") {
    Rng rng(2024);
    for (int k = 0; k < 12; ++k) {
        int m = std::vector<int>{4, 8, 16}[k % 3];
        int L = 1 + k % 3;
        auto net = sample_net(5, m, L, k % 2 == 1, 100 + k);
        auto x = random_unit_vector(5, rng);
        auto analytic = grad_theta(net, x).flatten();
        auto fd = fd_grad_oracle(
            [&](std::span<const double> th) { return forward_at(unflatten(th, net), x).output; },
            flatten(net), 1e-5);
        CHECK(rel_err_vec(analytic, fd) <= 1e-6);
    }
}

TEST_CASE("analytic input-gradient matches central differences and its bound") {
    Rng rng(2025);
    for (int k = 0; k < 8; ++k) {
        auto net = sample_net(6, 8, 2, k % 2 == 0, 200 + k);
        auto dir = random_unit_vector(net.m(), rng);
        axpy(0.2, dir, net.v);  // nonzero rho1
        double rho1 = norm2(sub(net.v, net.v0));
        auto x = random_unit_vector(6, rng);
        auto analytic = grad_x(net, x);
        auto fd = fd_grad_oracle(
            [&](std::span<const double> xx) { return forward_at(net, xx).output; }, x, 1e-5);
        CHECK(rel_err_vec(analytic, fd) <= 1e-6);
        CHECK(norm2(analytic) <= 1.0 + rho1 + 1e-12);
    }
}

TEST_CASE("scalar net input-gradient equals the activation slope") {
    NetworkParams p;
    p.dims = {1, 1, 1};
    p.activation = ActivationSpec::tanh();
    p.W.emplace_back(1, 1);
    p.W[0](0, 0) = 4.2;
    p.v = {1.0};
    p.v0 = {1.0};
    std::vector<double> x = {1.0};
    auto g = grad_x(p, x);
    double t = std::tanh(1.0);
    CHECK(g[0] == doctest::Approx(1.0 - t * t).epsilon(1e-14));
    CHECK(std::fabs(g[0]) <= 1.0);
}

TEST_CASE("theta-gradient is orthogonal to every row") {
    Rng rng(31337);
    for (int k = 0; k < 6; ++k) {
        auto net = sample_net(5, 8, 3, k % 2 == 1, 300 + k);
        auto x = random_unit_vector(5, rng);
        GradTheta g = grad_theta(net, x);
        for (int l = 0; l < net.L(); ++l)
            for (int i = 0; i < net.m(); ++i) {
                double ip = dot(g.dW[l].row(i), net.W[l].row(i));
                double cap = 1e-10 * std::max(1e-30, norm2(g.dW[l].row(i)) * norm2(net.W[l].row(i)));
                CHECK(std::fabs(ip) <= cap);
            }
    }
}

TEST_CASE("zero pre-activations with phi(0)=0 kill the deeper gradients") {
    auto net = sample_net(4, 6, 3, false, 404);
    for (int i = 0; i < net.W[0].rows; ++i) net.W[0](i, 0) = 0.0;
    std::vector<double> x = {1.0, 0.0, 0.0, 0.0};
    GradTheta g = grad_theta(net, x);
    auto fd = fd_grad_oracle(
        [&](std::span<const double> th) { return forward_at(unflatten(th, net), x).output; },
        flatten(net), 1e-5);
    auto analytic = g.flatten();
    for (size_t i = 0; i < analytic.size(); ++i) CHECK(analytic[i] == doctest::Approx(fd[i]).epsilon(1e-6));
    // alpha^(1) = 0, so layers >= 2 see a zero input and phi'(0) chains
    // survive only through the direct row terms; the v block is exactly 0
    for (double dv : g.dv) CHECK(dv == 0.0);
}

TEST_CASE("loss_and_grad basics") {
    auto net = sample_net(4, 6, 2, false, 77);
    Rng rng(9);
    Matrix X(3, 4);
    std::vector<double> y(3);
    for (int i = 0; i < 3; ++i) {
        auto x = random_unit_vector(4, rng);
        std::copy(x.begin(), x.end(), X.row(i).begin());
        y[i] = forward(net, X.row(i)).output;  // interpolating batch
    }
    LossGrad lg = loss_and_grad(net, X, y);
    CHECK(lg.loss == 0.0);
    CHECK(lg.grad_norm() == 0.0);

    // perturbed targets: gradient matches FD of the loss
    for (auto& t : y) t += 0.3;
    lg = loss_and_grad(net, X, y);
    CHECK(lg.loss == doctest::Approx(0.09).epsilon(1e-12));
    auto fd = fd_grad_oracle(
        [&](std::span<const double> th) { return loss_only(unflatten(th, net), X, y); },
        flatten(net), 1e-5);
    CHECK(rel_err_vec(lg.grad, fd) <= 1e-6);

    Matrix empty(0, 4);
    CHECK_THROWS_AS(loss_and_grad(net, empty, std::vector<double>{}), DimensionError);
}

TEST_CASE("fd_grad_oracle is exact on polynomials") {
    std::vector<double> theta = {1.0, -2.0, 0.5};
    auto quad = [](std::span<const double> t) {
        return 3.0 * t[0] * t[0] - 2.0 * t[1] * t[1] + t[2] * t[2] + t[0] * t[1];
    };
    auto g = fd_grad_oracle(quad, theta, 1e-4);
    CHECK(g[0] == doctest::Approx(6.0 * theta[0] + theta[1]).epsilon(1e-9));
    CHECK(g[1] == doctest::Approx(-4.0 * theta[1] + theta[0]).epsilon(1e-9));
    CHECK(g[2] == doctest::Approx(2.0 * theta[2]).epsilon(1e-9));

    auto lin = [](std::span<const double> t) { return 2.0 * t[0] - 7.0 * t[1] + 0.25 * t[2]; };
    auto gl = fd_grad_oracle(lin, theta, 1e-3);
    CHECK(gl[0] == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(gl[1] == doctest::Approx(-7.0).epsilon(1e-10));
    CHECK(gl[2] == doctest::Approx(0.25).epsilon(1e-10));

    CHECK_THROWS_AS(fd_grad_oracle(lin, theta, 0.0), PreconditionError);
}

TEST_CASE("hvp symmetry, linearity and edge cases") {
    auto net = sample_net(4, 5, 2, false, 555);
    Rng rng(12);
    auto x = random_unit_vector(4, rng);
    const auto p = static_cast<size_t>(net.theta_size());
    auto u = random_unit_vector(static_cast<int>(p), rng);
    auto w = random_unit_vector(static_cast<int>(p), rng);

    auto Hu = hvp(net, x, u);
    auto Hw = hvp(net, x, w);
    CHECK(dot(w, Hu) == doctest::Approx(dot(u, Hw)).epsilon(1e-5));

    // linearity within FD tolerance
    std::vector<double> uw(p);
    for (size_t i = 0; i < p; ++i) uw[i] = 2.0 * u[i] + 0.5 * w[i];
    auto Huw = hvp(net, x, uw, 1e-5);
    auto Hu5 = hvp(net, x, u, 1e-5);
    auto Hw5 = hvp(net, x, w, 1e-5);
    for (size_t i = 0; i < p; ++i)
        CHECK(Huw[i] == doctest::Approx(2.0 * Hu5[i] + 0.5 * Hw5[i]).epsilon(2e-5).scale(1.0));

    std::vector<double> zero(p, 0.0);
    auto Hz = hvp(net, x, zero);
    for (double v : Hz) CHECK(v == 0.0);
    CHECK_THROWS_AS(hvp(net, x, u, -1.0), PreconditionError);
}

TEST_CASE("radial curvature is captured against the dense oracle") {
    auto net = sample_net(3, 4, 2, false, 808);
    Rng rng(21);
    auto x = random_unit_vector(3, rng);
    Matrix H = wn::testing::dense_fd_hessian(net, x);
    // direction along row 0 of layer 1 (radial): quadratic form from the
    // normalization curvature, cross-checked entrywise against dense FD
    std::vector<double> u(static_cast<size_t>(net.theta_size()), 0.0);
    auto r0 = net.W[0].row(0);
    for (int j = 0; j < 3; ++j) u[j] = r0[j] / norm2(r0);
    auto Hu = hvp(net, x, u);
    std::vector<double> dense(u.size(), 0.0);
    for (int i = 0; i < H.rows; ++i) dense[i] = dot(H.row(i), u);
    for (size_t i = 0; i < u.size(); ++i)
        CHECK(Hu[i] == doctest::Approx(dense[i]).epsilon(1e-4).scale(1.0));
}

TEST_CASE("power iteration agrees with the dense eigendecomposition") {
    for (int k = 0; k < 4; ++k) {
        auto net = sample_net(3, 4, 2, k % 2 == 1, 900 + k, 1.5);
        Rng rng(50 + k);
        auto x = random_unit_vector(3, rng);
        double dense_top = wn::testing::top_abs_eigenvalue(wn::testing::dense_fd_hessian(net, x));
        auto est = hessian_spectral_norm(net, x, 1e-7, 2000, 3 + k);
        CHECK(est.converged);
        CHECK(est.value == doctest::Approx(dense_top).epsilon(1e-3));
    }
}

TEST_CASE("dense FD-of-gradient Hessian agrees with pure second differences") {
    auto net = sample_net(3, 3, 1, false, 1234);
    Rng rng(3);
    auto x = random_unit_vector(3, rng);
    Matrix A = wn::testing::dense_fd_hessian(net, x);
    Matrix B = wn::testing::dense_fd2_hessian(net, x);
    for (int i = 0; i < A.rows; ++i)
        for (int j = 0; j < A.cols; ++j)
            CHECK(A(i, j) == doctest::Approx(B(i, j)).epsilon(1e-4).scale(1.0));
}

TEST_CASE("power iteration reports non-convergence with its last estimate") {
    auto net = sample_net(4, 6, 2, false, 99);
    Rng rng(7);
    auto x = random_unit_vector(4, rng);
    auto r = hessian_spectral_norm(net, x, 1e-12, 1, 3);
    CHECK(!r.converged);
    CHECK(r.value > 0.0);
    CHECK(r.iterations == 1);
    CHECK_THROWS_AS(hessian_spectral_norm(net, x, -1.0, 10, 3), PreconditionError);
}

TEST_CASE("sign-flip-invariant network has zero Hessian") {
    // identity activation, one unit per layer: f = sign(w1...wL) * x, which
    // is locally constant in every weight, so the Hessian vanishes
    auto ident = ActivationSpec::custom(
        "identity", [](double z) { return z; }, [](double) { return 1.0; },
        [](double) { return 0.0; }, 0.0);
    NetworkParams p;
    p.dims = {1, 1, 3};
    p.activation = ident;
    for (int l = 0; l < 3; ++l) {
        p.W.emplace_back(1, 1);
        p.W[l](0, 0) = 0.5 + l;
    }
    p.v = {0.8};
    p.v0 = {1.0};
    std::vector<double> x = {1.0};
    CHECK(forward(p, x).output == doctest::Approx(0.8).epsilon(1e-15));
    auto est = hessian_spectral_norm(p, x, 1e-6, 200, 5);
    CHECK(est.value <= 1e-8);
}

TEST_CASE("layer jacobians: explicit matrix, unit bound, chain rule") {
    Rng rng(60);
    for (int k = 0; k < 6; ++k) {
        auto net = sample_net(5, 7, 3, k % 2 == 0, 1500 + k, 2.0);
        auto x = random_unit_vector(5, rng);
        for (int l = 1; l <= 3; ++l) {
            Matrix J = layer_jacobian(net, x, l);
            CHECK(J.rows == 7);
            CHECK(J.cols == (l == 1 ? 5 : 7));
            CHECK(wn::testing::dense_spectral_norm(J) <= 1.0 + 1e-12);
        }
        // product of transposed jacobians applied to v equals grad_x, and
        // every intermediate df/dalpha^(l) keeps norm <= ||v|| <= 1 + rho1
        double rho1 = norm2(sub(net.v, net.v0));
        std::vector<double> g = net.v;
        for (int l = 3; l >= 1; --l) {
            CHECK(norm2(g) <= 1.0 + rho1 + 1e-12);
            Matrix J = layer_jacobian(net, x, l);
            std::vector<double> prev(J.cols, 0.0);
            for (int i = 0; i < J.rows; ++i) axpy(g[i], J.row(i), prev);
            g = std::move(prev);
        }
        auto gx = grad_x(net, x);
        CHECK(rel_err_vec(g, gx) <= 1e-12);
    }
}

TEST_CASE("layer jacobian is zero where the activation slope vanishes") {
    auto flat = ActivationSpec::custom(
        "cos-dip", [](double z) { return std::cos(z) - 1.0; },
        [](double z) { return -std::sin(z); }, [](double z) { return -std::cos(z); }, 1.0);
    auto net = make_network(4, 5, 2, flat, InitScheme::uniform(1), 2);
    for (int i = 0; i < net.W[0].rows; ++i) net.W[0](i, 0) = 0.0;
    std::vector<double> x = {1.0, 0.0, 0.0, 0.0};
    Matrix J = layer_jacobian(net, x, 1);  // preacts are all 0, phi'(0) = 0
    for (double v : J.data) CHECK(v == 0.0);
}
