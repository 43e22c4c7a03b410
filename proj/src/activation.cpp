#include "wn/activation.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

#include "wn/errors.hpp"

namespace wn {
namespace {

double gauss_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI); }
double gauss_cdf(double z) { return 0.5 * (1.0 + std::erf(z / std::sqrt(2.0))); }

double gelu_raw(double z) { return z * gauss_cdf(z); }
double gelu_raw_d1(double z) { return gauss_cdf(z) + z * gauss_pdf(z); }
double gelu_raw_d2(double z) { return gauss_pdf(z) * (2.0 - z * z); }

/// Maximize |f| over [lo, hi]: coarse grid followed by golden-section
/// refinement around the best cell.
double max_abs_on(const std::function<double(double)>& f, double lo, double hi, int grid = 4001) {
    double best_x = lo, best = 0.0;
    for (int i = 0; i < grid; ++i) {
        double x = lo + (hi - lo) * i / (grid - 1);
        double v = std::fabs(f(x));
        if (v > best) {
            best = v;
            best_x = x;
        }
    }
    double step = (hi - lo) / (grid - 1);
    double a = std::max(lo, best_x - step), b = std::min(hi, best_x + step);
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - gr * (b - a), d = a + gr * (b - a);
    for (int it = 0; it < 200; ++it) {
        if (std::fabs(f(c)) > std::fabs(f(d))) b = d; else a = c;
        c = b - gr * (b - a);
        d = a + gr * (b - a);
    }
    double x = 0.5 * (a + b);
    return std::max(best, std::fabs(f(x)));
}

}  // namespace

ActivationSpec ActivationSpec::tanh() {
    ActivationSpec s;
    s.name = "tanh";
    s.eval = [](double z) { return std::tanh(z); };
    s.deriv1 = [](double z) {
        double t = std::tanh(z);
        return 1.0 - t * t;
    };
    s.deriv2 = [](double z) {
        double t = std::tanh(z);
        return -2.0 * t * (1.0 - t * t);
    };
    s.phi0 = 0.0;
    // max of |2t(1-t^2)| over t in (-1,1) is at t = 1/sqrt(3)
    s.beta_phi = 4.0 / (3.0 * std::sqrt(3.0));
    s.lipschitz = 1.0;
    return s;
}

ActivationSpec ActivationSpec::gelu() {
    static const double slope_max = max_abs_on(gelu_raw_d1, -20.0, 20.0);
    static const double curv_max = max_abs_on(gelu_raw_d2, -20.0, 20.0);
    ActivationSpec s;
    s.name = "gelu";
    const double c = slope_max;
    s.eval = [c](double z) { return gelu_raw(z) / c; };
    s.deriv1 = [c](double z) { return gelu_raw_d1(z) / c; };
    s.deriv2 = [c](double z) { return gelu_raw_d2(z) / c; };
    s.phi0 = 0.0;
    s.beta_phi = curv_max / c;
    s.lipschitz = 1.0;
    return s;
}

ActivationSpec ActivationSpec::custom(std::string name,
                                      std::function<double(double)> eval,
                                      std::function<double(double)> deriv1,
                                      std::function<double(double)> deriv2,
                                      double beta_phi,
                                      double lipschitz) {
    ActivationSpec s;
    s.name = std::move(name);
    s.eval = std::move(eval);
    s.deriv1 = std::move(deriv1);
    s.deriv2 = std::move(deriv2);
    s.phi0 = s.eval(0.0);
    s.beta_phi = beta_phi;
    s.lipschitz = lipschitz;
    if (lipschitz > 1.0) throw PreconditionError("custom activation: lipschitz constant must be <= 1");
    if (beta_phi < 0.0) throw PreconditionError("custom activation: beta_phi must be >= 0");
    // Spot-check the declared constants on a coarse grid.
    for (int i = 0; i <= 200; ++i) {
        double z = -5.0 + 10.0 * i / 200.0;
        if (std::fabs(s.deriv1(z)) > lipschitz + 1e-9)
            throw PreconditionError("custom activation: |deriv1| exceeds declared lipschitz at z=" + std::to_string(z));
        if (std::fabs(s.deriv2(z)) > beta_phi + 1e-9)
            throw PreconditionError("custom activation: |deriv2| exceeds declared beta_phi at z=" + std::to_string(z));
    }
    if (activation_fd_error(s, -3.0, 3.0, 121) > 1e-6)
        throw PreconditionError("custom activation: derivatives disagree with finite differences");
    return s;
}

ActivationSpec ActivationSpec::by_name(const std::string& name) {
    if (name == "tanh") return tanh();
    if (name == "gelu") return gelu();
    throw ConfigError("unknown activation: " + name);
}

double activation_fd_error(const ActivationSpec& act, double lo, double hi, int samples) {
    const double h = 1e-5;
    double worst = 0.0;
    for (int i = 0; i < samples; ++i) {
        double z = lo + (hi - lo) * i / (samples - 1);
        double fd1 = (act.eval(z + h) - act.eval(z - h)) / (2.0 * h);
        double fd2 = (act.deriv1(z + h) - act.deriv1(z - h)) / (2.0 * h);
        double e1 = std::fabs(fd1 - act.deriv1(z)) / std::max(1.0, std::fabs(act.deriv1(z)));
        double e2 = std::fabs(fd2 - act.deriv2(z)) / std::max(1.0, std::fabs(act.deriv2(z)));
        worst = std::max({worst, e1, e2});
    }
    return worst;
}

}  // namespace wn
