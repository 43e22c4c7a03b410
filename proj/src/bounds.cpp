#include "wn/bounds.hpp"

#include <cmath>

#include "json.hpp"
#include "wn/errors.hpp"

namespace wn {

void BoundInputs::validate() const {
    if (m < 1 || L < 1) throw DimensionError("BoundInputs: m and L must be >= 1");
    if (phi0 < 0 || beta_phi < 0 || rho1 < 0 || rho2 < 0 || y_sq_mean < 0)
        throw PreconditionError("BoundInputs: all fields must be nonnegative");
    if (minw <= 0) throw PreconditionError("BoundInputs: minw must be positive");
}

double layer_output_bound(int l, int m, double phi0) {
    return 1.0 + l * phi0 * std::sqrt(static_cast<double>(m));
}

double grad_theta_bound(const BoundInputs& in) {
    in.validate();
    double sqm = std::sqrt(static_cast<double>(in.m));
    double head = layer_output_bound(in.L, in.m, in.phi0);  // output-layer block
    double sum = 0.0;
    for (int l = 1; l <= in.L; ++l) {
        double a_l = 1.0 / sqm + (l - 1) * in.phi0;
        sum += a_l * a_l;
    }
    double hidden = 4.0 * (1.0 + in.rho1) * (1.0 + in.rho1) * sum / (in.minw * in.minw);
    return std::sqrt(head * head + hidden);
}

double grad_x_bound(const BoundInputs& in) {
    in.validate();
    return 1.0 + in.rho1;
}

double hessian_bound(const BoundInputs& in) {
    in.validate();
    double a = 1.0 / std::sqrt(static_cast<double>(in.m)) + in.L * in.phi0;
    double b = in.beta_phi;
    double hh = (1.0 + in.rho1) *
                (2.0 * (2.0 * b * a + 3.0) * a + 4.0 * a * (b * a + 1.0) + 4.0 * in.L * b * a * a) /
                (in.minw * in.minw);
    double hv = 2.0 * a / in.minw;
    return static_cast<double>(in.L) * in.L * hh + 2.0 * in.L * hv;
}

double predictor_output_bound(const BoundInputs& in) {
    in.validate();
    return (1.0 + in.rho1) * layer_output_bound(in.L, in.m, in.phi0);
}

double loss_bound_varphi(const BoundInputs& in) {
    in.validate();
    double f = predictor_output_bound(in);
    return 2.0 * in.y_sq_mean + 2.0 * f * f;
}

double loss_grad_bound(const BoundInputs& in) {
    return 2.0 * grad_theta_bound(in) * std::sqrt(loss_bound_varphi(in));
}

double loss_grad_bound_at(const BoundInputs& in, double loss) {
    if (loss < 0) throw PreconditionError("loss_grad_bound_at: loss must be nonnegative");
    return 2.0 * std::sqrt(loss) * grad_theta_bound(in);
}

BoundReport make_bound_report(const BoundInputs& in) {
    in.validate();
    BoundReport r;
    r.inputs = in;
    r.layer_output.resize(in.L + 1);
    for (int l = 0; l <= in.L; ++l) r.layer_output[l] = layer_output_bound(l, in.m, in.phi0);
    r.predictor_abs = predictor_output_bound(in);
    r.grad_theta_rho = grad_theta_bound(in);
    r.grad_x = grad_x_bound(in);
    r.hessian_spec = hessian_bound(in);
    r.loss_varphi = loss_bound_varphi(in);
    r.loss_grad = loss_grad_bound(in);
    return r;
}

std::string BoundReport::to_json() const {
    nlohmann::ordered_json j;
    j["m"] = inputs.m;
    j["L"] = inputs.L;
    j["phi0"] = inputs.phi0;
    j["beta_phi"] = inputs.beta_phi;
    j["rho1"] = inputs.rho1;
    j["rho2"] = inputs.rho2;
    j["minw"] = inputs.minw;
    j["y_sq_mean"] = inputs.y_sq_mean;
    j["layer_output"] = layer_output;
    j["predictor_abs"] = predictor_abs;
    j["grad_theta_rho"] = grad_theta_rho;
    j["grad_x"] = grad_x;
    j["hessian_spec"] = hessian_spec;
    j["loss_varphi"] = loss_varphi;
    j["loss_grad"] = loss_grad;
    return j.dump(2);
}

BoundInputs measured_bound_inputs(const NetworkParams& params, double rho1_config,
                                  double rho2, double y_sq_mean) {
    BoundInputs in;
    in.m = params.m();
    in.L = params.L();
    in.phi0 = std::fabs(params.activation.phi0);
    in.beta_phi = params.activation.beta_phi;
    in.rho1 = std::max(rho1_config, norm2(sub(params.v, params.v0)));
    in.rho2 = rho2;
    in.minw = min_weight_norm(params);
    in.y_sq_mean = y_sq_mean;
    return in;
}

}  // namespace wn
