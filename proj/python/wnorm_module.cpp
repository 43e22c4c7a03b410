#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "wn/deriv.hpp"
#include "wn/gen_bound.hpp"
#include "wn/harness.hpp"

namespace py = pybind11;
using namespace wn;

namespace {

Matrix to_matrix(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) return Matrix(0, 0);
    Matrix M(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
    for (int i = 0; i < M.rows; ++i) {
        if (static_cast<int>(rows[i].size()) != M.cols)
            throw DimensionError("ragged input matrix");
        std::copy(rows[i].begin(), rows[i].end(), M.row(i).begin());
    }
    return M;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Weight-normalized networks: derivatives, curvature bounds, training diagnostics";

    py::class_<ActivationSpec>(m, "ActivationSpec")
        .def_static("tanh", &ActivationSpec::tanh)
        .def_static("gelu", &ActivationSpec::gelu)
        .def_static("by_name", &ActivationSpec::by_name)
        .def_readonly("name", &ActivationSpec::name)
        .def_readonly("phi0", &ActivationSpec::phi0)
        .def_readonly("beta_phi", &ActivationSpec::beta_phi)
        .def_readonly("lipschitz", &ActivationSpec::lipschitz)
        .def("eval", [](const ActivationSpec& a, double z) { return a.eval(z); })
        .def("deriv1", [](const ActivationSpec& a, double z) { return a.deriv1(z); })
        .def("deriv2", [](const ActivationSpec& a, double z) { return a.deriv2(z); });

    py::class_<InitScheme>(m, "InitScheme")
        .def_static("uniform", &InitScheme::uniform, py::arg("scale"))
        .def_static("gaussian", &InitScheme::gaussian, py::arg("sigma"));

    py::class_<ForwardTrace>(m, "ForwardTrace")
        .def_readonly("x", &ForwardTrace::x)
        .def_readonly("preacts", &ForwardTrace::preacts)
        .def_readonly("acts", &ForwardTrace::acts)
        .def_readonly("output", &ForwardTrace::output);

    py::class_<NetworkParams>(m, "NetworkParams")
        .def_property_readonly("d", &NetworkParams::d)
        .def_property_readonly("m", &NetworkParams::m)
        .def_property_readonly("L", &NetworkParams::L)
        .def_property_readonly("theta_size", &NetworkParams::theta_size)
        .def_readonly("v", &NetworkParams::v)
        .def_readonly("v0", &NetworkParams::v0)
        .def_readonly("activation", &NetworkParams::activation);

    m.def("make_network", &make_network, py::arg("d"), py::arg("m"), py::arg("L"),
          py::arg("activation"), py::arg("init"), py::arg("seed"));
    m.def("forward", [](const NetworkParams& p, const std::vector<double>& x) { return forward(p, x); });
    m.def("min_weight_norm", &min_weight_norm);
    m.def("flatten", &flatten);
    m.def("unflatten",
          [](const std::vector<double>& theta, const NetworkParams& like) { return unflatten(theta, like); });

    m.def("grad_theta",
          [](const NetworkParams& p, const std::vector<double>& x) { return grad_theta(p, x).flatten(); });
    m.def("grad_x", [](const NetworkParams& p, const std::vector<double>& x) { return grad_x(p, x); });
    m.def("loss_and_grad",
          [](const NetworkParams& p, const std::vector<std::vector<double>>& X,
             const std::vector<double>& y) {
              LossGrad lg = loss_and_grad(p, to_matrix(X), y);
              return py::make_tuple(lg.loss, lg.grad);
          });
    m.def("hvp",
          [](const NetworkParams& p, const std::vector<double>& x, const std::vector<double>& u) {
              return hvp(p, x, u);
          });
    m.def("hessian_spectral_norm",
          [](const NetworkParams& p, const std::vector<double>& x, double tol, int max_iter,
             uint64_t seed) {
              auto r = hessian_spectral_norm(p, x, tol, max_iter, seed);
              return py::make_tuple(r.value, r.converged, r.iterations);
          },
          py::arg("params"), py::arg("x"), py::arg("tol") = 1e-6, py::arg("max_iter") = 1000,
          py::arg("seed") = 0);

    py::class_<BoundInputs>(m, "BoundInputs")
        .def(py::init<>())
        .def_readwrite("m", &BoundInputs::m)
        .def_readwrite("L", &BoundInputs::L)
        .def_readwrite("phi0", &BoundInputs::phi0)
        .def_readwrite("beta_phi", &BoundInputs::beta_phi)
        .def_readwrite("rho1", &BoundInputs::rho1)
        .def_readwrite("rho2", &BoundInputs::rho2)
        .def_readwrite("minw", &BoundInputs::minw)
        .def_readwrite("y_sq_mean", &BoundInputs::y_sq_mean);

    m.def("layer_output_bound", &layer_output_bound);
    m.def("grad_theta_bound", &grad_theta_bound);
    m.def("grad_x_bound", &grad_x_bound);
    m.def("hessian_bound", &hessian_bound);
    m.def("predictor_output_bound", &predictor_output_bound);
    m.def("loss_bound_varphi", &loss_bound_varphi);
    m.def("loss_grad_bound", &loss_grad_bound);
    m.def("measured_bound_inputs", &measured_bound_inputs, py::arg("params"),
          py::arg("rho1_config"), py::arg("rho2"), py::arg("y_sq_mean"));
    m.def("bound_report_json",
          [](const BoundInputs& in) { return make_bound_report(in).to_json(); });

    m.def("alpha_theta", &alpha_theta, py::arg("loss"), py::arg("grad_norm_sq"), py::arg("kappa"),
          py::arg("inputs"));
    m.def("beta_theta", &beta_theta);
    m.def("rate_bound", &rate_bound, py::arg("alpha"), py::arg("beta"), py::arg("omega"),
          py::arg("gamma"));

    m.def("generalization_bound", [](double rho1, int L, int64_t n, double delta, double phi0) {
        return generalization_bound(GenInputs{rho1, L, n, delta, phi0});
    }, py::arg("rho1"), py::arg("L"), py::arg("n"), py::arg("delta"), py::arg("phi0") = 0.0);
    m.def("rademacher_bound", &rademacher_bound);

    m.def("run_experiment_text", [](const std::string& config_text) {
        ExperimentResult r = run_experiment(parse_config_text(config_text));
        return py::make_tuple(r.csv, r.json);
    });
    m.def("verify_text", [](const std::string& config_text) {
        VerifyReport r = verify(parse_config_text(config_text));
        return py::make_tuple(r.to_text(), r.all_passed);
    });
}
