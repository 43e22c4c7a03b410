"""Weight-normalized networks: exact derivatives, curvature bounds, training diagnostics."""

from ._core import (  # noqa: F401
    ActivationSpec,
    BoundInputs,
    ForwardTrace,
    InitScheme,
    NetworkParams,
    alpha_theta,
    beta_theta,
    bound_report_json,
    flatten,
    forward,
    generalization_bound,
    grad_theta,
    grad_theta_bound,
    grad_x,
    grad_x_bound,
    hessian_bound,
    hessian_spectral_norm,
    hvp,
    layer_output_bound,
    loss_and_grad,
    loss_bound_varphi,
    loss_grad_bound,
    make_network,
    measured_bound_inputs,
    min_weight_norm,
    predictor_output_bound,
    rademacher_bound,
    rate_bound,
    run_experiment_text,
    unflatten,
    verify_text,
)

__all__ = [name for name in dir() if not name.startswith("_")]
