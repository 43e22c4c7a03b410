#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "wn/rsc.hpp"

namespace wn {

/// Flat key=value experiment configuration. '#' starts a comment; unknown
/// keys are rejected so typos surface instead of silently using defaults.
struct ExperimentConfig {
    // dataset
    std::string dataset = "synthetic-teacher";  // mnist | cifar10 | synthetic-teacher | synthetic-random
    std::string data_dir;                       // fallback: WNORM_DATA_DIR environment variable
    int n_train = 1024;
    int n_heldout = 0;
    int d = 16;          // synthetic sources only
    int teacher_m = 32;  // synthetic-teacher
    int teacher_L = 2;
    uint64_t teacher_seed = 7;

    // network
    int m = 64;
    int L = 2;
    std::string activation = "tanh";
    std::string init = "uniform";  // uniform | gaussian
    double init_scale = 0.5;
    double row_norm = 0.0;  // > 0: rescale every hidden row to this norm after init
    uint64_t seed = 1;

    // training
    std::string optimizer = "sgd";  // sgd | gd
    int batch_size = 512;
    int epochs = 20;
    double lr = 0.001;  // 0: use the omega/beta step rule
    double omega = 1.0;
    double kappa = 0.5;
    double rho1 = 0.1;
    double rho2 = 0.0;  // 0: set to 10 * eta * ||grad|| at the first step

    // outputs
    std::string out_csv;
    std::string out_json;

    // verify / gen-gap knobs
    double grad_tol = 1e-6;
    double residual_slack = 1e-8;
    bool corrupt_gradient = false;
    int verify_configs = 24;
    int verify_nets = 5;
    int verify_samples = 50;
    double delta = 0.1;
    int rademacher_sign_draws = 32;
    int rademacher_nets = 32;
    bool optimize_v = false;

    TrainConfig train_config() const;
    InitScheme init_scheme() const;
    std::string resolved_data_dir() const;
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

}  // namespace wn
