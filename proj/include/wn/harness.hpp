#pragma once

#include <string>
#include <vector>

#include "wn/bounds.hpp"
#include "wn/config.hpp"
#include "wn/dataset.hpp"
#include "wn/diagnostics.hpp"
#include "wn/rsc.hpp"

namespace wn {

struct ExperimentResult {
    std::vector<DiagnosticsRecord> records;
    NetworkParams final_params;
    BoundReport final_bounds;
    std::string csv;   // also written to out_csv when configured
    std::string json;  // also written to out_json when configured
};

/// Loads data, builds the network and trains; emits one diagnostics row for
/// the initial snapshot plus one per epoch. Deterministic given the config.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Dominance checks of every measured quantity against its closed-form
/// bound at the given parameters over (a sample of) the dataset. A
/// precomputed full-batch LossGrad can be passed to avoid a second pass.
bool dominance_ok(const NetworkParams& params, const Dataset& data, double rho1_config,
                  double rho2, int hessian_samples = 1, const LossGrad* precomputed = nullptr);

struct CheckResult {
    std::string name;
    bool passed = false;
    int64_t observations = 0;
    int64_t violations = 0;
    double worst_margin = 0.0;  // most adverse value seen; sign convention per check
    std::string note;
};

struct VerifyReport {
    std::vector<CheckResult> checks;
    bool all_passed = false;

    std::string to_text() const;
};

/// Gradient finite-difference agreement, bound dominance, RSC/smoothness
/// residual sampling and the loss-contraction rate check, all from fresh
/// seeded instances controlled by the config.
VerifyReport verify(const ExperimentConfig& config);

/// Closed-form bound report for a fresh network built from the config.
/// y_sq_mean comes from the configured dataset (1.0, the |y| <= 1 worst
/// case, when no dataset is loaded).
BoundReport bounds_report(const ExperimentConfig& config);
BoundReport bounds_report_at(const ExperimentConfig& config, const NetworkParams& params,
                             double y_sq_mean);

struct GenGapReport {
    double bound = 0.0;
    double gap = 0.0;
    double rademacher_lower = 0.0;
    int64_t n = 0;
    int L = 0;
    double rho1 = 0.0;
    double delta = 0.0;

    std::string to_json() const;
};

/// Trains a student on teacher data, then reports the train/held-out gap,
/// the closed-form generalization bound, and the Monte-Carlo Rademacher
/// lower estimate.
GenGapReport gen_gap(const ExperimentConfig& config);

/// Loads the dataset named by the config (IDX/CIFAR files from the resolved
/// data directory, or synthetic sources), truncated to n_train + n_heldout.
Dataset load_dataset(const ExperimentConfig& config);

/// Rescales every hidden row to the given norm. Forward outputs are
/// invariant under this, but the curvature bounds tighten as rows grow.
void set_row_norms(NetworkParams& params, double target_norm);

/// A least-squares-flavored instance whose restricted curvature coefficient
/// is positive at initialization: wide single hidden layer, long rows, and
/// targets from a teacher that shares the hidden weights with the student
/// but displaces v along the top principal direction of the features.
struct RscFavorableInstance {
    NetworkParams params;
    Dataset data;
    TrainConfig config;
};
RscFavorableInstance make_rsc_favorable_instance(uint64_t seed);

}  // namespace wn
