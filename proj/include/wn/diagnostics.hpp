#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace wn {

/// One row of training diagnostics. loss_ratio is empty on the first row.
struct DiagnosticsRecord {
    int64_t step = 0;
    int epoch = 0;
    double loss = 0.0;
    double grad_ratio = 0.0;       // ||grad L||^2 / L, full batch
    double min_weight_norm = 0.0;
    std::optional<double> loss_ratio;  // L_t / L_{t-1}
    double alpha = 0.0;
    double beta = 0.0;
    double rate_bound = 0.0;
    double eta = 0.0;
    bool bounds_ok = false;

    bool operator==(const DiagnosticsRecord&) const = default;
};

inline constexpr const char* kDiagnosticsHeader =
    "step,epoch,loss,grad_ratio,min_weight_norm,loss_ratio,alpha,beta,rate_bound,eta,bounds_ok";

/// Locale-independent CSV ('.' decimals, '\n' newlines, shortest
/// round-trippable float representation).
std::string emit_csv(const std::vector<DiagnosticsRecord>& records);

/// Inverse of emit_csv; throws FormatError on any malformed cell.
std::vector<DiagnosticsRecord> parse_csv(const std::string& text);

}  // namespace wn
