#include "wn/diagnostics.hpp"

#include <charconv>
#include <sstream>

#include "wn/errors.hpp"

namespace wn {
namespace {

std::string fmt(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) throw FormatError("to_chars failed");
    return std::string(buf, p);
}

double parse_double(const std::string& cell, int lineno) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc() || p != cell.data() + cell.size())
        throw FormatError("csv line " + std::to_string(lineno) + ": bad number '" + cell + "'");
    return v;
}

int64_t parse_i64(const std::string& cell, int lineno) {
    int64_t v = 0;
    auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc() || p != cell.data() + cell.size())
        throw FormatError("csv line " + std::to_string(lineno) + ": bad integer '" + cell + "'");
    return v;
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> cells;
    size_t start = 0;
    while (true) {
        size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            cells.push_back(line.substr(start));
            break;
        }
        cells.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return cells;
}

}  // namespace

std::string emit_csv(const std::vector<DiagnosticsRecord>& records) {
    std::string out = kDiagnosticsHeader;
    out += '\n';
    for (const auto& r : records) {
        out += std::to_string(r.step);
        out += ',';
        out += std::to_string(r.epoch);
        out += ',';
        out += fmt(r.loss);
        out += ',';
        out += fmt(r.grad_ratio);
        out += ',';
        out += fmt(r.min_weight_norm);
        out += ',';
        if (r.loss_ratio) out += fmt(*r.loss_ratio);
        out += ',';
        out += fmt(r.alpha);
        out += ',';
        out += fmt(r.beta);
        out += ',';
        out += fmt(r.rate_bound);
        out += ',';
        out += fmt(r.eta);
        out += ',';
        out += r.bounds_ok ? "true" : "false";
        out += '\n';
    }
    return out;
}

std::vector<DiagnosticsRecord> parse_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw FormatError("csv: empty input");
    if (line != kDiagnosticsHeader)
        throw FormatError("csv: unexpected header '" + line + "'");
    std::vector<DiagnosticsRecord> out;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto cells = split(line);
        if (cells.size() != 11)
            throw FormatError("csv line " + std::to_string(lineno) + ": expected 11 fields, got " +
                              std::to_string(cells.size()));
        DiagnosticsRecord r;
        r.step = parse_i64(cells[0], lineno);
        r.epoch = static_cast<int>(parse_i64(cells[1], lineno));
        r.loss = parse_double(cells[2], lineno);
        r.grad_ratio = parse_double(cells[3], lineno);
        r.min_weight_norm = parse_double(cells[4], lineno);
        if (!cells[5].empty()) r.loss_ratio = parse_double(cells[5], lineno);
        r.alpha = parse_double(cells[6], lineno);
        r.beta = parse_double(cells[7], lineno);
        r.rate_bound = parse_double(cells[8], lineno);
        r.eta = parse_double(cells[9], lineno);
        if (cells[10] == "true") r.bounds_ok = true;
        else if (cells[10] == "false") r.bounds_ok = false;
        else throw FormatError("csv line " + std::to_string(lineno) + ": bad boolean '" + cells[10] + "'");
        out.push_back(r);
    }
    return out;
}

}  // namespace wn
