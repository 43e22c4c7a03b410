#include "wn/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "wn/errors.hpp"

namespace wn {
namespace {

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': cannot parse '" + v + "' as a number");
    }
}

int64_t to_int(const std::string& key, const std::string& v) {
    int64_t x = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc() || p != v.data() + v.size())
        throw ConfigError("config key '" + key + "': cannot parse '" + v + "' as an integer");
    return x;
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("config key '" + key + "': cannot parse '" + v + "' as a boolean");
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig c;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (key.empty() || val.empty())
            throw ConfigError("config line " + std::to_string(lineno) + ": empty key or value");

        if (key == "dataset") c.dataset = val;
        else if (key == "data_dir") c.data_dir = val;
        else if (key == "n_train") c.n_train = static_cast<int>(to_int(key, val));
        else if (key == "n_heldout") c.n_heldout = static_cast<int>(to_int(key, val));
        else if (key == "d") c.d = static_cast<int>(to_int(key, val));
        else if (key == "teacher_m") c.teacher_m = static_cast<int>(to_int(key, val));
        else if (key == "teacher_L") c.teacher_L = static_cast<int>(to_int(key, val));
        else if (key == "teacher_seed") c.teacher_seed = static_cast<uint64_t>(to_int(key, val));
        else if (key == "m") c.m = static_cast<int>(to_int(key, val));
        else if (key == "L") c.L = static_cast<int>(to_int(key, val));
        else if (key == "activation") c.activation = val;
        else if (key == "init") c.init = val;
        else if (key == "init_scale") c.init_scale = to_double(key, val);
        else if (key == "row_norm") c.row_norm = to_double(key, val);
        else if (key == "seed") c.seed = static_cast<uint64_t>(to_int(key, val));
        else if (key == "optimizer") c.optimizer = val;
        else if (key == "batch_size") c.batch_size = static_cast<int>(to_int(key, val));
        else if (key == "epochs") c.epochs = static_cast<int>(to_int(key, val));
        else if (key == "lr") c.lr = to_double(key, val);
        else if (key == "omega") c.omega = to_double(key, val);
        else if (key == "kappa") c.kappa = to_double(key, val);
        else if (key == "rho1") c.rho1 = to_double(key, val);
        else if (key == "rho2") c.rho2 = to_double(key, val);
        else if (key == "out_csv") c.out_csv = val;
        else if (key == "out_json") c.out_json = val;
        else if (key == "grad_tol") c.grad_tol = to_double(key, val);
        else if (key == "residual_slack") c.residual_slack = to_double(key, val);
        else if (key == "corrupt_gradient") c.corrupt_gradient = to_bool(key, val);
        else if (key == "verify_configs") c.verify_configs = static_cast<int>(to_int(key, val));
        else if (key == "verify_nets") c.verify_nets = static_cast<int>(to_int(key, val));
        else if (key == "verify_samples") c.verify_samples = static_cast<int>(to_int(key, val));
        else if (key == "delta") c.delta = to_double(key, val);
        else if (key == "rademacher_sign_draws") c.rademacher_sign_draws = static_cast<int>(to_int(key, val));
        else if (key == "rademacher_nets") c.rademacher_nets = static_cast<int>(to_int(key, val));
        else if (key == "optimize_v") c.optimize_v = to_bool(key, val);
        else throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }

    if (c.dataset != "mnist" && c.dataset != "cifar10" && c.dataset != "synthetic-teacher" &&
        c.dataset != "synthetic-random")
        throw ConfigError("config: unknown dataset '" + c.dataset + "'");
    if (c.optimizer != "sgd" && c.optimizer != "gd")
        throw ConfigError("config: unknown optimizer '" + c.optimizer + "'");
    if (c.init != "uniform" && c.init != "gaussian")
        throw ConfigError("config: unknown init '" + c.init + "'");
    return c;
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_config_text(ss.str());
}

TrainConfig ExperimentConfig::train_config() const {
    TrainConfig t;
    t.omega = omega;
    t.kappa = kappa;
    t.rho1 = rho1;
    t.rho2 = rho2;
    t.batch_size = batch_size;
    t.epochs = epochs;
    t.optimizer = optimizer == "gd" ? Optimizer::Gd : Optimizer::Sgd;
    t.fixed_lr = lr;
    t.seed = seed;
    t.validate();
    return t;
}

InitScheme ExperimentConfig::init_scheme() const {
    return init == "gaussian" ? InitScheme::gaussian(init_scale) : InitScheme::uniform(init_scale);
}

std::string ExperimentConfig::resolved_data_dir() const {
    if (!data_dir.empty()) return data_dir;
    if (const char* env = std::getenv("WNORM_DATA_DIR")) return env;
    return ".";
}

}  // namespace wn
