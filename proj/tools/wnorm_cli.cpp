// Command line driver: train / verify / bounds / gen-gap, each taking a
// flat key=value config file.
#include <cstdio>
#include <exception>
#include <string>

#include "wn/harness.hpp"

namespace {

void usage() {
    std::fputs(
        "usage: wnorm <command> <config-file>\n"
        "\n"
        "commands:\n"
        "  train    train per the config; writes diagnostics CSV and a bound report JSON\n"
        "  verify   run gradient, dominance, curvature-residual and rate checks; exit 0 iff all pass\n"
        "  bounds   print the closed-form bound report for a fresh network from the config\n"
        "  gen-gap  train on teacher data and report generalization gap vs the closed-form bound\n"
        "\n"
        "The data directory for mnist/cifar10 comes from the config key data_dir\n"
        "or the WNORM_DATA_DIR environment variable.\n",
        stderr);
}

}  // namespace

int main(int argc, char** argv) {
    if (argc != 3) {
        usage();
        return 2;
    }
    std::string cmd = argv[1];
    try {
        wn::ExperimentConfig cfg = wn::parse_config_file(argv[2]);
        if (cmd == "train") {
            wn::ExperimentResult res = wn::run_experiment(cfg);
            if (cfg.out_csv.empty()) std::fputs(res.csv.c_str(), stdout);
            else std::printf("wrote %s (%zu rows)\n", cfg.out_csv.c_str(), res.records.size());
            if (!cfg.out_json.empty()) std::printf("wrote %s\n", cfg.out_json.c_str());
            return 0;
        }
        if (cmd == "verify") {
            wn::VerifyReport rep = wn::verify(cfg);
            std::fputs(rep.to_text().c_str(), stdout);
            return rep.all_passed ? 0 : 1;
        }
        if (cmd == "bounds") {
            wn::BoundReport rep = wn::bounds_report(cfg);
            std::string json = rep.to_json();
            if (!cfg.out_json.empty()) {
                std::FILE* f = std::fopen(cfg.out_json.c_str(), "wb");
                if (!f) {
                    std::fprintf(stderr, "error: cannot write %s\n", cfg.out_json.c_str());
                    return 1;
                }
                std::fwrite(json.data(), 1, json.size(), f);
                std::fclose(f);
                std::printf("wrote %s\n", cfg.out_json.c_str());
            } else {
                std::puts(json.c_str());
            }
            return 0;
        }
        if (cmd == "gen-gap") {
            wn::GenGapReport rep = wn::gen_gap(cfg);
            std::string json = rep.to_json();
            if (!cfg.out_json.empty()) {
                std::FILE* f = std::fopen(cfg.out_json.c_str(), "wb");
                if (!f) {
                    std::fprintf(stderr, "error: cannot write %s\n", cfg.out_json.c_str());
                    return 1;
                }
                std::fwrite(json.data(), 1, json.size(), f);
                std::fclose(f);
                std::printf("wrote %s\n", cfg.out_json.c_str());
            } else {
                std::puts(json.c_str());
            }
            return 0;
        }
        usage();
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
