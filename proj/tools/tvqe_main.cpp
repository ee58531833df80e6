// Command-line front end.
//
//   tvqe estimate --obs observations.json
//   tvqe montecarlo --config scenario.json --out report.json
//   tvqe validate-covariance --config scenario.json
//
// Exit codes: 0 ok / validation passed, 1 validation failed, 2 input error,
// 3 numerical failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "tvqe/error.hpp"
#include "tvqe/report.hpp"

namespace {

struct CommonFlags {
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> trials;
    std::optional<double> sigma;
    std::optional<std::string> format;
    int threads = 0;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--seed", f.seed, "override the scenario seed");
    cmd->add_option("--trials", f.trials, "override the trial count");
    cmd->add_option("--sigma", f.sigma, "override the noise standard deviation");
    cmd->add_option("--format", f.format, "report format: json or csv");
    cmd->add_option("--threads", f.threads, "worker threads (0 = library default)");
}

void apply_common(tvqe::ScenarioConfig& cfg, const CommonFlags& f) {
    if (f.seed) cfg.seed = *f.seed;
    if (f.trials) cfg.trials = *f.trials;
    if (f.sigma) {
        if (cfg.noise.kind == tvqe::NoiseModel::Kind::general)
            throw tvqe::Error(tvqe::ErrorCode::invalid_config,
                              "--sigma applies to isotropic/tangent-plane noise only");
        cfg.noise.sigma = *f.sigma;
    }
    if (f.format) {
        if (*f.format != "json" && *f.format != "csv")
            throw tvqe::Error(tvqe::ErrorCode::invalid_config, "--format must be json or csv");
        cfg.format = *f.format;
    }
}

int exit_code_for(const tvqe::Error& e) {
    switch (e.code()) {
        case tvqe::ErrorCode::invalid_config:
        case tvqe::ErrorCode::io_error:
        case tvqe::ErrorCode::not_unit:
            return 2;
        default:
            return 3;
    }
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw tvqe::Error(tvqe::ErrorCode::io_error, "cannot write " + path);
    out << text;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"two-vector quaternion attitude estimation and error analysis"};
    app.require_subcommand(1);

    std::string obs_path;
    CLI::App* estimate_cmd = app.add_subcommand("estimate", "estimate attitude from one observation pair");
    estimate_cmd->add_option("--obs", obs_path, "observation JSON file")->required();

    std::string mc_config, mc_out;
    CommonFlags mc_flags;
    CLI::App* mc_cmd = app.add_subcommand("montecarlo", "run a scenario and write the validation report");
    mc_cmd->add_option("--config", mc_config, "scenario JSON file")->required();
    mc_cmd->add_option("--out", mc_out, "report output path");
    add_common(mc_cmd, mc_flags);

    std::string vc_config;
    CommonFlags vc_flags;
    CLI::App* vc_cmd = app.add_subcommand("validate-covariance",
                                          "run a scenario; exit 0 iff all checks pass");
    vc_cmd->add_option("--config", vc_config, "scenario JSON file")->required();
    add_common(vc_cmd, vc_flags);

    CLI11_PARSE(app, argc, argv);

    try {
        if (estimate_cmd->parsed()) {
            const auto [vm1, vm2] = tvqe::observations_from_json_file(obs_path);
            const tvqe::EstimateResult res = tvqe::estimate(vm1, vm2);
            std::cout << tvqe::estimate_result_to_json_text(res) << "\n";
            return 0;
        }
        if (mc_cmd->parsed()) {
            auto [cfg, checks] = tvqe::scenario_and_checks_from_json_file(mc_config);
            apply_common(cfg, mc_flags);
            if (!mc_out.empty()) cfg.out_path = mc_out;
            const tvqe::ValidationReport report = tvqe::validate(cfg, checks, mc_flags.threads);
            const std::string text = cfg.format == "csv" ? tvqe::report_to_csv_text(report)
                                                         : tvqe::report_to_json_text(report);
            if (cfg.out_path.empty())
                std::cout << text << "\n";
            else
                write_text(cfg.out_path, text);
            return 0;
        }
        if (vc_cmd->parsed()) {
            auto [cfg, checks] = tvqe::scenario_and_checks_from_json_file(vc_config);
            apply_common(cfg, vc_flags);
            const tvqe::ValidationReport report = tvqe::validate(cfg, checks, vc_flags.threads);
            std::cerr << "bias max |z| = " << report.max_abs_bias_z
                      << ", cov max |z| = " << report.max_abs_cov_z
                      << ", frob 2nd/4th = " << report.frob_dist_2nd << "/"
                      << report.frob_dist_4th << "\n";
            return report.pass ? 0 : 1;
        }
    } catch (const tvqe::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 2;
}
