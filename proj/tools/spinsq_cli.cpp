// Copyright 2026 The spinsq Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// spinsq command line: evolve, squeeze, fisher, husimi, validate.
//
// Exit codes: 0 ok, 2 config error, 3 numerical failure, 4 validation failure.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "spinsq/pipeline.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kNumericalError = 3;
constexpr int kValidationFailure = 4;

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    bool exact = false;
    bool sampled = false;
    std::vector<std::string> families;
    std::optional<unsigned> threads;
};

void add_common(CLI::App* cmd, Common& c, bool config_required) {
    auto* opt = cmd->add_option("--config", c.config, "JSON config file")->check(CLI::ExistingFile);
    if (config_required) opt->required();
    cmd->add_option("--seed", c.seed, "RNG seed, overrides the config");
    cmd->add_option("--out", c.out, "output directory, overrides the config");
    auto* ex = cmd->add_flag("--exact", c.exact, "exact expectation values");
    auto* sa = cmd->add_flag("--sampled", c.sampled, "finite-shot sampling");
    ex->excludes(sa);
    cmd->add_option("--family", c.families, "operator family (repeatable)")
        ->check(CLI::IsMember({"s1", "sexp", "sexp-main", "s2"}));
    cmd->add_option("--threads", c.threads, "worker threads, 0 = all cores");
}

spinsq::ExperimentConfig resolve(const Common& c) {
    spinsq::ExperimentConfig cfg = spinsq::load_config(c.config);
    if (c.seed) cfg.seed = *c.seed;
    if (!c.out.empty()) cfg.output_dir = c.out;
    if (c.exact) cfg.sampled = false;
    if (c.sampled) cfg.sampled = true;
    if (!c.families.empty()) cfg.families = c.families;
    if (c.threads) cfg.threads = *c.threads;
    spinsq::check_mode(cfg);
    return cfg;
}

void report(const spinsq::RunOutput& out, const std::string& dir) {
    for (const auto& [name, content] : out.files) std::cerr << "wrote " << (std::filesystem::path(dir) / name).string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Collective-spin squeezing and Fisher information pipeline", "spinsq"};
    app.set_version_flag("--version", std::string(SPINSQ_VERSION));
    app.require_subcommand(1);

    Common evolve_opt, squeeze_opt, fisher_opt, husimi_opt, validate_opt;
    auto* evolve = app.add_subcommand("evolve", "spin moments along the trajectory");
    add_common(evolve, evolve_opt, true);
    auto* squeeze = app.add_subcommand("squeeze", "squeezing parameters, F/N and F_Q/N over time");
    add_common(squeeze, squeeze_opt, true);
    auto* fisher = app.add_subcommand("fisher", "alpha and theta sweeps with Fisher estimates");
    add_common(fisher, fisher_opt, true);
    auto* husimi = app.add_subcommand("husimi", "Husimi Q grids along the trajectory");
    add_common(husimi, husimi_opt, true);
    auto* validate = app.add_subcommand("validate", "check moment identities against the operator oracle");
    add_common(validate, validate_opt, false);
    std::vector<int> validate_n;
    std::optional<std::size_t> validate_trials;
    std::string corrupt;
    validate->add_option("--qubits", validate_n, "qubit numbers to test");
    validate->add_option("--trials", validate_trials, "random states per qubit number")->check(CLI::PositiveNumber);
    validate->add_option("--corrupt-identity", corrupt)->group("");  // harness self-test

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfigError;
    }

    spinsq::ExperimentConfig cfg;
    try {
        if (*validate) {
            if (!validate_opt.config.empty()) {
                cfg = resolve(validate_opt);
            } else {
                if (validate_opt.seed) cfg.seed = *validate_opt.seed;
                if (!validate_opt.out.empty()) cfg.output_dir = validate_opt.out;
            }
            if (!validate_n.empty()) cfg.validate_qubits = validate_n;
            if (validate_trials) cfg.validate_trials = *validate_trials;
        } else if (*evolve) {
            cfg = resolve(evolve_opt);
        } else if (*squeeze) {
            cfg = resolve(squeeze_opt);
        } else if (*fisher) {
            cfg = resolve(fisher_opt);
        } else {
            cfg = resolve(husimi_opt);
        }
    } catch (const spinsq::Error& e) {
        std::cerr << e.what() << '\n';
        return kConfigError;
    }

    try {
        if (*validate) {
            const auto rep = spinsq::validate_identities(cfg.validate_qubits, cfg.validate_trials, cfg.seed, corrupt);
            spinsq::write_outputs({{{"identities.csv", spinsq::to_csv(rep)}}}, cfg.output_dir);
            std::size_t failed = 0;
            for (const auto& r : rep.results) {
                if (!(r.max_residual <= rep.tolerance)) {
                    std::cerr << "FAIL " << r.entry.name() << " residual " << r.max_residual << '\n';
                    ++failed;
                }
            }
            std::cerr << rep.results.size() - failed << "/" << rep.results.size() << " identities within "
                      << rep.tolerance << '\n';
            return failed == 0 ? kOk : kValidationFailure;
        }

        spinsq::RunOutput out;
        std::vector<std::pair<std::string, spinsq::SphericalGrid>> binaries;
        if (*evolve) {
            out = spinsq::run_evolve(cfg);
        } else if (*squeeze) {
            out = spinsq::run_squeezing(cfg);
        } else if (*fisher) {
            out = spinsq::run_fisher(cfg);
        } else {
            out = spinsq::run_husimi(cfg, cfg.husimi_binary ? &binaries : nullptr);
        }
        spinsq::write_outputs(out, cfg.output_dir);
        for (const auto& [name, grid] : binaries)
            spinsq::write_q_binary((std::filesystem::path(cfg.output_dir) / name).string(), grid);
        report(out, cfg.output_dir);
    } catch (const spinsq::Error& e) {
        std::cerr << e.what() << '\n';
        return e.code() == spinsq::ErrorCode::ConfigError ? kConfigError : kNumericalError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kNumericalError;
    }
    return kOk;
}
