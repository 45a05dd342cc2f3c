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


// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>

#include "spinsq/pipeline.hpp"

#ifndef SPINSQ_CLI_PATH
#error "SPINSQ_CLI_PATH must name the spinsq executable"
#endif

using namespace spinsq;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string num(double v, int digits = 6) {
    std::ostringstream s;
    s.precision(digits);
    s << v;
    return s.str();
}

std::vector<StateVector> oat_states(int n, const std::vector<double>& chit) {
    const Hamiltonian h = build_oat(n, 1.0, Representation::Kind::Dicke);
    const StateVector start = coherent_spin_state(n, Direction::x_axis(), Representation::Kind::Dicke);
    std::vector<std::optional<StateVector>> slots(chit.size());
    parallel_for(chit.size(), 0, [&](std::size_t i) { slots[i] = evolve(start, h, chit[i]); });
    std::vector<StateVector> out;
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

Outcome standard_limit() {
    double worst = 0.0;
    for (int n : {2, 4, 10, 19}) {
        const auto css = coherent_spin_state(n, Direction::x_axis(), Representation::Kind::Dicke);
        worst = std::max(worst, std::abs(squeeze_exact(css, OperatorFamily::s1()).xi2 - 1.0));
    }
    return {worst <= 1e-9, "max |xi_R^2 - 1| = " + num(worst, 3) + " over N in {2,4,10,19}"};
}

Outcome identity_catalogue_check() {
    const ValidationReport rep = validate_identities({2, 3, 4, 5, 6}, 50, 20260101);
    double worst = 0.0;
    std::string name;
    for (const auto& r : rep.results) {
        if (r.max_residual >= worst) {
            worst = r.max_residual;
            name = r.entry.name();
        }
    }
    return {rep.passed(), std::to_string(rep.results.size()) + " identities, largest residual " + num(worst, 3) +
                              " (" + name + ")"};
}

Outcome hierarchy() {
    const int n = 10;
    const auto grid = linspace(0.0, 1.2, 25);
    const auto states = oat_states(n, grid);
    const char* links[] = {"xi_R^-2 <= xi_NL^-2(Sexp)", "xi_NL^-2(Sexp) <= xi_NL^-2(S2)", "xi_NL^-2(S2) <= F_opt/N",
                           "F_opt/N <= F_Q/N"};
    std::array<int, 4> broken{};
    std::array<double, 4> worst{};
    std::vector<std::array<double, 5>> rows(states.size());
    parallel_for(states.size(), 0, [&](std::size_t i) {
        const StateVector& s = states[i];
        rows[i] = {squeeze_exact(s, OperatorFamily::s1()).xi2_inverse(),
                   squeeze_exact(s, OperatorFamily::sexp_main()).xi2_inverse(),
                   squeeze_exact(s, OperatorFamily::s2()).xi2_inverse(),
                   optimize_alpha(s, kDefaultTheta, default_alpha_grid()).best.F / n, qfi_pure(s) / n};
    });
    for (const auto& r : rows) {
        for (int k = 0; k < 4; ++k) {
            const double excess = (r[k] - r[k + 1]) / std::max(1.0, std::abs(r[k + 1]));
            worst[k] = std::max(worst[k], excess);
            if (excess > 1e-6) ++broken[k];
        }
    }
    std::string detail;
    bool ok = true;
    for (int k = 0; k < 4; ++k) {
        detail += std::string("\n    ") + links[k] + ": " + (broken[k] ? "violated" : "holds") + " at " +
                  std::to_string(25 - broken[k]) + "/25 points, worst relative excess " + num(worst[k], 3);
        ok &= broken[k] == 0;
    }
    return {ok, "N=10, 25 points in [0, 1.2]" + detail};
}

Outcome experimental_bound() {
    std::string detail;
    bool ok = true;
    for (auto [n, measured] : {std::pair{10, 5.13}, std::pair{19, 9.75}}) {
        double best = 0.0;
        for (const auto& s : oat_states(n, linspace(0.0, kPi / 2, 301))) best = std::max(best, qfi_pure(s) / n);
        ok &= best >= measured;
        detail += "N=" + std::to_string(n) + " max F_Q/N = " + num(best) + " vs " + num(measured) + "; ";
    }
    detail.resize(detail.size() - 2);
    return {ok, detail};
}

Outcome ghz_point() {
    double worst = 0.0;
    for (int n : {4, 6, 8}) {
        const double fq = qfi_pure(oat_states(n, {kPi / 2})[0]);
        worst = std::max(worst, std::abs(fq - n * n) / (n * n));
    }
    return {worst <= 1e-6, "max relative |F_Q - N^2| / N^2 = " + num(worst, 3) + " over N in {4,6,8}"};
}

Outcome fisher_fidelity() {
    const int n = 10;
    const auto grid = linspace(0.06, 1.2, 20);
    const auto states = oat_states(n, grid);
    const std::vector<double> thetas{-0.05, -0.03, -0.01, 0.01, 0.03, 0.05};
    // deviation[state][theta]
    std::vector<std::vector<double>> dev(states.size(), std::vector<double>(thetas.size()));
    parallel_for(states.size(), 0, [&](std::size_t i) {
        const double alpha = optimize_alpha(states[i], kDefaultTheta, default_alpha_grid()).alpha_opt;
        const double oracle = classical_fisher(states[i], alpha);
        for (std::size_t k = 0; k < thetas.size(); ++k)
            dev[i][k] = std::abs(fisher_exact(states[i], alpha, thetas[k]).F - oracle) / oracle;
    });
    double worst = 0.0;
    std::size_t worst_state = 0;
    std::string detail = "20 states in chit [0.06, 1.2], N=10; worst relative deviation per theta:";
    for (std::size_t k = 0; k < thetas.size(); ++k) {
        double col = 0.0;
        std::size_t within = 0;
        for (std::size_t i = 0; i < states.size(); ++i) {
            col = std::max(col, dev[i][k]);
            within += dev[i][k] <= 0.01;
            if (dev[i][k] > worst) {
                worst = dev[i][k];
                worst_state = i;
            }
        }
        detail += "\n    theta=" + num(thetas[k], 3) + ": " + num(col, 3) + " (" + std::to_string(within) +
                  "/20 states within 1%)";
    }
    detail += "\n    worst state chit = " + num(grid[worst_state], 4);
    return {worst <= 0.01, detail};
}

Outcome sampling_pipeline() {
    const int n = 10;
    const double chit = 0.15;
    const StateVector s = oat_states(n, {chit})[0];
    const StateVector full = dicke_embed(s);

    ExperimentConfig cfg;
    cfg.qubits = n;
    cfg.representation = Representation::Kind::Full;
    cfg.sampled = true;
    cfg.seed = 7;
    cfg.shots_per_direction = 200000;
    cfg.confusion = ConfusionModel::random(n, cfg.seed);
    cfg.moments_from = CorrectedSource::Quasi;

    const double xi_exact = squeeze_exact(s, OperatorFamily::s1()).xi2_inverse();
    const SampledSqueeze sq = sampled_squeeze(full, {OperatorFamily::s1()}, cfg, 0);
    const double xi_dev = std::abs(sq.xi2_inv[0] - xi_exact) / sq.xi2_inv_std[0];

    const double alpha = optimize_alpha(s, kDefaultTheta, default_alpha_grid()).alpha_opt;
    const double f_exact = fisher_exact(s, alpha, kDefaultTheta).F;
    const FisherEstimate f = fisher_sampled(full, alpha, kDefaultTheta, fisher_options(cfg, 0));
    const double f_dev = std::abs(f.F - f_exact) / *f.std;

    std::ostringstream d;
    d << "N=10 chit=" << chit << ", 2e5 shots, random readout model, quasi-probability moments: xi_R^-2 "
      << num(sq.xi2_inv[0]) << " +/- " << num(sq.xi2_inv_std[0], 3) << " vs exact " << num(xi_exact) << " ("
      << num(xi_dev, 3) << " std); F/N " << num(f.F / n) << " +/- " << num(*f.std / n, 3) << " vs exact "
      << num(f_exact / n) << " (" << num(f_dev, 3) << " std)";
    return {xi_dev <= 3.0 && f_dev <= 3.0, d.str()};
}

Outcome seven_operator() {
    const auto states = oat_states(10, linspace(0.0, 0.9, 46));
    auto min_xi2 = [&](const OperatorFamily& f) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& s : states) best = std::min(best, squeeze_exact(s, f).xi2);
        return best;
    };
    const double s2 = min_xi2(OperatorFamily::s2());
    const double main = min_xi2(OperatorFamily::sexp_main());
    const double methods = min_xi2(OperatorFamily::sexp());
    auto percent = [&](double v) { return num(std::max(0.0, 100 * (v - s2) / s2), 3) + "%"; };
    return {(main - s2) / s2 <= 0.05, "min xi^2 over chit in [0, 0.9]: S2 " + num(s2) + ", Sexp(J_zx^2) " + num(main) +
                                          " (+" + percent(main) + "); Sexp(J_yz^2) " + num(methods) + " (+" +
                                          percent(methods) + ", informational)"};
}

Outcome uniform_equivalence() {
    const EquivalenceReport rep = uniform_equivalence_report(6, 0.7, linspace(0.1, 1.0, 10));
    return {rep.max_infidelity < 1e-8, "N=6, 10 times, max infidelity " + num(rep.max_infidelity, 3)};
}

Outcome determinism() {
    namespace fs = std::filesystem;
    const fs::path root = fs::temp_directory_path() / "spinsq_acceptance_determinism";
    fs::remove_all(root);
    fs::create_directories(root);
    {
        std::ofstream cfg(root / "config.json");
        cfg << R"({"N": 3, "hamiltonian": {"type": "oat", "chi_rad_per_ns": 0.02},
 "representation": "full", "time": {"chit_dimensionless": [0.0, 0.2, 0.4]},
 "mode": "sampled", "families": ["s1", "s2"], "seed": 99,
 "sampling": {"shots_per_direction": 16800, "confusion": {"f0": [0.98, 0.99, 0.985], "f1": [0.9, 0.92, 0.93]}},
 "fisher": {"shots_per_branch": 24000}})";
    }
    std::size_t compared = 0;
    for (const char* cmd : {"squeeze", "fisher", "evolve"}) {
        for (const char* run : {"a", "b"}) {
            const std::string line = std::string("\"") + SPINSQ_CLI_PATH + "\" " + cmd + " --config \"" +
                                     (root / "config.json").string() + "\" --out \"" + (root / run / cmd).string() +
                                     "\" 2>/dev/null";
            if (std::system(line.c_str()) != 0) return {false, std::string("spinsq ") + cmd + " failed"};
        }
        for (const auto& entry : fs::directory_iterator(root / "a" / cmd)) {
            auto slurp = [](const fs::path& p) {
                std::ifstream f(p, std::ios::binary);
                return std::string(std::istreambuf_iterator<char>(f), {});
            };
            const fs::path other = root / "b" / cmd / entry.path().filename();
            if (!fs::exists(other) || slurp(entry.path()) != slurp(other))
                return {false, entry.path().filename().string() + " differs between runs"};
            ++compared;
        }
    }
    return {compared > 0, std::to_string(compared) + " output files byte-identical across two CLI runs"};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"standard quantum limit", standard_limit},
        {"identity catalogue", identity_catalogue_check},
        {"squeezing hierarchy", hierarchy},
        {"experimental bound", experimental_bound},
        {"GHZ Heisenberg point", ghz_point},
        {"Fisher extraction", fisher_fidelity},
        {"sampling pipeline", sampling_pipeline},
        {"seven-operator family", seven_operator},
        {"uniform-coupling equivalence", uniform_equivalence},
        {"determinism", determinism},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        failed += !o.pass;
        std::printf("%s criterion %zu (%s): %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                    o.detail.c_str(), secs);
        std::fflush(stdout);
    }
    std::printf("%zu/%zu criteria passed\n", criteria.size() - static_cast<std::size_t>(failed), criteria.size());
    return failed == 0 ? 0 : 1;
}
