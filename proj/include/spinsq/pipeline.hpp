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

/// Config-driven runs tying the modules together.
///
/// A config is one JSON object. Physical quantities carry their unit in the key
/// name (chi_rad_per_ns, t_ns, chit_dimensionless). Every field is validated and
/// every referenced file is loaded before any computation starts.

#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "spinsq/dynamics.hpp"
#include "spinsq/error.hpp"
#include "spinsq/fisher.hpp"
#include "spinsq/identities.hpp"
#include "spinsq/measurement.hpp"
#include "spinsq/parallel.hpp"
#include "spinsq/phase_space.hpp"
#include "spinsq/rng.hpp"
#include "spinsq/spin_core.hpp"
#include "spinsq/squeezing.hpp"

#ifndef SPINSQ_VERSION
#define SPINSQ_VERSION "0.0.0"
#endif

namespace spinsq {

using nlohmann::json;

struct ExperimentConfig {
    enum class HamiltonianKind { OAT, XY };

    int qubits = 0;
    HamiltonianKind hamiltonian = HamiltonianKind::OAT;
    std::optional<double> chi_rad_per_ns;  ///< OAT strength
    std::optional<CouplingMatrix> coupling;  ///< XY couplings in rad/ns
    Representation::Kind representation = Representation::Kind::Dicke;

    std::vector<double> chit;           ///< dimensionless time grid
    std::optional<std::vector<double>> t_ns;  ///< set when the config gave physical times

    std::vector<std::string> families{"s1", "sexp", "s2"};
    bool sampled = false;

    std::uint64_t shots_per_direction = 200000;
    BootstrapScheme squeeze_bootstrap{84, 40, 10};
    std::optional<ConfusionModel> confusion;
    CorrectedSource moments_from = CorrectedSource::Clipped;

    double theta = kDefaultTheta;
    std::vector<double> theta_grid{-0.1, -0.08, -0.06, -0.04, -0.02, 0.02, 0.04, 0.06, 0.08, 0.1};
    std::vector<double> alpha_grid = default_alpha_grid();
    std::uint64_t shots_per_branch = 200000;
    BootstrapScheme fisher_bootstrap{240, 60, 10};
    bool fit_cubic = true;

    std::size_t husimi_theta_points = 61;
    std::size_t husimi_phi_points = 121;
    bool husimi_density = false;
    bool husimi_binary = false;

    std::vector<int> validate_qubits{2, 3, 4, 5, 6};
    std::size_t validate_trials = 50;

    std::uint64_t seed = 0;
    unsigned threads = 0;
    std::string output_dir = "out";

    json source;  ///< the parsed document, used for the config hash

    /// Rate that converts chit into time: chi for OAT, the mean coupling for XY.
    double rate() const {
        if (hamiltonian == HamiltonianKind::XY) return coupling->mean();
        return *chi_rad_per_ns;
    }
};

namespace detail {

inline Error config_error(const std::string& path, const std::string& reason) {
    return Error(ErrorCode::ConfigError, (path.empty() ? "/" : path) + ": " + reason);
}

/// Object view that tracks which keys were read, so unknown keys can be rejected.
class ConfigReader {
public:
    ConfigReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw config_error(path_, "expected an object");
    }

    bool has(const std::string& key) const { return j_.contains(key); }
    std::string path(const std::string& key) const { return path_ + "/" + key; }

    const json& raw(const std::string& key) {
        seen_.insert(key);
        if (!j_.contains(key)) throw config_error(path(key), "missing required field");
        return j_.at(key);
    }

    double number(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_number()) throw config_error(path(key), "expected a number");
        const double d = v.get<double>();
        if (!std::isfinite(d)) throw config_error(path(key), "must be finite");
        return d;
    }
    double number(const std::string& key, double fallback) { return has(key) ? number(key) : mark(key, fallback); }

    std::int64_t integer(const std::string& key, std::int64_t lo, std::int64_t hi) {
        const json& v = raw(key);
        if (!v.is_number_integer()) throw config_error(path(key), "expected an integer");
        const auto i = v.get<std::int64_t>();
        if (i < lo || i > hi) {
            throw config_error(path(key), "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
        }
        return i;
    }
    std::int64_t integer(const std::string& key, std::int64_t lo, std::int64_t hi, std::int64_t fallback) {
        return has(key) ? integer(key, lo, hi) : mark(key, fallback);
    }

    bool boolean(const std::string& key, bool fallback) {
        if (!has(key)) return mark(key, fallback);
        const json& v = raw(key);
        if (!v.is_boolean()) throw config_error(path(key), "expected true or false");
        return v.get<bool>();
    }

    std::string string(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_string()) throw config_error(path(key), "expected a string");
        return v.get<std::string>();
    }
    std::string string(const std::string& key, const std::string& fallback) {
        return has(key) ? string(key) : mark(key, fallback);
    }

    /// Either an array of numbers or {"start", "stop", "points"}.
    std::vector<double> grid(const std::string& key) {
        const json& v = raw(key);
        std::vector<double> out;
        if (v.is_array()) {
            for (std::size_t i = 0; i < v.size(); ++i) {
                if (!v[i].is_number()) throw config_error(path(key) + "/" + std::to_string(i), "expected a number");
                out.push_back(v[i].get<double>());
            }
        } else if (v.is_object()) {
            ConfigReader r(v, path(key));
            const double start = r.number("start");
            const double stop = r.number("stop");
            const auto points = r.integer("points", 1, 1000000);
            r.finish();
            out = linspace(start, stop, static_cast<std::size_t>(points));
        } else {
            throw config_error(path(key), "expected an array or {start, stop, points}");
        }
        if (out.empty()) throw config_error(path(key), "grid is empty");
        for (double d : out)
            if (!std::isfinite(d)) throw config_error(path(key), "grid values must be finite");
        return out;
    }

    ConfigReader child(const std::string& key) { return ConfigReader(raw(key), path(key)); }

    /// Rejects keys that were never read.
    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) throw config_error(path(it.key()), "unknown field");
    }

private:
    template <class T>
    T mark(const std::string& key, T value) {
        seen_.insert(key);
        return value;
    }

    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

inline BootstrapScheme parse_scheme(ConfigReader r, BootstrapScheme def) {
    BootstrapScheme s;
    s.groups = static_cast<std::size_t>(r.integer("groups", 1, 100000, static_cast<std::int64_t>(def.groups)));
    s.subsample = static_cast<std::size_t>(r.integer("subsample", 1, 100000, static_cast<std::int64_t>(def.subsample)));
    s.repeats = static_cast<std::size_t>(r.integer("repeats", 1, 100000, static_cast<std::int64_t>(def.repeats)));
    r.finish();
    if (s.subsample > s.groups) throw config_error(r.path("subsample"), "must not exceed groups");
    return s;
}

inline std::string resolve(const std::string& base_dir, const std::string& file) {
    std::filesystem::path p(file);
    if (p.is_relative() && !base_dir.empty()) p = std::filesystem::path(base_dir) / p;
    return p.string();
}

}  // namespace detail

/// Parses and validates a config document. `base_dir` resolves relative file paths.
inline ExperimentConfig parse_config(const json& doc, const std::string& base_dir = {}) {
    using detail::config_error;
    ExperimentConfig cfg;
    cfg.source = doc;
    detail::ConfigReader root(doc, "");

    cfg.qubits = static_cast<int>(root.integer("N", 1, kMaxDickeQubits));

    {
        auto h = root.child("hamiltonian");
        const std::string type = h.string("type");
        if (type == "oat") {
            cfg.hamiltonian = ExperimentConfig::HamiltonianKind::OAT;
            cfg.chi_rad_per_ns = h.number("chi_rad_per_ns");
            if (*cfg.chi_rad_per_ns == 0.0) throw config_error(h.path("chi_rad_per_ns"), "must be nonzero");
        } else if (type == "xy") {
            cfg.hamiltonian = ExperimentConfig::HamiltonianKind::XY;
            const bool rad = h.has("coupling_file_rad_per_ns");
            const bool mhz = h.has("coupling_file_mhz_2pi");
            if (rad == mhz) {
                throw config_error(h.path("coupling_file_rad_per_ns"),
                                   "give exactly one of coupling_file_rad_per_ns or coupling_file_mhz_2pi");
            }
            const std::string key = rad ? "coupling_file_rad_per_ns" : "coupling_file_mhz_2pi";
            const std::string file = detail::resolve(base_dir, h.string(key));
            try {
                CouplingMatrix m = load_coupling_csv(file);
                // chi / 2pi in MHz to rad/ns
                cfg.coupling = mhz ? CouplingMatrix(m.matrix() * (2.0 * std::numbers::pi * 1e-3)) : m;
            } catch (const Error& e) {
                throw config_error(h.path(key), e.what());
            }
            if (cfg.coupling->qubits() != cfg.qubits) {
                throw config_error(h.path(key), "coupling matrix is " + std::to_string(cfg.coupling->qubits()) +
                                                    "x" + std::to_string(cfg.coupling->qubits()) + " but N = " +
                                                    std::to_string(cfg.qubits));
            }
            if (cfg.coupling->mean() == 0.0) throw config_error(h.path(key), "mean coupling is zero");
        } else {
            throw config_error(h.path("type"), "expected \"oat\" or \"xy\"");
        }
        h.finish();
    }

    {
        const bool xy = cfg.hamiltonian == ExperimentConfig::HamiltonianKind::XY;
        const std::string def = xy ? "full" : "dicke";
        const std::string repr = root.string("representation", def);
        if (repr == "full") {
            cfg.representation = Representation::Kind::Full;
            if (cfg.qubits > kMaxFullQubits) {
                throw config_error("/representation", "full basis is capped at N = " + std::to_string(kMaxFullQubits));
            }
        } else if (repr == "dicke") {
            if (xy) throw config_error("/representation", "the XY model needs the full basis");
            cfg.representation = Representation::Kind::Dicke;
        } else {
            throw config_error("/representation", "expected \"full\" or \"dicke\"");
        }
    }

    {
        auto t = root.child("time");
        const bool dimless = t.has("chit_dimensionless");
        const bool phys = t.has("t_ns");
        if (dimless && phys) {
            throw config_error(t.path("t_ns"), "mixing chit_dimensionless and t_ns in one config is not allowed");
        }
        if (!dimless && !phys) throw config_error(t.path("chit_dimensionless"), "give chit_dimensionless or t_ns");
        if (dimless) {
            cfg.chit = t.grid("chit_dimensionless");
        } else {
            cfg.t_ns = t.grid("t_ns");
            for (double tn : *cfg.t_ns) cfg.chit.push_back(tn * cfg.rate());
        }
        t.finish();
    }

    if (root.has("families")) {
        const json& f = root.raw("families");
        if (!f.is_array() || f.empty()) throw config_error("/families", "expected a nonempty array");
        cfg.families.clear();
        for (std::size_t i = 0; i < f.size(); ++i) {
            const std::string p = "/families/" + std::to_string(i);
            if (!f[i].is_string()) throw config_error(p, "expected a family name");
            try {
                OperatorFamily::from_name(f[i].get<std::string>());
            } catch (const Error&) {
                throw config_error(p, "expected one of s1, sexp, sexp-main, s2");
            }
            cfg.families.push_back(f[i].get<std::string>());
        }
    }

    {
        const std::string mode = root.string("mode", "exact");
        if (mode != "exact" && mode != "sampled") throw config_error("/mode", "expected \"exact\" or \"sampled\"");
        cfg.sampled = mode == "sampled";
    }

    if (root.has("sampling")) {
        auto s = root.child("sampling");
        cfg.shots_per_direction =
            static_cast<std::uint64_t>(s.integer("shots_per_direction", 1, std::int64_t{1} << 40, 200000));
        if (s.has("bootstrap")) cfg.squeeze_bootstrap = detail::parse_scheme(s.child("bootstrap"), cfg.squeeze_bootstrap);
        const bool file = s.has("confusion_file");
        const bool inline_model = s.has("confusion");
        if (file && inline_model) throw config_error(s.path("confusion"), "give confusion or confusion_file, not both");
        if (file) {
            const std::string path = detail::resolve(base_dir, s.string("confusion_file"));
            try {
                cfg.confusion = load_confusion_csv(path);
            } catch (const Error& e) {
                throw config_error(s.path("confusion_file"), e.what());
            }
        } else if (inline_model) {
            auto c = s.child("confusion");
            const json& f0 = c.raw("f0");
            const json& f1 = c.raw("f1");
            c.finish();
            try {
                cfg.confusion = ConfusionModel(f0.get<std::vector<double>>(), f1.get<std::vector<double>>());
            } catch (const json::exception&) {
                throw config_error(s.path("confusion"), "f0 and f1 must be arrays of numbers");
            } catch (const Error& e) {
                throw config_error(s.path("confusion"), e.what());
            }
        }
        if (cfg.confusion) {
            if (cfg.confusion->qubits() != cfg.qubits) {
                throw config_error(s.path("confusion"), "confusion model has " +
                                                            std::to_string(cfg.confusion->qubits()) + " qubits, N = " +
                                                            std::to_string(cfg.qubits));
            }
            if (!cfg.confusion->invertible()) throw config_error(s.path("confusion"), "F0 + F1 <= 1 on some qubit");
            if (cfg.representation != Representation::Kind::Full) {
                throw config_error(s.path("confusion"), "readout errors need the full basis");
            }
        }
        const std::string src = s.string("moments_from", "clipped");
        if (src == "clipped") {
            cfg.moments_from = CorrectedSource::Clipped;
        } else if (src == "quasi") {
            cfg.moments_from = CorrectedSource::Quasi;
        } else {
            throw config_error(s.path("moments_from"), "expected \"clipped\" or \"quasi\"");
        }
        s.finish();
    }

    if (root.has("fisher")) {
        auto f = root.child("fisher");
        cfg.theta = f.number("theta", kDefaultTheta);
        if (cfg.theta == 0.0) throw config_error(f.path("theta"), "must be nonzero");
        if (f.has("theta_grid")) cfg.theta_grid = f.grid("theta_grid");
        if (f.has("alpha_grid")) cfg.alpha_grid = f.grid("alpha_grid");
        cfg.shots_per_branch =
            static_cast<std::uint64_t>(f.integer("shots_per_branch", 1000, std::int64_t{1} << 40, 200000));
        if (f.has("bootstrap")) cfg.fisher_bootstrap = detail::parse_scheme(f.child("bootstrap"), cfg.fisher_bootstrap);
        cfg.fit_cubic = f.boolean("fit_cubic", true);
        f.finish();
    }

    if (root.has("husimi")) {
        auto h = root.child("husimi");
        cfg.husimi_theta_points = static_cast<std::size_t>(h.integer("theta_points", 2, 100000, 61));
        cfg.husimi_phi_points = static_cast<std::size_t>(h.integer("phi_points", 2, 100000, 121));
        cfg.husimi_density = h.boolean("density", false);
        cfg.husimi_binary = h.boolean("binary", false);
        h.finish();
    }

    if (root.has("validate")) {
        auto v = root.child("validate");
        if (v.has("N")) {
            const json& ns = v.raw("N");
            if (!ns.is_array() || ns.empty()) throw config_error(v.path("N"), "expected a nonempty array");
            cfg.validate_qubits.clear();
            for (const auto& n : ns) {
                if (!n.is_number_integer() || n.get<int>() < 1 || n.get<int>() > 64) {
                    throw config_error(v.path("N"), "entries must be integers in [1, 64]");
                }
                cfg.validate_qubits.push_back(n.get<int>());
            }
        }
        cfg.validate_trials = static_cast<std::size_t>(v.integer("trials", 1, 1000000, 50));
        v.finish();
    }

    cfg.seed = static_cast<std::uint64_t>(root.integer("seed", 0, std::numeric_limits<std::int64_t>::max(), 0));
    cfg.threads = static_cast<unsigned>(root.integer("threads", 0, 1024, 0));
    cfg.output_dir = root.string("output_dir", "out");
    root.finish();
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ConfigError, path + ": cannot open config file");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::ConfigError, path + ": " + e.what());
    }
    return parse_config(doc, std::filesystem::path(path).parent_path().string());
}

/// Sampled mode with readout errors needs the full basis.
inline void check_mode(const ExperimentConfig& cfg) {
    if (cfg.confusion && !cfg.sampled) {
        throw Error(ErrorCode::ConfigError, "/sampling/confusion: a confusion model needs sampled mode");
    }
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Hash over the config document and the effective seed and mode; output_dir and
/// threads do not change results and are left out.
inline std::string config_hash(const ExperimentConfig& cfg) {
    json doc = cfg.source;
    doc.erase("output_dir");
    doc.erase("threads");
    doc["seed"] = cfg.seed;
    doc["mode"] = cfg.sampled ? "sampled" : "exact";
    doc["families"] = cfg.families;
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(doc.dump())));
    return buf;
}

inline std::string csv_header(const ExperimentConfig& cfg) {
    return std::string("# spinsq ") + SPINSQ_VERSION + " config_hash=" + config_hash(cfg) +
           " seed=" + std::to_string(cfg.seed) + " mode=" + (cfg.sampled ? "sampled" : "exact") + "\n";
}

namespace detail {

inline std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline std::string family_column(const std::string& name) {
    if (name == "s1") return "xi2_S1_inv";
    if (name == "sexp") return "xi2_Sexp_inv";
    if (name == "sexp-main") return "xi2_SexpMain_inv";
    return "xi2_S2_inv";
}

}  // namespace detail

/// A named set of output files, written only after the whole run succeeded.
struct RunOutput {
    std::map<std::string, std::string> files;
};

inline void write_outputs(const RunOutput& out, const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create output directory " + dir + ": " + ec.message());
    for (const auto& [name, content] : out.files) {
        const auto path = (std::filesystem::path(dir) / name).string();
        std::ofstream f(path, std::ios::binary);
        if (!f) throw Error(ErrorCode::IoError, "cannot write " + path);
        f << content;
        if (!f) throw Error(ErrorCode::IoError, "write failed for " + path);
    }
}

inline Hamiltonian build_hamiltonian(const ExperimentConfig& cfg) {
    if (cfg.hamiltonian == ExperimentConfig::HamiltonianKind::XY) return build_xy(*cfg.coupling);
    return build_oat(cfg.qubits, cfg.rate(), cfg.representation);
}

/// States at every grid time, starting from CSS(+x).
inline std::vector<StateVector> trajectory(const ExperimentConfig& cfg) {
    const Hamiltonian h = build_hamiltonian(cfg);
    const StateVector start = coherent_spin_state(cfg.qubits, Direction::x_axis(), h.representation());
    std::vector<std::optional<StateVector>> slots(cfg.chit.size());
    parallel_for(cfg.chit.size(), cfg.threads, [&](std::size_t i) { slots[i] = evolve(start, h, cfg.chit[i] / cfg.rate()); });
    std::vector<StateVector> out;
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

inline RunOutput run_evolve(const ExperimentConfig& cfg) {
    const auto states = trajectory(cfg);
    std::ostringstream csv;
    csv << csv_header(cfg) << "chit,t,jx,jy,jz,var_x,var_y,var_z,FQ_over_N\n";
    for (std::size_t i = 0; i < states.size(); ++i) {
        const auto s = spin_matrices(states[i].representation());
        const Eigen::Matrix3d cov = spin_covariance(states[i]);
        csv << detail::fmt(cfg.chit[i]) << ',' << detail::fmt(cfg.chit[i] / cfg.rate()) << ','
            << detail::fmt(expectation(states[i], s.jx, 1)) << ',' << detail::fmt(expectation(states[i], s.jy, 1))
            << ',' << detail::fmt(expectation(states[i], s.jz, 1)) << ',' << detail::fmt(cov(0, 0)) << ','
            << detail::fmt(cov(1, 1)) << ',' << detail::fmt(cov(2, 2)) << ','
            << detail::fmt(qfi_pure(states[i]) / cfg.qubits) << '\n';
    }
    return {{{"evolution.csv", csv.str()}}};
}

/// Directions read by a family's identities.
inline std::vector<DirectionId> directions_for(const std::vector<OperatorFamily>& families) {
    bool nonlinear = false;
    for (const auto& f : families) nonlinear |= f.size() > 3;
    if (!nonlinear) return {DirectionId::x, DirectionId::y, DirectionId::z, DirectionId::xy, DirectionId::yz,
                            DirectionId::zx};
    std::vector<DirectionId> all;
    for (const auto& d : directions_19()) all.push_back(d.id);
    return all;
}

struct SampledSqueeze {
    std::vector<double> xi2_inv;      ///< per family, from all groups
    std::vector<double> xi2_inv_std;  ///< per family, bootstrap
    std::vector<double> clipped_mass;  ///< per direction, largest over groups' merge
};

/// Samples every needed direction in groups, corrects readout if configured, and
/// bootstraps xi^-2 for each family over shared group selections.
inline SampledSqueeze sampled_squeeze(const StateVector& state, const std::vector<OperatorFamily>& families,
                                      const ExperimentConfig& cfg, std::uint32_t time_index) {
    const auto dirs = directions_for(families);
    const std::size_t groups = cfg.squeeze_bootstrap.groups;
    std::vector<std::vector<ShotRecord>> records;
    for (DirectionId d : dirs) {
        const std::uint32_t sub = time_index * 32u + static_cast<std::uint32_t>(d);
        auto g = sample_groups(state, d, cfg.shots_per_direction, groups, cfg.seed, sub);
        if (cfg.confusion)
            for (auto& r : g) r = apply_confusion(r, *cfg.confusion, cfg.seed);
        records.push_back(std::move(g));
    }
    auto table_for = [&](const std::vector<std::size_t>& pick, std::vector<double>* clipped) {
        MomentTable table(state.qubits(), false);
        for (std::size_t k = 0; k < dirs.size(); ++k) {
            std::vector<const ShotRecord*> parts;
            for (std::size_t i : pick) parts.push_back(&records[k][i]);
            const ShotRecord merged = merge_records(parts);
            if (cfg.confusion) {
                const auto corrected = correct_readout(merged, *cfg.confusion);
                if (clipped) clipped->push_back(corrected.clipped_mass);
                table.set(dirs[k], corrected_moments(corrected, cfg.moments_from));
            } else {
                table.set(dirs[k], record_moments(merged));
            }
        }
        return table;
    };
    auto xi_inv = [&](const MomentTable& table) {
        std::vector<double> v;
        for (const auto& f : families) v.push_back(squeeze_from_moments(table, f).xi2_inverse());
        return v;
    };

    SampledSqueeze out;
    std::vector<std::size_t> all(groups);
    for (std::size_t i = 0; i < groups; ++i) all[i] = i;
    out.xi2_inv = xi_inv(table_for(all, &out.clipped_mass));

    std::vector<std::vector<double>> samples(families.size());
    for (const auto& pick : bootstrap_picks(groups, cfg.squeeze_bootstrap, cfg.seed ^ (std::uint64_t{time_index} << 40))) {
        const auto v = xi_inv(table_for(pick, nullptr));
        for (std::size_t f = 0; f < families.size(); ++f) samples[f].push_back(v[f]);
    }
    for (auto& s : samples) out.xi2_inv_std.push_back(summarize(std::move(s)).std);
    return out;
}

inline SampledFisherOptions fisher_options(const ExperimentConfig& cfg, std::uint32_t substream) {
    SampledFisherOptions opt;
    opt.shots = cfg.shots_per_branch;
    opt.seed = cfg.seed;
    opt.scheme = cfg.fisher_bootstrap;
    opt.confusion = cfg.confusion;
    opt.source = cfg.moments_from;
    opt.substream = substream;
    return opt;
}

inline RunOutput run_squeezing(const ExperimentConfig& cfg) {
    const auto states = trajectory(cfg);
    std::vector<OperatorFamily> families;
    for (const auto& name : cfg.families) families.push_back(OperatorFamily::from_name(name));

    struct Row {
        std::vector<double> xi_inv, xi_std;
        double f_over_n = 0, f_std = 0, fq_over_n = 0;
        json reports = json::array();
    };
    std::vector<Row> rows(states.size());
    parallel_for(states.size(), cfg.threads, [&](std::size_t i) {
        Row& r = rows[i];
        const StateVector& s = states[i];
        for (const auto& f : families) {
            const SqueezeReport rep = squeeze_exact(s, f);
            r.xi_inv.push_back(rep.xi2_inverse());
            json j = to_json(rep, f);
            j["chit"] = cfg.chit[i];
            r.reports.push_back(std::move(j));
        }
        const AlphaScan scan = optimize_alpha(s, cfg.theta, cfg.alpha_grid);
        r.f_over_n = scan.best.F / cfg.qubits;
        r.fq_over_n = qfi_pure(s) / cfg.qubits;
        if (cfg.sampled) {
            const auto ss = sampled_squeeze(s, families, cfg, static_cast<std::uint32_t>(i));
            r.xi_inv = ss.xi2_inv;
            r.xi_std = ss.xi2_inv_std;
            const FisherEstimate fe =
                fisher_sampled(s, scan.alpha_opt, cfg.theta, fisher_options(cfg, static_cast<std::uint32_t>(i)));
            r.f_over_n = fe.F / cfg.qubits;
            r.f_std = fe.std.value_or(0.0) / cfg.qubits;
        }
    });

    std::ostringstream csv;
    csv << csv_header(cfg) << "chit";
    for (const auto& name : cfg.families) csv << ',' << detail::family_column(name);
    csv << ",F_over_N,FQ_over_N";
    if (cfg.sampled) {
        for (const auto& name : cfg.families) csv << ',' << detail::family_column(name) << "_std";
        csv << ",F_over_N_std";
    }
    csv << '\n';
    json reports = json::array();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        csv << detail::fmt(cfg.chit[i]);
        for (double v : rows[i].xi_inv) csv << ',' << detail::fmt(v);
        csv << ',' << detail::fmt(rows[i].f_over_n) << ',' << detail::fmt(rows[i].fq_over_n);
        if (cfg.sampled) {
            for (double v : rows[i].xi_std) csv << ',' << detail::fmt(v);
            csv << ',' << detail::fmt(rows[i].f_std);
        }
        csv << '\n';
        for (auto& r : rows[i].reports) reports.push_back(std::move(r));
    }
    return {{{"squeezing.csv", csv.str()}, {"squeeze_reports.json", reports.dump(2) + "\n"}}};
}

inline RunOutput run_fisher(const ExperimentConfig& cfg) {
    const auto states = trajectory(cfg);
    struct Row {
        AlphaScan scan;
        std::vector<double> d2;
        FisherEstimate fit;
        std::optional<FisherEstimate> sampled;
        double fq = 0;
    };
    std::vector<Row> rows(states.size());
    parallel_for(states.size(), cfg.threads, [&](std::size_t i) {
        Row& r = rows[i];
        r.scan = optimize_alpha(states[i], cfg.theta, cfg.alpha_grid);
        for (double th : cfg.theta_grid) r.d2.push_back(exact_d2(states[i], r.scan.alpha_opt, th));
        r.fit = fisher_fit(cfg.theta_grid, r.d2, cfg.fit_cubic);
        r.fit.alpha = r.scan.alpha_opt;
        r.fq = qfi_pure(states[i]);
        if (cfg.sampled) {
            r.sampled = fisher_sampled(states[i], r.scan.alpha_opt, cfg.theta,
                                       fisher_options(cfg, static_cast<std::uint32_t>(i)));
        }
    });

    const std::string head = csv_header(cfg);
    std::ostringstream alpha_csv, theta_csv, summary;
    alpha_csv << head << "chit,alpha,F\n";
    theta_csv << head << "chit,alpha,theta,d2\n";
    summary << head << "chit,alpha_opt,F_single_over_N,F_fit_over_N,FQ_over_N";
    if (cfg.sampled) summary << ",F_sampled_over_N,F_sampled_std_over_N";
    summary << '\n';
    json all = json::array();
    const double n = cfg.qubits;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const Row& r = rows[i];
        const std::string t = detail::fmt(cfg.chit[i]);
        for (std::size_t k = 0; k < r.scan.alphas.size(); ++k)
            alpha_csv << t << ',' << detail::fmt(r.scan.alphas[k]) << ',' << detail::fmt(r.scan.F[k]) << '\n';
        for (std::size_t k = 0; k < cfg.theta_grid.size(); ++k)
            theta_csv << t << ',' << detail::fmt(r.scan.alpha_opt) << ',' << detail::fmt(cfg.theta_grid[k]) << ','
                      << detail::fmt(r.d2[k]) << '\n';
        summary << t << ',' << detail::fmt(r.scan.alpha_opt) << ',' << detail::fmt(r.scan.best.F / n) << ','
                << detail::fmt(r.fit.F / n) << ',' << detail::fmt(r.fq / n);
        if (r.sampled) summary << ',' << detail::fmt(r.sampled->F / n) << ',' << detail::fmt(r.sampled->std.value_or(0) / n);
        summary << '\n';
        json j = {{"chit", cfg.chit[i]}, {"alpha_opt", r.scan.alpha_opt}, {"single", to_json(r.scan.best)},
                  {"fit", to_json(r.fit)}, {"FQ", r.fq}};
        if (r.sampled) {
            json s = to_json(*r.sampled);
            s["scheme"] = {{"groups", cfg.fisher_bootstrap.groups},
                           {"subsample", cfg.fisher_bootstrap.subsample},
                           {"repeats", cfg.fisher_bootstrap.repeats}};
            j["sampled"] = std::move(s);
        }
        all.push_back(std::move(j));
    }
    return {{{"fisher_alpha.csv", alpha_csv.str()},
             {"fisher_theta.csv", theta_csv.str()},
             {"fisher_summary.csv", summary.str()},
             {"fisher.json", all.dump(2) + "\n"}}};
}

inline RunOutput run_husimi(const ExperimentConfig& cfg, std::vector<std::pair<std::string, SphericalGrid>>* binary = nullptr) {
    const auto states = trajectory(cfg);
    std::vector<std::optional<SphericalGrid>> grids(states.size());
    parallel_for(states.size(), cfg.threads, [&](std::size_t i) {
        grids[i] = husimi_q(states[i], SphericalGrid::make(cfg.husimi_theta_points, cfg.husimi_phi_points),
                            cfg.husimi_density);
    });
    RunOutput out;
    const std::string head = csv_header(cfg);
    for (std::size_t i = 0; i < grids.size(); ++i) {
        char name[64];
        std::snprintf(name, sizeof name, "husimi_%03zu", i);
        const std::string comment = head + "# chit=" + detail::fmt(cfg.chit[i]) + "\n";
        out.files[std::string(name) + ".csv"] = q_csv(*grids[i], comment);
        if (binary) binary->emplace_back(std::string(name) + ".bin", *grids[i]);
    }
    return out;
}

/// Random symmetric state with complex Gaussian amplitudes (Box-Muller on the portable stream).
inline StateVector random_dicke_state(int qubits, std::uint64_t seed, std::uint32_t index) {
    RandomStream rng(seed, stream_tag(StreamPurpose::RandomState, static_cast<std::uint32_t>(qubits)), index);
    CVector amps(qubits + 1);
    for (int k = 0; k <= qubits; ++k) {
        const double u1 = 1.0 - rng.uniform();  // (0, 1]
        const double u2 = rng.uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        amps[k] = std::polar(r, 2.0 * std::numbers::pi * u2);
    }
    return StateVector(Representation::dicke(qubits), std::move(amps));
}

struct IdentityResult {
    IdentityEntry entry;
    double max_residual = 0.0;
};

struct ValidationReport {
    std::vector<IdentityResult> results;
    double tolerance = 1e-9;

    bool passed() const {
        for (const auto& r : results)
            if (!(r.max_residual <= tolerance)) return false;
        return true;
    }
};

/// Compares every catalogue entry with the operator oracle on random states.
/// `corrupt` names one entry to offset by 1, which must make the report fail.
inline ValidationReport validate_identities(const std::vector<int>& qubit_list, std::size_t trials, std::uint64_t seed,
                                            const std::string& corrupt = {}) {
    ValidationReport rep;
    const auto catalogue = identity_catalogue();
    std::optional<IdentityEntry> bad;
    if (!corrupt.empty()) {
        for (const auto& e : catalogue)
            if (e.name() == corrupt) bad = e;
        if (!bad) throw Error(ErrorCode::InvalidArgument, "no identity named '" + corrupt + "'");
    }
    for (const auto& e : catalogue) rep.results.push_back({e, 0.0});
    const OperatorFamily s2 = OperatorFamily::s2();
    for (int n : qubit_list) {
        for (std::size_t t = 0; t < trials; ++t) {
            const StateVector psi = random_dicke_state(n, seed, static_cast<std::uint32_t>(t));
            const auto oracle = vc_exact(psi, s2);
            const MomentTable table = exact_moments(psi);
            MomentReconstruction recon(table);
            if (bad) recon.corrupt(*bad, 1.0);
            for (auto& r : rep.results) {
                const int i = static_cast<int>(r.entry.a), j = static_cast<int>(r.entry.b);
                const double expect = r.entry.kind == IdentityKind::Covariance ? oracle.V(i, j) : oracle.C(i, j);
                r.max_residual = std::max(r.max_residual, std::abs(recon.value(r.entry) - expect));
            }
        }
    }
    return rep;
}

inline std::string to_csv(const ValidationReport& rep) {
    std::ostringstream out;
    out << "identity,max_residual,pass\n";
    for (const auto& r : rep.results) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3e", r.max_residual);
        out << '"' << r.entry.name() << "\"," << buf << ',' << (r.max_residual <= rep.tolerance ? "yes" : "no")
            << '\n';
    }
    return out.str();
}

}  // namespace spinsq
