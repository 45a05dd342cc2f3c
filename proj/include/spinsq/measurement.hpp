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

/// Single-shot readout of collective spin observables.
///
/// Directions use ASCII ids: a trailing "b" marks a negated (barred) axis and a
/// trailing "p" the primed sqrt(3) combinations, so "yzbp" is (y - sqrt3 z)/2.
/// A shot outcome is a bitstring in the full basis (bit value 0 = +1/2 along the
/// measured direction) or an excitation number k (J = N/2 - k) in the Dicke basis.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "spinsq/error.hpp"
#include "spinsq/rng.hpp"
#include "spinsq/spin_core.hpp"

namespace spinsq {

enum class DirectionId : int {
    x, y, z,
    xy, yz, zx,
    xyb, yzb, zxb,
    xyp, yzp, zxp,
    xybp, yzbp, zxbp,
    xyz, xbyz, xybz, xyzb,
};

inline constexpr int kDirectionCount = 19;

struct MeasurementDirection {
    DirectionId id;
    std::string_view name;
    Direction n;
};

inline const std::array<MeasurementDirection, kDirectionCount>& directions_19() {
    static const std::array<MeasurementDirection, kDirectionCount> dirs = [] {
        const double r2 = 1.0 / std::numbers::sqrt2;
        const double r3 = 1.0 / std::numbers::sqrt3;
        const double h3 = std::numbers::sqrt3 / 2.0;
        auto d = [](double x, double y, double z) { return Direction::normalized(x, y, z); };
        return std::array<MeasurementDirection, kDirectionCount>{{
            {DirectionId::x, "x", d(1, 0, 0)},
            {DirectionId::y, "y", d(0, 1, 0)},
            {DirectionId::z, "z", d(0, 0, 1)},
            {DirectionId::xy, "xy", d(r2, r2, 0)},
            {DirectionId::yz, "yz", d(0, r2, r2)},
            {DirectionId::zx, "zx", d(r2, 0, r2)},
            {DirectionId::xyb, "xyb", d(r2, -r2, 0)},
            {DirectionId::yzb, "yzb", d(0, r2, -r2)},
            {DirectionId::zxb, "zxb", d(-r2, 0, r2)},
            {DirectionId::xyp, "xyp", d(0.5, h3, 0)},
            {DirectionId::yzp, "yzp", d(0, 0.5, h3)},
            {DirectionId::zxp, "zxp", d(h3, 0, 0.5)},
            {DirectionId::xybp, "xybp", d(0.5, -h3, 0)},
            {DirectionId::yzbp, "yzbp", d(0, 0.5, -h3)},
            {DirectionId::zxbp, "zxbp", d(-h3, 0, 0.5)},
            {DirectionId::xyz, "xyz", d(r3, r3, r3)},
            {DirectionId::xbyz, "xbyz", d(-r3, r3, r3)},
            {DirectionId::xybz, "xybz", d(r3, -r3, r3)},
            {DirectionId::xyzb, "xyzb", d(r3, r3, -r3)},
        }};
    }();
    return dirs;
}

inline const MeasurementDirection& measurement_direction(DirectionId id) {
    return directions_19()[static_cast<std::size_t>(id)];
}

inline std::string_view to_string(DirectionId id) { return measurement_direction(id).name; }

inline DirectionId direction_from_name(std::string_view name) {
    for (const auto& d : directions_19())
        if (d.name == name) return d.id;
    throw Error(ErrorCode::MissingDirection, "unknown measurement direction '" + std::string(name) + "'");
}

enum class OutcomeKind { Bitstring, Excitation };

/// Counts of single-shot outcomes for one direction.
struct ShotRecord {
    DirectionId direction = DirectionId::z;
    OutcomeKind kind = OutcomeKind::Bitstring;
    int qubits = 0;
    std::map<std::uint64_t, std::uint64_t> counts;
    std::uint64_t shots = 0;
    std::uint64_t seed = 0;
    std::uint32_t substream = 0;
    std::uint32_t group = 0;

    std::size_t outcome_count() const {
        return kind == OutcomeKind::Bitstring ? std::size_t{1} << qubits : static_cast<std::size_t>(qubits + 1);
    }
};

/// Number of qubits read as 1, which fixes J = N/2 - k.
inline int excitations(const ShotRecord& rec, std::uint64_t outcome) {
    return rec.kind == OutcomeKind::Bitstring ? detail::popcount(outcome) : static_cast<int>(outcome);
}

inline std::string bitstring(std::uint64_t outcome, int qubits) {
    std::string s(static_cast<std::size_t>(qubits), '0');
    for (int q = 0; q < qubits; ++q)
        if (outcome >> (qubits - 1 - q) & 1u) s[static_cast<std::size_t>(q)] = '1';
    return s;
}

/// `bitstring,count` lines in ascending outcome order; Dicke records write `k,count`.
inline std::string to_csv(const ShotRecord& rec) {
    std::ostringstream out;
    out << (rec.kind == OutcomeKind::Bitstring ? "bitstring,count\n" : "excitations,count\n");
    for (const auto& [outcome, count] : rec.counts) {
        if (rec.kind == OutcomeKind::Bitstring) {
            out << bitstring(outcome, rec.qubits);
        } else {
            out << outcome;
        }
        out << ',' << count << '\n';
    }
    return out.str();
}

/// Sums counts of records that share direction, kind and size.
inline ShotRecord merge_records(const std::vector<const ShotRecord*>& parts) {
    if (parts.empty()) throw Error(ErrorCode::InvalidArgument, "nothing to merge");
    ShotRecord merged = *parts.front();
    for (std::size_t i = 1; i < parts.size(); ++i) {
        const ShotRecord& p = *parts[i];
        if (p.direction != merged.direction || p.kind != merged.kind || p.qubits != merged.qubits) {
            throw Error(ErrorCode::InvalidArgument, "cannot merge records of different directions or sizes");
        }
        for (const auto& [outcome, count] : p.counts) merged.counts[outcome] += count;
        merged.shots += p.shots;
    }
    return merged;
}

/// Born probabilities of J_n outcomes, indexed by bitstring (full) or excitation number (Dicke).
inline std::vector<double> outcome_probabilities(const StateVector& state, const Direction& n) {
    // exp(-i theta J_y) exp(-i phi J_z) J_z (...)^dagger = J_n, so undo both rotations.
    StateVector frame = rotate(state, Direction::z_axis(), -n.phi());
    frame = rotate(frame, Direction::y_axis(), -n.theta());
    const CVector& amps = frame.amplitudes();
    std::vector<double> probs(static_cast<std::size_t>(amps.size()));
    for (Eigen::Index i = 0; i < amps.size(); ++i) probs[static_cast<std::size_t>(i)] = std::norm(amps[i]);
    return probs;
}

namespace detail {

inline ShotRecord draw_shots(const std::vector<double>& probs, const StateVector& state, DirectionId dir,
                             std::uint64_t shots, std::uint64_t seed, std::uint32_t substream, std::uint32_t group) {
    std::vector<double> cdf(probs.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) cdf[i] = (acc += probs[i]);
    RandomStream rng(seed, stream_tag(StreamPurpose::Readout, substream), group);
    std::vector<std::uint64_t> dense(probs.size(), 0);
    for (std::uint64_t s = 0; s < shots; ++s) {
        const double u = rng.uniform() * acc;
        auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        if (it == cdf.end()) --it;
        // skip zero-probability outcomes that share a cdf value
        while (probs[static_cast<std::size_t>(it - cdf.begin())] == 0.0 && it != cdf.begin()) --it;
        ++dense[static_cast<std::size_t>(it - cdf.begin())];
    }
    ShotRecord rec;
    rec.direction = dir;
    rec.kind = state.representation().is_full() ? OutcomeKind::Bitstring : OutcomeKind::Excitation;
    rec.qubits = state.qubits();
    rec.shots = shots;
    rec.seed = seed;
    rec.substream = substream;
    rec.group = group;
    for (std::size_t i = 0; i < dense.size(); ++i)
        if (dense[i] != 0) rec.counts.emplace(i, dense[i]);
    return rec;
}

}  // namespace detail

/// Samples `shots` outcomes of J_d. The RNG substream is (substream, group), so
/// every (direction, group) pair can be drawn independently and in any order.
inline ShotRecord sample_readout(const StateVector& state, DirectionId dir, std::uint64_t shots, std::uint64_t seed,
                                 std::uint32_t substream, std::uint32_t group = 0) {
    if (shots < 1) throw Error(ErrorCode::InvalidArgument, "shots must be >= 1");
    const auto probs = outcome_probabilities(state, measurement_direction(dir).n);
    return detail::draw_shots(probs, state, dir, shots, seed, substream, group);
}

inline ShotRecord sample_readout(const StateVector& state, DirectionId dir, std::uint64_t shots, std::uint64_t seed) {
    return sample_readout(state, dir, shots, seed, static_cast<std::uint32_t>(dir));
}

/// Splits `total_shots` over `groups` independently seeded records.
inline std::vector<ShotRecord> sample_groups(const StateVector& state, DirectionId dir, std::uint64_t total_shots,
                                             std::size_t groups, std::uint64_t seed, std::uint32_t substream) {
    if (groups == 0) throw Error(ErrorCode::InvalidArgument, "group count must be >= 1");
    if (total_shots < groups) {
        throw Error(ErrorCode::InsufficientShots, std::to_string(total_shots) + " shots cannot fill " +
                                                      std::to_string(groups) + " groups");
    }
    const auto probs = outcome_probabilities(state, measurement_direction(dir).n);
    std::vector<ShotRecord> out;
    out.reserve(groups);
    const std::uint64_t base = total_shots / groups;
    const std::uint64_t extra = total_shots % groups;
    for (std::size_t g = 0; g < groups; ++g) {
        out.push_back(detail::draw_shots(probs, state, dir, base + (g < extra ? 1 : 0), seed, substream,
                                         static_cast<std::uint32_t>(g)));
    }
    return out;
}

/// Per-qubit readout fidelities: F0 = P(read 0 | 0), F1 = P(read 1 | 1).
class ConfusionModel {
public:
    ConfusionModel(std::vector<double> f0, std::vector<double> f1) : f0_(std::move(f0)), f1_(std::move(f1)) {
        if (f0_.size() != f1_.size() || f0_.empty()) {
            throw Error(ErrorCode::InvalidArgument, "confusion model needs one (F0, F1) pair per qubit");
        }
        for (std::size_t q = 0; q < f0_.size(); ++q) {
            if (!(f0_[q] >= 0.0 && f0_[q] <= 1.0 && f1_[q] >= 0.0 && f1_[q] <= 1.0)) {
                throw Error(ErrorCode::InvalidArgument, "readout fidelities must lie in [0, 1]");
            }
        }
    }

    static ConfusionModel uniform(int qubits, double f0, double f1) {
        return ConfusionModel(std::vector<double>(static_cast<std::size_t>(qubits), f0),
                              std::vector<double>(static_cast<std::size_t>(qubits), f1));
    }
    static ConfusionModel ideal(int qubits) { return uniform(qubits, 1.0, 1.0); }

    /// Fidelities drawn uniformly from [f0_lo, f0_hi] and [f1_lo, f1_hi].
    static ConfusionModel random(int qubits, std::uint64_t seed, double f0_lo = 0.975, double f0_hi = 0.995,
                                 double f1_lo = 0.879, double f1_hi = 0.942) {
        RandomStream rng(seed, stream_tag(StreamPurpose::Confusion, 0xFFFFFFu), 0);
        std::vector<double> f0, f1;
        for (int q = 0; q < qubits; ++q) {
            f0.push_back(f0_lo + (f0_hi - f0_lo) * rng.uniform());
            f1.push_back(f1_lo + (f1_hi - f1_lo) * rng.uniform());
        }
        return ConfusionModel(std::move(f0), std::move(f1));
    }

    int qubits() const { return static_cast<int>(f0_.size()); }
    double f0(int q) const { return f0_[static_cast<std::size_t>(q)]; }
    double f1(int q) const { return f1_[static_cast<std::size_t>(q)]; }

    bool invertible() const {
        for (std::size_t q = 0; q < f0_.size(); ++q)
            if (f0_[q] + f1_[q] <= 1.0) return false;
        return true;
    }

private:
    std::vector<double> f0_, f1_;
};

/// Reads `f0,f1` rows, one per qubit.
inline ConfusionModel load_confusion_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open confusion file " + path);
    std::vector<double> f0, f1;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#' || line.rfind("f0", 0) == 0) continue;
        double a = 0, b = 0;
        char comma = 0;
        std::istringstream ss(line);
        if (!(ss >> a >> comma >> b) || comma != ',') {
            throw Error(ErrorCode::InvalidArgument, path + ":" + std::to_string(lineno) + ": expected 'f0,f1'");
        }
        f0.push_back(a);
        f1.push_back(b);
    }
    return ConfusionModel(std::move(f0), std::move(f1));
}

/// Flips each read bit independently according to the model.
inline ShotRecord apply_confusion(const ShotRecord& record, const ConfusionModel& model, std::uint64_t seed) {
    if (record.kind != OutcomeKind::Bitstring) {
        throw Error(ErrorCode::InvalidArgument, "confusion is per qubit and undefined for Dicke outcomes");
    }
    if (model.qubits() != record.qubits) throw Error(ErrorCode::LengthMismatch, "confusion model size mismatch");
    const int n = record.qubits;
    RandomStream rng(seed, stream_tag(StreamPurpose::Confusion, record.substream), record.group);
    ShotRecord out = record;
    out.counts.clear();
    for (const auto& [outcome, count] : record.counts) {
        for (std::uint64_t s = 0; s < count; ++s) {
            std::uint64_t read = outcome;
            for (int q = 0; q < n; ++q) {
                const std::uint64_t bit = std::uint64_t{1} << (n - 1 - q);
                const double keep = (outcome & bit) ? model.f1(q) : model.f0(q);
                if (rng.uniform() >= keep) read ^= bit;
            }
            ++out.counts[read];
        }
    }
    return out;
}

/// Output of readout correction over the dense joint distribution.
struct CorrectedDistribution {
    DirectionId direction = DirectionId::z;
    int qubits = 0;
    std::uint64_t shots = 0;
    std::vector<double> quasi;          ///< A^{-1} p, may hold small negative entries
    std::vector<double> probabilities;  ///< quasi clipped at 0 and renormalised
    double clipped_mass = 0.0;          ///< total negative mass removed by clipping
};

inline std::vector<double> empirical_distribution(const ShotRecord& record) {
    std::vector<double> p(record.outcome_count(), 0.0);
    const double total = static_cast<double>(record.shots);
    for (const auto& [outcome, count] : record.counts) p[outcome] = static_cast<double>(count) / total;
    return p;
}

/// Applies the inverse of the tensor-product confusion matrix one qubit at a time.
inline CorrectedDistribution correct_readout(const ShotRecord& record, const ConfusionModel& model) {
    if (record.kind != OutcomeKind::Bitstring) {
        throw Error(ErrorCode::InvalidArgument, "readout correction needs bitstring outcomes");
    }
    if (model.qubits() != record.qubits) throw Error(ErrorCode::LengthMismatch, "confusion model size mismatch");
    for (int q = 0; q < model.qubits(); ++q) {
        if (model.f0(q) + model.f1(q) <= 1.0) {
            throw Error(ErrorCode::SingularConfusion, "F0 + F1 <= 1 on qubit " + std::to_string(q));
        }
    }
    const int n = record.qubits;
    std::vector<double> p = empirical_distribution(record);
    for (int q = 0; q < n; ++q) {
        const double f0 = model.f0(q), f1 = model.f1(q);
        const double det = f0 + f1 - 1.0;
        // inverse of [[f0, 1-f1], [1-f0, f1]]
        const double a = f1 / det, b = -(1.0 - f1) / det, c = -(1.0 - f0) / det, d = f0 / det;
        const std::size_t bit = std::size_t{1} << (n - 1 - q);
        for (std::size_t idx = 0; idx < p.size(); ++idx) {
            if (idx & bit) continue;
            const double p0 = p[idx], p1 = p[idx | bit];
            p[idx] = a * p0 + b * p1;
            p[idx | bit] = c * p0 + d * p1;
        }
    }
    CorrectedDistribution out;
    out.direction = record.direction;
    out.qubits = n;
    out.shots = record.shots;
    out.quasi = p;
    double kept = 0.0;
    for (double& v : p) {
        if (v < 0.0) {
            out.clipped_mass -= v;
            v = 0.0;
        }
        kept += v;
    }
    if (kept > 0.0)
        for (double& v : p) v /= kept;
    out.probabilities = std::move(p);
    return out;
}

/// Raw moments <J^k>, k = 1..4, of one direction.
struct DirectionMoments {
    std::array<double, 4> k{};
    std::uint64_t shots = 0;
};

class MomentTable {
public:
    MomentTable(int qubits, bool exact) : qubits_(qubits), exact_(exact) {}

    int qubits() const { return qubits_; }
    bool exact() const { return exact_; }

    bool has(DirectionId id) const { return entries_[index(id)].has_value(); }
    void set(DirectionId id, const DirectionMoments& m) { entries_[index(id)] = m; }

    const DirectionMoments& at(DirectionId id) const {
        const auto& e = entries_[index(id)];
        if (!e) {
            throw Error(ErrorCode::MissingDirection,
                        "moment table has no entry for direction '" + std::string(to_string(id)) + "'");
        }
        return *e;
    }

    /// <J_d^power>
    double moment(DirectionId id, int power) const {
        if (power < 1 || power > 4) throw Error(ErrorCode::InvalidArgument, "moment order must be in 1..4");
        return at(id).k[static_cast<std::size_t>(power - 1)];
    }

    /// CSV with header `direction,k1,k2,k3,k4,shots`, in directions_19 order.
    std::string to_csv() const {
        std::ostringstream out;
        out.precision(17);
        out << "direction,k1,k2,k3,k4,shots\n";
        for (const auto& d : directions_19()) {
            if (!has(d.id)) continue;
            const auto& m = at(d.id);
            out << d.name << ',' << m.k[0] << ',' << m.k[1] << ',' << m.k[2] << ',' << m.k[3] << ',' << m.shots
                << '\n';
        }
        return out.str();
    }

private:
    static std::size_t index(DirectionId id) { return static_cast<std::size_t>(id); }

    int qubits_;
    bool exact_;
    std::array<std::optional<DirectionMoments>, kDirectionCount> entries_{};
};

/// Exact moments for the requested directions (all 19 by default).
inline MomentTable exact_moments(const StateVector& state, const std::vector<DirectionId>& dirs = {}) {
    MomentTable table(state.qubits(), true);
    auto fill = [&](DirectionId id) {
        const CollectiveOperator op = collective_operator(measurement_direction(id).n, state.representation());
        const CVector v1 = op.apply(state.amplitudes());
        const CVector v2 = op.apply(v1);
        DirectionMoments m;
        m.k = {state.amplitudes().dot(v1).real(), v1.squaredNorm(), v1.dot(v2).real(), v2.squaredNorm()};
        table.set(id, m);
    };
    if (dirs.empty()) {
        for (const auto& d : directions_19()) fill(d.id);
    } else {
        for (DirectionId id : dirs) fill(id);
    }
    return table;
}

namespace detail {

inline DirectionMoments moments_from_weights(int qubits, const std::vector<double>& weight_by_excitation,
                                             std::uint64_t shots) {
    DirectionMoments m;
    m.shots = shots;
    for (int k = 0; k <= qubits; ++k) {
        const double w = weight_by_excitation[static_cast<std::size_t>(k)];
        const double j = qubits / 2.0 - k;
        m.k[0] += w * j;
        m.k[1] += w * j * j;
        m.k[2] += w * j * j * j;
        m.k[3] += w * j * j * j * j;
    }
    return m;
}

}  // namespace detail

/// Empirical moments of one record; J = (n0 - n1)/2 per shot.
inline DirectionMoments record_moments(const ShotRecord& rec) {
    if (rec.shots == 0) throw Error(ErrorCode::InsufficientShots, "record has no shots");
    std::vector<double> w(static_cast<std::size_t>(rec.qubits + 1), 0.0);
    for (const auto& [outcome, count] : rec.counts)
        w[static_cast<std::size_t>(excitations(rec, outcome))] += static_cast<double>(count);
    for (double& v : w) v /= static_cast<double>(rec.shots);
    return detail::moments_from_weights(rec.qubits, w, rec.shots);
}

/// Which corrected distribution feeds the moments.
enum class CorrectedSource { Clipped, Quasi };

inline DirectionMoments corrected_moments(const CorrectedDistribution& dist,
                                          CorrectedSource source = CorrectedSource::Clipped) {
    const auto& p = source == CorrectedSource::Clipped ? dist.probabilities : dist.quasi;
    std::vector<double> w(static_cast<std::size_t>(dist.qubits + 1), 0.0);
    for (std::size_t idx = 0; idx < p.size(); ++idx) w[static_cast<std::size_t>(detail::popcount(idx))] += p[idx];
    return detail::moments_from_weights(dist.qubits, w, dist.shots);
}

inline MomentTable estimate_moments(const std::vector<ShotRecord>& records, int qubits) {
    MomentTable table(qubits, false);
    for (const auto& rec : records) {
        if (rec.qubits != qubits) throw Error(ErrorCode::LengthMismatch, "record qubit count mismatch");
        table.set(rec.direction, record_moments(rec));
    }
    return table;
}

inline MomentTable estimate_moments(const std::vector<CorrectedDistribution>& dists, int qubits,
                                    CorrectedSource source = CorrectedSource::Clipped) {
    MomentTable table(qubits, false);
    for (const auto& d : dists) {
        if (d.qubits != qubits) throw Error(ErrorCode::LengthMismatch, "distribution qubit count mismatch");
        table.set(d.direction, corrected_moments(d, source));
    }
    return table;
}

struct BootstrapScheme {
    std::size_t groups = 80;
    std::size_t subsample = 40;
    std::size_t repeats = 10;
};

struct BootstrapResult {
    double mean = 0.0;
    double std = 0.0;
    std::vector<double> samples;
};

inline void validate_scheme(const BootstrapScheme& scheme, std::size_t available_groups) {
    if (scheme.groups == 0 || scheme.subsample == 0 || scheme.repeats == 0 || scheme.subsample > scheme.groups) {
        throw Error(ErrorCode::InvalidArgument, "bootstrap scheme needs 0 < subsample <= groups and repeats > 0");
    }
    if (available_groups < scheme.groups) {
        throw Error(ErrorCode::InsufficientShots, "only " + std::to_string(available_groups) + " of " +
                                                      std::to_string(scheme.groups) + " groups available");
    }
}

/// The `repeats` random `subsample`-of-`groups` selections, each sorted ascending.
inline std::vector<std::vector<std::size_t>> bootstrap_picks(std::size_t available_groups,
                                                             const BootstrapScheme& scheme, std::uint64_t seed) {
    validate_scheme(scheme, available_groups);
    std::vector<std::vector<std::size_t>> picks;
    std::vector<std::size_t> pool(scheme.groups);
    for (std::size_t r = 0; r < scheme.repeats; ++r) {
        RandomStream rng(seed, stream_tag(StreamPurpose::Bootstrap, 0), static_cast<std::uint32_t>(r));
        for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = i;
        for (std::size_t i = 0; i < scheme.subsample; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(rng.below(pool.size() - i));
            std::swap(pool[i], pool[j]);
        }
        std::vector<std::size_t> pick(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(scheme.subsample));
        std::sort(pick.begin(), pick.end());
        picks.push_back(std::move(pick));
    }
    return picks;
}

/// Mean and sample standard deviation.
inline BootstrapResult summarize(std::vector<double> samples) {
    BootstrapResult result;
    result.samples = std::move(samples);
    if (result.samples.empty()) return result;
    double sum = 0.0;
    for (double v : result.samples) sum += v;
    result.mean = sum / static_cast<double>(result.samples.size());
    double ss = 0.0;
    for (double v : result.samples) ss += (v - result.mean) * (v - result.mean);
    result.std = result.samples.size() > 1 ? std::sqrt(ss / static_cast<double>(result.samples.size() - 1)) : 0.0;
    return result;
}

/// Evaluates `reducer` on `repeats` random `subsample`-of-`groups` selections.
/// The reducer receives the selected group indices in ascending order.
template <class Reducer>
BootstrapResult bootstrap_groups(std::size_t available_groups, const BootstrapScheme& scheme, std::uint64_t seed,
                                 Reducer&& reducer) {
    std::vector<double> samples;
    for (const auto& pick : bootstrap_picks(available_groups, scheme, seed)) samples.push_back(reducer(pick));
    return summarize(std::move(samples));
}

/// Bootstrap over grouped records of one direction; the reducer sees the merged record.
template <class Reducer>
BootstrapResult bootstrap_groups(const std::vector<ShotRecord>& groups, const BootstrapScheme& scheme,
                                 std::uint64_t seed, Reducer&& reducer) {
    for (const auto& g : groups)
        if (g.shots == 0) throw Error(ErrorCode::InsufficientShots, "empty group in bootstrap");
    return bootstrap_groups(groups.size(), scheme, seed, [&](const std::vector<std::size_t>& pick) {
        std::vector<const ShotRecord*> parts;
        for (std::size_t i : pick) parts.push_back(&groups[i]);
        return reducer(merge_records(parts));
    });
}

}  // namespace spinsq
