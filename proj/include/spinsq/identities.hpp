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

/// Covariances and commutator expectations of the nine collective observables
/// (J_x, J_y, J_z, J_x^2, J_y^2, J_z^2, J_xy^2, J_yz^2, J_zx^2), written purely in
/// terms of moments <J_d^k> along the 19 measurement directions.

#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "spinsq/error.hpp"
#include "spinsq/measurement.hpp"

namespace spinsq {

enum class Observable : int { x, y, z, x2, y2, z2, xy2, yz2, zx2 };

inline constexpr int kObservableCount = 9;

inline std::string observable_label(Observable o) {
    static const char* names[] = {"J_x", "J_y", "J_z", "J_x^2", "J_y^2", "J_z^2", "J_xy^2", "J_yz^2", "J_zx^2"};
    return names[static_cast<int>(o)];
}

inline bool is_linear(Observable o) { return static_cast<int>(o) < 3; }

/// Measurement direction and power that realise an observable as J_d^power.
inline std::pair<DirectionId, int> observable_direction(Observable o) {
    switch (o) {
        case Observable::x: return {DirectionId::x, 1};
        case Observable::y: return {DirectionId::y, 1};
        case Observable::z: return {DirectionId::z, 1};
        case Observable::x2: return {DirectionId::x, 2};
        case Observable::y2: return {DirectionId::y, 2};
        case Observable::z2: return {DirectionId::z, 2};
        case Observable::xy2: return {DirectionId::xy, 2};
        case Observable::yz2: return {DirectionId::yz, 2};
        case Observable::zx2: return {DirectionId::zx, 2};
    }
    return {DirectionId::x, 1};
}

enum class IdentityKind { Covariance, Commutator };

/// One entry of the catalogue: cov(a, b) or -i<[a, b]> with a before b in Observable order.
struct IdentityEntry {
    IdentityKind kind;
    Observable a;
    Observable b;

    std::string name() const {
        const std::string args = observable_label(a) + "," + observable_label(b);
        return kind == IdentityKind::Covariance ? "cov(" + args + ")" : "-i<[" + args + "]>";
    }
};

/// All 45 covariance and 36 commutator entries (upper triangle including the diagonal
/// for covariances; strictly upper for commutators).
inline std::vector<IdentityEntry> identity_catalogue() {
    std::vector<IdentityEntry> out;
    for (int i = 0; i < kObservableCount; ++i)
        for (int j = i; j < kObservableCount; ++j)
            out.push_back({IdentityKind::Covariance, static_cast<Observable>(i), static_cast<Observable>(j)});
    for (int i = 0; i < kObservableCount; ++i)
        for (int j = i + 1; j < kObservableCount; ++j)
            out.push_back({IdentityKind::Commutator, static_cast<Observable>(i), static_cast<Observable>(j)});
    return out;
}

/// Evaluates catalogue entries from a MomentTable, memoising intermediate entries.
/// Only the directions actually needed are read, so S1 works from six directions.
class MomentReconstruction {
public:
    explicit MomentReconstruction(const MomentTable& table) : t_(table) {}

    /// Adds `offset` to one entry wherever it is used; a self-test hook for the validator.
    void corrupt(const IdentityEntry& entry, double offset) { corruption_ = {entry, offset}; }

    double cov(Observable a, Observable b) {
        auto [i, j] = ordered(a, b);
        auto& slot = cov_[i][j];
        if (!slot) slot = cov_raw(static_cast<Observable>(i), static_cast<Observable>(j)) +
                          offset_for(IdentityKind::Covariance, i, j);
        return *slot;
    }

    /// -i<[a, b]>
    double com(Observable a, Observable b) {
        if (a == b) return 0.0;
        auto [i, j] = ordered(a, b);
        auto& slot = com_[i][j];
        if (!slot) slot = com_raw(static_cast<Observable>(i), static_cast<Observable>(j)) +
                          offset_for(IdentityKind::Commutator, i, j);
        return static_cast<int>(a) < static_cast<int>(b) ? *slot : -*slot;
    }

    double value(const IdentityEntry& e) {
        return e.kind == IdentityKind::Covariance ? cov(e.a, e.b) : com(e.a, e.b);
    }

    /// <J_d^k>
    double E(DirectionId d, int k = 1) const { return t_.moment(d, k); }

private:
    static std::pair<int, int> ordered(Observable a, Observable b) {
        const int i = static_cast<int>(a), j = static_cast<int>(b);
        return i <= j ? std::pair{i, j} : std::pair{j, i};
    }

    double offset_for(IdentityKind kind, int i, int j) const {
        if (!corruption_) return 0.0;
        const auto& [e, off] = *corruption_;
        return e.kind == kind && static_cast<int>(e.a) == i && static_cast<int>(e.b) == j ? off : 0.0;
    }

    double mean(Observable o) const {
        auto [d, k] = observable_direction(o);
        return E(d, k);
    }

    double cov_raw(Observable a, Observable b);
    double com_raw(Observable a, Observable b);

    const MomentTable& t_;
    std::array<std::array<std::optional<double>, kObservableCount>, kObservableCount> cov_{};
    std::array<std::array<std::optional<double>, kObservableCount>, kObservableCount> com_{};
    std::optional<std::pair<IdentityEntry, double>> corruption_;
};

inline double MomentReconstruction::cov_raw(Observable a, Observable b) {
    using D = DirectionId;
    using O = Observable;
    const double s2 = std::numbers::sqrt2, s3 = std::numbers::sqrt3;
    auto C = [this](O p, O q) { return cov(p, q); };
    auto K = [this](O p, O q) { return com(p, q); };
    (void)K;

    if (a == b) {
        auto [d, k] = observable_direction(a);
        const double m = E(d, k);
        return E(d, 2 * k) - m * m;
    }

    // Linear-linear.
    if (a == O::x && b == O::y) return E(D::xy, 2) - (E(D::x, 2) + E(D::y, 2)) / 2 - E(D::x) * E(D::y);
    if (a == O::x && b == O::z) return E(D::zx, 2) - (E(D::x, 2) + E(D::z, 2)) / 2 - E(D::x) * E(D::z);
    if (a == O::y && b == O::z) return E(D::yz, 2) - (E(D::y, 2) + E(D::z, 2)) / 2 - E(D::y) * E(D::z);

    // Linear-square, same axis.
    if (a == O::x && b == O::x2) return E(D::x, 3) - E(D::x) * E(D::x, 2);
    if (a == O::y && b == O::y2) return E(D::y, 3) - E(D::y) * E(D::y, 2);
    if (a == O::z && b == O::z2) return E(D::z, 3) - E(D::z) * E(D::z, 2);

    // Linear-square, different axes.
    if (a == O::x && b == O::y2)
        return (s2 * (E(D::xy, 3) + E(D::xyb, 3)) - E(D::x, 3) + E(D::x) / 2) / 3 - E(D::x) * E(D::y, 2);
    if (a == O::y && b == O::z2)
        return (s2 * (E(D::yz, 3) + E(D::yzb, 3)) - E(D::y, 3) + E(D::y) / 2) / 3 - E(D::y) * E(D::z, 2);
    if (a == O::z && b == O::x2)
        return (s2 * (E(D::zx, 3) + E(D::zxb, 3)) - E(D::z, 3) + E(D::z) / 2) / 3 - E(D::z) * E(D::x, 2);
    if (a == O::x && b == O::z2)
        return (s2 * (E(D::zx, 3) - E(D::zxb, 3)) - E(D::x, 3) + E(D::x) / 2) / 3 - E(D::x) * E(D::z, 2);
    if (a == O::y && b == O::x2)
        return (s2 * (E(D::xy, 3) - E(D::xyb, 3)) - E(D::y, 3) + E(D::y) / 2) / 3 - E(D::y) * E(D::x, 2);
    if (a == O::z && b == O::y2)
        return (s2 * (E(D::yz, 3) - E(D::yzb, 3)) - E(D::z, 3) + E(D::z) / 2) / 3 - E(D::z) * E(D::y, 2);

    // Square-square.
    if (a == O::x2 && b == O::y2)
        return (2 * (E(D::xy, 4) + E(D::xyb, 4)) - E(D::x, 4) - E(D::y, 4) - 3 * E(D::z, 2) + 2 * E(D::y, 2) +
                2 * E(D::x, 2)) / 6 - E(D::x, 2) * E(D::y, 2);
    if (a == O::x2 && b == O::z2)
        return (2 * (E(D::zx, 4) + E(D::zxb, 4)) - E(D::x, 4) - E(D::z, 4) - 3 * E(D::y, 2) + 2 * E(D::x, 2) +
                2 * E(D::z, 2)) / 6 - E(D::x, 2) * E(D::z, 2);
    if (a == O::y2 && b == O::z2)
        return (2 * (E(D::yz, 4) + E(D::yzb, 4)) - E(D::y, 4) - E(D::z, 4) - 3 * E(D::x, 2) + 2 * E(D::y, 2) +
                2 * E(D::z, 2)) / 6 - E(D::y, 2) * E(D::z, 2);

    // Linear-pair square sharing an axis.
    if (a == O::x && b == O::xy2)
        return (E(D::x, 3) + C(O::x, O::y2)) / 2 + C(O::y, O::x2) - E(D::y) / 4 + E(D::x) * E(D::y, 2) / 2 +
               E(D::y) * E(D::x, 2) - E(D::x) * E(D::xy, 2);
    if (a == O::x && b == O::zx2)
        return (E(D::x, 3) + C(O::x, O::z2)) / 2 + C(O::z, O::x2) - E(D::z) / 4 + E(D::x) * E(D::z, 2) / 2 +
               E(D::z) * E(D::x, 2) - E(D::x) * E(D::zx, 2);
    if (a == O::y && b == O::xy2)
        return (E(D::y, 3) + C(O::y, O::x2)) / 2 + C(O::x, O::y2) - E(D::x) / 4 + E(D::y) * E(D::x, 2) / 2 +
               E(D::x) * E(D::y, 2) - E(D::y) * E(D::xy, 2);
    if (a == O::y && b == O::yz2)
        return (E(D::y, 3) + C(O::y, O::z2)) / 2 + C(O::z, O::y2) - E(D::z) / 4 + E(D::y) * E(D::z, 2) / 2 +
               E(D::z) * E(D::y, 2) - E(D::y) * E(D::yz, 2);
    if (a == O::z && b == O::yz2)
        return (E(D::z, 3) + C(O::z, O::y2)) / 2 + C(O::y, O::z2) - E(D::y) / 4 + E(D::z) * E(D::y, 2) / 2 +
               E(D::y) * E(D::z, 2) - E(D::z) * E(D::yz, 2);
    if (a == O::z && b == O::zx2)
        return (E(D::z, 3) + C(O::z, O::x2)) / 2 + C(O::x, O::z2) - E(D::x) / 4 + E(D::z) * E(D::x, 2) / 2 +
               E(D::x) * E(D::z, 2) - E(D::z) * E(D::zx, 2);

    // Linear-pair square on the other two axes.
    if ((a == O::x && b == O::yz2) || (a == O::z && b == O::xy2) || (a == O::y && b == O::zx2)) {
        const double bracket = (3 * s3 * E(D::xyz, 3) - 2 * s2 * (E(D::xy, 3) + E(D::yz, 3) + E(D::zx, 3)) +
                                E(D::x, 3) + E(D::y, 3) + E(D::z, 3)) / 6;
        if (a == O::x)
            return (C(O::x, O::y2) + C(O::x, O::z2)) / 2 + bracket + E(D::x) * (E(D::y, 2) + E(D::z, 2)) / 2 -
                   E(D::x) * E(D::yz, 2);
        if (a == O::z)
            return (C(O::z, O::x2) + C(O::z, O::y2)) / 2 + bracket + E(D::z) * (E(D::x, 2) + E(D::y, 2)) / 2 -
                   E(D::z) * E(D::xy, 2);
        return (C(O::y, O::z2) + C(O::y, O::x2)) / 2 + bracket + E(D::y) * (E(D::x, 2) + E(D::z, 2)) / 2 -
               E(D::y) * E(D::zx, 2);
    }

    // Square-pair square sharing an axis.
    const double r3 = 1.0 / s3;
    if (a == O::x2 && b == O::xy2)
        return (E(D::x, 4) + C(O::x2, O::y2)) / 2 + 3 * (E(D::xy, 4) - E(D::xyb, 4)) / 4 -
               (E(D::xyp, 4) - E(D::xybp, 4)) * r3 + E(D::x, 2) * E(D::y, 2) / 2 - E(D::x, 2) * E(D::xy, 2);
    if (a == O::y2 && b == O::yz2)
        return (E(D::y, 4) + C(O::y2, O::z2)) / 2 + 3 * (E(D::yz, 4) - E(D::yzb, 4)) / 4 -
               (E(D::yzp, 4) - E(D::yzbp, 4)) * r3 + E(D::y, 2) * E(D::z, 2) / 2 - E(D::y, 2) * E(D::yz, 2);
    if (a == O::z2 && b == O::zx2)
        return (E(D::z, 4) + C(O::x2, O::z2)) / 2 + 3 * (E(D::zx, 4) - E(D::zxb, 4)) / 4 -
               (E(D::zxp, 4) - E(D::zxbp, 4)) * r3 + E(D::z, 2) * E(D::x, 2) / 2 - E(D::z, 2) * E(D::zx, 2);
    if (a == O::x2 && b == O::zx2)
        return (E(D::x, 4) + C(O::x2, O::z2)) / 2 - (E(D::zx, 4) - E(D::zxb, 4)) / 4 +
               (E(D::zxp, 4) - E(D::zxbp, 4)) * r3 + E(D::z, 2) * E(D::x, 2) / 2 - E(D::x, 2) * E(D::zx, 2);
    if (a == O::y2 && b == O::xy2)
        return (E(D::y, 4) + C(O::x2, O::y2)) / 2 - (E(D::xy, 4) - E(D::xyb, 4)) / 4 +
               (E(D::xyp, 4) - E(D::xybp, 4)) * r3 + E(D::x, 2) * E(D::y, 2) / 2 - E(D::y, 2) * E(D::xy, 2);
    if (a == O::z2 && b == O::yz2)
        return (E(D::z, 4) + C(O::y2, O::z2)) / 2 - (E(D::yz, 4) - E(D::yzb, 4)) / 4 +
               (E(D::yzp, 4) - E(D::yzbp, 4)) * r3 + E(D::y, 2) * E(D::z, 2) / 2 - E(D::z, 2) * E(D::yz, 2);

    // Square-pair square on the other two axes.
    const double s4 = (E(D::x, 4) + E(D::y, 4) + E(D::z, 4)) / 12;
    if (a == O::x2 && b == O::yz2)
        return (C(O::x2, O::y2) + C(O::x2, O::z2)) / 2 + 3 * (E(D::xbyz, 4) + E(D::xyz, 4)) / 8 + s4 +
               5 * (2 * E(D::yz, 2) - E(D::y, 2) - E(D::z, 2)) / 12 -
               (2 * E(D::yz, 4) + E(D::xy, 4) + E(D::xyb, 4) + E(D::zx, 4) + E(D::zxb, 4)) / 6 +
               E(D::x, 2) * (E(D::y, 2) + E(D::z, 2)) / 2 - E(D::x, 2) * E(D::yz, 2);
    if (a == O::y2 && b == O::zx2)
        return (C(O::x2, O::y2) + C(O::y2, O::z2)) / 2 + 3 * (E(D::xybz, 4) + E(D::xyz, 4)) / 8 + s4 +
               5 * (2 * E(D::zx, 2) - E(D::z, 2) - E(D::x, 2)) / 12 -
               (2 * E(D::zx, 4) + E(D::xy, 4) + E(D::xyb, 4) + E(D::yz, 4) + E(D::yzb, 4)) / 6 +
               E(D::y, 2) * (E(D::z, 2) + E(D::x, 2)) / 2 - E(D::y, 2) * E(D::zx, 2);
    if (a == O::z2 && b == O::xy2)
        return (C(O::x2, O::z2) + C(O::y2, O::z2)) / 2 + 3 * (E(D::xyzb, 4) + E(D::xyz, 4)) / 8 + s4 +
               5 * (2 * E(D::xy, 2) - E(D::x, 2) - E(D::y, 2)) / 12 -
               (2 * E(D::xy, 4) + E(D::yz, 4) + E(D::yzb, 4) + E(D::zx, 4) + E(D::zxb, 4)) / 6 +
               E(D::z, 2) * (E(D::x, 2) + E(D::y, 2)) / 2 - E(D::z, 2) * E(D::xy, 2);

    // Pair square-pair square.
    const double sc = (C(O::x2, O::y2) + C(O::y2, O::z2) + C(O::x2, O::z2)) / 4;
    const double pp = (E(D::x, 2) * E(D::y, 2) + E(D::y, 2) * E(D::z, 2) + E(D::z, 2) * E(D::x, 2)) / 4;
    if (a == O::xy2 && b == O::yz2)
        return (C(O::x2, O::yz2) + C(O::y2, O::yz2) + C(O::y2, O::xy2) + C(O::z2, O::xy2)) / 2 - sc +
               3 * (E(D::xyz, 4) + E(D::xybz, 4)) / 8 + (E(D::x, 4) - 2 * E(D::y, 4) + E(D::z, 4)) / 12 -
               (2 * E(D::zx, 4) + E(D::yz, 4) + E(D::yzb, 4) + E(D::xy, 4) + E(D::xyb, 4)) / 6 -
               5 * (2 * E(D::zx, 2) - E(D::x, 2) - E(D::z, 2)) / 24 +
               ((E(D::x, 2) + E(D::y, 2)) * E(D::yz, 2) + (E(D::y, 2) + E(D::z, 2)) * E(D::xy, 2)) / 2 - pp -
               E(D::xy, 2) * E(D::yz, 2);
    if (a == O::xy2 && b == O::zx2)
        return (C(O::x2, O::zx2) + C(O::y2, O::zx2) + C(O::z2, O::xy2) + C(O::x2, O::xy2)) / 2 - sc +
               3 * (E(D::xyz, 4) + E(D::xbyz, 4)) / 8 + (-2 * E(D::x, 4) + E(D::y, 4) + E(D::z, 4)) / 12 -
               (2 * E(D::yz, 4) + E(D::zx, 4) + E(D::zxb, 4) + E(D::xy, 4) + E(D::xyb, 4)) / 6 -
               5 * (2 * E(D::yz, 2) - E(D::y, 2) - E(D::z, 2)) / 24 +
               ((E(D::x, 2) + E(D::y, 2)) * E(D::zx, 2) + (E(D::z, 2) + E(D::x, 2)) * E(D::xy, 2)) / 2 - pp -
               E(D::xy, 2) * E(D::zx, 2);
    if (a == O::yz2 && b == O::zx2)
        return (C(O::y2, O::zx2) + C(O::z2, O::zx2) + C(O::z2, O::yz2) + C(O::x2, O::yz2)) / 2 - sc +
               3 * (E(D::xyz, 4) + E(D::xyzb, 4)) / 8 + (E(D::x, 4) + E(D::y, 4) - 2 * E(D::z, 4)) / 12 -
               (2 * E(D::xy, 4) + E(D::yz, 4) + E(D::yzb, 4) + E(D::zx, 4) + E(D::zxb, 4)) / 6 -
               5 * (2 * E(D::xy, 2) - E(D::x, 2) - E(D::y, 2)) / 24 +
               ((E(D::y, 2) + E(D::z, 2)) * E(D::zx, 2) + (E(D::z, 2) + E(D::x, 2)) * E(D::yz, 2)) / 2 - pp -
               E(D::yz, 2) * E(D::zx, 2);

    throw Error(ErrorCode::InvalidArgument, "no covariance identity for " + observable_label(a) + ", " +
                                                observable_label(b));
}

inline double MomentReconstruction::com_raw(Observable a, Observable b) {
    using D = DirectionId;
    using O = Observable;
    const double s2 = std::numbers::sqrt2, s3 = std::numbers::sqrt3;
    auto C = [this](O p, O q) { return cov(p, q); };
    auto K = [this](O p, O q) { return com(p, q); };

    if (a == O::x && b == O::y) return E(D::z);
    if (a == O::x && b == O::z) return -E(D::y);
    if (a == O::y && b == O::z) return E(D::x);

    // [J_a, J_a^2] = 0
    if ((a == O::x && b == O::x2) || (a == O::y && b == O::y2) || (a == O::z && b == O::z2)) return 0.0;

    if (a == O::x && b == O::y2) return 2 * E(D::yz, 2) - E(D::y, 2) - E(D::z, 2);
    if (a == O::x && b == O::z2) return 2 * E(D::yzb, 2) - E(D::y, 2) - E(D::z, 2);
    if (a == O::y && b == O::z2) return 2 * E(D::zx, 2) - E(D::z, 2) - E(D::x, 2);
    if (a == O::y && b == O::x2) return 2 * E(D::zxb, 2) - E(D::z, 2) - E(D::x, 2);
    if (a == O::z && b == O::x2) return 2 * E(D::xy, 2) - E(D::x, 2) - E(D::y, 2);
    if (a == O::z && b == O::y2) return 2 * E(D::xyb, 2) - E(D::x, 2) - E(D::y, 2);

    if ((a == O::x2 && b == O::y2) || (a == O::x2 && b == O::z2) || (a == O::y2 && b == O::z2)) {
        const double v = 2 * s3 * E(D::xyz, 3) - 4 * s2 * (E(D::xy, 3) + E(D::yz, 3) + E(D::zx, 3)) / 3 +
                         2 * (E(D::x, 3) + E(D::y, 3) + E(D::z, 3)) / 3;
        return a == O::x2 && b == O::z2 ? -v : v;
    }

    if (a == O::x && b == O::xy2) return (K(O::x, O::y2) - K(O::y, O::x2)) / 2;
    if (a == O::x && b == O::zx2) return (K(O::x, O::z2) - K(O::z, O::x2)) / 2;
    if (a == O::y && b == O::xy2) return (K(O::y, O::x2) - K(O::x, O::y2)) / 2;
    if (a == O::y && b == O::yz2) return (K(O::y, O::z2) - K(O::z, O::y2)) / 2;
    if (a == O::z && b == O::yz2) return (K(O::z, O::y2) - K(O::y, O::z2)) / 2;
    if (a == O::z && b == O::zx2) return (K(O::z, O::x2) - K(O::x, O::z2)) / 2;

    if (a == O::x && b == O::yz2) return (K(O::x, O::y2) + K(O::x, O::z2)) / 2 + E(D::z, 2) - E(D::y, 2);
    if (a == O::y && b == O::zx2) return (K(O::y, O::z2) + K(O::y, O::x2)) / 2 + E(D::x, 2) - E(D::z, 2);
    if (a == O::z && b == O::xy2) return (K(O::z, O::x2) + K(O::z, O::y2)) / 2 + E(D::y, 2) - E(D::x, 2);

    if (a == O::x2 && b == O::xy2)
        return 2 * s2 * (E(D::zx, 3) + E(D::zxb, 3)) / 3 - 2 * E(D::z, 3) / 3 - E(D::z) / 6 + K(O::x2, O::y2) / 2;
    if (a == O::y2 && b == O::yz2)
        return 2 * s2 * (E(D::xy, 3) + E(D::xyb, 3)) / 3 - 2 * E(D::x, 3) / 3 - E(D::x) / 6 + K(O::y2, O::z2) / 2;
    if (a == O::z2 && b == O::zx2)
        return 2 * s2 * (E(D::yz, 3) + E(D::yzb, 3)) / 3 - 2 * E(D::y, 3) / 3 - E(D::y) / 6 + K(O::z2, O::x2) / 2;
    if (a == O::x2 && b == O::zx2)
        return -2 * s2 * (E(D::xy, 3) - E(D::xyb, 3)) / 3 + 2 * E(D::y, 3) / 3 + E(D::y) / 6 + K(O::x2, O::z2) / 2;
    if (a == O::y2 && b == O::xy2)
        return -2 * s2 * (E(D::yz, 3) - E(D::yzb, 3)) / 3 + 2 * E(D::z, 3) / 3 + E(D::z) / 6 + K(O::y2, O::x2) / 2;
    if (a == O::z2 && b == O::yz2)
        return -2 * s2 * (E(D::zx, 3) - E(D::zxb, 3)) / 3 + 2 * E(D::x, 3) / 3 + E(D::x) / 6 + K(O::z2, O::y2) / 2;

    if (a == O::x2 && b == O::yz2)
        return 2 * s2 * (E(D::zx, 3) - E(D::zxb, 3) - E(D::xy, 3) - E(D::xyb, 3)) / 3 + K(O::x2, O::y2) / 2 +
               K(O::x2, O::z2) / 2;
    if (a == O::y2 && b == O::zx2)
        return 2 * s2 * (E(D::xy, 3) - E(D::xyb, 3) - E(D::yz, 3) - E(D::yzb, 3)) / 3 + K(O::y2, O::x2) / 2 +
               K(O::y2, O::z2) / 2;
    if (a == O::z2 && b == O::xy2)
        return 2 * s2 * (E(D::yz, 3) - E(D::yzb, 3) - E(D::zx, 3) - E(D::zxb, 3)) / 3 + K(O::z2, O::x2) / 2 +
               K(O::z2, O::y2) / 2;

    if (a == O::xy2 && b == O::yz2)
        return (K(O::x2, O::yz2) + K(O::y2, O::yz2) - K(O::y2, O::xy2) - K(O::z2, O::xy2)) / 2 +
               (-K(O::x2, O::y2) - K(O::x2, O::z2) - K(O::y2, O::z2)) / 4 + C(O::y, O::z2) + C(O::y, O::x2) -
               E(D::y, 3) - E(D::y) / 4 + E(D::y) * (E(D::z, 2) + E(D::x, 2));
    if (a == O::xy2 && b == O::zx2)
        return (K(O::x2, O::zx2) + K(O::y2, O::zx2) - K(O::z2, O::xy2) - K(O::x2, O::xy2)) / 2 +
               (-K(O::x2, O::z2) - K(O::y2, O::z2) - K(O::y2, O::x2)) / 4 - C(O::x, O::y2) - C(O::x, O::z2) +
               E(D::x, 3) + E(D::x) / 4 - E(D::x) * (E(D::y, 2) + E(D::z, 2));
    if (a == O::yz2 && b == O::zx2)
        return (K(O::y2, O::zx2) + K(O::z2, O::zx2) - K(O::x2, O::yz2) - K(O::z2, O::yz2)) / 2 +
               (-K(O::y2, O::z2) - K(O::y2, O::x2) - K(O::z2, O::x2)) / 4 + C(O::z, O::x2) + C(O::z, O::y2) -
               E(D::z, 3) - E(D::z) / 4 + E(D::z) * (E(D::x, 2) + E(D::y, 2));

    throw Error(ErrorCode::InvalidArgument, "no commutator identity for " + observable_label(a) + ", " +
                                                observable_label(b));
}

}  // namespace spinsq
