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

/// Collective spin algebra for N spin-1/2 particles.
///
/// Two representations are supported:
///  - Full: the 2^N computational basis. Basis index bit (N-1-q) holds qubit q,
///    so the bitstring "b_0 b_1 ... b_{N-1}" reads the index in binary. Bit value 0
///    is spin up (J_z = +1/2).
///  - Dicke: the N+1 symmetric states |j, m> with j = N/2, stored in DESCENDING
///    order of m: index i holds m = j - i. Index i is therefore also the number of
///    qubits in |1>.
///
/// Rotations follow R_n(a) = exp(-i a n.J).

#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <shared_mutex>
#include <string>
#include <utility>
#include <vector>

#include "spinsq/error.hpp"

namespace spinsq {

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using SparseOp = Eigen::SparseMatrix<cplx>;

inline constexpr int kMaxFullQubits = 14;
inline constexpr int kMaxDickeQubits = 512;

namespace detail {

inline double log_binomial(int n, int k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

inline int popcount(std::uint64_t v) { return __builtin_popcountll(v); }

}  // namespace detail

/// Unit vector in R^3.
class Direction {
public:
    Direction(double x, double y, double z) : n_(x, y, z) {
        if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z) ||
            std::abs(n_.norm() - 1.0) > 1e-12) {
            throw Error(ErrorCode::InvalidDirection, "direction is not a unit vector");
        }
    }

    /// Normalises an arbitrary nonzero vector.
    static Direction normalized(double x, double y, double z) {
        const double len = std::sqrt(x * x + y * y + z * z);
        if (!(len > 0.0) || !std::isfinite(len)) {
            throw Error(ErrorCode::InvalidDirection, "cannot normalise a zero vector");
        }
        return Direction(x / len, y / len, z / len, Unchecked{});
    }

    static Direction spherical(double theta, double phi) {
        return normalized(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
                          std::cos(theta));
    }

    static Direction x_axis() { return {1.0, 0.0, 0.0}; }
    static Direction y_axis() { return {0.0, 1.0, 0.0}; }
    static Direction z_axis() { return {0.0, 0.0, 1.0}; }

    double x() const { return n_.x(); }
    double y() const { return n_.y(); }
    double z() const { return n_.z(); }
    const Eigen::Vector3d& vec() const { return n_; }

    /// Polar angle in [0, pi].
    double theta() const { return std::acos(std::clamp(n_.z(), -1.0, 1.0)); }
    /// Azimuth in (-pi, pi].
    double phi() const { return std::atan2(n_.y(), n_.x()); }

    Direction operator-() const { return Direction(-x(), -y(), -z(), Unchecked{}); }

private:
    struct Unchecked {};
    Direction(double x, double y, double z, Unchecked) : n_(x, y, z) {}

    Eigen::Vector3d n_;
};

class Representation {
public:
    enum class Kind { Full, Dicke };

    static Representation full(int qubits) { return Representation(Kind::Full, qubits); }
    static Representation dicke(int qubits) { return Representation(Kind::Dicke, qubits); }

    Kind kind() const { return kind_; }
    int qubits() const { return qubits_; }
    bool is_full() const { return kind_ == Kind::Full; }
    bool is_dicke() const { return kind_ == Kind::Dicke; }
    double spin() const { return qubits_ / 2.0; }

    std::size_t dimension() const {
        return is_full() ? (std::size_t{1} << qubits_) : static_cast<std::size_t>(qubits_ + 1);
    }

    friend bool operator==(const Representation&, const Representation&) = default;

private:
    Representation(Kind kind, int qubits) : kind_(kind), qubits_(qubits) {
        if (qubits < 1) throw Error(ErrorCode::InvalidArgument, "qubit count must be >= 1");
        const int cap = kind == Kind::Full ? kMaxFullQubits : kMaxDickeQubits;
        if (qubits > cap) {
            throw Error(ErrorCode::CapacityExceeded,
                        "N=" + std::to_string(qubits) + " exceeds the cap of " + std::to_string(cap) +
                            (kind == Kind::Full ? " for the full basis" : " for the Dicke basis"));
        }
    }

    Kind kind_;
    int qubits_;
};

inline std::string to_string(Representation::Kind kind) {
    return kind == Representation::Kind::Full ? "full" : "dicke";
}

/// Normalised pure state.
class StateVector {
public:
    StateVector(Representation repr, CVector amplitudes)
        : repr_(repr), amps_(std::move(amplitudes)) {
        if (static_cast<std::size_t>(amps_.size()) != repr_.dimension()) {
            throw Error(ErrorCode::InvalidArgument, "amplitude vector has the wrong dimension");
        }
        const double norm = amps_.norm();
        if (!(norm > 0.0) || !std::isfinite(norm)) {
            throw Error(ErrorCode::InvalidArgument, "state has zero or non-finite norm");
        }
        amps_ /= norm;
    }

    const Representation& representation() const { return repr_; }
    const CVector& amplitudes() const { return amps_; }
    int qubits() const { return repr_.qubits(); }
    std::size_t dimension() const { return repr_.dimension(); }

    /// <this|other>
    cplx overlap(const StateVector& other) const {
        if (!(repr_ == other.repr_)) throw Error(ErrorCode::ReprMismatch, "overlap across representations");
        return amps_.dot(other.amps_);
    }

    double fidelity(const StateVector& other) const { return std::norm(overlap(other)); }

private:
    Representation repr_;
    CVector amps_;
};

/// Hermitian collective operator with a lazily filled cache of its integer powers.
class CollectiveOperator {
public:
    CollectiveOperator(Representation repr, SparseOp matrix, std::string label)
        : repr_(repr), matrix_(std::move(matrix)), label_(std::move(label)),
          cache_(std::make_shared<PowerCache>()) {
        matrix_.makeCompressed();
    }

    const Representation& representation() const { return repr_; }
    const SparseOp& matrix() const { return matrix_; }
    const std::string& label() const { return label_; }

    CVector apply(const CVector& v) const { return matrix_ * v; }

    /// matrix^k for k >= 1. Safe for concurrent callers; copies share the cache.
    const SparseOp& power(int k) const {
        if (k < 1) throw Error(ErrorCode::InvalidArgument, "operator power must be >= 1");
        if (k == 1) return matrix_;
        {
            std::shared_lock lock(cache_->mu);
            if (auto it = cache_->powers.find(k); it != cache_->powers.end()) return it->second;
        }
        SparseOp product = (power(k - 1) * matrix_).pruned();
        std::unique_lock lock(cache_->mu);
        return cache_->powers.try_emplace(k, std::move(product)).first->second;
    }

    CMatrix dense() const { return CMatrix(matrix_); }

private:
    struct PowerCache {
        std::shared_mutex mu;
        std::map<int, SparseOp> powers;
    };

    Representation repr_;
    SparseOp matrix_;
    std::string label_;
    std::shared_ptr<PowerCache> cache_;
};

inline std::string direction_label(const Direction& n) {
    if (n.vec() == Eigen::Vector3d(1, 0, 0)) return "J_x";
    if (n.vec() == Eigen::Vector3d(0, 1, 0)) return "J_y";
    if (n.vec() == Eigen::Vector3d(0, 0, 1)) return "J_z";
    char buf[96];
    std::snprintf(buf, sizeof buf, "J_(%.6g,%.6g,%.6g)", n.x(), n.y(), n.z());
    return buf;
}

/// J_n = n_x J_x + n_y J_y + n_z J_z.
inline CollectiveOperator collective_operator(const Direction& n, Representation repr,
                                              std::string label = {}) {
    const int qubits = repr.qubits();
    const auto dim = static_cast<Eigen::Index>(repr.dimension());
    const cplx lower(n.x() / 2.0, n.y() / 2.0);  // <1|n.sigma|0>/2 and the J_- coefficient
    const cplx raise = std::conj(lower);
    std::vector<Eigen::Triplet<cplx>> triplets;

    if (repr.is_full()) {
        triplets.reserve(static_cast<std::size_t>(dim) * (qubits + 1));
        for (Eigen::Index s = 0; s < dim; ++s) {
            const int ones = detail::popcount(static_cast<std::uint64_t>(s));
            const double jz = (qubits - 2 * ones) / 2.0;
            if (n.z() != 0.0) triplets.emplace_back(s, s, n.z() * jz);
            if (n.x() == 0.0 && n.y() == 0.0) continue;
            for (int q = 0; q < qubits; ++q) {
                const Eigen::Index bit = Eigen::Index{1} << (qubits - 1 - q);
                const Eigen::Index t = s ^ bit;
                triplets.emplace_back(t, s, (s & bit) ? raise : lower);
            }
        }
    } else {
        const double j = repr.spin();
        triplets.reserve(static_cast<std::size_t>(3 * dim));
        for (Eigen::Index i = 0; i < dim; ++i) {
            const double m = j - static_cast<double>(i);
            if (n.z() != 0.0) triplets.emplace_back(i, i, n.z() * m);
            if (i > 0 && (n.x() != 0.0 || n.y() != 0.0)) {
                // <m+1| J_+ |m>
                const double c = std::sqrt(j * (j + 1.0) - m * (m + 1.0));
                triplets.emplace_back(i - 1, i, raise * c);
                triplets.emplace_back(i, i - 1, lower * c);
            }
        }
    }
    SparseOp mat(dim, dim);
    mat.setFromTriplets(triplets.begin(), triplets.end());
    if (label.empty()) label = direction_label(n);
    return CollectiveOperator(repr, std::move(mat), std::move(label));
}

struct SpinMatrices {
    CollectiveOperator jx, jy, jz;
};

inline SpinMatrices spin_matrices(Representation repr) {
    return {collective_operator(Direction::x_axis(), repr), collective_operator(Direction::y_axis(), repr),
            collective_operator(Direction::z_axis(), repr)};
}

/// Product state with every spin along `n`; in the Dicke basis the spin-j coherent state.
inline StateVector coherent_spin_state(int qubits, const Direction& n, Representation::Kind kind) {
    const Representation repr =
        kind == Representation::Kind::Full ? Representation::full(qubits) : Representation::dicke(qubits);
    const double half = n.theta() / 2.0;
    const double c = std::cos(half);
    const double s = std::sin(half);
    const double phi = n.phi();
    CVector amps(static_cast<Eigen::Index>(repr.dimension()));

    auto weight = [&](int ones, int zeros) -> double {
        // c^zeros * s^ones with 0^0 = 1
        const double a = zeros == 0 ? 1.0 : std::pow(c, zeros);
        const double b = ones == 0 ? 1.0 : std::pow(s, ones);
        return a * b;
    };

    if (repr.is_full()) {
        for (Eigen::Index idx = 0; idx < amps.size(); ++idx) {
            const int ones = detail::popcount(static_cast<std::uint64_t>(idx));
            amps[idx] = weight(ones, qubits - ones) * std::polar(1.0, ones * phi);
        }
    } else {
        for (int k = 0; k <= qubits; ++k) {
            double mag = 0.0;
            if ((k == 0 || s > 0.0) && (k == qubits || c > 0.0)) {
                double log_mag = 0.5 * detail::log_binomial(qubits, k);
                if (qubits - k > 0) log_mag += (qubits - k) * std::log(c);
                if (k > 0) log_mag += k * std::log(s);
                mag = std::exp(log_mag);
            }
            amps[k] = mag * std::polar(1.0, k * phi);
        }
    }
    return StateVector(repr, std::move(amps));
}

inline StateVector coherent_spin_state(int qubits, const Direction& n, Representation repr) {
    return coherent_spin_state(qubits, n, repr.kind());
}

/// exp(-i angle J_axis)|psi>.
inline StateVector rotate(const StateVector& state, const Direction& axis, double angle) {
    if (!std::isfinite(angle)) throw Error(ErrorCode::InvalidArgument, "rotation angle must be finite");
    const Representation& repr = state.representation();
    if (angle == 0.0) return state;

    if (repr.is_full()) {
        const double c = std::cos(angle / 2.0);
        const double s = std::sin(angle / 2.0);
        // cos(a/2) I - i sin(a/2) n.sigma on (|0>, |1>)
        const cplx u00(c, -s * axis.z());
        const cplx u11(c, s * axis.z());
        const cplx u01 = cplx(0.0, -s) * cplx(axis.x(), -axis.y());
        const cplx u10 = cplx(0.0, -s) * cplx(axis.x(), axis.y());
        CVector amps = state.amplitudes();
        const int qubits = repr.qubits();
        const auto dim = amps.size();
        for (int q = 0; q < qubits; ++q) {
            const Eigen::Index bit = Eigen::Index{1} << (qubits - 1 - q);
            for (Eigen::Index idx = 0; idx < dim; ++idx) {
                if (idx & bit) continue;
                const cplx a0 = amps[idx];
                const cplx a1 = amps[idx | bit];
                amps[idx] = u00 * a0 + u01 * a1;
                amps[idx | bit] = u10 * a0 + u11 * a1;
            }
        }
        return StateVector(repr, std::move(amps));
    }

    const CMatrix gen = collective_operator(axis, repr).dense();
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(gen);
    const CMatrix& vecs = eig.eigenvectors();
    CVector coeffs = vecs.adjoint() * state.amplitudes();
    for (Eigen::Index k = 0; k < coeffs.size(); ++k) {
        coeffs[k] *= std::polar(1.0, -angle * eig.eigenvalues()[k]);
    }
    return StateVector(repr, vecs * coeffs);
}

/// <psi| op^power |psi> for power in 1..4.
inline double expectation(const StateVector& state, const CollectiveOperator& op, int power) {
    if (!(state.representation() == op.representation())) {
        throw Error(ErrorCode::ReprMismatch, "state and operator live in different representations");
    }
    if (power < 1 || power > 4) throw Error(ErrorCode::InvalidArgument, "power must be in 1..4");
    CVector half = state.amplitudes();
    for (int k = 0; k < power / 2; ++k) half = op.apply(half);
    cplx value = (power % 2 == 0) ? cplx(half.squaredNorm(), 0.0) : half.dot(op.apply(half));
    const double scale = std::max(1.0, std::abs(value.real()));
    if (std::abs(value.imag()) > 1e-10 * scale) {
        throw Error(ErrorCode::InvalidArgument, "expectation of Hermitian operator is not real");
    }
    return value.real();
}

struct DickeProjection {
    StateVector state;
    double weight;  ///< squared norm of the symmetric component before renormalisation
};

namespace detail {

inline CVector symmetric_components(const StateVector& full) {
    const int qubits = full.qubits();
    CVector comp = CVector::Zero(qubits + 1);
    const CVector& amps = full.amplitudes();
    for (Eigen::Index idx = 0; idx < amps.size(); ++idx) {
        comp[detail::popcount(static_cast<std::uint64_t>(idx))] += amps[idx];
    }
    for (int k = 0; k <= qubits; ++k) comp[k] *= std::exp(-0.5 * log_binomial(qubits, k));
    return comp;
}

}  // namespace detail

/// Projects a full-basis state onto the symmetric sector.
inline DickeProjection dicke_project(const StateVector& full, double tolerance = 1e-8) {
    if (!full.representation().is_full()) {
        throw Error(ErrorCode::ReprMismatch, "dicke_project expects a full-basis state");
    }
    CVector comp = detail::symmetric_components(full);
    const double weight = comp.squaredNorm();
    if (weight < 1.0 - tolerance) {
        throw Error(ErrorCode::NonSymmetricState,
                    "symmetric weight " + std::to_string(weight) + " is below 1 - " + std::to_string(tolerance));
    }
    return {StateVector(Representation::dicke(full.qubits()), std::move(comp)), weight};
}

/// Symmetric weight without the tolerance check.
inline double symmetric_weight(const StateVector& full) {
    return detail::symmetric_components(full).squaredNorm();
}

/// Inverse of dicke_project: writes a Dicke state into the full basis.
inline StateVector dicke_embed(const StateVector& dicke) {
    if (!dicke.representation().is_dicke()) {
        throw Error(ErrorCode::ReprMismatch, "dicke_embed expects a Dicke state");
    }
    const int qubits = dicke.qubits();
    const Representation repr = Representation::full(qubits);
    CVector amps(static_cast<Eigen::Index>(repr.dimension()));
    std::vector<double> scale(qubits + 1);
    for (int k = 0; k <= qubits; ++k) scale[k] = std::exp(-0.5 * detail::log_binomial(qubits, k));
    for (Eigen::Index idx = 0; idx < amps.size(); ++idx) {
        const int k = detail::popcount(static_cast<std::uint64_t>(idx));
        amps[idx] = dicke.amplitudes()[k] * scale[k];
    }
    return StateVector(repr, std::move(amps));
}

/// |j, m> in the Dicke basis.
inline StateVector dicke_state(int qubits, int excitations) {
    const Representation repr = Representation::dicke(qubits);
    if (excitations < 0 || excitations > qubits) {
        throw Error(ErrorCode::InvalidArgument, "excitation number out of range");
    }
    CVector amps = CVector::Zero(qubits + 1);
    amps[excitations] = 1.0;
    return StateVector(repr, std::move(amps));
}

/// (|0...0> + |1...1>)/sqrt(2).
inline StateVector ghz_state(int qubits, Representation::Kind kind) {
    const Representation repr =
        kind == Representation::Kind::Full ? Representation::full(qubits) : Representation::dicke(qubits);
    CVector amps = CVector::Zero(static_cast<Eigen::Index>(repr.dimension()));
    amps[0] = 1.0;
    amps[amps.size() - 1] = 1.0;
    return StateVector(repr, std::move(amps));
}

}  // namespace spinsq
