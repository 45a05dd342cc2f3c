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

/// Metrological squeezing from covariance and commutator matrices.
///
/// For a family S = (S_1..S_D) with S_1..S_3 = J_x, J_y, J_z:
///   V_ij = <{S_i,S_j}>/2 - <S_i><S_j>,  C_ij = -i<[S_i,S_j]>,
///   M = C^T V^{-1} C, and xi^2 = N / lambda_max of the leading 3x3 block of M.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "spinsq/error.hpp"
#include "spinsq/identities.hpp"
#include "spinsq/measurement.hpp"
#include "spinsq/spin_core.hpp"

namespace spinsq {

class OperatorFamily {
public:
    enum class Preset { S1, Sexp, SexpMain, S2, Custom };

    OperatorFamily(std::vector<Observable> members, Preset preset = Preset::Custom)
        : members_(std::move(members)), preset_(preset) {
        if (members_.size() < 3 || members_[0] != Observable::x || members_[1] != Observable::y ||
            members_[2] != Observable::z) {
            throw Error(ErrorCode::InvalidArgument, "an operator family must start with J_x, J_y, J_z");
        }
        for (std::size_t i = 0; i < members_.size(); ++i)
            for (std::size_t j = i + 1; j < members_.size(); ++j)
                if (members_[i] == members_[j]) throw Error(ErrorCode::InvalidArgument, "duplicate family member");
    }

    static OperatorFamily s1() { return {{Observable::x, Observable::y, Observable::z}, Preset::S1}; }

    /// Seven operators ending in J_xy^2, J_yz^2.
    static OperatorFamily sexp() {
        using O = Observable;
        return {{O::x, O::y, O::z, O::x2, O::y2, O::xy2, O::yz2}, Preset::Sexp};
    }

    /// Seven operators ending in J_xy^2, J_zx^2.
    static OperatorFamily sexp_main() {
        using O = Observable;
        return {{O::x, O::y, O::z, O::x2, O::y2, O::xy2, O::zx2}, Preset::SexpMain};
    }

    static OperatorFamily s2() {
        using O = Observable;
        return {{O::x, O::y, O::z, O::x2, O::y2, O::z2, O::xy2, O::yz2, O::zx2}, Preset::S2};
    }

    /// Accepts s1, sexp, sexp-main, s2.
    static OperatorFamily from_name(const std::string& name) {
        if (name == "s1") return s1();
        if (name == "sexp") return sexp();
        if (name == "sexp-main") return sexp_main();
        if (name == "s2") return s2();
        throw Error(ErrorCode::InvalidArgument, "unknown operator family '" + name + "'");
    }

    std::string name() const {
        switch (preset_) {
            case Preset::S1: return "s1";
            case Preset::Sexp: return "sexp";
            case Preset::SexpMain: return "sexp-main";
            case Preset::S2: return "s2";
            case Preset::Custom: break;
        }
        return "custom";
    }

    int size() const { return static_cast<int>(members_.size()); }
    const std::vector<Observable>& members() const { return members_; }
    Preset preset() const { return preset_; }

private:
    std::vector<Observable> members_;
    Preset preset_;
};

struct CovarianceCommutator {
    Eigen::MatrixXd V;
    Eigen::MatrixXd C;
};

/// Matrix of an observable in the given representation.
inline SparseOp observable_matrix(Observable o, Representation repr) {
    auto [dir, power] = observable_direction(o);
    const CollectiveOperator op = collective_operator(measurement_direction(dir).n, repr);
    return power == 1 ? op.matrix() : op.power(2);
}

/// V and C from direct operator products.
inline CovarianceCommutator vc_exact(const StateVector& state, const OperatorFamily& family) {
    const int d = family.size();
    std::vector<CVector> images;
    images.reserve(static_cast<std::size_t>(d));
    Eigen::VectorXd means(d);
    for (int i = 0; i < d; ++i) {
        images.push_back(observable_matrix(family.members()[static_cast<std::size_t>(i)], state.representation()) *
                         state.amplitudes());
        means[i] = state.amplitudes().dot(images.back()).real();
    }
    CovarianceCommutator out{Eigen::MatrixXd(d, d), Eigen::MatrixXd(d, d)};
    for (int i = 0; i < d; ++i) {
        for (int j = i; j < d; ++j) {
            const cplx g = images[static_cast<std::size_t>(i)].dot(images[static_cast<std::size_t>(j)]);
            out.V(i, j) = out.V(j, i) = g.real() - means[i] * means[j];
            out.C(i, j) = 2.0 * g.imag();
            out.C(j, i) = -out.C(i, j);
        }
    }
    return out;
}

/// V and C from measured moments using the identity catalogue.
inline CovarianceCommutator vc_from_moments(const MomentTable& table, const OperatorFamily& family,
                                            MomentReconstruction* recon = nullptr) {
    MomentReconstruction local(table);
    MomentReconstruction& r = recon ? *recon : local;
    const int d = family.size();
    CovarianceCommutator out{Eigen::MatrixXd(d, d), Eigen::MatrixXd(d, d)};
    for (int i = 0; i < d; ++i) {
        for (int j = i; j < d; ++j) {
            const Observable a = family.members()[static_cast<std::size_t>(i)];
            const Observable b = family.members()[static_cast<std::size_t>(j)];
            out.V(i, j) = out.V(j, i) = r.cov(a, b);
            out.C(i, j) = r.com(a, b);
            out.C(j, i) = -out.C(i, j);
        }
    }
    return out;
}

struct SqueezeReport {
    int qubits = 0;
    Eigen::MatrixXd V, C, M;
    Eigen::Matrix3d Mtilde = Eigen::Matrix3d::Zero();
    double lambda_max = 0.0;
    double xi2 = std::numeric_limits<double>::infinity();
    Eigen::VectorXd m_opt;
    Eigen::Vector3d n_opt = Eigen::Vector3d::Zero();
    double condition_number = 0.0;
    bool regularized = false;
    double epsilon = 0.0;
    bool no_sensitivity = false;

    double xi2_inverse() const { return no_sensitivity ? 0.0 : lambda_max / qubits; }
};

struct SqueezeOptions {
    double condition_limit = 1e12;
    double epsilon_scale = 1e-10;
    double tie_tolerance = 1e-9;
    bool strict = false;  ///< throw SingularCovariance instead of regularizing
};

namespace detail {

/// Flips the sign so that the first nonzero component is positive.
inline Eigen::VectorXd canonical_sign(Eigen::VectorXd v, double tol = 1e-12) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (std::abs(v[i]) > tol) {
            if (v[i] < 0) v = -v;
            break;
        }
    }
    return v;
}

inline bool lexicographically_less(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double tol = 1e-12) {
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        if (a[i] < b[i] - tol) return true;
        if (a[i] > b[i] + tol) return false;
    }
    return false;
}

}  // namespace detail

/// Solves the 3x3 eigenproblem for M-tilde. V is inverted through its eigendecomposition;
/// when its condition number exceeds the limit eigenvalues below eps = 1e-10 tr(V)/D are
/// raised to eps and the report is marked regularized.
inline SqueezeReport squeeze_parameter(const Eigen::MatrixXd& V, const Eigen::MatrixXd& C, int qubits,
                                       const SqueezeOptions& opt = {}) {
    const Eigen::Index d = V.rows();
    if (d < 3 || V.cols() != d || C.rows() != d || C.cols() != d) {
        throw Error(ErrorCode::LengthMismatch, "V and C must be square matrices of the same size >= 3");
    }
    if (qubits < 1) throw Error(ErrorCode::InvalidArgument, "qubit count must be >= 1");
    if (!V.allFinite() || !C.allFinite()) throw Error(ErrorCode::InvalidArgument, "V or C has non-finite entries");

    SqueezeReport rep;
    rep.qubits = qubits;
    rep.V = V;
    rep.C = C;

    const Eigen::MatrixXd Vs = 0.5 * (V + V.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Vs);
    Eigen::VectorXd w = eig.eigenvalues();
    const double wmin = w.minCoeff(), wmax = w.maxCoeff();
    rep.condition_number = wmin > 0.0 ? wmax / wmin : std::numeric_limits<double>::infinity();
    if (!(rep.condition_number <= opt.condition_limit)) {
        if (opt.strict) {
            throw Error(ErrorCode::SingularCovariance,
                        "condition number of V is " + std::to_string(rep.condition_number));
        }
        const double trace = Vs.trace();
        rep.epsilon = trace > 0.0 ? opt.epsilon_scale * trace / static_cast<double>(d) : opt.epsilon_scale;
        for (Eigen::Index i = 0; i < d; ++i) w[i] = std::max(w[i], rep.epsilon);
        rep.regularized = true;
    }
    // M = B^T B with B = w^-1/2 E^T C; forming V^-1 first loses ~1e-7 when eps is tiny
    const Eigen::MatrixXd& E = eig.eigenvectors();
    const Eigen::MatrixXd B = w.cwiseSqrt().cwiseInverse().asDiagonal() * (E.transpose() * C);
    rep.M = B.transpose() * B;
    rep.Mtilde = 0.5 * (rep.M.topLeftCorner<3, 3>() + rep.M.topLeftCorner<3, 3>().transpose());

    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> meig(rep.Mtilde);
    const Eigen::Vector3d lam = meig.eigenvalues();
    rep.lambda_max = lam[2];
    const double scale = std::max({1.0, std::abs(lam[0]), std::abs(lam[2])});
    if (!(rep.lambda_max > 1e-14 * scale)) {
        rep.lambda_max = std::max(rep.lambda_max, 0.0);
        rep.no_sensitivity = true;
        rep.xi2 = std::numeric_limits<double>::infinity();
        rep.m_opt = Eigen::VectorXd::Zero(d);
        return rep;
    }

    Eigen::VectorXd best = detail::canonical_sign(meig.eigenvectors().col(2));
    for (int k = 1; k >= 0; --k) {
        if (std::abs(lam[k] - lam[2]) > opt.tie_tolerance * scale) break;
        Eigen::VectorXd cand = detail::canonical_sign(meig.eigenvectors().col(k));
        if (detail::lexicographically_less(cand, best)) best = cand;
    }
    rep.n_opt = best;
    rep.xi2 = qubits / rep.lambda_max;

    Eigen::VectorXd padded = Eigen::VectorXd::Zero(d);
    padded.head<3>() = rep.n_opt;
    rep.m_opt = E * (w.cwiseInverse().asDiagonal() * (E.transpose() * (C * padded)));
    const double norm = rep.m_opt.norm();
    if (norm > 0.0) rep.m_opt /= norm;
    return rep;
}

inline SqueezeReport squeeze_exact(const StateVector& state, const OperatorFamily& family,
                                   const SqueezeOptions& opt = {}) {
    const auto vc = vc_exact(state, family);
    return squeeze_parameter(vc.V, vc.C, state.qubits(), opt);
}

inline SqueezeReport squeeze_from_moments(const MomentTable& table, const OperatorFamily& family,
                                          const SqueezeOptions& opt = {}) {
    const auto vc = vc_from_moments(table, family);
    return squeeze_parameter(vc.V, vc.C, table.qubits(), opt);
}

/// xi^-2 per (time point, family), evaluated exactly.
inline std::vector<std::vector<double>> hierarchy_scan(const std::vector<StateVector>& trajectory,
                                                       const std::vector<OperatorFamily>& families) {
    std::vector<std::vector<double>> out(trajectory.size(), std::vector<double>(families.size()));
    for (std::size_t t = 0; t < trajectory.size(); ++t)
        for (std::size_t f = 0; f < families.size(); ++f)
            out[t][f] = squeeze_exact(trajectory[t], families[f]).xi2_inverse();
    return out;
}

namespace detail {

inline nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline nlohmann::json finite_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); }

}  // namespace detail

inline nlohmann::json to_json(const SqueezeReport& rep, const OperatorFamily& family) {
    nlohmann::json labels = nlohmann::json::array();
    for (Observable o : family.members()) labels.push_back(observable_label(o));
    nlohmann::json m_opt = nlohmann::json::array();
    for (Eigen::Index i = 0; i < rep.m_opt.size(); ++i) m_opt.push_back(rep.m_opt[i]);
    return {
        {"family", family.name()},
        {"labels", labels},
        {"N", rep.qubits},
        {"V", detail::matrix_json(rep.V)},
        {"C", detail::matrix_json(rep.C)},
        {"M", detail::matrix_json(rep.M)},
        {"Mtilde", detail::matrix_json(rep.Mtilde)},
        {"lambda_max", rep.lambda_max},
        {"xi2", detail::finite_or_null(rep.xi2)},
        {"xi2_inverse", rep.xi2_inverse()},
        {"m_opt", m_opt},
        {"n_opt", {rep.n_opt[0], rep.n_opt[1], rep.n_opt[2]}},
        {"condition_number_of_V", detail::finite_or_null(rep.condition_number)},
        {"regularized", rep.regularized},
        {"epsilon", rep.epsilon},
        {"no_sensitivity", rep.no_sensitivity},
    };
}

}  // namespace spinsq
