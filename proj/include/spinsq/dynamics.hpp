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

#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <mutex>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "spinsq/error.hpp"
#include "spinsq/spin_core.hpp"

namespace spinsq {

/// Symmetric qubit-qubit couplings in angular-frequency units. The diagonal is zero.
class CouplingMatrix {
public:
    explicit CouplingMatrix(Eigen::MatrixXd chi, double symmetry_tolerance = 1e-9) : chi_(std::move(chi)) {
        if (chi_.rows() != chi_.cols() || chi_.rows() < 1) {
            throw Error(ErrorCode::InvalidArgument, "coupling matrix must be square and nonempty");
        }
        if (!chi_.allFinite()) throw Error(ErrorCode::InvalidArgument, "coupling matrix has non-finite entries");
        const double asym = (chi_ - chi_.transpose()).cwiseAbs().maxCoeff();
        if (asym > symmetry_tolerance) {
            throw Error(ErrorCode::InvalidArgument,
                        "coupling matrix is not symmetric (max asymmetry " + std::to_string(asym) + ")");
        }
        chi_ = 0.5 * (chi_ + chi_.transpose()).eval();
        chi_.diagonal().setZero();
    }

    static CouplingMatrix uniform(int qubits, double chi) {
        if (qubits < 1) throw Error(ErrorCode::InvalidArgument, "qubit count must be >= 1");
        return CouplingMatrix(Eigen::MatrixXd::Constant(qubits, qubits, chi));
    }

    int qubits() const { return static_cast<int>(chi_.rows()); }
    double operator()(int i, int j) const { return chi_(i, j); }
    const Eigen::MatrixXd& matrix() const { return chi_; }

    /// Mean off-diagonal coupling.
    double mean() const {
        const int n = qubits();
        if (n < 2) return 0.0;
        return chi_.sum() / (static_cast<double>(n) * (n - 1));
    }

    bool is_uniform(double tol = 1e-12) const {
        const double ref = mean();
        for (int i = 0; i < qubits(); ++i)
            for (int j = 0; j < qubits(); ++j)
                if (i != j && std::abs(chi_(i, j) - ref) > tol) return false;
        return true;
    }

private:
    Eigen::MatrixXd chi_;
};

/// Reads an N x N comma-separated matrix, one row per qubit.
inline CouplingMatrix load_coupling_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open coupling file " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t used = 0;
                row.push_back(std::stod(cell, &used));
                if (cell.find_first_not_of(" \t\r", used) != std::string::npos) throw std::invalid_argument(cell);
            } catch (const std::exception&) {
                throw Error(ErrorCode::InvalidArgument, path + ": cannot parse '" + cell + "' as a number");
            }
        }
        rows.push_back(std::move(row));
    }
    const auto n = static_cast<Eigen::Index>(rows.size());
    if (n == 0) throw Error(ErrorCode::InvalidArgument, path + ": empty coupling matrix");
    Eigen::MatrixXd chi(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (static_cast<Eigen::Index>(rows[i].size()) != n) {
            throw Error(ErrorCode::InvalidArgument, path + ": row " + std::to_string(i + 1) + " has " +
                                                        std::to_string(rows[i].size()) + " entries, expected " +
                                                        std::to_string(n));
        }
        for (Eigen::Index j = 0; j < n; ++j) chi(i, j) = rows[i][j];
    }
    return CouplingMatrix(std::move(chi));
}

struct OatLabel {
    double chi;
};
struct XyLabel {
    CouplingMatrix coupling;
};

/// Hermitian generator together with its (lazily computed) eigendecomposition.
///
/// Both Hamiltonians built here conserve J_z, so the spectrum is computed per
/// magnetisation sector and reused for every evolution time.
class Hamiltonian {
public:
    using Label = std::variant<OatLabel, XyLabel>;

    Hamiltonian(Representation repr, SparseOp matrix, Label label)
        : repr_(repr), matrix_(std::move(matrix)), label_(std::move(label)),
          spectrum_(std::make_shared<SpectrumSlot>()) {
        matrix_.makeCompressed();
    }

    const Representation& representation() const { return repr_; }
    const SparseOp& matrix() const { return matrix_; }
    const Label& label() const { return label_; }
    bool is_oat() const { return std::holds_alternative<OatLabel>(label_); }

    /// exp(-i H t) applied to a vector.
    CVector propagate(const CVector& v, double t) const {
        const auto& blocks = spectrum();
        CVector out = CVector::Zero(v.size());
        for (const auto& block : blocks) {
            const auto size = static_cast<Eigen::Index>(block.indices.size());
            CVector local(size);
            for (Eigen::Index a = 0; a < size; ++a) local[a] = v[block.indices[a]];
            CVector coeffs = block.vectors.adjoint() * local;
            for (Eigen::Index a = 0; a < size; ++a) coeffs[a] *= std::polar(1.0, -block.energies[a] * t);
            local = block.vectors * coeffs;
            for (Eigen::Index a = 0; a < size; ++a) out[block.indices[a]] = local[a];
        }
        return out;
    }

    /// Sorted eigenvalues.
    Eigen::VectorXd eigenvalues() const {
        std::vector<double> all;
        for (const auto& block : spectrum())
            for (Eigen::Index a = 0; a < block.energies.size(); ++a) all.push_back(block.energies[a]);
        std::sort(all.begin(), all.end());
        return Eigen::Map<Eigen::VectorXd>(all.data(), static_cast<Eigen::Index>(all.size()));
    }

private:
    struct Block {
        std::vector<Eigen::Index> indices;
        Eigen::VectorXd energies;
        CMatrix vectors;
    };
    struct SpectrumSlot {
        std::once_flag once;
        std::vector<Block> blocks;
    };

    const std::vector<Block>& spectrum() const {
        std::call_once(spectrum_->once, [this] { spectrum_->blocks = diagonalise(); });
        return spectrum_->blocks;
    }

    int sector_of(Eigen::Index idx) const {
        return repr_.is_full() ? detail::popcount(static_cast<std::uint64_t>(idx)) : static_cast<int>(idx);
    }

    std::vector<Block> diagonalise() const {
        const Eigen::Index dim = matrix_.rows();
        bool conserves = true;
        for (Eigen::Index col = 0; col < matrix_.outerSize() && conserves; ++col)
            for (SparseOp::InnerIterator it(matrix_, col); it; ++it)
                if (it.value() != cplx(0.0) && sector_of(it.row()) != sector_of(it.col())) conserves = false;

        std::vector<std::vector<Eigen::Index>> groups;
        if (conserves) {
            groups.resize(static_cast<std::size_t>(repr_.qubits() + 1));
            for (Eigen::Index idx = 0; idx < dim; ++idx) groups[sector_of(idx)].push_back(idx);
        } else {
            groups.emplace_back(static_cast<std::size_t>(dim));
            for (Eigen::Index idx = 0; idx < dim; ++idx) groups[0][idx] = idx;
        }

        const CMatrix dense = repr_.is_dicke() || !conserves ? CMatrix(matrix_) : CMatrix();
        std::vector<Block> blocks;
        for (auto& group : groups) {
            if (group.empty()) continue;
            const auto size = static_cast<Eigen::Index>(group.size());
            CMatrix sub = CMatrix::Zero(size, size);
            if (dense.size() > 0) {
                for (Eigen::Index a = 0; a < size; ++a)
                    for (Eigen::Index b = 0; b < size; ++b) sub(a, b) = dense(group[a], group[b]);
            } else {
                std::vector<Eigen::Index> local(static_cast<std::size_t>(dim), -1);
                for (Eigen::Index a = 0; a < size; ++a) local[group[a]] = a;
                for (Eigen::Index a = 0; a < size; ++a)
                    for (SparseOp::InnerIterator it(matrix_, group[a]); it; ++it) sub(local[it.row()], a) = it.value();
            }
            Block block;
            block.indices = std::move(group);
            if (size == 1) {
                block.energies = Eigen::VectorXd::Constant(1, sub(0, 0).real());
                block.vectors = CMatrix::Identity(1, 1);
            } else {
                Eigen::SelfAdjointEigenSolver<CMatrix> eig(sub);
                block.energies = eig.eigenvalues();
                block.vectors = eig.eigenvectors();
            }
            blocks.push_back(std::move(block));
        }
        return blocks;
    }

    Representation repr_;
    SparseOp matrix_;
    Label label_;
    std::shared_ptr<SpectrumSlot> spectrum_;
};

/// H = -chi J_z^2.
inline Hamiltonian build_oat(int qubits, double chi, Representation::Kind kind) {
    if (!std::isfinite(chi)) throw Error(ErrorCode::InvalidArgument, "chi must be finite");
    const Representation repr =
        kind == Representation::Kind::Full ? Representation::full(qubits) : Representation::dicke(qubits);
    const auto dim = static_cast<Eigen::Index>(repr.dimension());
    std::vector<Eigen::Triplet<cplx>> triplets;
    triplets.reserve(static_cast<std::size_t>(dim));
    for (Eigen::Index idx = 0; idx < dim; ++idx) {
        const int ones = repr.is_full() ? detail::popcount(static_cast<std::uint64_t>(idx)) : static_cast<int>(idx);
        const double m = qubits / 2.0 - ones;
        triplets.emplace_back(idx, idx, -chi * m * m);
    }
    SparseOp mat(dim, dim);
    mat.setFromTriplets(triplets.begin(), triplets.end());
    return Hamiltonian(repr, std::move(mat), OatLabel{chi});
}

/// H = sum_{i<j} chi_ij (s+_i s-_j + h.c.) in the full basis.
inline Hamiltonian build_xy(const CouplingMatrix& coupling) {
    const int qubits = coupling.qubits();
    const Representation repr = Representation::full(qubits);
    const auto dim = static_cast<Eigen::Index>(repr.dimension());
    std::vector<Eigen::Triplet<cplx>> triplets;
    for (Eigen::Index s = 0; s < dim; ++s) {
        for (int i = 0; i < qubits; ++i) {
            const Eigen::Index bi = Eigen::Index{1} << (qubits - 1 - i);
            for (int j = i + 1; j < qubits; ++j) {
                const Eigen::Index bj = Eigen::Index{1} << (qubits - 1 - j);
                const bool flip = ((s & bi) != 0) != ((s & bj) != 0);
                if (flip && coupling(i, j) != 0.0) triplets.emplace_back(s ^ bi ^ bj, s, coupling(i, j));
            }
        }
    }
    SparseOp mat(dim, dim);
    mat.setFromTriplets(triplets.begin(), triplets.end());
    return Hamiltonian(repr, std::move(mat), XyLabel{coupling});
}

/// exp(-iHt)|psi>.
inline StateVector evolve(const StateVector& state, const Hamiltonian& hamiltonian, double t) {
    if (!(state.representation() == hamiltonian.representation())) {
        throw Error(ErrorCode::ReprMismatch, "state and Hamiltonian live in different representations");
    }
    if (!std::isfinite(t)) throw Error(ErrorCode::InvalidArgument, "evolution time must be finite");
    if (t == 0.0) return state;
    return StateVector(state.representation(), hamiltonian.propagate(state.amplitudes(), t));
}

/// <psi|H|psi>
inline double energy(const StateVector& state, const Hamiltonian& hamiltonian) {
    return state.amplitudes().dot(hamiltonian.matrix() * state.amplitudes()).real();
}

struct EquivalenceReport {
    double max_infidelity = 0.0;
    std::vector<double> chit;
    std::vector<double> infidelity;
    /// Diagonal of the XY Hamiltonian restricted to the symmetric sector, fitted as a + b m - chi_eff m^2.
    double chi_effective = 0.0;
    double linear_coefficient = 0.0;
    double offset = 0.0;
};

/// Compares XY evolution with the OAT approximation starting from CSS(+x).
///
/// The XY Hamiltonian restricted to the symmetric sector is fitted as
/// a + b m - chi_eff m^2; the OAT reference is exp(-i b J_z t) exp(i chi J_z^2 t),
/// embedded in the full basis. Infidelities are evaluated at t = chit / chi.
inline EquivalenceReport uniform_equivalence_report(const CouplingMatrix& coupling, double chi,
                                                    const std::vector<double>& chit_grid) {
    const int qubits = coupling.qubits();
    if (chi == 0.0) throw Error(ErrorCode::InvalidArgument, "reference chi must be nonzero");
    const Hamiltonian xy = build_xy(coupling);
    const Hamiltonian oat = build_oat(qubits, chi, Representation::Kind::Dicke);

    EquivalenceReport report;
    {
        const Representation dicke = Representation::dicke(qubits);
        Eigen::MatrixXd design(qubits + 1, 3);
        Eigen::VectorXd diag(qubits + 1);
        for (int k = 0; k <= qubits; ++k) {
            const StateVector basis = dicke_embed(dicke_state(qubits, k));
            diag[k] = energy(basis, xy);
            const double m = dicke.spin() - k;
            design.row(k) << 1.0, m, m * m;
        }
        const Eigen::Vector3d fit = design.colPivHouseholderQr().solve(diag);
        report.offset = fit[0];
        report.linear_coefficient = std::abs(fit[1]) < 1e-12 * std::max(1.0, std::abs(chi)) ? 0.0 : fit[1];
        report.chi_effective = -fit[2];
    }

    const StateVector start_full = coherent_spin_state(qubits, Direction::x_axis(), Representation::Kind::Full);
    const StateVector start_dicke = coherent_spin_state(qubits, Direction::x_axis(), Representation::Kind::Dicke);
    for (double chit : chit_grid) {
        const double t = chit / chi;
        const StateVector exact = evolve(start_full, xy, t);
        StateVector approx = evolve(start_dicke, oat, t);
        if (report.linear_coefficient != 0.0) {
            approx = rotate(approx, Direction::z_axis(), report.linear_coefficient * t);
        }
        const double infidelity = std::max(0.0, 1.0 - exact.fidelity(dicke_embed(approx)));
        report.chit.push_back(chit);
        report.infidelity.push_back(infidelity);
        report.max_infidelity = std::max(report.max_infidelity, infidelity);
    }
    return report;
}

inline EquivalenceReport uniform_equivalence_report(int qubits, double chi, const std::vector<double>& chit_grid) {
    return uniform_equivalence_report(CouplingMatrix::uniform(qubits, chi), chi, chit_grid);
}

}  // namespace spinsq
