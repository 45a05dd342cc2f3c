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

/// Phase estimation with the sequence exp(-i J_y theta) exp(-i J_x alpha) and a J_z
/// readout. Fisher information is read off the squared Hellinger distance,
/// d^2(theta) = F theta^2 / 8 + O(theta^3).

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "spinsq/error.hpp"
#include "spinsq/measurement.hpp"
#include "spinsq/spin_core.hpp"

namespace spinsq {

/// P_z for z = -N/2 .. N/2; index i holds z = -N/2 + i.
struct OutcomeDistribution {
    std::vector<double> p;

    int qubits() const { return static_cast<int>(p.size()) - 1; }
    double z(std::size_t i) const { return -qubits() / 2.0 + static_cast<double>(i); }
};

struct FisherEstimate {
    enum class Method { SingleTheta, QuadraticFit };

    double F = 0.0;
    Method method = Method::SingleTheta;
    double theta = 0.0;              ///< single-theta mode
    std::vector<double> theta_grid;  ///< fit mode
    double alpha = 0.0;
    std::optional<double> std;
    std::uint64_t shots = 0;
    std::uint64_t seed = 0;
};

inline constexpr double kDefaultTheta = -0.05;

/// exp(-i J_y theta) exp(-i J_x alpha)|psi>
inline StateVector imprint(const StateVector& state, double alpha, double theta) {
    return rotate(rotate(state, Direction::x_axis(), alpha), Direction::y_axis(), theta);
}

inline OutcomeDistribution pz(const StateVector& state) {
    const int n = state.qubits();
    OutcomeDistribution out{std::vector<double>(static_cast<std::size_t>(n + 1), 0.0)};
    const CVector& amps = state.amplitudes();
    for (Eigen::Index idx = 0; idx < amps.size(); ++idx) {
        const int k = state.representation().is_full() ? detail::popcount(static_cast<std::uint64_t>(idx))
                                                       : static_cast<int>(idx);
        // k excitations means z = N/2 - k, stored at index N - k
        out.p[static_cast<std::size_t>(n - k)] += std::norm(amps[idx]);
    }
    return out;
}

/// P_z from readout counts along z.
inline OutcomeDistribution pz(const ShotRecord& record) {
    const int n = record.qubits;
    OutcomeDistribution out{std::vector<double>(static_cast<std::size_t>(n + 1), 0.0)};
    for (const auto& [outcome, count] : record.counts)
        out.p[static_cast<std::size_t>(n - excitations(record, outcome))] += static_cast<double>(count);
    for (double& v : out.p) v /= static_cast<double>(record.shots);
    return out;
}

inline OutcomeDistribution pz(const CorrectedDistribution& dist, CorrectedSource source = CorrectedSource::Clipped) {
    const int n = dist.qubits;
    const auto& p = source == CorrectedSource::Clipped ? dist.probabilities : dist.quasi;
    OutcomeDistribution out{std::vector<double>(static_cast<std::size_t>(n + 1), 0.0)};
    for (std::size_t idx = 0; idx < p.size(); ++idx) out.p[static_cast<std::size_t>(n - detail::popcount(idx))] += p[idx];
    return out;
}

/// 1 - sum_z sqrt(P_z Q_z), clamped to [0, 1]. Negative quasi-probabilities count as 0.
inline double hellinger_sq(const OutcomeDistribution& P, const OutcomeDistribution& Q) {
    if (P.p.size() != Q.p.size()) {
        throw Error(ErrorCode::LengthMismatch, "distributions have lengths " + std::to_string(P.p.size()) + " and " +
                                                   std::to_string(Q.p.size()));
    }
    double bc = 0.0;
    for (std::size_t i = 0; i < P.p.size(); ++i) bc += std::sqrt(std::max(P.p[i], 0.0) * std::max(Q.p[i], 0.0));
    return std::clamp(1.0 - bc, 0.0, 1.0);
}

/// F = 8 d^2 / theta^2.
inline FisherEstimate fisher_single(double d2, double theta) {
    if (theta == 0.0) throw Error(ErrorCode::ZeroTheta, "theta must be nonzero");
    if (!std::isfinite(theta) || !std::isfinite(d2)) throw Error(ErrorCode::InvalidArgument, "non-finite input");
    FisherEstimate est;
    est.F = 8.0 * d2 / (theta * theta);
    est.method = FisherEstimate::Method::SingleTheta;
    est.theta = theta;
    return est;
}

/// Least squares d^2 = c2 theta^2 (+ c3 theta^3); F = 8 c2.
inline FisherEstimate fisher_fit(const std::vector<double>& thetas, const std::vector<double>& d2, bool cubic = true) {
    if (thetas.size() != d2.size()) throw Error(ErrorCode::LengthMismatch, "theta and d2 grids differ in length");
    const int cols = cubic ? 2 : 1;
    const auto rows = static_cast<Eigen::Index>(thetas.size());
    Eigen::MatrixXd A(rows, cols);
    Eigen::VectorXd b(rows);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const double t = thetas[static_cast<std::size_t>(i)];
        A(i, 0) = t * t;
        if (cubic) A(i, 1) = t * t * t;
        b[i] = d2[static_cast<std::size_t>(i)];
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    qr.setThreshold(1e-12);
    if (rows < cols || qr.rank() < cols) {
        throw Error(ErrorCode::DegenerateFit, "theta grid does not determine the fit (rank " +
                                                  std::to_string(rows < cols ? rows : qr.rank()) + ")");
    }
    const Eigen::VectorXd c = qr.solve(b);
    FisherEstimate est;
    est.F = 8.0 * c[0];
    est.method = FisherEstimate::Method::QuadraticFit;
    est.theta_grid = thetas;
    return est;
}

/// d^2 between the alpha-rotated state and its theta-imprinted copy.
inline double exact_d2(const StateVector& state, double alpha, double theta) {
    const StateVector ref = rotate(state, Direction::x_axis(), alpha);
    return hellinger_sq(pz(ref), pz(rotate(ref, Direction::y_axis(), theta)));
}

inline FisherEstimate fisher_exact(const StateVector& state, double alpha, double theta = kDefaultTheta) {
    FisherEstimate est = fisher_single(exact_d2(state, alpha, theta), theta);
    est.alpha = alpha;
    return est;
}

/// sum_z (dP_z/dtheta)^2 / P_z at theta = 0 by central differences.
inline double classical_fisher(const StateVector& state, double alpha, double step = 1e-5) {
    const StateVector ref = rotate(state, Direction::x_axis(), alpha);
    const auto p0 = pz(ref);
    const auto pp = pz(rotate(ref, Direction::y_axis(), step));
    const auto pm = pz(rotate(ref, Direction::y_axis(), -step));
    double f = 0.0;
    for (std::size_t i = 0; i < p0.p.size(); ++i) {
        if (p0.p[i] < 1e-14) continue;
        const double d = (pp.p[i] - pm.p[i]) / (2.0 * step);
        f += d * d / p0.p[i];
    }
    return f;
}

inline std::vector<double> linspace(double lo, double hi, std::size_t points) {
    if (points == 0) return {};
    if (points == 1) return {lo};
    std::vector<double> out(points);
    for (std::size_t i = 0; i < points; ++i)
        out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
    return out;
}

inline std::vector<double> default_alpha_grid() { return linspace(-0.6, 0.6, 61); }

struct AlphaScan {
    double alpha_opt = 0.0;
    FisherEstimate best;
    std::vector<double> alphas;
    std::vector<double> F;
};

/// argmax over alpha of F(0, alpha); near-ties (1e-9 relative) go to the smallest |alpha|.
inline AlphaScan optimize_alpha(const StateVector& state, double theta, const std::vector<double>& alpha_grid) {
    if (alpha_grid.empty()) throw Error(ErrorCode::InvalidArgument, "alpha grid is empty");
    AlphaScan scan;
    scan.alphas = alpha_grid;
    for (double a : alpha_grid) scan.F.push_back(fisher_exact(state, a, theta).F);
    double fmax = scan.F.front();
    for (double f : scan.F) fmax = std::max(fmax, f);
    const double tol = 1e-9 * std::max(1.0, std::abs(fmax));
    std::size_t pick = scan.F.size();
    for (std::size_t i = 0; i < scan.F.size(); ++i) {
        if (scan.F[i] < fmax - tol) continue;
        if (pick == scan.F.size() || std::abs(alpha_grid[i]) < std::abs(alpha_grid[pick])) pick = i;
    }
    scan.alpha_opt = alpha_grid[pick];
    scan.best = fisher_exact(state, scan.alpha_opt, theta);
    return scan;
}

/// 3x3 covariance of (J_x, J_y, J_z).
inline Eigen::Matrix3d spin_covariance(const StateVector& state) {
    const SpinMatrices s = spin_matrices(state.representation());
    const CVector& psi = state.amplitudes();
    const std::array<CVector, 3> img{s.jx.apply(psi), s.jy.apply(psi), s.jz.apply(psi)};
    Eigen::Vector3d mean;
    for (int i = 0; i < 3; ++i) mean[i] = psi.dot(img[static_cast<std::size_t>(i)]).real();
    Eigen::Matrix3d cov;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            cov(i, j) = img[static_cast<std::size_t>(i)].dot(img[static_cast<std::size_t>(j)]).real() - mean[i] * mean[j];
    return 0.5 * (cov + cov.transpose());
}

/// Pure-state QFI maximised over rotation axes: 4 lambda_max of the spin covariance.
inline double qfi_pure(const StateVector& state) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(spin_covariance(state));
    return 4.0 * std::max(eig.eigenvalues()[2], 0.0);
}

struct SampledFisherOptions {
    std::uint64_t shots = 200000;  ///< per branch
    std::uint64_t seed = 0;
    BootstrapScheme scheme{240, 60, 10};
    std::optional<ConfusionModel> confusion;
    CorrectedSource source = CorrectedSource::Clipped;
    std::uint32_t substream = 0;  ///< distinguishes alpha / time points
};

namespace detail {

inline OutcomeDistribution branch_pz(const std::vector<ShotRecord>& groups, const std::vector<std::size_t>& pick,
                                     const SampledFisherOptions& opt) {
    std::vector<const ShotRecord*> parts;
    for (std::size_t i : pick) parts.push_back(&groups[i]);
    const ShotRecord merged = merge_records(parts);
    if (opt.confusion) return pz(correct_readout(merged, *opt.confusion), opt.source);
    return pz(merged);
}

}  // namespace detail

/// Samples both branches along z, optionally through a confusion channel and its
/// correction, and bootstraps the std over groups. The reference branch does not
/// depend on theta, so repeated calls with different theta reuse its samples.
inline FisherEstimate fisher_sampled(const StateVector& state, double alpha, double theta,
                                     const SampledFisherOptions& opt) {
    if (theta == 0.0) throw Error(ErrorCode::ZeroTheta, "theta must be nonzero");
    if (opt.shots < 1000) throw Error(ErrorCode::InsufficientShots, "need at least 1000 shots per branch");
    const StateVector ref = rotate(state, Direction::x_axis(), alpha);
    const StateVector shifted = rotate(ref, Direction::y_axis(), theta);
    auto draw = [&](const StateVector& s, std::uint32_t branch) {
        auto groups = sample_groups(s, DirectionId::z, opt.shots, opt.scheme.groups, opt.seed,
                                    opt.substream * 2u + branch);
        if (opt.confusion)
            for (auto& g : groups) g = apply_confusion(g, *opt.confusion, opt.seed);
        return groups;
    };
    const auto g0 = draw(ref, 0);
    const auto g1 = draw(shifted, 1);

    std::vector<std::size_t> all(g0.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    auto estimate = [&](const std::vector<std::size_t>& pick) {
        return fisher_single(hellinger_sq(detail::branch_pz(g0, pick, opt), detail::branch_pz(g1, pick, opt)), theta)
            .F;
    };
    FisherEstimate est = fisher_single(0.0, theta);
    est.F = estimate(all);
    est.alpha = alpha;
    est.shots = opt.shots;
    est.seed = opt.seed;
    est.std = bootstrap_groups(g0.size(), opt.scheme, opt.seed ^ (std::uint64_t{opt.substream} << 32), estimate).std;
    return est;
}

inline nlohmann::json to_json(const FisherEstimate& est) {
    nlohmann::json j = {
        {"F", est.F},
        {"method", est.method == FisherEstimate::Method::SingleTheta ? "single_theta" : "quadratic_fit"},
        {"alpha", est.alpha},
    };
    if (est.method == FisherEstimate::Method::SingleTheta) {
        j["theta"] = est.theta;
    } else {
        j["theta_grid"] = est.theta_grid;
    }
    j["std"] = est.std ? nlohmann::json(*est.std) : nlohmann::json();
    if (est.shots) {
        j["shots"] = est.shots;
        j["seed"] = est.seed;
    }
    return j;
}

}  // namespace spinsq
