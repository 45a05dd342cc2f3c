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

/// Husimi Q function on a (theta, phi) grid. The default is the plain overlap
/// |<theta,phi|psi>|^2; `density` multiplies by (N+1)/(4 pi).

#pragma once

#include <Eigen/Dense>

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <string>
#include <vector>

#include "spinsq/error.hpp"
#include "spinsq/spin_core.hpp"

namespace spinsq {

struct SphericalGrid {
    std::vector<double> theta;  ///< in [0, pi], endpoints included
    std::vector<double> phi;    ///< in [0, 2 pi), uniform
    Eigen::MatrixXd values;     ///< rows follow theta, columns phi

    static SphericalGrid make(std::size_t theta_points, std::size_t phi_points) {
        if (theta_points < 2 || phi_points < 2) throw Error(ErrorCode::InvalidArgument, "grid must be at least 2x2");
        SphericalGrid g;
        for (std::size_t i = 0; i < theta_points; ++i)
            g.theta.push_back(std::numbers::pi * static_cast<double>(i) / static_cast<double>(theta_points - 1));
        for (std::size_t j = 0; j < phi_points; ++j)
            g.phi.push_back(2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(phi_points));
        g.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(theta_points), static_cast<Eigen::Index>(phi_points));
        return g;
    }
};

namespace detail {

/// Amplitudes <D_k|psi> in the Dicke basis, for either representation.
inline CVector dicke_components(const StateVector& state) {
    return state.representation().is_dicke() ? state.amplitudes() : symmetric_components(state);
}

}  // namespace detail

/// Q(theta, phi) at one point.
inline double husimi_at(const StateVector& state, double theta, double phi, bool density = false) {
    const CVector comp = detail::dicke_components(state);
    const int n = state.qubits();
    const double c = std::cos(theta / 2.0), s = std::sin(theta / 2.0);
    cplx acc = 0.0;
    for (int k = 0; k <= n; ++k) {
        const double mag = std::exp(0.5 * detail::log_binomial(n, k)) * std::pow(c, n - k) * std::pow(s, k);
        acc += mag * std::polar(1.0, -k * phi) * comp[k];
    }
    const double q = std::norm(acc);
    return density ? q * (n + 1) / (4.0 * std::numbers::pi) : q;
}

inline SphericalGrid husimi_q(const StateVector& state, SphericalGrid grid, bool density = false) {
    const CVector comp = detail::dicke_components(state);
    const int n = state.qubits();
    std::vector<double> sqrt_binom(static_cast<std::size_t>(n + 1));
    for (int k = 0; k <= n; ++k) sqrt_binom[static_cast<std::size_t>(k)] = std::exp(0.5 * detail::log_binomial(n, k));
    const double norm = density ? (n + 1) / (4.0 * std::numbers::pi) : 1.0;

    std::vector<double> radial(static_cast<std::size_t>(n + 1));
    for (std::size_t i = 0; i < grid.theta.size(); ++i) {
        const double c = std::cos(grid.theta[i] / 2.0), s = std::sin(grid.theta[i] / 2.0);
        for (int k = 0; k <= n; ++k) {
            // 0^0 = 1 at the poles
            const double ck = (n - k == 0) ? 1.0 : std::pow(c, n - k);
            const double sk = (k == 0) ? 1.0 : std::pow(s, k);
            radial[static_cast<std::size_t>(k)] = sqrt_binom[static_cast<std::size_t>(k)] * ck * sk;
        }
        for (std::size_t j = 0; j < grid.phi.size(); ++j) {
            cplx acc = 0.0;
            for (int k = 0; k <= n; ++k)
                acc += radial[static_cast<std::size_t>(k)] * std::polar(1.0, -k * grid.phi[j]) * comp[k];
            grid.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = std::norm(acc) * norm;
        }
    }
    return grid;
}

/// Integral of Q over the sphere, trapezoid in theta and periodic in phi.
inline double sphere_integral(const SphericalGrid& g) {
    const double dphi = 2.0 * std::numbers::pi / static_cast<double>(g.phi.size());
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < g.theta.size(); ++i) {
        const double dtheta = g.theta[i + 1] - g.theta[i];
        const double a = g.values.row(static_cast<Eigen::Index>(i)).sum() * std::sin(g.theta[i]);
        const double b = g.values.row(static_cast<Eigen::Index>(i + 1)).sum() * std::sin(g.theta[i + 1]);
        total += 0.5 * (a + b) * dtheta * dphi;
    }
    return total;
}

/// `theta,phi,Q` rows, theta-major, printed with 17 significant digits.
inline std::string q_csv(const SphericalGrid& g, const std::string& header_comment = {}) {
    std::string out = header_comment;
    out += "theta,phi,Q\n";
    char buf[96];
    for (std::size_t i = 0; i < g.theta.size(); ++i) {
        for (std::size_t j = 0; j < g.phi.size(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", g.theta[i], g.phi[j],
                          g.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
            out += buf;
        }
    }
    return out;
}

inline void write_q_csv(const std::string& path, const SphericalGrid& g, const std::string& header_comment = {}) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorCode::IoError, "cannot write " + path);
    f << q_csv(g, header_comment);
    if (!f) throw Error(ErrorCode::IoError, "write failed for " + path);
}

namespace detail {

inline void put_le64(std::ofstream& f, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    f.write(reinterpret_cast<const char*>(b), 8);
}

}  // namespace detail

/// Binary layout, all little-endian: magic "SPQGRID1", u64 rows, u64 cols,
/// rows theta values, cols phi values, then rows*cols Q values row-major (f64).
inline void write_q_binary(const std::string& path, const SphericalGrid& g) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorCode::IoError, "cannot write " + path);
    f.write("SPQGRID1", 8);
    detail::put_le64(f, g.theta.size());
    detail::put_le64(f, g.phi.size());
    auto put = [&](double v) { detail::put_le64(f, std::bit_cast<std::uint64_t>(v)); };
    for (double t : g.theta) put(t);
    for (double p : g.phi) put(p);
    for (Eigen::Index i = 0; i < g.values.rows(); ++i)
        for (Eigen::Index j = 0; j < g.values.cols(); ++j) put(g.values(i, j));
    if (!f) throw Error(ErrorCode::IoError, "write failed for " + path);
}

inline SphericalGrid read_q_binary(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorCode::IoError, "cannot read " + path);
    char magic[8];
    f.read(magic, 8);
    if (!f || std::string(magic, 8) != "SPQGRID1") throw Error(ErrorCode::IoError, path + " is not a Q grid file");
    auto get = [&]() {
        unsigned char b[8];
        f.read(reinterpret_cast<char*>(b), 8);
        if (!f) throw Error(ErrorCode::IoError, "truncated grid file " + path);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= std::uint64_t{b[i]} << (8 * i);
        return v;
    };
    const std::uint64_t rows = get(), cols = get();
    if (rows < 2 || cols < 2 || rows > (1u << 20) || cols > (1u << 20))
        throw Error(ErrorCode::IoError, "bad grid size in " + path);
    SphericalGrid g;
    for (std::uint64_t i = 0; i < rows; ++i) g.theta.push_back(std::bit_cast<double>(get()));
    for (std::uint64_t j = 0; j < cols; ++j) g.phi.push_back(std::bit_cast<double>(get()));
    g.values.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index i = 0; i < g.values.rows(); ++i)
        for (Eigen::Index j = 0; j < g.values.cols(); ++j) g.values(i, j) = std::bit_cast<double>(get());
    return g;
}

}  // namespace spinsq
