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

#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include "spinsq/dynamics.hpp"
#include "spinsq/spin_core.hpp"

namespace spinsq::testing {

inline StateVector random_state(Representation repr, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    CVector amps(static_cast<Eigen::Index>(repr.dimension()));
    for (Eigen::Index i = 0; i < amps.size(); ++i) amps[i] = cplx(g(rng), g(rng));
    return StateVector(repr, std::move(amps));
}

/// Product state with qubit q along a random Bloch direction.
inline StateVector random_product_state(int qubits, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    CVector amps = CVector::Ones(1);
    for (int q = 0; q < qubits; ++q) {
        const double theta = std::acos(1.0 - 2.0 * u(rng));
        const double phi = 2.0 * std::numbers::pi * u(rng);
        CVector local(2);
        local << std::cos(theta / 2), std::polar(std::sin(theta / 2), phi);
        CVector next(amps.size() * 2);
        for (Eigen::Index i = 0; i < amps.size(); ++i) {
            next[2 * i] = amps[i] * local[0];
            next[2 * i + 1] = amps[i] * local[1];
        }
        amps = next;
    }
    return StateVector(Representation::full(qubits), std::move(amps));
}

inline std::vector<StateVector> oat_trajectory(int qubits, const std::vector<double>& chit,
                                               Representation::Kind kind = Representation::Kind::Dicke) {
    const Hamiltonian h = build_oat(qubits, 1.0, kind);
    const StateVector start = coherent_spin_state(qubits, Direction::x_axis(), kind);
    std::vector<StateVector> out;
    for (double t : chit) out.push_back(evolve(start, h, t));
    return out;
}

}  // namespace spinsq::testing
