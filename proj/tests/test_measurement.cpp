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

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "spinsq/measurement.hpp"
#include "test_util.hpp"

using namespace spinsq;
using spinsq::testing::random_state;

namespace {

/// Mean and standard error of the per-shot value J^k under the exact outcome distribution.
std::pair<double, double> exact_power_stats(const StateVector& state, DirectionId dir, int k, std::uint64_t shots) {
    const auto probs = outcome_probabilities(state, measurement_direction(dir).n);
    const bool full = state.representation().is_full();
    double m1 = 0, m2 = 0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        const int exc = full ? detail::popcount(i) : static_cast<int>(i);
        const double v = std::pow(state.qubits() / 2.0 - exc, k);
        m1 += probs[i] * v;
        m2 += probs[i] * v * v;
    }
    return {m1, std::sqrt(std::max(m2 - m1 * m1, 0.0) / static_cast<double>(shots))};
}

ShotRecord manual_record(int qubits, std::map<std::uint64_t, std::uint64_t> counts) {
    ShotRecord rec;
    rec.qubits = qubits;
    rec.counts = std::move(counts);
    for (const auto& [o, c] : rec.counts) rec.shots += c;
    return rec;
}

}  // namespace

TEST(Directions, CountOrderAndNames) {
    const auto& dirs = directions_19();
    ASSERT_EQ(dirs.size(), 19u);
    for (std::size_t i = 0; i < dirs.size(); ++i) {
        EXPECT_EQ(static_cast<std::size_t>(dirs[i].id), i);
        EXPECT_EQ(direction_from_name(dirs[i].name), dirs[i].id);
    }
    try {
        direction_from_name("xx");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::MissingDirection);
    }
}

TEST(Directions, ReferenceVectors) {
    const double r2 = 1 / std::numbers::sqrt2, r3 = 1 / std::numbers::sqrt3, h3 = std::numbers::sqrt3 / 2;
    auto check = [](DirectionId id, double x, double y, double z) {
        const Direction& n = measurement_direction(id).n;
        EXPECT_NEAR(n.x(), x, 1e-15) << to_string(id);
        EXPECT_NEAR(n.y(), y, 1e-15) << to_string(id);
        EXPECT_NEAR(n.z(), z, 1e-15) << to_string(id);
    };
    check(DirectionId::xy, r2, r2, 0);
    check(DirectionId::xyp, 0.5, h3, 0);
    check(DirectionId::yzbp, 0, 0.5, -h3);
    check(DirectionId::xyz, r3, r3, r3);
    check(DirectionId::xyzb, r3, r3, -r3);
    check(DirectionId::zxb, -r2, 0, r2);
    check(DirectionId::xbyz, -r3, r3, r3);
}

TEST(Directions, UnitAndPairwiseDistinct) {
    const auto& dirs = directions_19();
    for (const auto& d : dirs) EXPECT_NEAR(d.n.vec().norm(), 1.0, 1e-12);
    for (std::size_t i = 0; i < dirs.size(); ++i)
        for (std::size_t j = i + 1; j < dirs.size(); ++j) EXPECT_GT((dirs[i].n.vec() - dirs[j].n.vec()).norm(), 1e-3);
}

TEST(Sampling, BasisStateAlwaysReadsZeros) {
    const StateVector up = coherent_spin_state(5, Direction::z_axis(), Representation::Kind::Full);
    const ShotRecord rec = sample_readout(up, DirectionId::z, 1000, 1);
    ASSERT_EQ(rec.counts.size(), 1u);
    EXPECT_EQ(rec.counts.begin()->first, 0u);
    EXPECT_EQ(rec.counts.begin()->second, 1000u);
    EXPECT_EQ(rec.kind, OutcomeKind::Bitstring);
    EXPECT_EQ(to_csv(rec), "bitstring,count\n00000,1000\n");
}

TEST(Sampling, AlignedStateGivesMaximalProjection) {
    const StateVector css = coherent_spin_state(6, Direction::x_axis(), Representation::Kind::Full);
    const ShotRecord rec = sample_readout(css, DirectionId::x, 1000000, 2);
    const auto [mean, se] = exact_power_stats(css, DirectionId::x, 1, rec.shots);
    EXPECT_NEAR(record_moments(rec).k[0], 3.0, 5 * se + 1e-12);
    EXPECT_NEAR(mean, 3.0, 1e-10);
}

TEST(Sampling, DeterministicForFixedSeed) {
    const StateVector psi = random_state(Representation::full(4), 3);
    const ShotRecord a = sample_readout(psi, DirectionId::xyz, 5000, 77);
    const ShotRecord b = sample_readout(psi, DirectionId::xyz, 5000, 77);
    const ShotRecord c = sample_readout(psi, DirectionId::xyz, 5000, 78);
    EXPECT_EQ(a.counts, b.counts);
    EXPECT_NE(a.counts, c.counts);
}

TEST(Sampling, CountsSumToShots) {
    for (auto repr : {Representation::full(5), Representation::dicke(9)}) {
        const StateVector psi = random_state(repr, 4);
        for (const auto& d : directions_19()) {
            const ShotRecord rec = sample_readout(psi, d.id, 777, 5);
            std::uint64_t total = 0;
            for (const auto& [o, c] : rec.counts) {
                EXPECT_LT(o, rec.outcome_count());
                total += c;
            }
            EXPECT_EQ(total, 777u);
            EXPECT_EQ(rec.shots, 777u);
        }
    }
}

TEST(Sampling, DickeRecordsUseExcitations) {
    const StateVector psi = dicke_state(4, 1);
    const ShotRecord rec = sample_readout(psi, DirectionId::z, 10, 1);
    EXPECT_EQ(rec.kind, OutcomeKind::Excitation);
    EXPECT_EQ(to_csv(rec), "excitations,count\n1,10\n");
    EXPECT_EQ(record_moments(rec).k[0], 1.0);
}

TEST(Sampling, GroupsSplitShotsAndDiffer) {
    const StateVector psi = random_state(Representation::dicke(6), 8);
    const auto groups = sample_groups(psi, DirectionId::y, 1003, 10, 9, 2);
    ASSERT_EQ(groups.size(), 10u);
    std::uint64_t total = 0;
    for (std::size_t g = 0; g < groups.size(); ++g) {
        total += groups[g].shots;
        EXPECT_EQ(groups[g].shots, g < 3 ? 101u : 100u);
    }
    EXPECT_EQ(total, 1003u);
    EXPECT_NE(groups[0].counts, groups[1].counts);
    try {
        sample_groups(psi, DirectionId::y, 5, 10, 9, 2);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InsufficientShots);
    }
}

TEST(Sampling, MergeAddsCounts) {
    const StateVector psi = random_state(Representation::dicke(3), 8);
    const auto groups = sample_groups(psi, DirectionId::x, 400, 4, 1, 0);
    std::vector<const ShotRecord*> parts;
    for (const auto& g : groups) parts.push_back(&g);
    const ShotRecord merged = merge_records(parts);
    EXPECT_EQ(merged.shots, 400u);
    std::uint64_t total = 0;
    for (const auto& [o, c] : merged.counts) total += c;
    EXPECT_EQ(total, 400u);
    const ShotRecord other = sample_readout(psi, DirectionId::y, 10, 1);
    EXPECT_THROW(merge_records({&groups[0], &other}), Error);
}

TEST(Sampling, MomentsConvergeAcrossRandomStatesAndDirections) {
    constexpr std::uint64_t kShots = 100000;
    int checks = 0;
    for (std::uint64_t trial = 0; trial < 100; ++trial) {
        const StateVector psi = random_state(Representation::dicke(4), 1000 + trial);
        for (const auto& d : directions_19()) {
            const DirectionMoments m =
                record_moments(sample_readout(psi, d.id, kShots, trial, static_cast<std::uint32_t>(d.id)));
            for (int k = 1; k <= 4; ++k) {
                const auto [mean, se] = exact_power_stats(psi, d.id, k, kShots);
                EXPECT_NEAR(m.k[static_cast<std::size_t>(k - 1)], mean, 5 * se + 1e-12)
                    << "trial " << trial << " dir " << d.name << " k " << k;
                ++checks;
            }
        }
    }
    EXPECT_EQ(checks, 100 * 19 * 4);
}

TEST(Confusion, PerfectModelLeavesCountsUnchanged) {
    const StateVector psi = random_state(Representation::full(4), 1);
    const ShotRecord rec = sample_readout(psi, DirectionId::zx, 2000, 3);
    EXPECT_EQ(apply_confusion(rec, ConfusionModel::ideal(4), 5).counts, rec.counts);
}

TEST(Confusion, IndependentFlips) {
    ShotRecord rec = manual_record(2, {{0, 1000000}});
    const ShotRecord noisy = apply_confusion(rec, ConfusionModel::uniform(2, 0.9, 1.0), 11);
    const double p00 = static_cast<double>(noisy.counts.at(0)) / 1e6;
    EXPECT_NEAR(p00, 0.81, 5 * std::sqrt(0.81 * 0.19 / 1e6));
}

TEST(Confusion, ValidationAndInvertibility) {
    EXPECT_THROW(ConfusionModel({0.9}, {0.9, 0.9}), Error);
    EXPECT_THROW(ConfusionModel({1.2}, {0.9}), Error);
    EXPECT_TRUE(ConfusionModel::uniform(3, 0.9, 0.8).invertible());
    EXPECT_FALSE(ConfusionModel::uniform(3, 0.5, 0.5).invertible());
    const ConfusionModel r = ConfusionModel::random(10, 3);
    for (int q = 0; q < 10; ++q) {
        EXPECT_GE(r.f0(q), 0.975);
        EXPECT_LE(r.f0(q), 0.995);
        EXPECT_GE(r.f1(q), 0.879);
        EXPECT_LE(r.f1(q), 0.942);
    }
}

TEST(Correction, IdentityModelKeepsDistribution) {
    const StateVector psi = random_state(Representation::full(3), 2);
    const ShotRecord rec = sample_readout(psi, DirectionId::y, 3000, 1);
    const auto dist = correct_readout(rec, ConfusionModel::ideal(3));
    EXPECT_EQ(dist.probabilities, empirical_distribution(rec));
    EXPECT_EQ(dist.clipped_mass, 0.0);
}

TEST(Correction, SingleQubitClosedForm) {
    const ShotRecord rec = manual_record(1, {{0, 9}, {1, 1}});
    const auto dist = correct_readout(rec, ConfusionModel({0.9}, {0.8}));
    EXPECT_NEAR(dist.quasi[0], 1.0, 1e-12);
    EXPECT_NEAR(dist.quasi[1], 0.0, 1e-12);
    EXPECT_NEAR(dist.probabilities[0], 1.0, 1e-12);
}

TEST(Correction, NegativeMassIsClippedAndReported) {
    const ShotRecord rec = manual_record(1, {{0, 1}});
    const auto dist = correct_readout(rec, ConfusionModel({0.9}, {0.8}));
    EXPECT_NEAR(dist.quasi[0], 0.8 / 0.7, 1e-12);
    EXPECT_NEAR(dist.quasi[1], -0.1 / 0.7, 1e-12);
    EXPECT_NEAR(dist.clipped_mass, 0.1 / 0.7, 1e-12);
    EXPECT_NEAR(dist.probabilities[0], 1.0, 1e-12);
    EXPECT_EQ(dist.probabilities[1], 0.0);
}

TEST(Correction, SingularModelIsRejected) {
    const ShotRecord rec = manual_record(2, {{0, 4}});
    try {
        correct_readout(rec, ConfusionModel({0.9, 0.6}, {0.9, 0.4}));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::SingularConfusion);
    }
}

TEST(Correction, RemovesReadoutBias) {
    const int n = 4;
    const StateVector psi = random_state(Representation::full(n), 12);
    const ConfusionModel model = ConfusionModel::uniform(n, 0.99, 0.99);
    constexpr std::uint64_t kShots = 1000000;
    for (DirectionId d : {DirectionId::z, DirectionId::xy, DirectionId::xyzb}) {
        const ShotRecord raw = sample_readout(psi, d, kShots, 21);
        const ShotRecord noisy = apply_confusion(raw, model, 21);
        const DirectionMoments corrected = corrected_moments(correct_readout(noisy, model), CorrectedSource::Quasi);
        for (int k = 1; k <= 4; ++k) {
            const auto [mean, se] = exact_power_stats(psi, d, k, kShots);
            // the inverse map inflates the spread; 2x the raw standard error covers it at F = 0.99
            EXPECT_NEAR(corrected.k[static_cast<std::size_t>(k - 1)], mean, 5 * 2.0 * se) << to_string(d) << k;
        }
    }
}

TEST(Moments, AllZerosRecord) {
    const DirectionMoments m = record_moments(manual_record(4, {{0, 50}}));
    EXPECT_EQ(m.k[0], 2.0);
    EXPECT_EQ(m.k[1], 4.0);
    EXPECT_EQ(m.k[2], 8.0);
    EXPECT_EQ(m.k[3], 16.0);
}

TEST(Moments, CoherentStateAlongZ) {
    const int n = 8;
    const StateVector css = coherent_spin_state(n, Direction::x_axis(), Representation::Kind::Dicke);
    const auto rec = sample_readout(css, DirectionId::z, 200000, 4);
    const auto m = record_moments(rec);
    const auto [m1, se1] = exact_power_stats(css, DirectionId::z, 1, rec.shots);
    const auto [m2, se2] = exact_power_stats(css, DirectionId::z, 2, rec.shots);
    EXPECT_NEAR(m1, 0.0, 1e-12);
    EXPECT_NEAR(m2, n / 4.0, 1e-12);
    EXPECT_NEAR(m.k[0], 0.0, 5 * se1);
    EXPECT_NEAR(m.k[1], n / 4.0, 5 * se2);
}

TEST(Moments, ExactTableMatchesExpectation) {
    const StateVector psi = random_state(Representation::dicke(7), 33);
    const MomentTable t = exact_moments(psi);
    EXPECT_TRUE(t.exact());
    for (const auto& d : directions_19()) {
        const auto op = collective_operator(d.n, psi.representation());
        for (int k = 1; k <= 4; ++k) EXPECT_NEAR(t.moment(d.id, k), expectation(psi, op, k), 1e-10);
    }
}

TEST(Moments, ExactTableBounds) {
    for (std::uint64_t s = 0; s < 20; ++s) {
        const StateVector psi = random_state(Representation::dicke(6), s);
        const MomentTable t = exact_moments(psi);
        for (const auto& d : directions_19()) {
            EXPECT_LE(std::abs(t.moment(d.id, 1)), 3.0 + 1e-12);
            EXPECT_LE(t.moment(d.id, 2), 9.0 + 1e-12);
            EXPECT_GE(t.moment(d.id, 2), t.moment(d.id, 1) * t.moment(d.id, 1) - 1e-12);
        }
    }
}

TEST(Moments, MissingDirectionAndCsv) {
    const StateVector psi = random_state(Representation::dicke(3), 3);
    const MomentTable t = exact_moments(psi, {DirectionId::x, DirectionId::z});
    EXPECT_TRUE(t.has(DirectionId::x));
    EXPECT_FALSE(t.has(DirectionId::y));
    try {
        t.moment(DirectionId::y, 1);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::MissingDirection);
    }
    const std::string csv = t.to_csv();
    EXPECT_EQ(csv.rfind("direction,k1,k2,k3,k4,shots\n", 0), 0u);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
    EXPECT_THROW(t.moment(DirectionId::x, 5), Error);
}

TEST(Moments, EstimateFromRecordsAndDistributions) {
    const StateVector psi = random_state(Representation::full(3), 8);
    std::vector<ShotRecord> recs;
    std::vector<CorrectedDistribution> dists;
    for (const auto& d : directions_19()) {
        recs.push_back(sample_readout(psi, d.id, 1000, 2));
        dists.push_back(correct_readout(recs.back(), ConfusionModel::ideal(3)));
    }
    const MomentTable a = estimate_moments(recs, 3);
    const MomentTable b = estimate_moments(dists, 3);
    EXPECT_FALSE(a.exact());
    for (const auto& d : directions_19())
        for (int k = 1; k <= 4; ++k) EXPECT_NEAR(a.moment(d.id, k), b.moment(d.id, k), 1e-12);
    EXPECT_THROW(estimate_moments(recs, 4), Error);
}

TEST(Bootstrap, ConstantReducerHasZeroSpread) {
    const auto r = bootstrap_groups(80, BootstrapScheme{}, 1, [](const std::vector<std::size_t>&) { return 2.5; });
    EXPECT_EQ(r.samples.size(), 10u);
    EXPECT_EQ(r.mean, 2.5);
    EXPECT_EQ(r.std, 0.0);
}

TEST(Bootstrap, PicksAreDistinctSortedAndReproducible) {
    const BootstrapScheme scheme{84, 40, 10};
    const auto a = bootstrap_picks(84, scheme, 5);
    const auto b = bootstrap_picks(84, scheme, 5);
    EXPECT_EQ(a, b);
    ASSERT_EQ(a.size(), 10u);
    for (const auto& pick : a) {
        ASSERT_EQ(pick.size(), 40u);
        EXPECT_TRUE(std::is_sorted(pick.begin(), pick.end()));
        EXPECT_EQ(std::set<std::size_t>(pick.begin(), pick.end()).size(), 40u);
        EXPECT_LT(pick.back(), 84u);
    }
    EXPECT_NE(a[0], a[1]);
}

TEST(Bootstrap, SchemeValidation) {
    EXPECT_THROW(bootstrap_picks(80, BootstrapScheme{80, 81, 10}, 1), Error);
    EXPECT_THROW(bootstrap_picks(80, BootstrapScheme{80, 40, 0}, 1), Error);
    try {
        bootstrap_picks(60, BootstrapScheme{80, 40, 10}, 1);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InsufficientShots);
    }
}

TEST(Bootstrap, SpreadScalesAsInverseRootShots) {
    const StateVector css = coherent_spin_state(10, Direction::x_axis(), Representation::Kind::Dicke);
    const BootstrapScheme scheme{80, 40, 10};
    auto spread = [&](std::uint64_t shots) {
        const auto groups = sample_groups(css, DirectionId::z, shots, 80, 3, 0);
        return bootstrap_groups(groups, scheme, 3, [](const ShotRecord& r) { return record_moments(r).k[0]; }).std;
    };
    const double small = spread(16000), large = spread(256000);
    // 16x the shots should shrink the spread by about 4
    EXPECT_GT(small / large, 2.0);
    EXPECT_LT(small / large, 8.0);
}

TEST(Bootstrap, PaperGroupingShape) {
    const StateVector psi = random_state(Representation::dicke(5), 1);
    const auto groups = sample_groups(psi, DirectionId::xy, 84000, 84, 1, 0);
    const auto r = bootstrap_groups(groups, BootstrapScheme{84, 40, 10}, 2,
                                    [](const ShotRecord& rec) {
                                        EXPECT_EQ(rec.shots, 40000u);
                                        return record_moments(rec).k[1];
                                    });
    EXPECT_EQ(r.samples.size(), 10u);
    EXPECT_GT(r.std, 0.0);
}
