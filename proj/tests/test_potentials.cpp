#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "common.hpp"
#include "pmsm/forcefield.hpp"
#include "pmsm/potentials.hpp"

using namespace pmsm;
using namespace pmsm::test;

namespace {
ParticleSystem pair(double r, double q1 = 1, double q2 = -1) { return make_system({{0, 0, 0}, {r, 0, 0}}, {q1, q2}); }

double brute_coulomb(const ParticleSystem& s, double k, double cutoff = INFINITY) {
    double u = 0;
    for (std::size_t i = 0; i < s.size(); ++i)
        for (std::size_t j = i + 1; j < s.size(); ++j) {
            const double r = norm(s.positions[j] - s.positions[i]);
            if (r <= cutoff) u += k * s.charges[i] * s.charges[j] / r;
        }
    return u;
}
}  // namespace

// --- Lennard-Jones ---------------------------------------------------------

TEST(LennardJones, ZeroAtSigma) {
    const auto p = LjParams::uniform(2, 0.3, 3.0, 10.0);
    EXPECT_NEAR(lj_energy_forces(pair(3.0), p).total_energy, 0.0, 1e-15);
}

TEST(LennardJones, MinimumAtTwoToTheSixth) {
    const double eps = 0.3, sigma = 3.0;
    const auto p = LjParams::uniform(2, eps, sigma, 10.0);
    const double rmin = std::pow(2.0, 1.0 / 6.0) * sigma;
    const auto r = lj_energy_forces(pair(rmin), p);
    EXPECT_NEAR(r.total_energy, -eps, 1e-12);
    EXPECT_NEAR(norm(r.forces[0]), 0.0, 1e-12);
    // oracle: 1-D scan of the pair formula
    double best = 1e9, best_r = 0;
    for (double x = 3.0; x < 4.0; x += 1e-5) {
        const double u = 4 * eps * (std::pow(sigma / x, 12) - std::pow(sigma / x, 6));
        if (u < best) best = u, best_r = x;
    }
    EXPECT_NEAR(best_r, rmin, 2e-5);
}

TEST(LennardJones, TruncatedBeyondCutoff) {
    const auto r = lj_energy_forces(pair(10.5), LjParams::uniform(2, 0.3, 3.0, 10.0));
    EXPECT_EQ(r.total_energy, 0.0);
    EXPECT_EQ(r.forces[0], Vec3{});
}

TEST(LennardJones, MixingAndValidation) {
    LjParams p;
    p.epsilon = {0.1, 0.4};
    p.sigma = {2.0, 4.0};
    p.cutoff = 10;
    const auto r = lj_energy_forces(pair(3.0), p);
    EXPECT_NEAR(r.total_energy, 0.0, 1e-15);  // mixed sigma = 3
    EXPECT_THROW(LjParams::uniform(2, 0.1, 3.0, 2.0).validate(2), ConfigError);
    EXPECT_THROW(LjParams::uniform(3, 0.1, 3.0, 10.0).validate(2), DimensionError);
}

// --- bonds -------------------------------------------------------------------

TEST(Bonds, Examples) {
    auto s = make_system({{0, 0, 0}, {1, 0, 0}});
    s.bonds.push_back({0, 1, 1.0, 1.0});
    auto r = bond_energy_forces(s);
    EXPECT_EQ(r.total_energy, 0.0);
    EXPECT_EQ(r.forces[1], Vec3{});

    s.positions[1] = {2, 0, 0};
    r = bond_energy_forces(s);
    EXPECT_DOUBLE_EQ(r.total_energy, 1.0);
    EXPECT_DOUBLE_EQ(r.forces[1].x, -2.0);
    EXPECT_DOUBLE_EQ(r.forces[0].x, 2.0);

    s.bonds.clear();
    r = bond_energy_forces(s);
    EXPECT_EQ(r.total_energy, 0.0);
}

// --- Coulomb -----------------------------------------------------------------

TEST(CoulombDirect, Examples) {
    EXPECT_DOUBLE_EQ(coulomb_direct(pair(2.0), 1.0).total_energy, -0.5);
    EXPECT_EQ(coulomb_direct(make_system({{0, 0, 0}}, {1.0}), 1.0).total_energy, 0.0);

    std::vector<Vec3> cube;
    for (int i = 0; i < 8; ++i) cube.push_back({double(i & 1), double((i >> 1) & 1), double((i >> 2) & 1)});
    const auto s = make_system(cube, std::vector<double>(8, 1.0));
    EXPECT_NEAR(coulomb_direct(s, 1.0).total_energy, 12.0 + 12.0 / std::sqrt(2.0) + 4.0 / std::sqrt(3.0), 1e-12);
    EXPECT_NEAR(coulomb_direct(s, 1.0).total_energy, 22.79474, 1e-4);
}

TEST(CoulombDirect, CoincidentAtomsThrow) {
    EXPECT_THROW(coulomb_direct(pair(1e-8)), SingularityError);
}

TEST(CoulombDirect, BondedPairsExcluded) {
    auto s = make_system({{0, 0, 0}, {1, 0, 0}, {3, 0, 0}}, {1, 1, 1});
    s.bonds.push_back({0, 1, 1, 1});
    EXPECT_NEAR(coulomb_direct(s, 1.0).total_energy, 1.0 / 3 + 1.0 / 2, 1e-15);
}

TEST(CoulombCutoff, Examples) {
    const auto s = cluster(40, 10, 3);
    EXPECT_EQ(coulomb_cutoff(s, 100.0, nullptr, 1.0).total_energy, coulomb_direct(s, 1.0).total_energy);
    EXPECT_EQ(coulomb_cutoff(pair(5.1), 5.0, nullptr, 1.0).total_energy, 0.0);
}

TEST(CoulombCutoff, MatchesFilteredBruteForce) {
    const auto s = cluster(100, 25, 4);
    const auto list = build_neighbor_list(s, 10.0, 2.0);
    EXPECT_NEAR(coulomb_cutoff(s, 10.0, &list).total_energy, brute_coulomb(s, COULOMB_K, 10.0), 1e-9);
    EXPECT_NEAR(coulomb_cutoff(s, 10.0).total_energy, brute_coulomb(s, COULOMB_K, 10.0), 1e-9);
}

TEST(CoulombCutoff, TruncationErrorShrinksWithCutoff) {
    const double cutoffs[] = {6, 9, 12, 15, 20};
    double err[5] = {};
    for (int t = 0; t < 10; ++t) {
        const auto s = cluster(200, 30, 100 + t);
        const double ref = coulomb_direct(s).total_energy;
        for (int c = 0; c < 5; ++c) err[c] += std::abs(coulomb_cutoff(s, cutoffs[c]).total_energy - ref) / 10;
    }
    for (int c = 1; c < 5; ++c) EXPECT_LE(err[c], err[c - 1]) << "cutoff " << cutoffs[c];
}

TEST(SmoothedCutoff, Examples) {
    const double on = 8, off = 10;
    EXPECT_DOUBLE_EQ(coulomb_smoothed_cutoff(pair(7.0), on, off, nullptr, 1.0).total_energy, -1.0 / 7.0);
    EXPECT_EQ(coulomb_smoothed_cutoff(pair(10.0), on, off, nullptr, 1.0).total_energy, 0.0);
    const double mid = coulomb_smoothed_cutoff(pair(9.0), on, off, nullptr, 1.0).total_energy;
    EXPECT_LT(mid, 0.0);
    EXPECT_GT(mid, -1.0 / 9.0);
}

TEST(SmoothedCutoff, ForceContinuousAcrossSwitchOn) {
    const double on = 8, off = 10, eps = 1e-9;
    const auto below = coulomb_smoothed_cutoff(pair(on - eps), on, off, nullptr, 1.0).forces[0].x;
    const auto above = coulomb_smoothed_cutoff(pair(on + eps), on, off, nullptr, 1.0).forces[0].x;
    EXPECT_NEAR(below, above, 1e-8);
    // and the reported force is the energy derivative just above the switch
    const double h = 1e-6;
    const double up = coulomb_smoothed_cutoff(pair(on + 1e-3 + h), on, off, nullptr, 1.0).total_energy;
    const double dn = coulomb_smoothed_cutoff(pair(on + 1e-3 - h), on, off, nullptr, 1.0).total_energy;
    EXPECT_NEAR(coulomb_smoothed_cutoff(pair(on + 1e-3), on, off, nullptr, 1.0).forces[1].x, -(up - dn) / (2 * h), 1e-8);
}

TEST(SmoothedCutoff, SwitchEndpoints) {
    EXPECT_EQ(switching(5, 8, 10).first, 1.0);
    EXPECT_EQ(switching(10, 8, 10).first, 0.0);
    EXPECT_NEAR(switching(8 + 1e-7, 8, 10).second, 0.0, 1e-6);
    EXPECT_NEAR(switching(10 - 1e-7, 8, 10).second, 0.0, 1e-6);
}

TEST(Wolf, SingleIonSelfTerm) {
    const auto s = make_system({{0, 0, 0}}, {1.0});
    const double expect = -(std::erfc(2.0) / 20.0 + 0.2 / std::sqrt(std::numbers::pi));
    EXPECT_NEAR(coulomb_wolf(s, 0.2, 10.0, nullptr, 1.0).total_energy, expect, 1e-15);
    EXPECT_NEAR(expect, -0.11307180, 1e-8);
}

TEST(Wolf, ZeroChargesGiveZero) {
    auto s = cluster(20, 10, 5);
    for (auto& q : s.charges) q = 0;
    const auto r = coulomb_wolf(s, 0.2, 12.0);
    EXPECT_EQ(r.total_energy, 0.0);
    for (const auto& f : r.forces) EXPECT_EQ(f, Vec3{});
}

TEST(Wolf, ApproachesDirectForSmallAlphaLargeCutoff) {
    const auto s = pair(3.0);
    const double direct = coulomb_direct(s, 1.0).total_energy;
    const double wolf = coulomb_wolf(s, 1e-6, 30.0, nullptr, 1.0).total_energy;
    EXPECT_LT(std::abs(wolf - direct), 1e-3 * std::abs(direct));
}

// --- properties ----------------------------------------------------------------

namespace {
std::vector<std::pair<std::string, ForceField>> all_backends() {
    std::vector<std::pair<std::string, ForceField>> out;
    for (auto kind : {ElectrostaticsKind::direct, ElectrostaticsKind::cutoff, ElectrostaticsKind::smoothed_cutoff,
                      ElectrostaticsKind::wolf, ElectrostaticsKind::msm}) {
        ForceField ff;
        ff.electrostatics.kind = kind;
        ff.electrostatics.cutoff = 8.0;
        ff.electrostatics.switch_on = 6.0;
        ff.electrostatics.msm.a = 6.0;
        ff.electrostatics.msm.h = 1.5;
        ff.bonds = false;
        out.emplace_back(std::string(to_string(kind)), ff);
    }
    return out;
}
}  // namespace

TEST(Properties, PairwiseBackendsHaveZeroNetForce) {
    auto s = cluster(60, 14, 6);
    s.bonds.push_back({0, 1, 5.0, 1.2});
    s.bonds.push_back({2, 3, 5.0, 1.2});
    const auto lj = LjParams::uniform(s.size(), 0.2, 0.9, 8.0);
    std::vector<ForceReport> reports{lj_energy_forces(s, lj), bond_energy_forces(s), coulomb_direct(s),
                                     coulomb_cutoff(s, 8.0), coulomb_smoothed_cutoff(s, 6.0, 8.0),
                                     coulomb_wolf(s, 0.2, 8.0)};
    for (const auto& r : reports) EXPECT_LT(norm(net_force(r)), 1e-9);
}

TEST(Properties, GradientConsistencyEveryBackend) {
    for (const auto& [name, base] : all_backends())
        for (int t = 0; t < 20; ++t) {
            auto s = cluster(50, 14, 200 + t);
            auto ff = base;
            ff.lj = LjParams::uniform(s.size(), 0.2, 0.9, 8.0);
            const double err = fd_relative_error(s, [&](const ParticleSystem& x) { return evaluate_forces(x, ff); });
            ASSERT_LT(err, 1e-4) << name << " system " << t;
        }
}

TEST(Properties, BondGradientConsistency) {
    auto s = cluster(10, 6, 7);
    for (std::size_t i = 0; i + 1 < s.size(); ++i) s.bonds.push_back({i, i + 1, 3.0, 1.5});
    EXPECT_LT(fd_relative_error(s, [](const ParticleSystem& x) { return bond_energy_forces(x); }), 1e-4);
}

TEST(Properties, NeighborListDoesNotChangeResults) {
    const auto s = cluster(150, 22, 8);
    const auto list = build_neighbor_list(s, 9.0, 2.0);
    const auto a = coulomb_cutoff(s, 9.0, &list), b = coulomb_cutoff(s, 9.0);
    EXPECT_NEAR(a.total_energy, b.total_energy, 1e-10 * std::abs(b.total_energy));
    const auto lj = LjParams::uniform(s.size(), 0.2, 0.9, 9.0);
    EXPECT_NEAR(lj_energy_forces(s, lj, &list).total_energy, lj_energy_forces(s, lj).total_energy, 1e-10);
}

TEST(ForceField, ExternalForceHasLinearPotential) {
    auto s = make_system({{1, 2, 3}});
    ForceField ff;
    ff.electrostatics.kind = ElectrostaticsKind::none;
    ff.external_force = {{0.5, 0, -1}};
    const auto r = evaluate_forces(s, ff);
    EXPECT_DOUBLE_EQ(r.total_energy, -(0.5 * 1 - 3));
    EXPECT_EQ(r.forces[0], (Vec3{0.5, 0, -1}));
}

TEST(ForceField, BackendNamesRoundTrip) {
    for (auto k : {ElectrostaticsKind::none, ElectrostaticsKind::direct, ElectrostaticsKind::cutoff,
                   ElectrostaticsKind::smoothed_cutoff, ElectrostaticsKind::wolf, ElectrostaticsKind::msm})
        EXPECT_EQ(electrostatics_kind_from_string(to_string(k)), k);
    EXPECT_THROW(electrostatics_kind_from_string("ewald"), ConfigError);
}

TEST(CoulombCutoff, CutoffAtDiameterEqualsDirect) {
    for (int t = 0; t < 5; ++t) {
        const auto s = cluster(100, 25, 500 + t);
        double diameter = 0;
        for (const auto& a : s.positions)
            for (const auto& b : s.positions) diameter = std::max(diameter, norm(a - b));
        EXPECT_NEAR(coulomb_cutoff(s, diameter).total_energy, coulomb_direct(s).total_energy, 1e-10);
        const auto list = build_neighbor_list(s, diameter, 0.0);
        EXPECT_NEAR(coulomb_cutoff(s, diameter, &list).total_energy, coulomb_direct(s).total_energy, 1e-10);
    }
}
