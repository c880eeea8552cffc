#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "pmsm/core.hpp"
#include "pmsm/generate.hpp"
#include "pmsm/parallel.hpp"

using namespace pmsm;

namespace {
ParticleSystem random_system(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> u(-10, 10);
    std::vector<Vec3> pos(n), vel(n);
    std::vector<double> q(n), m(n);
    for (std::size_t i = 0; i < n; ++i) {
        pos[i] = {u(rng), u(rng), u(rng)};
        vel[i] = {u(rng), u(rng), u(rng)};
        q[i] = u(rng);
        m[i] = 1 + std::abs(u(rng));
    }
    auto s = make_system(pos, q, m);
    s.velocities = vel;
    return s;
}

StateVector random_state(std::mt19937_64& rng, std::size_t atoms) {
    std::normal_distribution<double> g;
    StateVector v;
    v.data.resize(6 * atoms);
    for (auto& x : v.data) x = g(rng);
    return v;
}
}  // namespace

TEST(StateVector, LayoutSingleAtom) {
    auto s = make_system({{1, 2, 3}});
    const auto v = state_from_system(s);
    EXPECT_EQ(v.data, (std::vector<double>{1, 2, 3, 0, 0, 0}));
}

TEST(StateVector, LengthIsSixN) {
    std::mt19937_64 rng(3);
    EXPECT_EQ(state_from_system(random_system(rng, 2)).size(), 12u);
}

TEST(StateVector, RoundTripExactOnThousandSystems) {
    std::mt19937_64 rng(11);
    for (int t = 0; t < 1000; ++t) {
        const auto s = random_system(rng, 1 + t % 7);
        const auto back = system_from_state(state_from_system(s), s);
        ASSERT_EQ(back.positions, s.positions);
        ASSERT_EQ(back.velocities, s.velocities);
        ASSERT_EQ(back.charges, s.charges);
    }
}

TEST(StateVector, SystemFromStateRejectsWrongLength) {
    auto s = make_system({{0, 0, 0}, {1, 0, 0}});
    StateVector v;
    v.data.resize(6);
    EXPECT_THROW(system_from_state(v, s), DimensionError);
}

TEST(StateAxpy, Examples) {
    StateVector x{{1, 1}}, y{{2, 3}};
    EXPECT_EQ(state_axpy(1.0, x, y).data, (std::vector<double>{3, 4}));
    EXPECT_EQ(state_axpy(0.0, x, y).data, y.data);
    EXPECT_EQ(state_axpy(-1.0, y, y).data, (std::vector<double>{0, 0}));
    EXPECT_THROW(state_axpy(1.0, x, StateVector{{1.0}}), DimensionError);
}

TEST(StateAxpy, Linearity) {
    std::mt19937_64 rng(5);
    for (int t = 0; t < 100; ++t) {
        const auto x = random_state(rng, 4), y = random_state(rng, 4), z = random_state(rng, 4);
        const double a = 0.7 * t - 3, b = 1.3 - 0.1 * t;
        const auto r = state_axpy(a, x, state_axpy(b, y, z));
        for (std::size_t k = 0; k < r.size(); ++k)
            ASSERT_NEAR(r.data[k], a * x.data[k] + b * y.data[k] + z.data[k], 1e-12);
    }
}

TEST(StateDistance, Examples) {
    auto s = make_system({{0, 0, 0}, {5, 5, 5}});
    const auto x = state_from_system(s);
    EXPECT_EQ(state_distance(x, x), 0.0);
    auto y = x;
    y.set_position(0, {3, 4, 0});
    EXPECT_DOUBLE_EQ(state_distance(x, y), 5.0);

    auto z = x;
    z.set_position(0, {1, 0, 0});
    z.set_position(1, Vec3{5, 5, 5} + Vec3{0, 3, 0});
    EXPECT_NEAR(state_distance(x, z, DistanceMode::rms_position), std::sqrt(5.0), 1e-12);
}

TEST(StateDistance, IgnoresVelocities) {
    auto s = make_system({{0, 0, 0}});
    auto x = state_from_system(s), y = x;
    y.set_velocity(0, {9, 9, 9});
    EXPECT_EQ(state_distance(x, y), 0.0);
}

TEST(StateDistance, SymmetryAndTriangle) {
    std::mt19937_64 rng(9);
    for (auto mode : {DistanceMode::max_position, DistanceMode::rms_position})
        for (int t = 0; t < 200; ++t) {
            const auto x = random_state(rng, 5), y = random_state(rng, 5), z = random_state(rng, 5);
            ASSERT_EQ(state_distance(x, y, mode), state_distance(y, x, mode));
            ASSERT_LE(state_distance(x, z, mode), state_distance(x, y, mode) + state_distance(y, z, mode) + 1e-12);
        }
}

TEST(ParticleSystem, ValidateRejectsBadInput) {
    auto s = make_system({{0, 0, 0}, {1, 0, 0}});
    EXPECT_NO_THROW(validate_system(s));
    auto bad = s;
    bad.masses[1] = 0;
    EXPECT_THROW(validate_system(bad), InputError);
    bad = s;
    bad.positions[1] = {0, 0, 1e-7};
    EXPECT_THROW(validate_system(bad), InputError);
    bad = s;
    bad.positions[0].x = NAN;
    EXPECT_THROW(validate_system(bad), InputError);
    bad = s;
    bad.bonds.push_back({1, 1, 1, 1});
    EXPECT_THROW(validate_system(bad), InputError);
    bad = s;
    bad.bonds.push_back({0, 2, 1, 1});
    EXPECT_THROW(validate_system(bad), InputError);
    EXPECT_THROW(validate_system(ParticleSystem{}), InputError);
}

TEST(ForceReport, TotalIsSumOfComponents) {
    auto r = ForceReport::zeros(2);
    r.components["lj"] = 1.5;
    r.components["coulomb_short"] = -0.25;
    r.finalize();
    EXPECT_NEAR(r.total_energy, 1.25, 1e-15);
    auto o = ForceReport::zeros(2);
    o.components["bonded"] = 2;
    o.forces[0] = {1, 0, 0};
    r += o;
    EXPECT_NEAR(r.total_energy, 3.25, 1e-15);
    EXPECT_EQ(r.forces[0].x, 1.0);
    EXPECT_THROW(r += ForceReport::zeros(3), DimensionError);
}

TEST(Units, Profiles) {
    EXPECT_EQ(Units::real().coulomb_k, 332.0636);
    EXPECT_EQ(Units::reduced().coulomb_k, 1.0);
    EXPECT_EQ(Units::reduced().force_to_accel, 1.0);
}

TEST(Generate, ClusterIsSeededAndSpaced) {
    ClusterSpec spec;
    spec.atoms = 50;
    spec.box = 15;
    spec.min_separation = 1.5;
    const auto a = random_cluster(spec), b = random_cluster(spec);
    EXPECT_EQ(a.positions, b.positions);
    double qsum = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        qsum += a.charges[i];
        for (std::size_t j = i + 1; j < a.size(); ++j) ASSERT_GE(norm(a.positions[i] - a.positions[j]), 1.5);
    }
    EXPECT_EQ(qsum, 0.0);
}

TEST(Generate, VelocitiesHitTargetKineticEnergy) {
    ClusterSpec spec;
    spec.atoms = 30;
    auto s = random_cluster(spec);
    assign_velocities(s, 12.5, 4);
    double ke = 0;
    Vec3 p{};
    for (std::size_t i = 0; i < s.size(); ++i) {
        ke += 0.5 * s.masses[i] * dot(s.velocities[i], s.velocities[i]) / KCAL_PER_AMU_TO_A_PER_FS2;
        p += s.velocities[i] * s.masses[i];
    }
    EXPECT_NEAR(ke, 12.5, 1e-10);
    EXPECT_LT(norm(p), 1e-12);
}

TEST(Parallel, CoversRangeAndPropagatesErrors) {
    std::vector<int> hit(1000, 0);
    parallel_for(0, hit.size(), [&](std::size_t i) { hit[i] += 1; }, 4);
    for (int h : hit) ASSERT_EQ(h, 1);
    EXPECT_THROW(parallel_for(0, 10, [](std::size_t i) { if (i == 7) throw InputError("x"); }, 3), InputError);
}
