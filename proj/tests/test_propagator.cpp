#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "mazerlab/propagator.hpp"
#include "mazerlab/stationary.hpp"

using namespace mazerlab;

namespace {

double position_std(const std::vector<cd>& psi, const Grid& g) {
    double w = 0, m1 = 0, m2 = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double p = std::norm(psi[i]);
        w += p;
        m1 += p * g.z(i);
        m2 += p * g.z(i) * g.z(i);
    }
    m1 /= w;
    return std::sqrt(m2 / w - m1 * m1);
}

}  // namespace

TEST(Grid, SnapsCavityOntoNodes) {
    const Grid g = make_grid(-10, 12, 0.02, 2.0);
    EXPECT_EQ(g.z(g.index_of(0.0)), 0.0);
    EXPECT_NEAR(g.z(g.index_of(2.0)), 2.0, 1e-12);
    EXPECT_EQ(g.size(), 1101u);
    EXPECT_THROW(make_grid(-10, 12, 0.03, 2.0), InvalidParameter);
    EXPECT_THROW(make_grid(-10.01, 12, 0.02, 1.0), InvalidParameter);
    EXPECT_THROW(make_grid(-10, 12, 0.02, 1.01), InvalidParameter);
    EXPECT_THROW(make_grid(1, 0, 0.02, 1.0), InvalidParameter);
}

TEST(WavePacket, NormalizedExcitedPacket) {
    const Grid g = make_grid(-200, 40, 0.02, 1.0);
    const WavePacketSpec spec{1.0, 0.1, -80.0, 0};
    const TwoChannelField f = init_wavepacket(spec, g);
    EXPECT_NEAR(f.norm(), 1.0, 1e-12);
    EXPECT_EQ(f.channel_norm(1), 0.0);
    EXPECT_EQ(f.basis, Basis::bare);

    // Mean momentum from a direct discrete Fourier transform.
    double w = 0, m = 0;
    for (double k = spec.k0 - 8 * spec.sigma_k; k <= spec.k0 + 8 * spec.sigma_k; k += spec.sigma_k / 50) {
        cd amp{};
        for (std::size_t i = 0; i < g.size(); ++i) amp += f.channels[0][i] * std::exp(cd(0, -k * g.z(i)));
        w += std::norm(amp);
        m += k * std::norm(amp);
    }
    EXPECT_NEAR(m / w, spec.k0, spec.sigma_k / 10);
}

TEST(WavePacket, RejectsPacketOverlappingCavity) {
    const Grid g = make_grid(-200, 40, 0.02, 1.0);
    EXPECT_THROW(init_wavepacket({1.0, 0.1, -1.0 / 0.1, 0}, g), InvalidParameter);
    // Tail reaching the box boundary.
    EXPECT_THROW(init_wavepacket({1.0, 0.1, -190.0, 0}, g), InvalidParameter);
}

TEST(Propagate, FreePacketDispersion) {
    const auto p = make_params(1, 0, 0, 1);
    const Grid g = make_grid(-120, 20, 0.02, 1.0);
    const WavePacketSpec spec{1.0, 0.1, -70.0, 0};
    const TwoChannelField f0 = init_wavepacket(spec, g);
    const double s0 = position_std(f0.channels[0], g);
    const double dt = 0.005;
    const std::size_t steps = 4000;
    const Trajectory tr = propagate(f0, p, ModeFunction::zero(), dt, steps);
    const double t = dt * steps;
    const double expected = std::sqrt(s0 * s0 + 4 * spec.sigma_k * spec.sigma_k * t * t);
    EXPECT_NEAR(position_std(tr.final_field.channels[0], g) / expected, 1.0, 1e-3);
    EXPECT_LT(boundary_density(tr.final_field), 1e-10);
}

TEST(Propagate, NormConservedOverManySteps) {
    const auto p = make_params(1, 1, 0, 2);
    const Grid g = make_grid(-80, 40, 0.02, 2.0);
    const TwoChannelField f0 = init_wavepacket({1.5, 0.15, -40.0, 0}, g);
    const Trajectory tr = propagate(f0, p, ModeFunction::mesa(2.0), 0.002, 10000, {.record_every = 1000});
    EXPECT_LT(std::abs(tr.final_field.norm() - 1.0), 1e-9);
    EXPECT_LT(tr.max_norm_drift, 1e-9);
    EXPECT_EQ(tr.records.size(), 11u);
    for (const auto& r : tr.records) EXPECT_NEAR(r.p_e + r.p_g, r.norm, 1e-10);
    EXPECT_GT(tr.records.back().p_g, 1e-3);
}

TEST(Propagate, RecordsFirstAndLastWithoutStride) {
    const auto p = make_params(1, 0, 0, 1);
    const Grid g = make_grid(-60, 20, 0.05, 1.0);
    const Trajectory tr = propagate(init_wavepacket({1.0, 0.2, -30.0, 0}, g), p, ModeFunction::mesa(1.0), 0.01, 7);
    ASSERT_EQ(tr.records.size(), 2u);
    EXPECT_EQ(tr.records.front().t, 0.0);
    EXPECT_NEAR(tr.records.back().t, 0.07, 1e-15);
    EXPECT_EQ(tr.records.front().inversion, 1.0);
}

TEST(Propagate, FlagsLargeSteps) {
    const auto p = make_params(1, 0, 0, 1);
    const Grid g = make_grid(-60, 20, 0.05, 1.0);
    const TwoChannelField f = init_wavepacket({1.0, 0.2, -30.0, 0}, g);
    EXPECT_TRUE(propagate(f, p, ModeFunction::zero(), 0.01, 1).step_above_dz2);
    EXPECT_FALSE(propagate(f, p, ModeFunction::zero(), 0.001, 1).step_above_dz2);
    EXPECT_THROW(propagate(f, p, ModeFunction::zero(), 0.0, 1), InvalidParameter);
}

TEST(Propagate, NonFiniteFieldAbortsAsUnstable) {
    const auto p = make_params(1, 0, 0, 1);
    const Grid g = make_grid(-60, 20, 0.05, 1.0);
    TwoChannelField f = init_wavepacket({1.0, 0.2, -30.0, 0}, g);
    f.channels[1][100] = cd(NAN, 0);
    EXPECT_THROW(propagate(f, p, ModeFunction::zero(), 0.01, 3), StabilityError);
}

TEST(Propagate, AbsorbingLayerRemovesOutgoingFlux) {
    const auto p = make_params(1, 0, 0, 1);
    const Grid g = make_grid(-60, 30, 0.02, 1.0);
    PropagateOptions opt;
    opt.absorber = {true, 15.0, 2.0};
    const Trajectory tr = propagate(init_wavepacket({2.0, 0.3, -20.0, 0}, g), p, ModeFunction::zero(), 0.005, 6000, opt);
    EXPECT_LT(tr.final_field.norm(), 1e-3);
}

TEST(Propagate, BasisEquivalenceAtDetuning) {
    const auto p = make_params(1, 1, 0, 2);
    const Grid g = make_grid(-80, 40, 0.02, 2.0);
    const WavePacketSpec spec{1.5, 0.15, -40.0, 0};
    const DressedRotation rot = dressed_angle(0, p);
    const TwoChannelField bare0 = init_wavepacket(spec, g);
    const Trajectory a = propagate(bare0, p, ModeFunction::mesa(2.0), 0.01, 1000);
    const Trajectory b = propagate(bare0.to_basis(Basis::dressed, rot), p, ModeFunction::mesa(2.0), 0.01, 1000);
    const TwoChannelField a_rot = a.final_field.to_basis(Basis::dressed, rot);
    double worst = 0.0;
    for (std::size_t c = 0; c < 2; ++c)
        for (std::size_t i = 0; i < g.size(); ++i)
            worst = std::max(worst, std::abs(a_rot.channels[c][i] - b.final_field.channels[c][i]));
    EXPECT_LT(worst, 1e-8);
    // Observables do not depend on the basis used for propagation.
    EXPECT_NEAR(a.records.back().inversion, b.records.back().inversion, 1e-10);
}

TEST(HamiltonianApply, PlaneWaveEigenvalue) {
    const auto p = make_params(1, 0.8, 0, 1);
    const Grid g = make_grid(-10, 10, 0.01, 1.0);
    TwoChannelField f;
    f.grid = g;
    f.channels[0].resize(g.size());
    f.channels[1].assign(g.size(), cd{});
    const double k = 1.3;
    for (std::size_t i = 0; i < g.size(); ++i) f.channels[0][i] = std::exp(cd(0, k * g.z(i)));
    const TwoChannelField h = hamiltonian_apply(f, p, ModeFunction::zero());
    const double ev = k * k + 0.4;
    for (std::size_t i = 1; i + 1 < g.size(); ++i) {
        EXPECT_LT(std::abs(h.channels[0][i] - ev * f.channels[0][i]), std::pow(k, 4) * 1e-4 / 12 * 1.01);
        EXPECT_EQ(h.channels[1][i], cd{});
    }
}

TEST(HamiltonianApply, DressedAndBareRelatedByRotation) {
    const auto p = make_params(0.7, -1.2, 0, 3);
    const Grid g = make_grid(-5, 8, 0.01, 3.0);
    std::vector<double> prof;
    for (int i = 0; i <= 300; ++i) prof.push_back(std::sin(std::numbers::pi * i / 300.0));
    const ModeFunction mode = ModeFunction::sampled(0.0, 0.01, prof);
    TwoChannelField f;
    f.grid = g;
    f.n = 2;
    for (auto& ch : f.channels) ch.resize(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double z = g.z(i);
        f.channels[0][i] = std::exp(-0.1 * z * z) * std::exp(cd(0, 0.9 * z));
        f.channels[1][i] = 0.3 * std::exp(-0.2 * (z - 1) * (z - 1));
    }
    const DressedRotation rot = dressed_angle(2, p);
    const TwoChannelField hb = hamiltonian_apply(f, p, mode).to_basis(Basis::dressed, rot);
    const TwoChannelField hd = hamiltonian_apply(f.to_basis(Basis::dressed, rot), p, mode);
    // Entries are of order 1/dz^2, so round-off scales the same way.
    for (std::size_t c = 0; c < 2; ++c)
        for (std::size_t i = 0; i < g.size(); ++i)
            EXPECT_LT(std::abs(hb.channels[c][i] - hd.channels[c][i]), 1e-15 / (g.dz() * g.dz()));
}

TEST(HamiltonianApply, EnergyConservedAlongTrajectory) {
    // Constant local block: the split is exact and the CN step commutes
    // with the discrete kinetic operator.
    const auto p = make_params(1, 1.0, 0, 1);
    const Grid g = make_grid(-80, 40, 0.02, 1.0);
    const TwoChannelField f0 = init_wavepacket({1.2, 0.15, -40.0, 0}, g);
    const double e0 = energy_expectation(f0, p, ModeFunction::zero());
    const Trajectory tr = propagate(f0, p, ModeFunction::zero(), 0.01, 2000);
    EXPECT_NEAR(energy_expectation(tr.final_field, p, ModeFunction::zero()) / e0, 1.0, 1e-8);

    // With the cavity the split error keeps the drift at O(dt^2).
    const double m0 = energy_expectation(f0, p, ModeFunction::mesa(1.0));
    const Trajectory tm = propagate(f0, p, ModeFunction::mesa(1.0), 0.005, 8000);
    EXPECT_NEAR(energy_expectation(tm.final_field, p, ModeFunction::mesa(1.0)) / m0, 1.0, 1e-4);
}

TEST(Propagate, ResonantPacketMatchesStationary) {
    // Reduced-size version of the acceptance check (wider sigma_k).
    const auto p = make_params(1, 0, 0, 2);
    const double k0 = 1.0, sk = 0.05;
    const Grid g = make_grid(-260, 260, 0.02, 2.0);
    const TwoChannelField f0 = init_wavepacket({k0, sk, -110.0, 0}, g);
    const Trajectory tr = propagate(f0, p, ModeFunction::mesa(2.0), 0.02, 5500);
    const auto& psi = tr.final_field;
    double pg = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) pg += std::norm(psi.channels[1][i]) * g.dz();
    const auto st = flux_probabilities(stationary_scatter(k0, 0, p));
    EXPECT_NEAR(pg, st.emission(), 0.02 * st.emission());
    EXPECT_LT(boundary_density(psi), 1e-10);
}
