#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "mazerlab/claimed.hpp"
#include "mazerlab/stationary.hpp"
#include "oracles.hpp"

using namespace mazerlab;

namespace {

void expect_continuous(const StationarySolution& s, double tol) {
    const double L = s.cavity_length;
    for (double z : {0.0, L}) {
        const Region out = z == 0.0 ? Region::left : Region::right;
        const BarePair v0 = s.bare(out, z), v1 = s.bare(Region::inside, z);
        const BarePair d0 = s.bare_derivative(out, z), d1 = s.bare_derivative(Region::inside, z);
        EXPECT_LT(std::abs(v0.e - v1.e), tol);
        EXPECT_LT(std::abs(v0.g - v1.g), tol);
        EXPECT_LT(std::abs(d0.e - d1.e), tol);
        EXPECT_LT(std::abs(d0.g - d1.g), tol);
    }
}

}  // namespace

TEST(Stationary, AgreesWithClaimedAtResonance) {
    const auto p = make_params(1, 0, 0, 1);
    const auto sol = stationary_scatter(2.0, 0, p);
    const auto st = assemble_claimed_state(2.0, 0, p);
    const BarePair r = st.bare_reflected(), t = st.bare_transmitted();
    EXPECT_LT(std::abs(sol.r_e - r.e), 1e-10);
    EXPECT_LT(std::abs(sol.r_g - r.g), 1e-10);
    EXPECT_LT(std::abs(sol.t_e - t.e), 1e-10);
    EXPECT_LT(std::abs(sol.t_g - t.g), 1e-10);
    for (double z : {-0.7, 0.3, 0.9, 1.6}) {
        const BarePair a = sol.bare(z), b = st.bare(z);
        EXPECT_LT(std::abs(a.e - b.e) + std::abs(a.g - b.g), 1e-10);
    }
}

TEST(Stationary, CouplingOffIsFreePropagation) {
    for (double delta : {0.0, 0.6}) {
        const auto p = make_params(1, delta, 0, 2.0);
        const auto sol = stationary_scatter(1.1, 0, p, ModeFunction::zero());
        EXPECT_NEAR(std::abs(sol.t_e - std::exp(cd(0, 1.1 * 2.0))), 0.0, 1e-12);
        EXPECT_LT(std::abs(sol.r_e), 1e-12);
        EXPECT_LT(std::abs(sol.r_g), 1e-12);
        EXPECT_LT(std::abs(sol.t_g), 1e-12);
        const auto pr = flux_probabilities(sol);
        EXPECT_NEAR(pr.transmit_e, 1.0, 1e-12);
    }
}

TEST(Stationary, ContinuityAndFluxUnitarity) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> k(0.05, 4), d(-2, 2), L(0.5, 12);
    int closed = 0;
    for (int trial = 0; trial < 300; ++trial) {
        const auto p = make_params(1, d(rng), 0, L(rng));
        const auto sol = stationary_scatter(k(rng), trial % 4, p);
        expect_continuous(sol, 1e-10);
        EXPECT_NEAR(flux_probabilities(sol).total(), 1.0, 1e-10);
        if (!sol.exit_open()) ++closed;
    }
    EXPECT_GT(closed, 0);
}

TEST(Stationary, ResidualOfCoupledEquationsVanishesPerRegion) {
    const auto p = make_params(1, 1, 0, 2);
    const auto sol = stationary_scatter(1.0, 0, p);
    const double E = sol.wavenumbers.energy;
    for (const auto& ch : sol.interior) {
        // Interior eigenvector equation: (E - kappa^2) = level.
        EXPECT_NEAR(std::abs(E - ch.kappa * ch.kappa - ch.level), 0.0, 1e-12);
        const Matrix2 h = sector_hamiltonian(Region::inside, 0, p, Basis::bare);
        Eigen::Vector2cd v(ch.vector.e, ch.vector.g);
        EXPECT_LT((h * v - ch.level * v).cwiseAbs().maxCoeff(), 1e-12);
    }
    EXPECT_NEAR(std::abs(sol.wavenumbers.k_g * sol.wavenumbers.k_g - (E + 0.5)), 0.0, 1e-12);
}

TEST(Stationary, MatchesFiniteDifferenceOracle) {
    // Off-resonant reference case solved by a brute-force FD boundary-value
    // problem at two spacings; Richardson extrapolation removes O(h^2).
    const double k = 1.0, delta = 1.0, L = 2.0;
    const auto pr = flux_probabilities(stationary_scatter(k, 0, make_params(1, delta, 0, L)));
    EXPECT_NEAR(pr.total(), 1.0, 1e-10);
    const auto coarse = oracle::finite_difference_scatter(k, 0, 1.0, delta, L, 2e-3);
    const auto fine = oracle::finite_difference_scatter(k, 0, 1.0, delta, L, 1e-3);
    auto extrap = [](double c, double f) { return (4.0 * f - c) / 3.0; };
    EXPECT_NEAR(pr.reflect_e, extrap(coarse.reflect_e, fine.reflect_e), 1e-7);
    EXPECT_NEAR(pr.reflect_g, extrap(coarse.reflect_g, fine.reflect_g), 1e-7);
    EXPECT_NEAR(pr.transmit_e, extrap(coarse.transmit_e, fine.transmit_e), 1e-7);
    EXPECT_NEAR(pr.transmit_g, extrap(coarse.transmit_g, fine.transmit_g), 1e-7);
    // Second-order convergence of the raw FD values.
    const double ec = std::abs(coarse.transmit_g - pr.transmit_g);
    const double ef = std::abs(fine.transmit_g - pr.transmit_g);
    EXPECT_GT(ec / ef, 3.0);
    EXPECT_LT(ec / ef, 5.0);

    // Values frozen from the FD oracle (Richardson, h = 2e-3 / 1e-3).
    EXPECT_NEAR(pr.reflect_e, 0.092659739869210, 1e-7);
    EXPECT_NEAR(pr.reflect_g, 0.065522027784028, 1e-7);
    EXPECT_NEAR(pr.transmit_e, 0.349197104995166, 1e-7);
    EXPECT_NEAR(pr.transmit_g, 0.492621127351852, 1e-7);
}

TEST(Stationary, ClosedExitChannelCarriesNoFlux) {
    const auto sol = stationary_scatter(1.0, 0, make_params(1, -2.5, 0, 1.5));
    EXPECT_FALSE(sol.exit_open());
    const auto pr = flux_probabilities(sol);
    EXPECT_EQ(pr.reflect_g, 0.0);
    EXPECT_EQ(pr.transmit_g, 0.0);
    EXPECT_NEAR(pr.reflect_e + pr.transmit_e, 1.0, 1e-10);
    expect_continuous(sol, 1e-10);
}

TEST(Stationary, RejectsSampledProfiles) {
    EXPECT_THROW(stationary_scatter(1.0, 0, make_params(1, 0, 0, 1), ModeFunction::sampled(0, 0.1, {1, 1})),
                 InvalidParameter);
}

TEST(Stationary, LongEvanescentCavityStaysConditioned) {
    const auto sol = stationary_scatter(0.3, 0, make_params(1, 0.2, 0, 200.0));
    EXPECT_LT(sol.condition_number, 1e6);
    EXPECT_NEAR(flux_probabilities(sol).total(), 1.0, 1e-10);
}

TEST(Stationary, InteriorThresholdUsesLinearSolution) {
    // k = 1, Delta = 0 puts kappa+ exactly at zero.
    const auto p = make_params(1, 0, 0, 2);
    const auto sol = stationary_scatter(1.0, 0, p);
    EXPECT_EQ(sol.interior[0].kappa, cd{});
    expect_continuous(sol, 1e-12);
    const auto pr = flux_probabilities(sol);
    EXPECT_NEAR(pr.total(), 1.0, 1e-12);
    // The limit from either side is continuous.
    for (double dk : {1e-6, -1e-6}) {
        const auto near = flux_probabilities(stationary_scatter(1.0 + dk, 0, p));
        EXPECT_NEAR(near.emission(), pr.emission(), 1e-4);
        EXPECT_NEAR(near.reflect_e, pr.reflect_e, 1e-4);
    }
}

TEST(Stationary, TransparentCavityWithEqualParityTransmitsExcited) {
    // kappa+ L = pi and kappa- L = 3 pi: both dressed channels return the
    // same sign, so the excited state is transmitted unchanged.
    const double L = 2.0 * std::numbers::pi;
    const double k = std::sqrt(0.25 + 1.0);
    const auto sol = stationary_scatter(k, 0, make_params(1, 0, 0, L));
    EXPECT_NEAR(std::real(sol.interior[0].kappa) * L, std::numbers::pi, 1e-12);
    EXPECT_NEAR(std::real(sol.interior[1].kappa) * L, 3.0 * std::numbers::pi, 1e-12);
    const auto pr = flux_probabilities(sol);
    EXPECT_NEAR(pr.transmit_e, 1.0, 1e-12);
    EXPECT_LT(pr.emission() + pr.reflect_e, 1e-12);
}
