// verifier.hpp - numerical adjudication of the decoupled-channel claim.
//
// The residual of a plane-wave state under the coupled local Hamiltonian is
// computed in closed form: -d^2/dz^2 acting on amplitude e^{iq(z-z_ref)}
// gives q^2, so every residual is again a plane-wave sum and its L2 norm
// over an interval is a finite double sum.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "mazerlab/claimed.hpp"
#include "mazerlab/model.hpp"
#include "mazerlab/propagator.hpp"

namespace mazerlab {

// integral_a^b |sum_j terms_j(z)|^2 dz.
inline double plane_wave_l2_squared(const std::vector<PlaneWave>& terms, double a, double b) {
    const cd i(0, 1);
    cd total{};
    for (const auto& tj : terms) {
        for (const auto& tl : terms) {
            const cd c = i * (tj.wavenumber - std::conj(tl.wavenumber));
            auto integrand = [&](double z) {
                return tj.amplitude * std::conj(tl.amplitude) *
                       std::exp(i * tj.wavenumber * (z - tj.z_ref) - i * std::conj(tl.wavenumber) * (z - tl.z_ref));
            };
            const double len = b - a;
            const cd x = c * len;
            if (std::abs(x) < 1e-6) {
                total += len * integrand(0.5 * (a + b)) * (1.0 + x * x / 24.0);
            } else {
                total += (integrand(b) - integrand(a)) / c;
            }
        }
    }
    return std::max(total.real(), 0.0);
}

struct RegionResidual {
    Region region = Region::left;
    Channel channel = Channel::plus;
    double window_start = 0.0;
    double window_end = 0.0;
    std::vector<PlaneWave> terms;  // residual at the primary energy
    double norm = 0.0;             // primary energy E = k^2 + Delta/2
    double norm_alt = 0.0;         // alternate energy E = k^2
};

struct ResidualReport {
    double k = 0.0;
    int n = 0;
    ModelParams params = make_params(1.0, 0.0, 0.0, 1.0);
    double energy = 0.0;
    double energy_alt = 0.0;
    double window_length = 0.0;  // truncation of the two exterior regions
    bool physical = false;
    std::array<RegionResidual, 6> entries;

    double max_norm() const {
        double m = 0.0;
        for (const auto& e : entries) m = std::max(m, e.norm);
        return m;
    }
    double max_norm_alt() const {
        double m = 0.0;
        for (const auto& e : entries) m = std::max(m, e.norm_alt);
        return m;
    }
    const RegionResidual& at(Region r, Channel c) const {
        return entries[static_cast<std::size_t>(r) * 2 + (c == Channel::plus ? 0 : 1)];
    }
};

namespace detail {

inline std::vector<PlaneWave> residual_terms(const ClaimedStationaryState& state, Region region, Channel channel,
                                             const Matrix2& block, double energy) {
    const std::size_t row = channel == Channel::plus ? 0 : 1;
    std::vector<PlaneWave> out;
    for (Channel src : {Channel::plus, Channel::minus}) {
        const std::size_t col = src == Channel::plus ? 0 : 1;
        for (const auto& t : state.terms(region, src)) {
            cd factor = block(row, col);
            if (src == channel) factor += t.wavenumber * t.wavenumber - energy;
            out.push_back({factor * t.amplitude, t.wavenumber, t.z_ref});
        }
    }
    return out;
}

inline std::array<double, 2> region_window(Region r, double cavity_length, double window) {
    switch (r) {
        case Region::left: return {-window, 0.0};
        case Region::inside: return {0.0, cavity_length};
        case Region::right: return {cavity_length, cavity_length + window};
    }
    return {0.0, 0.0};
}

}  // namespace detail

// Residual [H Psi]_+- - E Psi_+- of the published state under the full
// dressed-basis local Hamiltonian, per region and channel. Exterior regions
// are truncated to `window_length` (default 10/gamma). Amplitudes are
// relative to the unit incident wave.
inline ResidualReport claimed_residual(double k, int n, const ModelParams& p, double window_length = -1.0) {
    const ClaimedStationaryState state = assemble_claimed_state(k, n, p);
    ResidualReport rep;
    rep.k = k;
    rep.n = n;
    rep.params = p;
    rep.physical = state.physical();
    rep.energy = k * k + 0.5 * p.delta();
    rep.energy_alt = k * k;
    rep.window_length = window_length > 0.0 ? window_length : 10.0 / p.gamma();

    std::size_t idx = 0;
    for (Region r : {Region::left, Region::inside, Region::right}) {
        const Matrix2 block = sector_hamiltonian(r, n, p, Basis::dressed);
        const auto [a, b] = detail::region_window(r, p.cavity_length(), rep.window_length);
        for (Channel c : {Channel::plus, Channel::minus}) {
            RegionResidual& e = rep.entries[idx++];
            e.region = r;
            e.channel = c;
            e.window_start = a;
            e.window_end = b;
            e.terms = detail::residual_terms(state, r, c, block, rep.energy);
            e.norm = std::sqrt(plane_wave_l2_squared(e.terms, a, b));
            e.norm_alt =
                std::sqrt(plane_wave_l2_squared(detail::residual_terms(state, r, c, block, rep.energy_alt), a, b));
        }
    }
    return rep;
}

// Residual of the same state under the decoupled single-channel equations
// with potentials V+-(z) = +-sqrt(Delta^2/4 + lambda^2 f(z)^2 (n+1)) at
// energy k^2. Returned in the same layout; norm_alt is unused (0).
inline ResidualReport decoupled_residual(double k, int n, const ModelParams& p, double window_length = -1.0) {
    const ClaimedStationaryState state = assemble_claimed_state(k, n, p);
    ResidualReport rep;
    rep.k = k;
    rep.n = n;
    rep.params = p;
    rep.physical = state.physical();
    rep.energy = k * k;
    rep.energy_alt = k * k;
    rep.window_length = window_length > 0.0 ? window_length : 10.0 / p.gamma();
    std::size_t idx = 0;
    for (Region r : {Region::left, Region::inside, Region::right}) {
        const double f = r == Region::inside ? 1.0 : 0.0;
        const double v = std::hypot(0.5 * p.delta(), p.coupling(n) * f);
        Matrix2 block;
        block << v, 0.0, 0.0, -v;
        const auto [a, b] = detail::region_window(r, p.cavity_length(), rep.window_length);
        for (Channel c : {Channel::plus, Channel::minus}) {
            RegionResidual& e = rep.entries[idx++];
            e.region = r;
            e.channel = c;
            e.window_start = a;
            e.window_end = b;
            e.terms = detail::residual_terms(state, r, c, block, rep.energy);
            e.norm = std::sqrt(plane_wave_l2_squared(e.terms, a, b));
        }
    }
    return rep;
}

struct ResidualSweepRow {
    double delta = 0.0;
    double max_norm = 0.0;
    double max_norm_alt = 0.0;
    ResidualReport report;
};

inline std::vector<ResidualSweepRow> residual_sweep(double k, int n, const std::vector<double>& deltas,
                                                    const ModelParams& p) {
    std::vector<ResidualSweepRow> rows;
    rows.reserve(deltas.size());
    for (double d : deltas) {
        const ModelParams q = make_params(p.lambda(), d, p.omega(), p.cavity_length());
        ResidualReport rep = claimed_residual(k, n, q);
        rows.push_back({d, rep.max_norm(), rep.max_norm_alt(), std::move(rep)});
    }
    return rows;
}

// Least-squares slope of log(y) against log(x).
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw InvalidParameter("x", "need at least two matching points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double m = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double lx = std::log(std::abs(x[i])), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

// Solves the single-channel continuity problem as a 4x4 linear system,
// unknowns (r, a, b, T) for
//   e^{ikz} + r e^{-ikz} | a e^{i kappa z} + b e^{-i kappa (z-L)} | T e^{ik(z-L)}.
inline Eigen::Vector4cd continuity_solve(double k, cd kappa, double length) {
    const cd i(0, 1);
    const cd u = std::exp(i * kappa * length);
    Eigen::Matrix4cd m;
    Eigen::Vector4cd rhs;
    m << -1.0, 1.0, u, 0.0,
         i * k, i * kappa, -i * kappa * u, 0.0,
         0.0, u, 1.0, -1.0,
         0.0, i * kappa * u, -i * kappa, -i * k;
    rhs << 1.0, i * k, 0.0, 0.0;
    return m.fullPivLu().solve(rhs);
}

// Largest deviation between the published A, B, alpha, beta (both channels)
// and the same quantities rebuilt from independent continuity solves.
inline double matching_oracle(double k, int n, const ModelParams& p) {
    if (p.delta() != 0.0)
        throw OutOfValidity("matching_oracle compares the published coefficients at delta == 0 only");
    const ClaimedCoefficients c = claimed_coefficients(k, n, p);
    const double L = p.cavity_length();
    const double s = c.convention.source_factor;
    const cd phase = std::exp(cd(0, -k * L));
    double worst = 0.0;
    for (Channel ch : {Channel::plus, Channel::minus}) {
        const cd kappa = c.wavenumbers.interior(ch);
        const Eigen::Vector4cd x = continuity_solve(k, kappa, L);
        const cd A = s * x(0);
        const cd B = s * x(3) * phase;
        const cd alpha = s * phase * x(1);
        const cd beta = s * phase * x(2) * std::exp(cd(0, 1) * kappa * L);
        const auto& lit = c[ch];
        worst = std::max({worst, std::abs(A - lit.reflection), std::abs(B - lit.transmission),
                          std::abs(alpha - lit.alpha), std::abs(beta - lit.beta)});
    }
    return worst;
}

// Propagates the same packet in the bare and dressed bases and returns the
// largest pointwise deviation between the dressed run and the rotated bare
// run.
inline double basis_equivalence_check(const WavePacketSpec& spec, const Grid& grid, const ModelParams& p,
                                      const ModeFunction& mode, double dt, std::size_t steps) {
    const DressedRotation rot = dressed_angle(spec.n, p);
    const TwoChannelField bare0 = init_wavepacket(spec, grid);
    const TwoChannelField dressed0 = bare0.to_basis(Basis::dressed, rot);
    const Trajectory bare_run = propagate(bare0, p, mode, dt, steps);
    const Trajectory dressed_run = propagate(dressed0, p, mode, dt, steps);
    const TwoChannelField rotated = bare_run.final_field.to_basis(Basis::dressed, rot);
    double worst = 0.0;
    for (std::size_t c = 0; c < 2; ++c)
        for (std::size_t i = 0; i < grid.size(); ++i)
            worst = std::max(worst, std::abs(rotated.channels[c][i] - dressed_run.final_field.channels[c][i]));
    return worst;
}

struct SeparabilityRow {
    double delta = 0.0;
    double bare_inside = 0.0;
    double bare_outside = 0.0;
    double dressed_inside = 0.0;
    double dressed_outside = 0.0;
    double dressed_outside_expected = 0.0;  // lambda sqrt(n+1) |Delta| / (2 Omega_n)
};

struct SeparabilityAudit {
    int n = 0;
    double lambda = 1.0;
    std::vector<SeparabilityRow> rows;
};

// Off-diagonal magnitudes of the local block in both bases and both
// regions. Off resonance neither basis has both entries zero.
inline SeparabilityAudit separability_audit(int n, const ModelParams& p, const std::vector<double>& delta_grid) {
    SeparabilityAudit audit;
    audit.n = n;
    audit.lambda = p.lambda();
    for (double d : delta_grid) {
        const ModelParams q = make_params(p.lambda(), d, p.omega(), p.cavity_length());
        SeparabilityRow row;
        row.delta = d;
        row.bare_inside = std::abs(sector_hamiltonian(Region::inside, n, q, Basis::bare)(0, 1));
        row.bare_outside = std::abs(sector_hamiltonian(Region::left, n, q, Basis::bare)(0, 1));
        row.dressed_inside = std::abs(sector_hamiltonian(Region::inside, n, q, Basis::dressed)(0, 1));
        row.dressed_outside = std::abs(sector_hamiltonian(Region::left, n, q, Basis::dressed)(0, 1));
        row.dressed_outside_expected = q.coupling(n) * std::abs(d) / (2.0 * q.rabi_frequency(n));
        audit.rows.push_back(row);
    }
    return audit;
}

}  // namespace mazerlab
