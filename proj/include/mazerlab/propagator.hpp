// propagator.hpp - wave-packet propagation of one photon sector on a
// uniform grid.
//
// Each step is a Strang split: exact 2x2 local exponential for dt/2,
// Crank-Nicolson kinetic step for dt on each channel, local exponential
// for dt/2. Both pieces are unitary, so the discrete norm is conserved to
// round-off. Hard walls (Dirichlet) at the box ends.

#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "mazerlab/model.hpp"

namespace mazerlab {

class Grid {
public:
    double z_min() const noexcept { return z_min_; }
    double dz() const noexcept { return dz_; }
    std::size_t size() const noexcept { return count_; }
    double z_max() const noexcept { return z(count_ - 1); }
    // Positions are measured from the node at z = 0 so that it is exact.
    double z(std::size_t i) const noexcept {
        return dz_ * static_cast<double>(static_cast<long long>(i) - origin_);
    }

    // Index of the node at `z`, which must lie on the grid.
    std::size_t index_of(double z) const {
        return static_cast<std::size_t>(std::llround(z / dz_) + origin_);
    }

    friend Grid make_grid(double z_min, double z_max, double dz, double cavity_length);

private:
    double z_min_ = 0.0;
    double dz_ = 1.0;
    std::size_t count_ = 0;
    long long origin_ = 0;  // index of the node at z = 0
};

// Uniform grid on [z_min, z_max] whose nodes include 0 and cavity_length.
inline Grid make_grid(double z_min, double z_max, double dz, double cavity_length) {
    constexpr double tol = 1e-9;
    if (!(dz > 0.0)) throw InvalidParameter("dz", "must be > 0");
    if (!(z_max > z_min)) throw InvalidParameter("z_max", "must exceed z_min");
    auto on_grid = [&](double x) { return std::abs(x / dz - std::round(x / dz)) < tol; };
    if (!on_grid(z_max - z_min)) throw InvalidParameter("dz", "(z_max - z_min)/dz must be an integer");
    if (!on_grid(-z_min)) throw InvalidParameter("z_min", "z = 0 must be a grid node");
    if (cavity_length > 0.0 && !on_grid(cavity_length))
        throw InvalidParameter("dz", "cavity_length must be a multiple of dz");
    Grid g;
    // Snap so that z = 0 is represented exactly.
    const long long steps_below = std::llround(-z_min / dz);
    g.z_min_ = -static_cast<double>(steps_below) * dz;
    g.dz_ = dz;
    g.origin_ = steps_below;
    g.count_ = static_cast<std::size_t>(std::llround((z_max - z_min) / dz)) + 1;
    return g;
}

// Two complex channel amplitudes on a grid. Channel order is (e, g) for the
// bare basis and (+, -) for the dressed basis.
struct TwoChannelField {
    Grid grid;
    std::array<std::vector<cd>, 2> channels;
    Basis basis = Basis::bare;
    int n = 0;
    double time = 0.0;

    double channel_norm(std::size_t c) const {
        double sum = 0.0;
        for (const cd& v : channels[c]) sum += std::norm(v);
        return sum * grid.dz();
    }
    double norm() const { return channel_norm(0) + channel_norm(1); }

    TwoChannelField to_basis(Basis target, const DressedRotation& rot) const {
        if (target == basis) return *this;
        TwoChannelField out = *this;
        out.basis = target;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            if (target == Basis::dressed) {
                const DressedPair d = dressed_rotate({channels[0][i], channels[1][i]}, rot);
                out.channels[0][i] = d.plus;
                out.channels[1][i] = d.minus;
            } else {
                const BarePair b = undress({channels[0][i], channels[1][i]}, rot);
                out.channels[0][i] = b.e;
                out.channels[1][i] = b.g;
            }
        }
        return out;
    }
};

struct WavePacketSpec {
    double k0 = 1.0;
    double sigma_k = 0.05;  // rms width of |G(k)|^2
    double z0 = -100.0;
    int n = 0;
};

// psi_e(z) = exp(-sigma_k^2 (z - z0)^2 + i k0 z) theta(-z), psi_g = 0,
// normalized on the grid.
inline TwoChannelField init_wavepacket(const WavePacketSpec& spec, const Grid& grid) {
    if (!(spec.sigma_k > 0.0)) throw InvalidParameter("sigma_k", "must be > 0");
    if (!(spec.k0 > 0.0)) throw InvalidParameter("k0", "must be > 0");
    if (spec.n < 0) throw InvalidParameter("n", "photon number must be >= 0");
    if (!(spec.z0 + 5.0 / spec.sigma_k < 0.0))
        throw InvalidParameter("z0", "packet overlaps the cavity: need z0 + 5/sigma_k < 0");
    auto envelope = [&](double z) { return std::exp(-spec.sigma_k * spec.sigma_k * (z - spec.z0) * (z - spec.z0)); };
    if (envelope(grid.z_min()) > 1e-8 || envelope(grid.z_max()) > 1e-8)
        throw InvalidParameter("grid", "packet tail at the box boundary exceeds 1e-8 of its peak");

    TwoChannelField f;
    f.grid = grid;
    f.basis = Basis::bare;
    f.n = spec.n;
    f.channels[0].assign(grid.size(), cd{});
    f.channels[1].assign(grid.size(), cd{});
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double z = grid.z(i);
        if (z < 0.0) f.channels[0][i] = envelope(z) * std::exp(cd(0, spec.k0 * z));
    }
    const double scale = 1.0 / std::sqrt(f.norm());
    for (auto& v : f.channels[0]) v *= scale;
    return f;
}

// Overload matching the model-aware signature; params are not needed to
// build the packet but fix the sector convention.
inline TwoChannelField init_wavepacket(const WavePacketSpec& spec, const Grid& grid, const ModelParams&) {
    return init_wavepacket(spec, grid);
}

// Complex absorbing potential -i W(z) on the outer `width` of each box end,
// W growing quadratically to `strength`. Off unless enabled.
struct AbsorbingLayer {
    bool enabled = false;
    double width = 10.0;
    double strength = 1.0;

    double at(const Grid& g, double z) const {
        if (!enabled || width <= 0.0) return 0.0;
        const double d = std::min(z - g.z_min(), g.z_max() - z);
        if (d >= width) return 0.0;
        const double x = (width - d) / width;
        return strength * x * x;
    }
};

struct ObservableRecord {
    double t = 0.0;
    double norm = 0.0;
    double p_e = 0.0;
    double p_g = 0.0;
    double inversion = 0.0;
};

inline ObservableRecord observe(const TwoChannelField& f, const DressedRotation& rot) {
    const TwoChannelField& bare = f.basis == Basis::bare ? f : f.to_basis(Basis::bare, rot);
    ObservableRecord r;
    r.t = f.time;
    r.p_e = bare.channel_norm(0);
    r.p_g = bare.channel_norm(1);
    r.norm = r.p_e + r.p_g;
    // Expectation of sigma_z in the normalized state, so that a purely
    // excited field gives exactly +1 and W stays in [-1, 1] under absorption.
    r.inversion = r.norm > 0.0 ? (r.p_e - r.p_g) / r.norm : 0.0;
    return r;
}

struct PropagateOptions {
    std::size_t record_every = 0;  // 0: record only the initial and final states
    AbsorbingLayer absorber{};
    // Called with every recorded snapshot.
    std::function<void(const TwoChannelField&, const ObservableRecord&)> on_snapshot{};
};

struct Trajectory {
    TwoChannelField final_field;
    std::vector<ObservableRecord> records;
    bool step_above_dz2 = false;  // dt >= dz^2: accurate only for slowly varying fields
    double max_norm_drift = 0.0;
};

namespace detail {

// exp(-i H tau) for a Hermitian 2x2 block, from its eigen-decomposition:
// H = m I + K with K traceless, K^2 = rho^2 I.
inline Matrix2 local_exponential(const Matrix2& h, double tau) {
    const cd m = 0.5 * (h(0, 0) + h(1, 1));
    Matrix2 k = h;
    k(0, 0) -= m;
    k(1, 1) -= m;
    const double rho = std::sqrt(std::norm(k(0, 0)) + std::norm(k(0, 1)));
    const double x = rho * tau;
    const double sinc = rho > 0.0 ? std::sin(x) / rho : tau;
    Matrix2 out = std::cos(x) * Matrix2::Identity() - cd(0, 1) * sinc * k;
    return std::exp(cd(0, -1) * m * tau) * out;
}

// Complex product in plain real arithmetic. The std::complex operator
// carries inf/nan recovery that dominates the cost of the inner loops.
inline cd mul(cd a, cd b) {
    return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}

// Solves (1 + i beta T) x = y with T = tridiag(-1, 2, -1) (Dirichlet),
// reusing the elimination coefficients across calls. The coefficients
// converge geometrically along the grid, so only the stretch before they
// settle is stored.
class CrankNicolsonKinetic {
public:
    CrankNicolsonKinetic(std::size_t size, double dt, double dz) : beta_(dt / (2.0 * dz * dz)) {
        const cd diag(1.0, 2.0 * beta_);
        const cd off(0.0, -beta_);
        cd prev_c{};
        for (std::size_t j = 0; j < size; ++j) {
            const cd denom = diag - (j > 0 ? off * prev_c : cd{});
            if (std::abs(denom) == 0.0) throw StabilityError("Crank-Nicolson elimination failed");
            const cd inv = 1.0 / denom;
            const cd c = off * inv;
            if (j > 0 && c == prev_c && inv == inv_denom_.back()) break;
            inv_denom_.push_back(inv);
            cprime_.push_back(c);
            prev_c = c;
        }
    }

    // In place for both channels: psi <- (1 + i beta T)^{-1} (1 - i beta T) psi.
    void apply(std::vector<cd>& a, std::vector<cd>& b, std::vector<cd>& scratch) const {
        const std::size_t nsz = a.size();
        if (nsz == 0) return;
        scratch.resize(2 * nsz);
        const std::size_t stored = cprime_.size();
        const cd inv_limit = inv_denom_.back(), c_limit = cprime_.back();
        // The explicit half and the forward sweep share one pass; the fields
        // are only read here, so index j + 1 still holds the old value.
        const cd ib(0.0, beta_);
        const cd off(0.0, -beta_);
        cd left_a{}, left_b{}, prev_a{}, prev_b{};
        for (std::size_t j = 0; j < nsz; ++j) {
            const cd right_a = j + 1 < nsz ? a[j + 1] : cd{};
            const cd right_b = j + 1 < nsz ? b[j + 1] : cd{};
            const cd rhs_a = a[j] - mul(ib, 2.0 * a[j] - left_a - right_a);
            const cd rhs_b = b[j] - mul(ib, 2.0 * b[j] - left_b - right_b);
            left_a = a[j];
            left_b = b[j];
            const cd inv = j < stored ? inv_denom_[j] : inv_limit;
            prev_a = mul(rhs_a - mul(off, prev_a), inv);
            prev_b = mul(rhs_b - mul(off, prev_b), inv);
            scratch[2 * j] = prev_a;
            scratch[2 * j + 1] = prev_b;
        }
        a[nsz - 1] = scratch[2 * nsz - 2];
        b[nsz - 1] = scratch[2 * nsz - 1];
        for (std::size_t j = nsz - 1; j-- > 0;) {
            const cd c = j < stored ? cprime_[j] : c_limit;
            a[j] = scratch[2 * j] - mul(c, a[j + 1]);
            b[j] = scratch[2 * j + 1] - mul(c, b[j + 1]);
        }
    }

private:
    double beta_;
    std::vector<cd> cprime_;
    std::vector<cd> inv_denom_;
};

// A stretch of nodes [begin, end) sharing one local propagator.
struct LocalRun {
    std::size_t begin = 0;
    std::size_t end = 0;
    Matrix2 u;
};

// Applies the runs to both channels and returns sum |psi|^2 afterwards.
inline double apply_local(const std::vector<LocalRun>& runs, std::vector<cd>& a, std::vector<cd>& b) {
    double sum = 0.0;
    for (const LocalRun& r : runs) {
        const cd u00 = r.u(0, 0), u01 = r.u(0, 1), u10 = r.u(1, 0), u11 = r.u(1, 1);
        for (std::size_t i = r.begin; i < r.end; ++i) {
            const cd x = a[i], y = b[i];
            a[i] = mul(u00, x) + mul(u01, y);
            b[i] = mul(u10, x) + mul(u11, y);
            sum += std::norm(a[i]) + std::norm(b[i]);
        }
    }
    return sum;
}

}  // namespace detail

// Local potential blocks for every grid node of the field's basis.
inline std::vector<Matrix2> local_blocks(const Grid& grid, int n, const ModelParams& p, const ModeFunction& mode,
                                         Basis basis) {
    std::vector<Matrix2> blocks(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) blocks[i] = sector_hamiltonian(mode(grid.z(i)), n, p, basis);
    return blocks;
}

// Norm drift beyond which a unitary run is aborted.
inline constexpr double kMaxNormDrift = 1e-6;

inline Trajectory propagate(const TwoChannelField& field, const ModelParams& p, const ModeFunction& mode, double dt,
                            std::size_t n_steps, const PropagateOptions& options = {}) {
    if (!(dt > 0.0)) throw InvalidParameter("dt", "must be > 0");
    const Grid& grid = field.grid;
    const DressedRotation rot = dressed_angle(field.n, p);
    const std::vector<Matrix2> blocks = local_blocks(grid, field.n, p, mode, field.basis);

    std::vector<detail::LocalRun> runs;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        Matrix2 u = detail::local_exponential(blocks[i], 0.5 * dt);
        const double w = options.absorber.at(grid, grid.z(i));
        if (w > 0.0) u *= std::exp(-w * 0.5 * dt);
        if (!runs.empty() && runs.back().u == u)
            runs.back().end = i + 1;
        else
            runs.push_back({i, i + 1, u});
    }
    const detail::CrankNicolsonKinetic kinetic(grid.size(), dt, grid.dz());

    Trajectory traj;
    traj.step_above_dz2 = dt >= grid.dz() * grid.dz();
    traj.final_field = field;
    TwoChannelField& psi = traj.final_field;
    const double norm0 = psi.norm();

    auto record = [&] {
        const ObservableRecord rec = observe(psi, rot);
        traj.records.push_back(rec);
        if (options.on_snapshot) options.on_snapshot(psi, rec);
    };
    record();
    std::vector<cd> scratch;
    for (std::size_t step = 1; step <= n_steps; ++step) {
        detail::apply_local(runs, psi.channels[0], psi.channels[1]);
        kinetic.apply(psi.channels[0], psi.channels[1], scratch);
        const double norm = detail::apply_local(runs, psi.channels[0], psi.channels[1]) * grid.dz();
        psi.time = field.time + dt * static_cast<double>(step);

        if (!options.absorber.enabled) {
            const double drift = std::abs(norm - norm0);
            traj.max_norm_drift = std::max(traj.max_norm_drift, drift);
            if (!(drift <= kMaxNormDrift))
                throw StabilityError("norm drift " + std::to_string(drift) + " at step " + std::to_string(step));
        }
        if ((options.record_every > 0 && step % options.record_every == 0) ||
            (step == n_steps && (options.record_every == 0 || step % options.record_every != 0)))
            record();
    }
    return traj;
}

// (-d^2/dz^2 + local block) psi with the 3-point stencil and zero ghosts.
inline TwoChannelField hamiltonian_apply(const TwoChannelField& field, const ModelParams& p, const ModeFunction& mode) {
    const Grid& grid = field.grid;
    const std::size_t nsz = grid.size();
    const double inv_dz2 = 1.0 / (grid.dz() * grid.dz());
    TwoChannelField out = field;
    for (std::size_t i = 0; i < nsz; ++i) {
        const Matrix2 h = sector_hamiltonian(mode(grid.z(i)), field.n, p, field.basis);
        for (std::size_t c = 0; c < 2; ++c) {
            const auto& psi = field.channels[c];
            const cd left = i > 0 ? psi[i - 1] : cd{};
            const cd right = i + 1 < nsz ? psi[i + 1] : cd{};
            out.channels[c][i] = (2.0 * psi[i] - left - right) * inv_dz2;
        }
        const cd x = field.channels[0][i], y = field.channels[1][i];
        out.channels[0][i] += h(0, 0) * x + h(0, 1) * y;
        out.channels[1][i] += h(1, 0) * x + h(1, 1) * y;
    }
    return out;
}

inline double energy_expectation(const TwoChannelField& field, const ModelParams& p, const ModeFunction& mode) {
    const TwoChannelField h = hamiltonian_apply(field, p, mode);
    cd sum{};
    for (std::size_t c = 0; c < 2; ++c)
        for (std::size_t i = 0; i < field.grid.size(); ++i) sum += std::conj(field.channels[c][i]) * h.channels[c][i];
    return sum.real() * field.grid.dz() / field.norm();
}

// Probability density at the two end nodes of the box.
inline double boundary_density(const TwoChannelField& f) {
    const std::size_t last = f.grid.size() - 1;
    double m = 0.0;
    for (std::size_t c = 0; c < 2; ++c)
        m = std::max({m, std::norm(f.channels[c][0]), std::norm(f.channels[c][last])});
    return m;
}

}  // namespace mazerlab
