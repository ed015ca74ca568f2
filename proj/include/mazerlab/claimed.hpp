// claimed.hpp - the published off-resonant mazer solution, evaluated as
// written, and the single-channel scattering block it is built from.
//
// Off resonance the results here are "claimed - not physical": every
// record carries `physical == false` unless the detuning is exactly zero.

#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <vector>

#include "mazerlab/model.hpp"

namespace mazerlab {

// Plane wave amplitude * exp(i wavenumber (z - z_ref)). Interior terms are
// referenced to the boundary they decay away from so no factor exceeds 1.
struct PlaneWave {
    cd amplitude;
    cd wavenumber;
    double z_ref = 0.0;

    cd value(double z) const { return amplitude * std::exp(cd(0, 1) * wavenumber * (z - z_ref)); }
    cd derivative(double z) const { return cd(0, 1) * wavenumber * value(z); }
};

// Scattering of a unit wave e^{ikz} off a mesa of interior wavenumber kappa
// on [0, L]:
//   z < 0      e^{ikz} + r e^{-ikz}
//   0 < z < L  a e^{i kappa z} + b e^{-i kappa (z - L)}
//   z > L      t e^{ikz}
struct ChannelScattering {
    double k = 0.0;
    cd kappa;
    double length = 0.0;
    cd r, t, a, b;
    bool evanescent = false;

    // Coefficient of e^{ik(z-L)} on the right.
    cd t_at_exit() const { return t * std::exp(cd(0, k * length)); }
    double reflection() const { return std::norm(r); }
    double transmission() const { return std::norm(t); }
};

// r = i Upsilon sin(kappa L)/D, t = e^{-ikL}/D with D = cos(kappa L) - i delta sin(kappa L).
// Evaluated through u = e^{i kappa L} (|u| <= 1 on the chosen branch), where
// D = N/(2u), N = (u^2 + 1) - delta (u^2 - 1); nothing overflows for large
// evanescent kappa L.
inline ChannelScattering single_channel_scattering(double k, cd kappa, double length) {
    if (!(k > 0.0)) throw InvalidParameter("k", "must be > 0");
    if (kappa == cd(0.0)) throw DegenerateThreshold("interior wavenumber is zero");
    const cd i(0, 1);
    const cd upsilon = 0.5 * (kappa / k - k / kappa);
    const cd delta = 0.5 * (kappa / k + k / kappa);
    const cd u = std::exp(i * kappa * length);
    const cd u2 = u * u;
    const cd big_n = (u2 + 1.0) - delta * (u2 - 1.0);
    ChannelScattering s;
    s.k = k;
    s.kappa = kappa;
    s.length = length;
    s.evanescent = kappa.imag() > 0.0;
    s.r = upsilon * (u2 - 1.0) / big_n;
    s.t = std::exp(-i * k * length) * 2.0 * u / big_n;
    s.a = (1.0 + k / kappa) / big_n;
    s.b = (1.0 - k / kappa) * u / big_n;
    return s;
}

enum class InteriorBranch { claimed, true_energy };

inline ChannelScattering per_channel_scattering(double k, InteriorBranch branch, Channel channel, int n,
                                                const ModelParams& p) {
    const cd kappa = branch == InteriorBranch::claimed ? claimed_wavenumbers(k, n, p).interior(channel)
                                                       : true_wavenumbers(k, n, p).interior(channel);
    return single_channel_scattering(k, kappa, p.cavity_length());
}

// Normalization factors that the published expressions fold into their
// amplitudes. The written A, B, alpha, beta all carry source_factor =
// sin(theta_n) for both channels; B, alpha and beta also carry
// exit_phase = e^{-ikL}; the whole state carries 1/sqrt(2). The projections
// of the incident |e,n> onto |Phi+->, sin(theta_n) and cos(theta_n), are
// recorded alongside because they differ from source_factor off resonance.
struct SourceConvention {
    double global_prefactor = 1.0 / std::numbers::sqrt2;
    double source_factor = 0.0;
    cd exit_phase;
    double projection_plus = 0.0;
    double projection_minus = 0.0;

    double projection(Channel c) const { return c == Channel::plus ? projection_plus : projection_minus; }
};

struct ClaimedChannelCoefficients {
    cd reflection;    // A
    cd transmission;  // B, multiplies e^{ik(z-L)}
    cd alpha;         // multiplies e^{i k+- z}
    cd beta;          // multiplies e^{-i k+- z}
    cd beta_at_exit;  // beta e^{-i k+- L}, multiplies e^{-i k+- (z-L)}
};

struct ClaimedCoefficients {
    double k = 0.0;
    int n = 0;
    ModelParams params = make_params(1.0, 0.0, 0.0, 1.0);
    ClaimedWavenumbers wavenumbers;
    DressedRotation rotation;
    SourceConvention convention;
    std::array<ClaimedChannelCoefficients, 2> channels;
    bool physical = false;

    const ClaimedChannelCoefficients& operator[](Channel c) const {
        return channels[c == Channel::plus ? 0 : 1];
    }

    // The channel's unit-incidence scattering amplitudes, with the
    // source factor and exit phase divided out.
    ChannelScattering normalized(Channel c) const {
        const auto& cc = (*this)[c];
        const double s = convention.source_factor;
        const cd scale = s * convention.exit_phase;
        ChannelScattering out;
        out.k = k;
        out.kappa = wavenumbers.interior(c);
        out.length = params.cavity_length();
        out.evanescent = out.kappa.imag() > 0.0;
        out.r = cc.reflection / s;
        out.t = cc.transmission / s;
        out.a = cc.alpha / scale;
        out.b = cc.beta_at_exit / scale;
        return out;
    }
};

// Literal evaluation of the published coefficients:
//   A = i Upsilon sin(k L) sin(theta) / D
//   B = sin(theta) e^{-ikL} / D
//   alpha = (1 + k/k+-)/2 e^{-i k+- L} sin(theta) e^{-ikL} / D
//   beta  = (1 - k/k+-)/2 e^{+i k+- L} sin(theta) e^{-ikL} / D
inline ClaimedCoefficients claimed_coefficients(double k, int n, const ModelParams& p) {
    ClaimedCoefficients c;
    c.k = k;
    c.n = n;
    c.params = p;
    c.wavenumbers = claimed_wavenumbers(k, n, p);
    c.rotation = dressed_angle(n, p);
    c.physical = p.delta() == 0.0;

    const double L = p.cavity_length();
    const double s = c.rotation.sin_theta();
    c.convention.source_factor = s;
    c.convention.exit_phase = std::exp(cd(0, -k * L));
    c.convention.projection_plus = c.rotation.sin_theta();
    c.convention.projection_minus = c.rotation.cos_theta();

    for (Channel ch : {Channel::plus, Channel::minus}) {
        const ChannelScattering sc = single_channel_scattering(k, c.wavenumbers.interior(ch), L);
        const cd u = std::exp(cd(0, 1) * sc.kappa * L);
        auto& out = c.channels[ch == Channel::plus ? 0 : 1];
        const cd scale = s * c.convention.exit_phase;
        out.reflection = s * sc.r;
        out.transmission = s * sc.t;
        out.alpha = scale * sc.a;
        out.beta_at_exit = scale * sc.b;
        out.beta = scale * sc.b * u;
    }
    return c;
}

// Piecewise plane-wave state of one sector and incident k. The dressed
// channel functions are w+- times the unit-incidence solutions of the two
// decoupled channels (wavenumber k outside, claimed k+- inside), with
// w+- the projections of |e,n> onto |Phi+->. At Delta = 0 the bare view
// reproduces the published state with unit incident amplitude:
//   e: e^{ikz} + (A+ + A-)/sqrt(2) e^{-ikz}, g: (A+ - A-)/sqrt(2) e^{-ikz}.
class ClaimedStationaryState {
public:
    ClaimedStationaryState(ClaimedCoefficients coefficients) : coefficients_(std::move(coefficients)) {
        const auto& c = coefficients_;
        const double L = c.params.cavity_length();
        const double k = c.k;
        for (Channel ch : {Channel::plus, Channel::minus}) {
            const ChannelScattering sc = c.normalized(ch);
            const double w = c.convention.projection(ch);
            terms(Region::left, ch) = {{w, k, 0.0}, {w * sc.r, -k, 0.0}};
            terms(Region::inside, ch) = {{w * sc.a, sc.kappa, 0.0}, {w * sc.b, -sc.kappa, L}};
            terms(Region::right, ch) = {{w * sc.t_at_exit(), k, L}};
        }
    }

    const ClaimedCoefficients& coefficients() const noexcept { return coefficients_; }
    const DressedRotation& rotation() const noexcept { return coefficients_.rotation; }
    const SourceConvention& convention() const noexcept { return coefficients_.convention; }
    bool physical() const noexcept { return coefficients_.physical; }
    double cavity_length() const { return coefficients_.params.cavity_length(); }

    const std::vector<PlaneWave>& terms(Region r, Channel c) const { return terms_[index(r, c)]; }

    Region region_of(double z) const {
        if (z < 0.0) return Region::left;
        if (z > cavity_length()) return Region::right;
        return Region::inside;
    }

    // One-sided evaluation: uses the plane-wave list of `r` even at z
    // outside it, so boundary continuity can be checked.
    cd value(Region r, Channel c, double z) const {
        cd sum{};
        for (const auto& t : terms(r, c)) sum += t.value(z);
        return sum;
    }
    cd derivative(Region r, Channel c, double z) const {
        cd sum{};
        for (const auto& t : terms(r, c)) sum += t.derivative(z);
        return sum;
    }

    DressedPair dressed(double z) const {
        const Region r = region_of(z);
        return {value(r, Channel::plus, z), value(r, Channel::minus, z)};
    }
    BarePair bare(double z) const { return undress(dressed(z), rotation()); }

    // Bare amplitudes of the outgoing plane waves. Left: coefficients of
    // e^{-ikz}; right: coefficients of e^{ik(z-L)}.
    BarePair bare_reflected() const {
        return undress({terms(Region::left, Channel::plus)[1].amplitude,
                        terms(Region::left, Channel::minus)[1].amplitude},
                       rotation());
    }
    BarePair bare_incident() const {
        return undress({terms(Region::left, Channel::plus)[0].amplitude,
                        terms(Region::left, Channel::minus)[0].amplitude},
                       rotation());
    }
    BarePair bare_transmitted() const {
        return undress({terms(Region::right, Channel::plus)[0].amplitude,
                        terms(Region::right, Channel::minus)[0].amplitude},
                       rotation());
    }

private:
    static std::size_t index(Region r, Channel c) {
        return static_cast<std::size_t>(r) * 2 + (c == Channel::plus ? 0 : 1);
    }
    std::vector<PlaneWave>& terms(Region r, Channel c) { return terms_[index(r, c)]; }

    ClaimedCoefficients coefficients_;
    std::array<std::vector<PlaneWave>, 6> terms_;
};

inline ClaimedStationaryState assemble_claimed_state(double k, int n, const ModelParams& p) {
    return ClaimedStationaryState(claimed_coefficients(k, n, p));
}

// Bare-channel probabilities of the published solution. Only defined at
// exact resonance, where the construction is the true dynamics.
inline ScatteringProbabilities resonant_emission_probability(double k, int n, const ModelParams& p) {
    if (p.delta() != 0.0)
        throw OutOfValidity("resonant_emission_probability requires delta == 0, got " +
                            std::to_string(p.delta()));
    const ClaimedStationaryState state = assemble_claimed_state(k, n, p);
    const BarePair r = state.bare_reflected();
    const BarePair t = state.bare_transmitted();
    return {std::norm(r.e), std::norm(r.g), std::norm(t.e), std::norm(t.g)};
}

}  // namespace mazerlab
