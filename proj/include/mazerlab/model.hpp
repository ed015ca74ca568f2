// model.hpp - parameters, mode functions, dressed-state rotation and the
// per-photon-sector 2x2 Hamiltonian of a two-level atom crossing a
// single-mode cavity.
//
// Unit system: hbar = 1, 2M = 1 (kinetic operator is -d^2/dz^2) and the
// coupling lambda sets the energy scale, so gamma^2 = lambda exactly.
// The common sector energy omega (n + 1/2) is dropped (interaction picture).
//
// Within photon sector n the dynamics closes on {|e,n>, |g,n+1>}. Bare
// amplitude pairs are ordered (e, g); dressed pairs are ordered (+, -) with
//   |Phi+> =  cos(theta) |g,n+1> + sin(theta) |e,n>
//   |Phi-> = -sin(theta) |g,n+1> + cos(theta) |e,n>

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mazerlab/errors.hpp"

namespace mazerlab {

using cd = std::complex<double>;

enum class Basis { bare, dressed };
enum class Region { left, inside, right };
enum class Channel { plus, minus };

inline const char* to_string(Basis b) { return b == Basis::bare ? "bare" : "dressed"; }
inline const char* to_string(Channel c) { return c == Channel::plus ? "plus" : "minus"; }
inline const char* to_string(Region r) {
    switch (r) {
        case Region::left: return "left";
        case Region::inside: return "inside";
        case Region::right: return "right";
    }
    return "?";
}

// Square root with the global branch convention: a negative radicand maps
// to +i sqrt(|x|), so evanescent waves e^{i kappa z} decay toward +z.
inline cd branch_sqrt(double x) {
    return x >= 0.0 ? cd(std::sqrt(x), 0.0) : cd(0.0, std::sqrt(-x));
}

class ModelParams {
public:
    double lambda() const noexcept { return lambda_; }
    double delta() const noexcept { return delta_; }
    double omega() const noexcept { return omega_; }
    double cavity_length() const noexcept { return cavity_length_; }
    double gamma() const noexcept { return gamma_; }
    double omega0() const noexcept { return omega0_; }

    // Effective Rabi coupling lambda sqrt(n+1) of sector n.
    double coupling(int n) const { return lambda_ * std::sqrt(static_cast<double>(n) + 1.0); }

    // Omega_n = sqrt(Delta^2/4 + lambda^2 (n+1)).
    double rabi_frequency(int n) const { return std::hypot(0.5 * delta_, coupling(n)); }

    friend ModelParams make_params(double lambda, double delta, double omega, double cavity_length);

private:
    ModelParams() = default;

    double lambda_ = 1.0;
    double delta_ = 0.0;
    double omega_ = 0.0;
    double cavity_length_ = 1.0;
    double gamma_ = 1.0;
    double omega0_ = 0.0;
};

inline ModelParams make_params(double lambda, double delta, double omega, double cavity_length) {
    if (!std::isfinite(lambda) || !(lambda > 0.0))
        throw InvalidParameter("lambda", "must be finite and > 0");
    if (!std::isfinite(cavity_length) || !(cavity_length > 0.0))
        throw InvalidParameter("cavity_length", "must be finite and > 0");
    if (!std::isfinite(delta)) throw InvalidParameter("delta", "must be finite");
    if (!std::isfinite(omega)) throw InvalidParameter("omega", "must be finite");
    ModelParams p;
    p.lambda_ = lambda;
    p.delta_ = delta;
    p.omega_ = omega;
    p.cavity_length_ = cavity_length;
    p.gamma_ = std::sqrt(lambda);
    p.omega0_ = omega + delta;
    return p;
}

// Cavity field profile f(z) >= 0.
class ModeFunction {
public:
    enum class Kind { mesa, zero, sampled };

    // f = 1 on (0, L), 0 outside. At the two jump points the mean 1/2 is
    // returned so that grid sampling is symmetric.
    static ModeFunction mesa(double cavity_length) {
        if (!(cavity_length > 0.0)) throw InvalidParameter("cavity_length", "must be > 0");
        ModeFunction f;
        f.kind_ = Kind::mesa;
        f.length_ = cavity_length;
        return f;
    }

    static ModeFunction zero() { return ModeFunction{}; }

    // Piecewise-linear profile through samples at z_first + i*dz, zero
    // outside the sampled range.
    static ModeFunction sampled(double z_first, double dz, std::vector<double> values) {
        if (!(dz > 0.0)) throw InvalidParameter("dz", "must be > 0");
        if (values.empty()) throw InvalidParameter("values", "no samples");
        for (double v : values)
            if (!(v >= 0.0) || !std::isfinite(v))
                throw InvalidParameter("values", "mode function must be finite and non-negative");
        ModeFunction f;
        f.kind_ = Kind::sampled;
        f.z_first_ = z_first;
        f.dz_ = dz;
        f.samples_ = std::move(values);
        return f;
    }

    Kind kind() const noexcept { return kind_; }
    double length() const noexcept { return length_; }

    double operator()(double z) const {
        switch (kind_) {
            case Kind::zero: return 0.0;
            case Kind::mesa:
                if (z > 0.0 && z < length_) return 1.0;
                if (z == 0.0 || z == length_) return 0.5;
                return 0.0;
            case Kind::sampled: {
                const double x = (z - z_first_) / dz_;
                const double last = static_cast<double>(samples_.size() - 1);
                if (x < 0.0 || x > last) return 0.0;
                const auto i = static_cast<std::size_t>(std::min(std::floor(x), std::max(last - 1.0, 0.0)));
                if (samples_.size() == 1) return samples_[0];
                const double w = x - static_cast<double>(i);
                return (1.0 - w) * samples_[i] + w * samples_[i + 1];
            }
        }
        return 0.0;
    }

private:
    Kind kind_ = Kind::zero;
    double length_ = 0.0;
    double z_first_ = 0.0;
    double dz_ = 1.0;
    std::vector<double> samples_;
};

struct PhotonSector {
    int n = 0;
    double weight = 1.0;  // |D_n|^2
};

class PhotonDistribution {
public:
    explicit PhotonDistribution(std::vector<PhotonSector> sectors, double tolerance = 1e-12)
        : sectors_(std::move(sectors)) {
        if (sectors_.empty()) throw InvalidParameter("sectors", "at least one photon sector required");
        double sum = 0.0;
        for (const auto& s : sectors_) {
            if (s.n < 0) throw InvalidParameter("sectors", "photon number must be >= 0");
            if (!(s.weight >= 0.0)) throw InvalidParameter("sectors", "weights must be >= 0");
            sum += s.weight;
        }
        if (std::abs(sum - 1.0) > tolerance)
            throw InvalidParameter("sectors", "weights sum to " + std::to_string(sum) + ", expected 1");
    }

    const std::vector<PhotonSector>& sectors() const noexcept { return sectors_; }

private:
    std::vector<PhotonSector> sectors_;
};

struct DressedRotation {
    int n = 0;
    double theta = std::numbers::pi / 4;

    double cos_theta() const { return std::cos(theta); }
    double sin_theta() const { return std::sin(theta); }
};

// Mixing angle theta_n = atan(lambda sqrt(n+1) / (Omega_n - Delta/2)).
// The denominator is always positive, so theta_n lies in (0, pi/2) and
// cos 2theta_n = -(Delta/2)/Omega_n holds for either sign of Delta.
inline DressedRotation dressed_angle(int n, const ModelParams& p) {
    if (n < 0) throw InvalidParameter("n", "photon number must be >= 0");
    const double s = p.coupling(n);
    const double half = 0.5 * p.delta();
    const double omega = p.rabi_frequency(n);
    // Omega - Delta/2 without cancellation for large positive Delta.
    const double denom = half > 0.0 ? s * s / (omega + half) : omega - half;
    return DressedRotation{n, std::atan2(s, denom)};
}

struct BarePair {
    cd e{};
    cd g{};
};

struct DressedPair {
    cd plus{};
    cd minus{};
};

inline DressedPair dressed_rotate(const BarePair& x, const DressedRotation& r) {
    const double c = r.cos_theta(), s = r.sin_theta();
    return {c * x.g + s * x.e, -s * x.g + c * x.e};
}

inline BarePair undress(const DressedPair& x, const DressedRotation& r) {
    const double c = r.cos_theta(), s = r.sin_theta();
    return {s * x.plus + c * x.minus, c * x.plus - s * x.minus};
}

// Wavenumbers of the published off-resonant solution.
struct ClaimedWavenumbers {
    double k = 0.0;
    cd k_plus, k_minus;
    cd upsilon_plus, upsilon_minus;
    cd delta_plus, delta_minus;

    cd interior(Channel c) const { return c == Channel::plus ? k_plus : k_minus; }
    cd upsilon(Channel c) const { return c == Channel::plus ? upsilon_plus : upsilon_minus; }
    cd delta(Channel c) const { return c == Channel::plus ? delta_plus : delta_minus; }
};

// k+-^2 = k^2 -+ gamma^2 sqrt(Delta^2/(4 lambda^2) + n + 1).
inline ClaimedWavenumbers claimed_wavenumbers(double k, int n, const ModelParams& p) {
    if (!(k > 0.0)) throw InvalidParameter("k", "must be > 0");
    if (n < 0) throw InvalidParameter("n", "photon number must be >= 0");
    const double root = std::sqrt(p.delta() * p.delta() / (4.0 * p.lambda() * p.lambda()) + n + 1.0);
    const double shift = p.gamma() * p.gamma() * root;
    const double rad_plus = k * k - shift;
    const double rad_minus = k * k + shift;
    if (rad_plus == 0.0 || rad_minus == 0.0)
        throw DegenerateThreshold("claimed interior wavenumber vanishes at k = " + std::to_string(k));
    ClaimedWavenumbers w;
    w.k = k;
    w.k_plus = branch_sqrt(rad_plus);
    w.k_minus = branch_sqrt(rad_minus);
    for (auto [kk, ups, dlt] : {std::tuple{w.k_plus, &w.upsilon_plus, &w.delta_plus},
                                std::tuple{w.k_minus, &w.upsilon_minus, &w.delta_minus}}) {
        *ups = 0.5 * (kk / k - k / kk);
        *dlt = 0.5 * (kk / k + k / kk);
    }
    return w;
}

// Wavenumbers that conserve the energy E = k^2 + Delta/2 of an excited
// atom incident with wavenumber k.
struct TrueWavenumbers {
    double k = 0.0;
    double energy = 0.0;
    cd kappa_plus, kappa_minus;
    cd k_g;
    bool exit_open = true;  // false when k_g is imaginary

    cd interior(Channel c) const { return c == Channel::plus ? kappa_plus : kappa_minus; }
};

// With `allow_interior_threshold` a vanishing interior wavenumber is
// returned as 0 instead of raising DegenerateThreshold.
inline TrueWavenumbers true_wavenumbers(double k, int n, const ModelParams& p, bool allow_interior_threshold = false) {
    if (!(k > 0.0)) throw InvalidParameter("k", "must be > 0");
    if (n < 0) throw InvalidParameter("n", "photon number must be >= 0");
    TrueWavenumbers w;
    w.k = k;
    w.energy = k * k + 0.5 * p.delta();
    const double omega = p.rabi_frequency(n);
    const double rad_g = k * k + p.delta();
    const double rad_plus = w.energy - omega;
    const double rad_minus = w.energy + omega;
    if (rad_g == 0.0) throw DegenerateThreshold("exit channel wavenumber k_g vanishes");
    if (!allow_interior_threshold && (rad_plus == 0.0 || rad_minus == 0.0))
        throw DegenerateThreshold("interior wavenumber kappa vanishes");
    w.k_g = branch_sqrt(rad_g);
    w.exit_open = rad_g > 0.0;
    w.kappa_plus = branch_sqrt(rad_plus);
    w.kappa_minus = branch_sqrt(rad_minus);
    return w;
}

using Matrix2 = Eigen::Matrix2cd;

// Local potential block of sector n for mode value f (kinetic term excluded).
//   bare:    [[Delta/2, lambda f sqrt(n+1)], [lambda f sqrt(n+1), -Delta/2]]
//   dressed: diagonal -+cos(2theta) Delta/2 +- lambda f sqrt(n+1) sin(2theta),
//            off-diagonal lambda f sqrt(n+1) cos(2theta) + sin(2theta) Delta/2
inline Matrix2 sector_hamiltonian(double f, int n, const ModelParams& p, Basis basis) {
    const double c = p.coupling(n) * f;
    const double half = 0.5 * p.delta();
    Matrix2 h;
    if (basis == Basis::bare) {
        h << half, c, c, -half;
        return h;
    }
    const double theta = dressed_angle(n, p).theta;
    const double c2 = std::cos(2.0 * theta), s2 = std::sin(2.0 * theta);
    const double off = c * c2 + s2 * half;
    h << -c2 * half + c * s2, off, off, c2 * half - c * s2;
    return h;
}

inline Matrix2 sector_hamiltonian(Region region, int n, const ModelParams& p, Basis basis) {
    return sector_hamiltonian(region == Region::inside ? 1.0 : 0.0, n, p, basis);
}

// Aggregated bare-channel probabilities of a scattering event.
struct ScatteringProbabilities {
    double reflect_e = 0.0;
    double reflect_g = 0.0;
    double transmit_e = 0.0;
    double transmit_g = 0.0;

    double emission() const { return reflect_g + transmit_g; }
    double total() const { return reflect_e + reflect_g + transmit_e + transmit_g; }
};

}  // namespace mazerlab
