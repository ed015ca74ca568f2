// stationary.hpp - exact stationary scattering of an excited atom on a
// mesa cavity at arbitrary detuning.
//
// Outside the cavity the local block is diagonal in the bare basis, inside
// it is diagonal in the dressed basis, so matching is done with bare plane
// waves outside and dressed plane waves inside. Unknowns:
//   z < 0:      e: e^{ikz} + r_e e^{-ikz}       g: r_g e^{-i k_g z}
//   0 < z < L:  sum_j v_j (a_j e^{i kappa_j z} + b_j e^{-i kappa_j (z - L)})
//               or sum_j v_j (a_j (L - z)/L + b_j z/L) when kappa_j = 0
//   z > L:      e: t_e e^{ik(z-L)}              g: t_g e^{i k_g (z-L)}
// with v_j the bare eigenvectors of the interior block.

#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <limits>

#include <Eigen/Dense>

#include "mazerlab/model.hpp"

namespace mazerlab {

struct InteriorChannel {
    double level = 0.0;  // eigenvalue of the interior block
    BarePair vector;     // bare components of the eigenvector
    cd kappa;

    // Values and derivatives of the two interior basis functions at z.
    struct Basis2 {
        cd a, b, da, db;
    };
    Basis2 basis(double z, double length) const {
        if (kappa == cd{}) return {(length - z) / length, z / length, -1.0 / length, 1.0 / length};
        const cd i(0, 1);
        const cd ea = std::exp(i * kappa * z), eb = std::exp(-i * kappa * (z - length));
        return {ea, eb, i * kappa * ea, -i * kappa * eb};
    }
};

struct StationarySolution {
    double k = 0.0;
    int n = 0;
    double cavity_length = 0.0;
    TrueWavenumbers wavenumbers;
    DressedRotation rotation;
    std::array<InteriorChannel, 2> interior;  // plus, minus
    cd r_e, r_g;  // coefficients of e^{-ikz}, e^{-i k_g z}
    cd t_e, t_g;  // coefficients of e^{ik(z-L)}, e^{i k_g (z-L)}
    std::array<cd, 2> a{}, b{};
    double condition_number = 0.0;

    bool exit_open() const noexcept { return wavenumbers.exit_open; }

    BarePair bare(Region region, double z) const {
        const cd i(0, 1);
        const double k0 = k;
        const cd kg = wavenumbers.k_g;
        switch (region) {
            case Region::left:
                return {std::exp(i * k0 * z) + r_e * std::exp(-i * k0 * z), r_g * std::exp(-i * kg * z)};
            case Region::right:
                return {t_e * std::exp(i * k0 * (z - cavity_length)), t_g * std::exp(i * kg * (z - cavity_length))};
            case Region::inside: {
                BarePair out;
                for (std::size_t j = 0; j < 2; ++j) {
                    const auto f = interior[j].basis(z, cavity_length);
                    const cd psi = a[j] * f.a + b[j] * f.b;
                    out.e += interior[j].vector.e * psi;
                    out.g += interior[j].vector.g * psi;
                }
                return out;
            }
        }
        return {};
    }

    BarePair bare_derivative(Region region, double z) const {
        const cd i(0, 1);
        const cd kg = wavenumbers.k_g;
        switch (region) {
            case Region::left:
                return {i * k * (std::exp(i * k * z) - r_e * std::exp(-i * k * z)), -i * kg * r_g * std::exp(-i * kg * z)};
            case Region::right:
                return {i * k * t_e * std::exp(i * k * (z - cavity_length)),
                        i * kg * t_g * std::exp(i * kg * (z - cavity_length))};
            case Region::inside: {
                BarePair out;
                for (std::size_t j = 0; j < 2; ++j) {
                    const auto f = interior[j].basis(z, cavity_length);
                    const cd dpsi = a[j] * f.da + b[j] * f.db;
                    out.e += interior[j].vector.e * dpsi;
                    out.g += interior[j].vector.g * dpsi;
                }
                return out;
            }
        }
        return {};
    }

    BarePair bare(double z) const {
        return bare(z < 0.0 ? Region::left : (z > cavity_length ? Region::right : Region::inside), z);
    }
};

// Above this 2-norm condition number the matching system is reported as
// degenerate.
inline constexpr double kMaxMatchingCondition = 1e13;

// `mode` must be the mesa profile or the zero profile (coupling off).
inline StationarySolution stationary_scatter(double k, int n, const ModelParams& p, const ModeFunction& mode) {
    if (mode.kind() == ModeFunction::Kind::sampled)
        throw InvalidParameter("mode_function", "stationary matching needs a piecewise-constant (mesa or zero) profile");
    if (mode.kind() == ModeFunction::Kind::mesa && mode.length() != p.cavity_length())
        throw InvalidParameter("mode_function", "mesa length differs from cavity_length");

    StationarySolution sol;
    sol.k = k;
    sol.n = n;
    sol.cavity_length = p.cavity_length();
    sol.wavenumbers = true_wavenumbers(k, n, p, true);
    sol.rotation = dressed_angle(n, p);
    const double L = p.cavity_length();

    if (mode.kind() == ModeFunction::Kind::mesa) {
        const double omega = p.rabi_frequency(n);
        const double s = sol.rotation.sin_theta(), c = sol.rotation.cos_theta();
        sol.interior[0] = {omega, {s, c}, sol.wavenumbers.kappa_plus};
        sol.interior[1] = {-omega, {c, -s}, sol.wavenumbers.kappa_minus};
    } else {
        // Interior identical to the exterior: bare channels.
        sol.interior[0] = {0.5 * p.delta(), {1.0, 0.0}, cd(k)};
        sol.interior[1] = {-0.5 * p.delta(), {0.0, 1.0}, sol.wavenumbers.k_g};
    }

    const cd i(0, 1);
    const double kk = k;
    const cd kg = sol.wavenumbers.k_g;
    Eigen::Matrix<cd, 8, 8> m = Eigen::Matrix<cd, 8, 8>::Zero();
    Eigen::Matrix<cd, 8, 1> rhs = Eigen::Matrix<cd, 8, 1>::Zero();
    // Columns: r_e, r_g, t_e, t_g, a+, b+, a-, b-.
    for (std::size_t j = 0; j < 2; ++j) {
        const cd ve = sol.interior[j].vector.e, vg = sol.interior[j].vector.g;
        const int ca = 4 + 2 * static_cast<int>(j), cb = ca + 1;
        const auto f0 = sol.interior[j].basis(0.0, L), f1 = sol.interior[j].basis(L, L);
        // z = 0: value and derivative of e and g.
        m(0, ca) = ve * f0.a;   m(0, cb) = ve * f0.b;
        m(1, ca) = ve * f0.da;  m(1, cb) = ve * f0.db;
        m(2, ca) = vg * f0.a;   m(2, cb) = vg * f0.b;
        m(3, ca) = vg * f0.da;  m(3, cb) = vg * f0.db;
        // z = L.
        m(4, ca) = ve * f1.a;   m(4, cb) = ve * f1.b;
        m(5, ca) = ve * f1.da;  m(5, cb) = ve * f1.db;
        m(6, ca) = vg * f1.a;   m(6, cb) = vg * f1.b;
        m(7, ca) = vg * f1.da;  m(7, cb) = vg * f1.db;
    }
    // Exterior terms moved to the left-hand side with a minus sign.
    m(0, 0) = -1.0;         rhs(0) = 1.0;
    m(1, 0) = i * kk;       rhs(1) = i * kk;
    m(2, 1) = -1.0;
    m(3, 1) = i * kg;
    m(4, 2) = -1.0;
    m(5, 2) = -i * kk;
    m(6, 3) = -1.0;
    m(7, 3) = -i * kg;

    Eigen::JacobiSVD<Eigen::Matrix<cd, 8, 8>> svd(m);
    const auto& sv = svd.singularValues();
    const double smin = sv(sv.size() - 1);
    sol.condition_number = smin > 0.0 ? sv(0) / smin : std::numeric_limits<double>::infinity();
    if (!(sol.condition_number < kMaxMatchingCondition))
        throw NumericalDegeneracy("singular stationary matching system", sol.condition_number);

    const Eigen::Matrix<cd, 8, 1> x = m.fullPivLu().solve(rhs);
    sol.r_e = x(0);
    sol.r_g = x(1);
    sol.t_e = x(2);
    sol.t_g = x(3);
    sol.a = {x(4), x(6)};
    sol.b = {x(5), x(7)};
    return sol;
}

inline StationarySolution stationary_scatter(double k, int n, const ModelParams& p) {
    return stationary_scatter(k, n, p, ModeFunction::mesa(p.cavity_length()));
}

// Flux-normalized channel probabilities; closed exit channels carry none.
inline ScatteringProbabilities flux_probabilities(const StationarySolution& sol) {
    ScatteringProbabilities out;
    out.reflect_e = std::norm(sol.r_e);
    out.transmit_e = std::norm(sol.t_e);
    if (sol.exit_open()) {
        const double ratio = sol.wavenumbers.k_g.real() / sol.k;
        out.reflect_g = ratio * std::norm(sol.r_g);
        out.transmit_g = ratio * std::norm(sol.t_g);
    }
    return out;
}

}  // namespace mazerlab
