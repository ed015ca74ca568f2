// oracles.hpp - independent reference computations used only by the tests.
// Nothing here calls into the closed-form or matching code it checks.

#pragma once

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "mazerlab/model.hpp"

namespace oracle {

using cd = std::complex<double>;

// R H R^T with rows (Phi+, Phi-) expressed in the bare (e, g) basis.
inline Eigen::Matrix2cd rotate_block(const Eigen::Matrix2cd& bare, double theta) {
    Eigen::Matrix2cd r;
    r << std::sin(theta), std::cos(theta), std::cos(theta), -std::sin(theta);
    return r * bare * r.transpose();
}

inline Eigen::Matrix2cd bare_block(double f, double coupling, double delta) {
    Eigen::Matrix2cd h;
    h << 0.5 * delta, coupling * f, coupling * f, -0.5 * delta;
    return h;
}

// Unit-incidence single-channel solution by brute-force continuity
// matching. Returns (r, a, b, T) for
//   e^{ikz} + r e^{-ikz} | a e^{i q z} + b e^{-i q (z-L)} | T e^{ik(z-L)}.
inline Eigen::Vector4cd single_channel(double k, cd q, double L) {
    const cd i(0, 1);
    const cd eL = std::exp(i * q * L);
    Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
    Eigen::Vector4cd rhs = Eigen::Vector4cd::Zero();
    // value at 0: 1 + r = a + b eL
    m(0, 0) = 1.0; m(0, 1) = -1.0; m(0, 2) = -eL; rhs(0) = -1.0;
    // slope at 0: k (1 - r) = q (a - b eL)
    m(1, 0) = -k; m(1, 1) = -q; m(1, 2) = q * eL; rhs(1) = -k;
    // value at L: a eL + b = T
    m(2, 1) = eL; m(2, 2) = 1.0; m(2, 3) = -1.0;
    // slope at L: q (a eL - b) = k T
    m(3, 1) = q * eL; m(3, 2) = -q; m(3, 3) = -k;
    return m.partialPivLu().solve(rhs);
}

struct FdResult {
    cd r_e, r_g, t_e, t_g;
    double reflect_e, reflect_g, transmit_e, transmit_g;
};

// Wavenumber of discrete plane waves: 2(1 - cos(q h))/h^2 = kinetic.
inline cd discrete_wavenumber(double kinetic, double h) {
    const double x = 1.0 - 0.5 * kinetic * h * h;
    if (x >= -1.0 && x <= 1.0) return std::acos(x) / h;
    return cd(0.0, std::acosh(x) / h);
}

// Finite-difference boundary-value solve of the coupled bare-basis
// stationary problem on [-pad, L + pad], with exact discrete plane-wave
// closures at both ends. Second order in h.
inline FdResult finite_difference_scatter(double k, int n, double lambda, double delta, double L, double h,
                                          double pad = 1.0) {
    const cd i(0, 1);
    const double energy = k * k + 0.5 * delta;
    const double coupling = lambda * std::sqrt(n + 1.0);
    const long nodes = std::lround((L + 2 * pad) / h) + 1;
    const double z0 = -pad;
    const cd qe = discrete_wavenumber(k * k, h);
    const cd qg = discrete_wavenumber(k * k + delta, h);
    auto z_of = [&](long j) { return z0 + h * static_cast<double>(j); };
    auto f_of = [&](double z) {
        if (std::abs(z) < 0.5 * h || std::abs(z - L) < 0.5 * h) return 0.5;
        return (z > 0.0 && z < L) ? 1.0 : 0.0;
    };
    const long dim = 2 * nodes;
    std::vector<Eigen::Triplet<cd>> trip;
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(dim);
    const double inv = 1.0 / (h * h);
    for (long j = 0; j < nodes; ++j) {
        const double f = f_of(z_of(j));
        for (int c = 0; c < 2; ++c) {
            const long row = 2 * j + c;
            const double diag_v = c == 0 ? 0.5 * delta : -0.5 * delta;
            cd diag = 2.0 * inv + diag_v - energy;
            trip.emplace_back(row, 2 * j + (1 - c), coupling * f);
            if (j > 0) trip.emplace_back(row, 2 * (j - 1) + c, -inv);
            if (j + 1 < nodes) trip.emplace_back(row, 2 * (j + 1) + c, -inv);
            const cd q = c == 0 ? qe : qg;
            if (j == 0) {
                // ghost = e^{iqh} psi_0 + source
                diag += -inv * std::exp(i * q * h);
                if (c == 0) {
                    const cd src = std::exp(i * qe * z_of(0)) * (std::exp(-i * qe * h) - std::exp(i * qe * h));
                    rhs(row) += inv * src;
                }
            }
            if (j + 1 == nodes) diag += -inv * std::exp(i * q * h);
            trip.emplace_back(row, row, diag);
        }
    }
    Eigen::SparseMatrix<cd> a(dim, dim);
    a.setFromTriplets(trip.begin(), trip.end());
    Eigen::SparseLU<Eigen::SparseMatrix<cd>> lu;
    lu.compute(a);
    const Eigen::VectorXcd psi = lu.solve(rhs);

    FdResult out;
    const double za = z_of(0), zb = z_of(nodes - 1);
    out.r_e = (psi(0) - std::exp(i * qe * za)) * std::exp(i * qe * za);
    out.r_g = psi(1) * std::exp(i * qg * za);
    out.t_e = psi(2 * (nodes - 1)) * std::exp(-i * qe * (zb - L));
    out.t_g = psi(2 * (nodes - 1) + 1) * std::exp(-i * qg * (zb - L));
    // Discrete flux ~ sin(q h).
    const double fe = std::sin(qe.real() * h);
    const double fg = qg.imag() == 0.0 ? std::sin(qg.real() * h) : 0.0;
    out.reflect_e = std::norm(out.r_e);
    out.transmit_e = std::norm(out.t_e);
    out.reflect_g = fg / fe * std::norm(out.r_g);
    out.transmit_g = fg / fe * std::norm(out.t_g);
    return out;
}

// Trapezoid L2 norm of a sampled residual computed with the 3-point
// second difference of `psi` (callable z -> std::array<cd,2> in the dressed
// basis) on [a, b] and block `v`.
template <class Psi>
double fd_residual_norm(const Psi& psi, const Eigen::Matrix2cd& v, double energy, int channel, double a, double b,
                        double h) {
    const long steps = std::lround((b - a) / h);
    double sum = 0.0;
    for (long j = 1; j < steps; ++j) {
        const double z = a + h * static_cast<double>(j);
        const auto m = psi(z - h);
        const auto c = psi(z);
        const auto p = psi(z + h);
        const cd lap = -(p[channel] - 2.0 * c[channel] + m[channel]) / (h * h);
        const cd res = lap + v(channel, 0) * c[0] + v(channel, 1) * c[1] - energy * c[channel];
        sum += std::norm(res) * h;
    }
    return std::sqrt(sum);
}

}  // namespace oracle
