// oracles.hpp: independent reference computations used only by the tests.
//
// Nothing here calls into the library's assembly or overlap code.

#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <cmath>
#include <cstdint>
#include <vector>

namespace oracle {

// Original-frame Hamiltonian omega a^+a + Delta J_z + (2 lambda/sqrt(N)) (a + a^+) J_x
// in |l> (x) |j, m>, built from Kronecker products of the elementary operators.
inline Eigen::MatrixXd dense_bare_fock(int n_atoms, double omega, double delta, double lambda, int cutoff) {
    const int b = cutoff + 1;
    const int s = n_atoms + 1;
    const double j = 0.5 * n_atoms;
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(b, b);
    for (int l = 1; l < b; ++l) a(l - 1, l) = std::sqrt(static_cast<double>(l));
    Eigen::MatrixXd jz = Eigen::MatrixXd::Zero(s, s);
    Eigen::MatrixXd jp = Eigen::MatrixXd::Zero(s, s);
    for (int i = 0; i < s; ++i) {
        const double m = i - j;
        jz(i, i) = m;
        if (i + 1 < s) jp(i + 1, i) = std::sqrt(j * (j + 1) - m * (m + 1));
    }
    const Eigen::MatrixXd jx = 0.5 * (jp + jp.transpose());
    const Eigen::MatrixXd id_b = Eigen::MatrixXd::Identity(b, b);
    const Eigen::MatrixXd id_s = Eigen::MatrixXd::Identity(s, s);
    const auto kron = [](const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
        Eigen::MatrixXd out(x.rows() * y.rows(), x.cols() * y.cols());
        for (Eigen::Index r = 0; r < x.rows(); ++r)
            for (Eigen::Index c = 0; c < x.cols(); ++c)
                out.block(r * y.rows(), c * y.cols(), y.rows(), y.cols()) = x(r, c) * y;
        return out;
    };
    const Eigen::MatrixXd n_op = a.transpose() * a;
    const Eigen::MatrixXd x_op = a + a.transpose();
    return omega * kron(n_op, id_s) + delta * kron(id_b, jz) +
           (2.0 * lambda / std::sqrt(static_cast<double>(n_atoms))) * kron(x_op, jx);
}

inline Eigen::VectorXd dense_eigenvalues(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

inline double dense_ground_energy(int n_atoms, double omega, double delta, double lambda, int cutoff) {
    return dense_eigenvalues(dense_bare_fock(n_atoms, omega, delta, lambda, cutoff))[0];
}

struct SpinMoments {
    double energy;
    double jz;   // <J_z>, original frame
    double jx2;  // <J_x^2>
    double jy2;  // <J_y^2>
    double jz2;  // <J_z^2>
};

// Ground-state spin moments from the dense original-frame matrix.
inline SpinMoments original_frame_moments(int n_atoms, double omega, double delta, double lambda, int cutoff) {
    const Eigen::MatrixXd h = dense_bare_fock(n_atoms, omega, delta, lambda, cutoff);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    const Eigen::VectorXd psi = es.eigenvectors().col(0);
    const int s = n_atoms + 1;
    const double j = 0.5 * n_atoms;
    Eigen::MatrixXd jz = Eigen::MatrixXd::Zero(s, s);
    Eigen::MatrixXd jp = Eigen::MatrixXd::Zero(s, s);
    for (int i = 0; i < s; ++i) {
        const double m = i - j;
        jz(i, i) = m;
        if (i + 1 < s) jp(i + 1, i) = std::sqrt(j * (j + 1) - m * (m + 1));
    }
    const Eigen::MatrixXd jx = 0.5 * (jp + jp.transpose());
    const Eigen::MatrixXd jy_sq = -0.25 * (jp - jp.transpose()) * (jp - jp.transpose());
    const auto spin_expect = [&](const Eigen::MatrixXd& op) {
        double sum = 0.0;
        for (int l = 0; l <= cutoff; ++l) {
            const Eigen::VectorXd block = psi.segment(l * s, s);
            sum += block.dot(op * block);
        }
        return sum;
    };
    return {es.eigenvalues()[0], spin_expect(jz), spin_expect(jx * jx), spin_expect(jy_sq), spin_expect(jz * jz)};
}

// D_{l,k}(G) summed term by term in 200-digit binary floating point.
using big = boost::multiprecision::number<boost::multiprecision::cpp_bin_float<200>>;

inline big big_factorial(int n) {
    big f = 1;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

inline double coupling_d_exact(int l, int k, double g_in) {
    const big g = g_in;
    big sum = 0;
    const int rmax = std::min(l, k);
    const big root = boost::multiprecision::sqrt(big_factorial(l) * big_factorial(k));
    for (int r = 0; r <= rmax; ++r) {
        big term = root * boost::multiprecision::pow(g, l + k - 2 * r) /
                   (big_factorial(l - r) * big_factorial(k - r) * big_factorial(r));
        if (r % 2) term = -term;
        sum += term;
    }
    sum *= boost::multiprecision::exp(-g * g / 2);
    return static_cast<double>(sum);
}

// <l| exp(d (a^+ - a)) |k> from the matrix exponential of the truncated generator.
inline Eigen::MatrixXd expm_displacement(double d, int cutoff) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(cutoff + 1, cutoff + 1);
    for (int l = 1; l <= cutoff; ++l) a(l - 1, l) = std::sqrt(static_cast<double>(l));
    const Eigen::MatrixXd gen = d * (a.transpose() - a);
    return gen.exp();
}

// Classical energy per atom, original frame, spin angle theta and field x:
//   omega x^2 - (Delta/2) cos(theta) + 2 lambda x sin(theta).
// Returns the smallest lambda (on a fine scan refined by bisection) at which
// the minimum leaves theta = 0.
inline double mean_field_critical_coupling(double omega, double delta) {
    const auto ordered = [&](double lambda) {
        double best_e = 1e300;
        double best_theta = 0.0;
        for (int i = 0; i <= 4000; ++i) {
            const double theta = M_PI * i / 4000.0;
            // minimise over x analytically then compare with a coarse x grid check
            const double x = -lambda * std::sin(theta) / omega;
            const double e = omega * x * x - 0.5 * delta * std::cos(theta) + 2.0 * lambda * x * std::sin(theta);
            if (e < best_e - 1e-15) {
                best_e = e;
                best_theta = theta;
            }
        }
        return best_theta > 0.0;
    };
    double lo = 0.0;
    double hi = 10.0 * std::sqrt(omega * delta);
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (ordered(mid) ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}

// <j, m+1| J_+ |j, m> from explicit N-qubit Dicke states, N = 2j.
inline double brute_force_jplus(int n_qubits, int ups) {
    const std::uint32_t dim = 1u << n_qubits;
    std::vector<double> in(dim, 0.0);
    std::vector<double> out(dim, 0.0);
    double norm_in = 0.0;
    for (std::uint32_t x = 0; x < dim; ++x)
        if (__builtin_popcount(x) == ups) in[x] = 1.0, norm_in += 1.0;
    for (auto& v : in) v /= std::sqrt(norm_in);
    for (std::uint32_t x = 0; x < dim; ++x) {
        if (in[x] == 0.0) continue;
        for (int q = 0; q < n_qubits; ++q)
            if (!(x & (1u << q))) out[x | (1u << q)] += in[x];
    }
    // Project on the normalized Dicke state with ups + 1.
    double norm_t = 0.0;
    double overlap = 0.0;
    for (std::uint32_t x = 0; x < dim; ++x)
        if (__builtin_popcount(x) == ups + 1) norm_t += 1.0, overlap += out[x];
    return overlap / std::sqrt(norm_t);
}

}  // namespace oracle
