// Linearized optomechanical dynamics: drift/noise matrices, Lyapunov steady
// state, transient propagation, and closed-form mechanical-block coefficients
// alpha_i + beta_i * Lambda. Quadrature order is (dq, dp, dX, dY).
#pragma once

#include <cmath>
#include <complex>
#include <numbers>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "csl/collapse.hpp"
#include "csl/constants.hpp"
#include "csl/errors.hpp"
#include "csl/gaussian.hpp"
#include "csl/params.hpp"

namespace csl {

// chi = sqrt(2) chi0 E / sqrt(kappa^2 + delta^2) with chi0 = (omega_c/L)
// sqrt(hbar/(m omega_m)) and intracavity pump E = sqrt(2 P kappa / (hbar
// omega_0)), omega_0 = omega_c - delta (input-output convention).
inline double effective_coupling(const SystemParams& p) {
    const double omega_c = 2.0 * std::numbers::pi * c_light / p.laser_wavelength;
    const double chi0 = omega_c / p.cavity_length * std::sqrt(hbar / (p.mass * p.omega_m));
    const double omega_0 = omega_c - p.delta;
    if (!(omega_0 > 0.0)) throw DomainError("effective_coupling: laser frequency not positive");
    const double pump = std::sqrt(2.0 * p.laser_power * p.kappa / (hbar * omega_0));
    return std::sqrt(2.0) * chi0 * pump / std::sqrt(p.kappa * p.kappa + p.delta * p.delta);
}

inline Eigen::Matrix4d drift_matrix(const SystemParams& p) {
    const double chi = effective_coupling(p);
    Eigen::Matrix4d a = Eigen::Matrix4d::Zero();
    a(0, 1) = p.omega_m;
    a(1, 0) = -p.omega_m;
    a(1, 1) = -p.gamma_m;
    a(1, 2) = chi;
    a(2, 2) = -p.kappa;
    a(2, 3) = p.delta;
    a(3, 0) = chi;
    a(3, 2) = -p.delta;
    a(3, 3) = -p.kappa;
    return a;
}

// diag(0, Gamma(Lambda), kappa, kappa) with Gamma = gamma_m (2 n_bar + 1) + Lambda.
inline Eigen::Matrix4d noise_matrix(const SystemParams& p, double lambda) {
    if (lambda < 0.0) throw DomainError("noise_matrix: lambda must be >= 0");
    const double n_bar = thermal_occupation(p.omega_m, p.temperature);
    Eigen::Matrix4d d = Eigen::Matrix4d::Zero();
    d(1, 1) = p.gamma_m * (2.0 * n_bar + 1.0) + lambda;
    d(2, 2) = p.kappa;
    d(3, 3) = p.kappa;
    return d;
}

inline bool stability_check(const Eigen::Ref<const Mat>& a) {
    Eigen::EigenSolver<Mat> es(a, false);
    if (es.info() != Eigen::Success) return false;
    return es.eigenvalues().real().maxCoeff() < 0.0;
}

// Solves A sigma + sigma A^T + D = 0 by the Kronecker-vectorized linear system.
// The elimination runs in extended precision: kappa/gamma_m stiffness ratios
// reach ~1e9 here, and the matching conditioning of the Kronecker system costs
// ~1e-8 relative accuracy if the solve is done in plain double.
inline Mat steady_state(const Eigen::Ref<const Mat>& a, const Eigen::Ref<const Mat>& d) {
    const Eigen::Index n = a.rows();
    if (a.cols() != n || d.rows() != n || d.cols() != n)
        throw DomainError("steady_state: dimension mismatch");
    if (!stability_check(a)) throw UnstableDrift("steady_state: drift matrix not Hurwitz");

    const MatX<long double> al = a.cast<long double>();
    MatX<long double> m = MatX<long double>::Zero(n * n, n * n); // I (x) A + A (x) I
    for (Eigen::Index j = 0; j < n; ++j) m.block(j * n, j * n, n, n) += al;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            for (Eigen::Index k = 0; k < n; ++k) m(j * n + k, i * n + k) += al(j, i);

    VecX<long double> rhs(n * n);
    for (Eigen::Index j = 0; j < n; ++j)
        rhs.segment(j * n, n) = -d.col(j).cast<long double>();
    const VecX<long double> v = m.partialPivLu().solve(rhs);

    Mat sigma(n, n);
    for (Eigen::Index j = 0; j < n; ++j) sigma.col(j) = v.segment(j * n, n).cast<double>();
    sigma = ((sigma + sigma.transpose()) / 2.0).eval();

    // backward-error sanity check, scaled by the magnitudes actually summed
    const double resid = (a * sigma + sigma * a.transpose() + d).norm();
    const double scale = a.norm() * sigma.norm() + d.norm();
    if (resid > 1e-12 * std::max(scale, 1e-300))
        throw Error("steady_state: Lyapunov residual above tolerance");
    return sigma;
}

namespace detail {

inline Mat propagate_rk4(Mat sigma, const Mat& a, const Mat& d, double t_final,
                         double dt_max) {
    auto deriv = [&](const Mat& s) { return (a * s + s * a.transpose() + d).eval(); };
    auto rk4_step = [&](const Mat& s, double h) {
        Mat k1 = deriv(s);
        Mat k2 = deriv(s + 0.5 * h * k1);
        Mat k3 = deriv(s + 0.5 * h * k2);
        Mat k4 = deriv(s + h * k3);
        return (s + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)).eval();
    };
    double t = 0.0;
    double h = dt_max;
    const double floor = dt_max * 1e-12;
    while (t < t_final) {
        h = std::min(h, t_final - t);
        if (h < floor) throw StepUnderflow("propagate: step size collapsed");
        Mat full = rk4_step(sigma, h);
        Mat half = rk4_step(rk4_step(sigma, 0.5 * h), 0.5 * h);
        const double err = (full - half).norm() / 15.0;
        const double tol = 1e-10 * std::max(1.0, half.norm());
        if (err <= tol) {
            sigma = half + (half - full) / 15.0;
            sigma = ((sigma + sigma.transpose()) / 2.0).eval();
            t += h;
            if (err < 0.25 * tol) h = std::min(2.0 * h, dt_max);
        } else {
            h *= std::max(0.2, 0.9 * std::pow(tol / err, 0.2));
        }
    }
    return sigma;
}

} // namespace detail

// Integrates d sigma/dt = A sigma + sigma A^T + D from 0 to t_final. For a
// diagonalizable A the evolution is computed exactly in A's eigenbasis, where
// each entry of the transformed covariance relaxes as exp((lambda_i+lambda_j)t)
// toward its fixed point; cost is independent of t_final, which matters because
// kappa/gamma_m stiffness ratios here reach 1e7. A step-doubling RK4 integrator
// (local error 1e-10) is the fallback for ill-conditioned eigenbases.
inline Mat propagate(const Eigen::Ref<const Mat>& sigma0, const Eigen::Ref<const Mat>& a,
                     const Eigen::Ref<const Mat>& d, double t_final, double dt_max = 0.0) {
    const Eigen::Index n = a.rows();
    if (sigma0.rows() != n || sigma0.cols() != n || d.rows() != n || d.cols() != n)
        throw DomainError("propagate: dimension mismatch");
    if (t_final < 0.0) throw DomainError("propagate: t_final must be >= 0");
    if (t_final == 0.0) return sigma0;

    using CMat = MatX<std::complex<double>>;
    Eigen::EigenSolver<Mat> es(a);
    bool spectral_ok = es.info() == Eigen::Success;
    CMat v, vinv;
    if (spectral_ok) {
        v = es.eigenvectors();
        Eigen::FullPivLU<CMat> lu(v);
        spectral_ok = lu.isInvertible();
        if (spectral_ok) {
            vinv = lu.inverse();
            spectral_ok = v.norm() * vinv.norm() < 1e8; // eigenbasis conditioning
        }
    }

    if (spectral_ok) {
        const CMat p0 = vinv * sigma0 * vinv.transpose();
        const CMat q = vinv * d * vinv.transpose();
        const double scale = es.eigenvalues().cwiseAbs().maxCoeff();
        CMat p(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j) {
                const std::complex<double> s = es.eigenvalues()(i) + es.eigenvalues()(j);
                if (std::abs(s) < 1e-14 * std::max(scale, 1.0)) {
                    p(i, j) = p0(i, j) + q(i, j) * t_final;
                } else {
                    const std::complex<double> c = -q(i, j) / s;
                    p(i, j) = std::exp(s * t_final) * (p0(i, j) - c) + c;
                }
            }
        Mat sigma = (v * p * v.transpose()).real();
        return ((sigma + sigma.transpose()) / 2.0).eval();
    }

    double h = dt_max;
    if (!(h > 0.0)) {
        const double fastest = es.info() == Eigen::Success
                                   ? es.eigenvalues().cwiseAbs().maxCoeff()
                                   : a.norm();
        h = std::min(t_final, 1.0 / std::max(fastest, 1e-300));
    }
    return detail::propagate_rk4(sigma0, a, d, t_final, h);
}

// ---- closed-form mechanical block ----

// sigma_M(Lambda) = diag(alpha1 + beta1 Lambda, alpha2 + beta2 Lambda).
// alphas are dimensionless variances; betas carry seconds (per unit Lambda).
// denomA/denomB are the scaled-unit denominators used internally, exposed for
// degeneracy diagnostics.
struct MechCoefficients {
    double alpha1;
    double beta1;
    double alpha2;
    double beta2;
    double denomA;
    double denomB;
};

// Exact rational functions of (gamma_m, kappa, delta, chi, n_bar)/omega_m from
// the symbolic solve of the 4x4 Lyapunov system; evaluated in omega_m-scaled
// units because the raw SI polynomials reach 1e60.
inline MechCoefficients mech_coefficients(const SystemParams& p) {
    const double g = p.gamma_m / p.omega_m;
    const double K = p.kappa / p.omega_m;
    const double d = p.delta / p.omega_m;
    const double x = effective_coupling(p) / p.omega_m;
    const double nbar = thermal_occupation(p.omega_m, p.temperature);

    const double x0 = std::pow(K, 3);
    const double x1 = 2 * x0;
    const double x2 = g * x1;
    const double x3 = std::pow(K, 7);
    const double x4 = 2 * x3;
    const double x5 = std::pow(g, 3);
    const double x6 = std::pow(K, 5);
    const double x7 = 2 * x6;
    const double x8 = std::pow(K, 6);
    const double x9 = std::pow(x, 2);
    const double x10 = 2 * x9;
    const double x11 = 4 * x6;
    const double x12 = g * x11;
    const double x13 = std::pow(g, 2);
    const double x14 = 4 * x13;
    const double x15 = std::pow(d, 3);
    const double x16 = x15 * x9;
    const double x17 = std::pow(d, 4);
    const double x18 = 4 * K;
    const double x19 = x17 * x18;
    const double x20 = g * x19;
    const double x21 = std::pow(K, 2);
    const double x22 = d * std::pow(x, 4);
    const double x23 = std::pow(d, 2);
    const double x24 = 2 * K;
    const double x25 = x23 * x24;
    const double x26 = g * x25;
    const double x27 = std::pow(d, 6);
    const double x28 = x24 * x27;
    const double x29 = x17 * x24;
    const double x30 = x10 * x21;
    const double x31 = std::pow(K, 4);
    const double x32 = x10 * x31;
    const double x33 = 4 * x0;
    const double x34 = g * x33;
    const double x35 = 4 * g;
    const double x36 = nbar * x5;
    const double x37 = x23 * x33;
    const double x38 = x23 * x31;
    const double x39 = x14 * x21;
    const double x40 = x23 * x6;
    const double x41 = 6 * x40;
    const double x42 = x0 * x17;
    const double x43 = 6 * x42;
    const double x44 = 8 * nbar;
    const double x45 = g * x44;
    const double x46 = x13 * x44;
    const double x47 = 8 * x38;
    const double x48 = K * x45;
    const double x49 = d * x9;
    const double x50 = x13 * x49;
    const double x51 = 3 * x21;
    const double x52 = g * x24;
    const double x53 = x49 * x52;
    const double x54 = nbar * x13;
    const double x55 = x10 * x54;
    const double x56 = x23 * x30;
    const double x57 = x18 * x23;
    const double x58 = g * x57;
    const double x59 = g * nbar;
    const double x60 = x18 * x59;
    const double x61 = g * x16;
    const double x62 = x23 * x34;
    const double x63 = x21 * x46;
    const double x64 = 12 * x59;
    const double x65 = g * x49;
    const double x66 = x18 * x65;
    const double x67 = nbar * x66;
    const double x68 = x14 * x31 + x23 * x39;
    const double x69 = x2 * x9 + x23 * x63 + x26 * x9 + x31 * x46 + x32 + x56;
    const double x70 = x24 * x49;
    const double x71 = x21 * x35;
    const double x72 = x23 * x71 + x31 * x35;
    const double x73 = x0 * x45;
    const double x74 = g * x7 + x1 * x5 + x17 * x52 + x25 * x5 + x34 + x39 + x50 + x52 - x58 +
                       x62 + x68;
    const double num_a1 =
        -K * g * x22 + K * x44 * x61 + g * x28 + g * x4 + g * x41 + g * x43 -
        6 * nbar * x21 * x50 + nbar * x3 * x35 + nbar * x34 + nbar * x58 +
        8 * x0 * x23 * x36 - x0 * x44 * x65 + x10 * x8 + x11 * x36 + x12 * x9 + x12 +
        x13 * x16 + x13 * x32 + x13 * x47 + x13 * x56 + x14 * x8 + x15 * x55 + x17 * x30 +
        x17 * x39 - x17 * x48 + x17 * x63 + x18 * x61 + x19 * x36 + x2 - x20 -
        2 * x21 * x22 + x26 + x27 * x60 + x29 * x5 - x34 * x49 + x37 * x5 +
        16 * x38 * x54 + 4 * x38 * x9 + x40 * x64 + x42 * x64 + x45 * x6 + x46 * x8 +
        x5 * x7 - x50 * x51 - x53 + x62 * x9 - x67 + x68 + x69;
    const double num_b1 = g * x47 + x1 + x11 + x13 * x29 + x13 * x37 + x13 * x7 + x16 * x18 +
                          x17 * x71 - x19 + x25 + x28 - x33 * x49 + x35 * x8 + x4 + x41 +
                          x43 - x51 * x65 + x61 - x70 + x72;
    const double num_a2 = d * x55 + nbar * x12 + nbar * x20 - x23 * x48 + x23 * x73 + x30 +
                          x33 * x36 + x36 * x57 + x53 + x60 + x63 + x67 + x69 + x73 + x74;
    const double num_b2 = x1 * x13 + x13 * x25 + x24 + x29 + x33 + x37 - x57 + x65 + x7 +
                          x70 + x71 + x72;
    const double den_b = 8 * x21 * x49 + 2 * x66 + 2 * x74;
    const double den_a = (x23 + x21 - d * x9) * den_b;

    if (std::abs(den_a) < 1e-300 || std::abs(den_b) < 1e-300)
        throw DegenerateDenominator("mech_coefficients: vanishing denominator");

    MechCoefficients out;
    out.alpha1 = num_a1 / den_a;
    out.beta1 = num_b1 / den_a / p.omega_m;
    out.alpha2 = num_a2 / den_b;
    out.beta2 = num_b2 / den_b / p.omega_m;
    out.denomA = den_a;
    out.denomB = den_b;
    return out;
}

// ---- block access and the exact Lambda derivative ----

struct CovarianceBlocks {
    Eigen::Matrix2d sigma_M; // mechanical
    Eigen::Matrix2d sigma_L; // optical
    Eigen::Matrix2d sigma_C; // cross covariances (upper-right block)
};

inline CovarianceBlocks blocks(const Eigen::Ref<const Eigen::Matrix4d>& sigma) {
    CovarianceBlocks b;
    Eigen::Matrix2d m = sigma.topLeftCorner<2, 2>();
    Eigen::Matrix2d l = sigma.bottomRightCorner<2, 2>();
    b.sigma_M = (m + m.transpose()) / 2.0;
    b.sigma_L = (l + l.transpose()) / 2.0;
    b.sigma_C = sigma.topRightCorner<2, 2>();
    return b;
}

// d sigma_ss / d Lambda, exact because the steady state is affine in Lambda:
// differentiating the Lyapunov equation leaves A X + X A^T + dD/dLambda = 0,
// solved directly so no digits are lost differencing two nearby solutions.
inline Eigen::Matrix4d dsigma_dLambda(const SystemParams& p) {
    Eigen::Matrix4d dd = Eigen::Matrix4d::Zero();
    dd(1, 1) = 1.0; // d(noise)/d(Lambda): unit momentum diffusion
    return steady_state(drift_matrix(p), dd);
}

} // namespace csl
