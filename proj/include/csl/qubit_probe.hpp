// Qubit probe dephased by the mechanical mode: reduced state, population-basis
// Fisher information, exact-dephasing QFI, and interrogation-time optimum.
#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <utility>

#include <Eigen/Dense>

#include "csl/errors.hpp"
#include "csl/fisher.hpp"

namespace csl {

// Bloch angles of the initial qubit state cos(vartheta/2)|0> +
// e^{i varphi} sin(vartheta/2)|1>.
struct QubitPrep {
    double vartheta = 0.0;
    double varphi = 0.0;
};

// chi_M(xi) = exp(-v^T sigma v / 2) with v = (sqrt2 Im xi, -sqrt2 Re xi): the
// symmetric-ordered characteristic function of a zero-mean single-mode state.
inline std::complex<double>
characteristic_function(const Eigen::Ref<const Eigen::Matrix2d>& sigma_m,
                        std::complex<double> xi) {
    Eigen::Vector2d v(std::sqrt(2.0) * xi.imag(), -std::sqrt(2.0) * xi.real());
    return {std::exp(-0.5 * v.dot(sigma_m * v)), 0.0};
}

// Dephasing exponent zeta = 2 tau^2 (alpha1 + Lambda beta1): the coupled-qubit
// coherence decays as e^{-zeta} after dimensionless interaction time tau.
inline double dephasing_exponent(double tau, double alpha1, double beta1, double lambda) {
    const double var = alpha1 + beta1 * lambda;
    if (!(var > 0.0))
        throw DomainError("dephasing_exponent: mechanical position variance must be positive");
    if (tau < 0.0) throw DomainError("dephasing_exponent: tau must be nonnegative");
    return 2.0 * tau * tau * var;
}

// Reduced qubit density matrix after the controlled displacement: populations
// mix through e^{-zeta} cos(vartheta), the coherence is sin(vartheta)
// (cos(varphi) - i e^{-zeta} sin(varphi)) / 2.
inline Eigen::Matrix2cd qubit_reduced_state(const QubitPrep& prep, double tau,
                                            double alpha1, double beta1, double lambda) {
    const double e = std::exp(-dephasing_exponent(tau, alpha1, beta1, lambda));
    const double c = std::cos(prep.vartheta), s = std::sin(prep.vartheta);
    Eigen::Matrix2cd rho;
    rho(0, 0) = 0.5 * (1.0 + e * c);
    rho(1, 1) = 0.5 * (1.0 - e * c);
    rho(0, 1) = 0.5 * s * std::complex<double>(std::cos(prep.varphi),
                                               -e * std::sin(prep.varphi));
    rho(1, 0) = std::conj(rho(0, 1));
    return rho;
}

// Fisher information of the two-outcome population measurement,
//   F = 4 tau^4 beta1^2 cos^2(vartheta) / (e^{2 zeta} - cos^2(vartheta)).
// alt_value carries the same quantity divided by 4 (the normalization used
// when the exponent is written with tau^2/2).
inline FisherResult fi_population(const QubitPrep& prep, double tau, double alpha1,
                                  double beta1, double lambda) {
    const double zeta = dephasing_exponent(tau, alpha1, beta1, lambda);
    const double c = std::cos(prep.vartheta);
    const double e = std::exp(-zeta);
    const double p0 = 0.5 * (1.0 + e * c);
    const double p1 = 1.0 - p0;
    if (p0 < 1e-300 || p1 < 1e-300)
        throw DegenerateOutcome("fi_population: outcome probability underflow");
    if (tau == 0.0) return {0.0, "Lambda", 0.0};
    const double denom = std::exp(2.0 * zeta) - c * c;
    double value = 0.0;
    if (denom > 0.0) {
        const double t2 = tau * tau;
        value = 4.0 * t2 * t2 * beta1 * beta1 * c * c / denom;
    }
    return {value, "Lambda", value / 4.0};
}

// Principal branch of the Lambert W function by Halley iteration.
inline double lambert_w0(double x) {
    constexpr double inv_e = 0.36787944117144233;
    if (!(x >= -inv_e)) throw DomainError("lambert_w0: argument below -1/e");
    if (x == 0.0) return 0.0;
    double w;
    if (x < -0.3) {
        const double p = std::sqrt(2.0 * (std::exp(1.0) * x + 1.0));
        w = -1.0 + p - p * p / 3.0 + 11.0 * p * p * p / 72.0;
    } else if (x <= 1.0) {
        w = x * (1.0 - x);
    } else {
        w = std::log(x) - std::log(std::log(x));
    }
    for (int it = 0; it < 50; ++it) {
        const double ew = std::exp(w);
        const double f = w * ew - x;
        if (std::abs(f) <= 1e-14 * std::max(1.0, std::abs(x))) break;
        const double wp1 = w + 1.0;
        w -= f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
    }
    return w;
}

// Interrogation time maximizing the population Fisher information at
// vartheta = 0: tau* = sqrt((2 + W(-2 e^{-2})) / (alpha1 + beta1 Lambda)) / 2.
inline double optimal_time(double alpha1, double beta1, double lambda) {
    const double var = alpha1 + beta1 * lambda;
    if (!(var > 0.0))
        throw DomainError("optimal_time: mechanical position variance must be positive");
    const double w = lambert_w0(-2.0 * std::exp(-2.0));
    return 0.5 * std::sqrt((2.0 + w) / var);
}

namespace detail {

// Spectral QFI of a qubit: I_Q = 2 sum_{kl} |<k|drho|l>|^2 / (lambda_k +
// lambda_l), skipping pairs where numerator and denominator vanish together.
inline double qfi_qubit_spectral(const Eigen::Matrix2cd& rho, const Eigen::Matrix2cd& drho) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(rho);
    if (es.info() != Eigen::Success)
        throw DegenerateSpectrum("qfi_qubit: eigendecomposition failed");
    const Eigen::Vector2d lam = es.eigenvalues();
    const Eigen::Matrix2cd v = es.eigenvectors();
    const double dscale = drho.norm();
    double total = 0.0;
    for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) {
            const double denom = lam(k) + lam(l);
            const std::complex<double> elem = v.col(k).dot(drho * v.col(l));
            const double n2 = std::norm(elem);
            if (denom <= 1e-12) {
                if (n2 <= 1e-24 * dscale * dscale || n2 == 0.0) continue;
                throw DegenerateSpectrum(
                    "qfi_qubit: vanishing eigenvalue pair with nonvanishing matrix element");
            }
            total += 2.0 * n2 / denom;
        }
    return total;
}

} // namespace detail

// QFI of the dephased qubit with the exact state derivative (the exponent is
// affine in Lambda, so d rho / d Lambda is available in closed form).
inline FisherResult qfi_qubit(const QubitPrep& prep, double tau, double alpha1,
                              double beta1, double lambda) {
    const double zeta = dephasing_exponent(tau, alpha1, beta1, lambda);
    const double dzeta = 2.0 * tau * tau * beta1;
    const double e = std::exp(-zeta);
    const double c = std::cos(prep.vartheta), s = std::sin(prep.vartheta);
    const Eigen::Matrix2cd rho = qubit_reduced_state(prep, tau, alpha1, beta1, lambda);
    Eigen::Matrix2cd drho;
    drho(0, 0) = -0.5 * dzeta * e * c;
    drho(1, 1) = 0.5 * dzeta * e * c;
    drho(0, 1) = std::complex<double>(0.0, 0.5 * s * dzeta * e * std::sin(prep.varphi));
    drho(1, 0) = std::conj(drho(0, 1));
    return {detail::qfi_qubit_spectral(rho, drho), "Lambda", std::nullopt};
}

// QFI of a generic qubit family by central differences,
// h = 1e-3 max(|Lambda|, 1).
inline FisherResult qfi_qubit(const std::function<Eigen::Matrix2cd(double)>& state_fn,
                              double lambda) {
    const double h = 1e-3 * std::max(std::abs(lambda), 1.0);
    const Eigen::Matrix2cd rho = state_fn(lambda);
    const Eigen::Matrix2cd drho = (state_fn(lambda + h) - state_fn(lambda - h)) / (2.0 * h);
    return {detail::qfi_qubit_spectral(rho, drho), "Lambda", std::nullopt};
}

enum class ProbeTarget { population_fi, qfi };

// Coarse 181 x 360 Bloch-angle grid plus one 10x local refinement around the
// incumbent; returns the best preparation and its figure of merit.
inline std::pair<QubitPrep, FisherResult>
optimize_preparation(double tau, double alpha1, double beta1, double lambda,
                     ProbeTarget target = ProbeTarget::population_fi) {
    const double pi = 3.14159265358979323846;
    auto merit = [&](const QubitPrep& prep) {
        return target == ProbeTarget::population_fi
                   ? fi_population(prep, tau, alpha1, beta1, lambda)
                   : qfi_qubit(prep, tau, alpha1, beta1, lambda);
    };
    QubitPrep best;
    FisherResult best_val = merit(best);
    auto scan = [&](double th0, double th1, int nth, double ph0, double ph1, int nph) {
        for (int i = 0; i < nth; ++i) {
            const double th = th0 + (th1 - th0) * i / (nth - 1);
            for (int j = 0; j < nph; ++j) {
                const double ph = ph0 + (ph1 - ph0) * j / std::max(nph - 1, 1);
                const QubitPrep prep{th, ph};
                const FisherResult val = merit(prep);
                if (val.value > best_val.value) {
                    best = prep;
                    best_val = val;
                }
            }
        }
    };
    scan(0.0, pi, 181, 0.0, 2.0 * pi * 359.0 / 360.0, 360);
    const double dth = pi / 180.0, dph = 2.0 * pi / 360.0;
    scan(std::max(0.0, best.vartheta - dth), std::min(pi, best.vartheta + dth), 21,
         best.varphi - dph, best.varphi + dph, 21);
    return {best, best_val};
}

} // namespace csl
