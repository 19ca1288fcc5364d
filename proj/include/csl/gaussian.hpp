// Gaussian-state linear algebra: symplectic form, Williamson normal form,
// symplectic spectra, physicality checks. Vacuum quadrature variance is 1/2.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "csl/constants.hpp"
#include "csl/errors.hpp"

namespace csl {

template <typename Scalar>
using MatX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VecX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Mat = MatX<double>;
using Vec = VecX<double>;

template <typename Scalar = double>
struct GaussianStateT {
    VecX<Scalar> mean; // length 2n, quadrature units
    MatX<Scalar> cov;  // 2n x 2n, symmetric, physical
    Eigen::Index n_modes() const { return cov.rows() / 2; }
};
using GaussianState = GaussianStateT<double>;

// S and the symplectic eigenvalues d (descending): S Omega S^T = Omega,
// S sigma S^T = diag(d_1, d_1, ..., d_n, d_n).
template <typename Scalar = double>
struct SymplecticDecompositionT {
    MatX<Scalar> S;
    VecX<Scalar> d;
};
using SymplecticDecomposition = SymplecticDecompositionT<double>;

// ---- symplectic form ----

template <typename Scalar = double>
MatX<Scalar> symplectic_form(Eigen::Index n_modes) {
    if (n_modes < 1) throw DomainError("symplectic_form: n_modes must be >= 1");
    MatX<Scalar> omega = MatX<Scalar>::Zero(2 * n_modes, 2 * n_modes);
    for (Eigen::Index j = 0; j < n_modes; ++j) {
        omega(2 * j, 2 * j + 1) = Scalar(1);
        omega(2 * j + 1, 2 * j) = Scalar(-1);
    }
    return omega;
}

namespace detail {

// sigma^{-1/2} via the spectral decomposition; throws if any eigenvalue <= 0.
template <typename Scalar>
MatX<Scalar> inverse_sqrt_spd(const MatX<Scalar>& sigma) {
    Eigen::SelfAdjointEigenSolver<MatX<Scalar>> es(sigma);
    if (es.info() != Eigen::Success)
        throw NonPositiveDefinite("inverse_sqrt_spd: eigensolver failed");
    const VecX<Scalar>& w = es.eigenvalues();
    if (w.minCoeff() <= Scalar(0))
        throw NonPositiveDefinite("inverse_sqrt_spd: matrix not positive definite");
    return es.eigenvectors() * w.cwiseSqrt().cwiseInverse().asDiagonal() *
           es.eigenvectors().transpose();
}

template <typename Scalar>
void require_even_square(const MatX<Scalar>& m, const char* who) {
    if (m.rows() != m.cols() || m.rows() < 2 || m.rows() % 2 != 0)
        throw DomainError(std::string(who) + ": expected a 2n x 2n matrix");
}

} // namespace detail

// ---- symplectic spectra ----

// Moduli of the eigenvalues of i*Omega*sigma, deduplicated into n values,
// sorted descending. Requires sigma symmetric positive definite.
template <typename Derived>
VecX<typename Derived::Scalar> symplectic_eigenvalues(
    const Eigen::MatrixBase<Derived>& cov) {
    using Scalar = typename Derived::Scalar;
    MatX<Scalar> sigma = (cov + cov.transpose()) / Scalar(2);
    detail::require_even_square(sigma, "symplectic_eigenvalues");
    Eigen::LLT<MatX<Scalar>> llt(sigma);
    if (llt.info() != Eigen::Success)
        throw NonPositiveDefinite("symplectic_eigenvalues: covariance not positive definite");
    const Eigen::Index n = sigma.rows() / 2;
    Eigen::EigenSolver<MatX<Scalar>> es(symplectic_form<Scalar>(n) * sigma, false);
    if (es.info() != Eigen::Success)
        throw NonPositiveDefinite("symplectic_eigenvalues: eigensolver failed");
    VecX<Scalar> mods = es.eigenvalues().cwiseAbs();
    std::sort(mods.data(), mods.data() + mods.size(), std::greater<Scalar>());
    VecX<Scalar> d(n);
    for (Eigen::Index j = 0; j < n; ++j)
        d(j) = (mods(2 * j) + mods(2 * j + 1)) / Scalar(2); // pair average
    return d;
}

// True iff every symplectic eigenvalue is >= 1/2 - slack. Never throws on
// merely unphysical input: indefinite symmetric matrices report false.
template <typename Derived>
bool check_physical(const Eigen::MatrixBase<Derived>& cov,
                    typename Derived::Scalar slack = typename Derived::Scalar(1e-12)) {
    using Scalar = typename Derived::Scalar;
    MatX<Scalar> sigma = (cov + cov.transpose()) / Scalar(2);
    detail::require_even_square(sigma, "check_physical");
    Eigen::SelfAdjointEigenSolver<MatX<Scalar>> es(sigma, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= Scalar(0))
        return false;
    const Eigen::Index n = sigma.rows() / 2;
    Eigen::EigenSolver<MatX<Scalar>> ev(symplectic_form<Scalar>(n) * sigma, false);
    if (ev.info() != Eigen::Success) return false;
    VecX<Scalar> mods = ev.eigenvalues().cwiseAbs();
    return mods.minCoeff() >= Scalar(0.5) - slack;
}

// ---- Williamson normal form ----

// Decomposes a positive-definite covariance as sigma = S^{-1} D S^{-T} with D
// the paired diagonal of symplectic eigenvalues and S symplectic. Built from
// the spectral decomposition of i * sigma^{-1/2} Omega sigma^{-1/2}: for each
// positive eigenvalue mu with unit eigenvector a + i b the real columns
// sqrt(2) b, sqrt(2) a are orthonormal and carry the pair, and d = 1/mu.
template <typename Derived>
SymplecticDecompositionT<typename Derived::Scalar> williamson(
    const Eigen::MatrixBase<Derived>& cov) {
    using Scalar = typename Derived::Scalar;
    using Cplx = std::complex<Scalar>;
    MatX<Scalar> sigma = (cov + cov.transpose()) / Scalar(2);
    detail::require_even_square(sigma, "williamson");
    Eigen::LLT<MatX<Scalar>> llt(sigma);
    if (llt.info() != Eigen::Success)
        throw NonPositiveDefinite("williamson: covariance not positive definite");
    const Eigen::Index n = sigma.rows() / 2;

    MatX<Scalar> isqrt = detail::inverse_sqrt_spd<Scalar>(sigma);
    MatX<Scalar> b2 = isqrt * symplectic_form<Scalar>(n) * isqrt; // antisymmetric
    MatX<Cplx> h = Cplx(0, 1) * b2.template cast<Cplx>();        // Hermitian
    Eigen::SelfAdjointEigenSolver<MatX<Cplx>> es(h);
    if (es.info() != Eigen::Success)
        throw NonPositiveDefinite("williamson: spectral decomposition failed");

    // Eigenvalues come in +/- mu pairs, ascending; the positive half sits at
    // indices n .. 2n-1 (ascending mu, i.e. descending d).
    MatX<Scalar> q(2 * n, 2 * n);
    VecX<Scalar> d(n);
    const Scalar root2 = std::sqrt(Scalar(2));
    for (Eigen::Index j = 0; j < n; ++j) {
        const Scalar mu = es.eigenvalues()(n + j);
        if (!(mu > Scalar(0)))
            throw NonPositiveDefinite("williamson: nonpositive symplectic spectrum");
        d(j) = Scalar(1) / mu;
        q.col(2 * j) = root2 * es.eigenvectors().col(n + j).imag();
        q.col(2 * j + 1) = root2 * es.eigenvectors().col(n + j).real();
    }

    SymplecticDecompositionT<Scalar> out;
    out.d = d;
    VecX<Scalar> dpair(2 * n);
    for (Eigen::Index j = 0; j < n; ++j) dpair(2 * j) = dpair(2 * j + 1) = d(j);
    out.S = dpair.cwiseSqrt().asDiagonal() * q.transpose() * isqrt;
    return out;
}

} // namespace csl
