// Dynamics tests: drift/noise assembly, Lyapunov steady state against closed
// forms, transient propagation, and the closed-form mechanical coefficients
// cross-checked against the numeric steady state.
#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "csl/dynamics.hpp"
#include "test_util.hpp"

using namespace csl;

TEST_SUITE("dynamics") {

TEST_CASE("effective coupling at the reference configuration") {
    const SystemParams p = SystemParams::defaults();
    // chi = sqrt(2) (omega_c/L) sqrt(hbar/(m omega_m)) sqrt(2 P kappa/(hbar omega_0))
    //       / sqrt(kappa^2 + delta^2), evaluated independently
    const double omega_c = 2.0 * 3.14159265358979323846 * c_light / p.laser_wavelength;
    CHECK(omega_c == doctest::Approx(1770349217395538.8).epsilon(1e-12));
    const double chi0 = omega_c / p.cavity_length * std::sqrt(hbar / (p.mass * p.omega_m));
    CHECK(chi0 == doctest::Approx(142.84173099028451).epsilon(1e-12));
    const double pump = std::sqrt(2.0 * p.laser_power * p.kappa / (hbar * (omega_c - p.delta)));
    CHECK(pump == doctest::Approx(1035016984163.8132).epsilon(1e-12));
    CHECK(effective_coupling(p) == doctest::Approx(820088.83705739195).epsilon(1e-12));
}

TEST_CASE("drift matrix entries") {
    const SystemParams p = SystemParams::defaults();
    const Eigen::Matrix4d a = drift_matrix(p);
    const double chi = effective_coupling(p);
    CHECK(a(0, 1) == p.omega_m);
    CHECK(a(1, 0) == -p.omega_m);
    CHECK(a(1, 1) == -p.gamma_m);
    CHECK(a(1, 2) == chi);
    CHECK(a(3, 0) == chi);
    CHECK(a(2, 2) == -p.kappa);
    CHECK(a(3, 3) == -p.kappa);
    CHECK(a(2, 3) == p.delta);
    CHECK(a(3, 2) == -p.delta);
    // everything else zero
    CHECK(a(0, 0) == 0.0);
    CHECK(a(0, 2) == 0.0);
    CHECK(a(0, 3) == 0.0);
    CHECK(a(1, 3) == 0.0);
    CHECK(a(2, 0) == 0.0);
    CHECK(a(2, 1) == 0.0);
    CHECK(a(3, 1) == 0.0);
}

TEST_CASE("noise matrix entries") {
    const SystemParams p = SystemParams::defaults();
    const double n_bar = thermal_occupation(p.omega_m, p.temperature);
    const double lam = 123.0;
    const Eigen::Matrix4d d = noise_matrix(p, lam);
    CHECK(d(0, 0) == 0.0);
    CHECK(d(1, 1) == doctest::Approx(p.gamma_m * (2.0 * n_bar + 1.0) + lam).epsilon(1e-15));
    CHECK(d(2, 2) == p.kappa);
    CHECK(d(3, 3) == p.kappa);
    CHECK(d.norm() == doctest::Approx(d.diagonal().norm()).epsilon(1e-15));
    CHECK_THROWS_AS(noise_matrix(p, -1.0), DomainError);
}

TEST_CASE("stability check") {
    CHECK(stability_check(-Mat::Identity(3, 3)));
    Mat rot(2, 2); // undamped rotation, marginal
    rot << 0.0, 1.0, -1.0, 0.0;
    CHECK_FALSE(stability_check(rot));
    CHECK_FALSE(stability_check(Mat::Identity(2, 2)));
    CHECK(stability_check(drift_matrix(SystemParams::defaults())));
}

TEST_CASE("steady state solves a closed-form Lyapunov system") {
    const double k = 2.75;
    Mat d(3, 3);
    d << 4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 5.0;
    const Mat sigma = steady_state(-k * Mat::Identity(3, 3), d);
    CHECK((sigma - d / (2.0 * k)).norm() < 1e-12 * d.norm());
}

TEST_CASE("steady state satisfies the Lyapunov equation at the defaults") {
    const SystemParams p = SystemParams::defaults();
    const Mat a = drift_matrix(p);
    const Mat d = noise_matrix(p, 100.0);
    const Mat sigma = steady_state(a, d);
    CHECK((a * sigma + sigma * a.transpose() + d).norm() < 1e-10 * d.norm());
    CHECK((sigma - sigma.transpose()).norm() == 0.0);
    CHECK(check_physical(sigma, 1e-9));
}

TEST_CASE("steady state refuses unstable drift") {
    CHECK_THROWS_AS(steady_state(Mat::Identity(2, 2), Mat::Identity(2, 2)), UnstableDrift);
    CHECK_THROWS_AS(steady_state(Mat::Identity(2, 2), Mat::Identity(3, 3)), DomainError);
}

TEST_CASE("closed-form mechanical coefficients match the Lyapunov route") {
    std::mt19937 rng(20260823);
    for (int trial = 0; trial < 25; ++trial) {
        const SystemParams p = testutil::random_stable_params(rng);
        const MechCoefficients mc = mech_coefficients(p);
        const Mat a = drift_matrix(p);
        const Mat s0 = steady_state(a, noise_matrix(p, 0.0));
        const Mat ds = dsigma_dLambda(p);
        CHECK(mc.alpha1 == doctest::Approx(s0(0, 0)).epsilon(1e-9));
        CHECK(mc.alpha2 == doctest::Approx(s0(1, 1)).epsilon(1e-9));
        CHECK(mc.beta1 == doctest::Approx(ds(0, 0)).epsilon(1e-9));
        CHECK(mc.beta2 == doctest::Approx(ds(1, 1)).epsilon(1e-9));
        CHECK(mc.alpha1 > 0.0);
        CHECK(mc.beta1 > 0.0);
    }
}

TEST_CASE("steady state is affine in the collapse rate") {
    const SystemParams p = SystemParams::defaults();
    const Mat a = drift_matrix(p);
    const Mat s0 = steady_state(a, noise_matrix(p, 0.0));
    const Mat ds = dsigma_dLambda(p);
    const double lam = 7.5e3;
    const Mat s = steady_state(a, noise_matrix(p, lam));
    CHECK((s - (s0 + lam * ds)).norm() < 1e-12 * s.norm());
}

TEST_CASE("propagate matches the scalar decay closed form") {
    const double k = 1.3;
    Mat d(2, 2);
    d << 2.0, 0.3, 0.3, 1.0;
    Mat sigma0(2, 2);
    sigma0 << 5.0, -1.0, -1.0, 4.0;
    const Mat inf = d / (2.0 * k);
    for (double t : {0.0, 0.1, 1.0, 10.0}) {
        const Mat got = propagate(sigma0, -k * Mat::Identity(2, 2), d, t);
        const Mat want = std::exp(-2.0 * k * t) * (sigma0 - inf) + inf;
        CHECK((got - want).norm() < 1e-9 * std::max(1.0, want.norm()));
    }
}

TEST_CASE("propagate handles a defective drift via the integrator fallback") {
    // A = [[-1,1],[0,-1]] has a single eigenvector; with D = 0 and sigma0 = I,
    // sigma(t) = e^{At} e^{A^T t} = e^{-2t} [[1+t^2, t], [t, 1]].
    Mat a(2, 2);
    a << -1.0, 1.0, 0.0, -1.0;
    const double t = 2.0;
    const Mat got = propagate(Mat::Identity(2, 2), a, Mat::Zero(2, 2), t, 0.05);
    Mat want(2, 2);
    want << 1.0 + t * t, t, t, 1.0;
    want *= std::exp(-2.0 * t);
    CHECK((got - want).norm() < 1e-7 * want.norm());
}

TEST_CASE("propagate from vacuum reaches the steady state") {
    const SystemParams p = SystemParams::defaults();
    const Mat a = drift_matrix(p);
    const Mat d = noise_matrix(p, 500.0);
    const Mat target = steady_state(a, d);
    const double t = 20.0 / std::min(p.gamma_m, p.kappa);
    const Mat got = propagate(0.5 * Mat::Identity(4, 4), a, d, t);
    CHECK((got - target).norm() < 1e-8 * target.norm());
}

TEST_CASE("propagate rejects bad arguments") {
    CHECK_THROWS_AS(propagate(Mat::Identity(2, 2), Mat::Identity(3, 3),
                              Mat::Identity(3, 3), 1.0),
                    DomainError);
    CHECK_THROWS_AS(propagate(Mat::Identity(2, 2), -Mat::Identity(2, 2),
                              Mat::Identity(2, 2), -1.0),
                    DomainError);
}

TEST_CASE("block extraction") {
    Mat sigma(4, 4);
    sigma << 1, 2, 3, 4,
             2, 5, 6, 7,
             3, 6, 8, 9,
             4, 7, 9, 10;
    const CovarianceBlocks b = blocks(sigma);
    CHECK(b.sigma_M(0, 0) == 1.0);
    CHECK(b.sigma_M(1, 1) == 5.0);
    CHECK(b.sigma_M(0, 1) == 2.0);
    CHECK(b.sigma_L(0, 0) == 8.0);
    CHECK(b.sigma_L(1, 1) == 10.0);
    CHECK(b.sigma_C(0, 0) == 3.0);
    CHECK(b.sigma_C(1, 1) == 7.0);
}

TEST_CASE("exact collapse-rate derivative agrees with finite differences") {
    const SystemParams p = SystemParams::defaults();
    const Mat ds = dsigma_dLambda(p);
    const Mat a = drift_matrix(p);
    const double h = 10.0;
    const Mat fd = (steady_state(a, noise_matrix(p, h)) -
                    steady_state(a, noise_matrix(p, 0.0))) /
                   h;
    // exact up to the rounding of the two differenced solver outputs
    CHECK((ds - fd).norm() < 1e-11 * ds.norm());
    // The derivative feeds only the momentum diffusion entry, so it is
    // independent of the thermal occupation part of the noise.
    CHECK(ds(0, 0) > 0.0);
}

} // TEST_SUITE
