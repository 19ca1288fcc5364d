// Fisher-information tests: Gaussian measurement models, closed-form thermal
// and diagonal-family information, agreement of the three independent QFI
// routes, ordering against classical measurements, and failure modes.
#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "csl/dynamics.hpp"
#include "csl/fisher.hpp"
#include "test_util.hpp"

using namespace csl;

namespace {

// Information of sigma = diag(a1, a2), dsigma = diag(b1, b2):
//   I = 4 (b1 b2 + 2 b2^2 a1^2 + 2 b1^2 a2^2) / (16 a1^2 a2^2 - 1),
// the compact formula reduced by hand for diagonal families.
double diag_family_qfi(double a1, double a2, double b1, double b2) {
    return 4.0 * (b1 * b2 + 2.0 * b2 * b2 * a1 * a1 + 2.0 * b1 * b1 * a2 * a2) /
           (16.0 * a1 * a1 * a2 * a2 - 1.0);
}

Eigen::Matrix2d mixed_cov(std::mt19937& rng, double nu_hi) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double nu = testutil::log_uniform(rng, 0.7, nu_hi);
    const double r = 0.8 * u(rng);
    const double phi = 3.14159265358979323846 * u(rng);
    const Eigen::Matrix2d rot = rotation2(phi);
    Eigen::Vector2d d(nu * std::exp(2.0 * r), nu * std::exp(-2.0 * r));
    return rot * d.asDiagonal() * rot.transpose();
}

} // namespace

TEST_SUITE("fisher") {

TEST_CASE("measurement covariance") {
    const Eigen::Matrix2d het = gaussian_meas_cov(MeasurementSpec::heterodyne());
    CHECK((het - 0.5 * Eigen::Matrix2d::Identity()).norm() < 1e-15);
    const Eigen::Matrix2d sq = gaussian_meas_cov({2.0, 0.0});
    CHECK(sq(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(sq(1, 1) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(sq(0, 1) == 0.0);
    // a quarter turn swaps the quadratures
    const Eigen::Matrix2d rot = gaussian_meas_cov({2.0, 3.14159265358979323846 / 2.0});
    CHECK(rot(0, 0) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(rot(1, 1) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(gaussian_meas_cov(MeasurementSpec::homodyne_at(0.3)), HomodyneNotFinite);
    CHECK_THROWS_AS(gaussian_meas_cov({-1.0, 0.0}), DomainError);
}

TEST_CASE("homodyne information closed form") {
    Eigen::Matrix2d sigma, dsigma;
    sigma << 1.3, 0.0, 0.0, 0.9;
    dsigma << 0.5, 0.0, 0.0, -0.2;
    const double pi = 3.14159265358979323846;
    CHECK(fisher_gaussian(sigma, dsigma, MeasurementSpec::homodyne_at(0.0)).value ==
          doctest::Approx(0.5 * 0.5 / (2.0 * 1.3 * 1.3)).epsilon(1e-12));
    CHECK(fisher_gaussian(sigma, dsigma, MeasurementSpec::homodyne_at(pi / 2.0)).value ==
          doctest::Approx(0.2 * 0.2 / (2.0 * 0.9 * 0.9)).epsilon(1e-12));
    Eigen::Matrix2d degens;
    degens << 0.0, 0.0, 0.0, 1.0;
    CHECK_THROWS_AS(fisher_gaussian(degens, dsigma, MeasurementSpec::homodyne_at(0.0)),
                    SingularMeasCov);
}

TEST_CASE("heterodyne information on isotropic thermal families") {
    // sigma = (n + 1/2) I, dsigma = I, heterodyne adds 1/2 per quadrature:
    // I_C = 1/(n + 1)^2
    for (double n : {0.5, 2.0, 10.0}) {
        Eigen::Matrix2d sigma = (n + 0.5) * Eigen::Matrix2d::Identity();
        const double got =
            fisher_gaussian(sigma, Eigen::Matrix2d::Identity(), MeasurementSpec::heterodyne())
                .value;
        CHECK(got == doctest::Approx(1.0 / ((n + 1.0) * (n + 1.0))).epsilon(1e-12));
    }
}

TEST_CASE("thermal closed forms") {
    // occupation family: sigma = (n + 1/2) I, dsigma = I => I_Q = 1/(n(n+1))
    for (double n : {0.3, 1.0, 7.5, 100.0}) {
        Eigen::Matrix2d sigma = (n + 0.5) * Eigen::Matrix2d::Identity();
        CHECK(qfi_single_mode(sigma, Eigen::Matrix2d::Identity()).value ==
              doctest::Approx(1.0 / (n * (n + 1.0))).epsilon(1e-12));
    }
    // scale family: sigma = nu I, dsigma = I => I_Q = 1/(nu^2 - 1/4)
    std::mt19937 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const double nu = testutil::log_uniform(rng, 0.6, 20.0);
        Eigen::Matrix2d sigma = nu * Eigen::Matrix2d::Identity();
        CHECK(qfi_single_mode(sigma, Eigen::Matrix2d::Identity()).value ==
              doctest::Approx(1.0 / (nu * nu - 0.25)).epsilon(1e-12));
    }
}

TEST_CASE("diagonal families against the reduced closed form") {
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int trial = 0; trial < 30; ++trial) {
        const double a1 = testutil::log_uniform(rng, 0.55, 5.0);
        const double a2 = testutil::log_uniform(rng, 0.55, 5.0);
        double b1 = u(rng), b2 = u(rng);
        if (std::abs(b1 * b2) < 1e-6) b1 = 1.0; // keep the compact-formula path
        Eigen::Matrix2d sigma = Eigen::Vector2d(a1, a2).asDiagonal();
        Eigen::Matrix2d dsigma = Eigen::Vector2d(b1, b2).asDiagonal();
        CHECK(qfi_single_mode(sigma, dsigma).value ==
              doctest::Approx(diag_family_qfi(a1, a2, b1, b2)).epsilon(1e-12));
    }
}

TEST_CASE("near-pure guard") {
    CHECK_THROWS_AS(qfi_single_mode(0.5 * Eigen::Matrix2d::Identity(),
                                    Eigen::Matrix2d::Identity()),
                    NearPure);
}

TEST_CASE("singular derivative delegates to the SLD core") {
    Eigen::Matrix2d dsigma;
    dsigma << 1.0, 0.0, 0.0, 0.0; // rank one: compact formula does not apply
    for (auto [v, w] : {std::pair{0.8, 0.7}, std::pair{2.5, 0.6}, std::pair{1.1, 4.0}}) {
        Eigen::Matrix2d sigma = Eigen::Vector2d(v, w).asDiagonal();
        const double want = 8.0 * w * w / (16.0 * v * v * w * w - 1.0);
        CHECK(qfi_single_mode(sigma, dsigma).value == doctest::Approx(want).epsilon(1e-9));
    }
    // zero derivative carries zero information
    CHECK(qfi_single_mode(1.7 * Eigen::Matrix2d::Identity(), Eigen::Matrix2d::Zero()).value ==
          doctest::Approx(0.0));
}

TEST_CASE("three routes agree on random mixed families") {
    std::mt19937 rng(47);
    int done = 0;
    for (int attempt = 0; attempt < 400 && done < 20; ++attempt) {
        const Eigen::Matrix2d sigma0 = mixed_cov(rng, 5.0);
        const Eigen::Matrix2d dsigma = testutil::random_symmetric2(rng, 0.1);
        if (dsigma.norm() < 1e-3) continue;
        const double eq = qfi_single_mode(sigma0, dsigma).value;
        if (!(eq > 1e-8)) continue;
        // keep the family physical across the fidelity route's step
        const double h_est = std::sqrt(2e-5 / eq);
        if (!check_physical(Eigen::Matrix2d(sigma0 + 1.1 * h_est * dsigma)) ||
            !check_physical(Eigen::Matrix2d(sigma0 - 1.1 * h_est * dsigma)))
            continue;
        StateFamily family = [&](double lam) {
            GaussianState s;
            s.mean = Vec::Zero(2);
            s.cov = sigma0 + lam * dsigma;
            return s;
        };
        const double sld = qfi_sld(family, 0.0).value;
        const double fid = qfi_fidelity(family, 0.0).value;
        CHECK(sld == doctest::Approx(eq).epsilon(1e-6));
        CHECK(fid == doctest::Approx(eq).epsilon(1e-6));
        ++done;
    }
    CHECK(done == 20);
}

TEST_CASE("displacement families carry the mean-term information") {
    // displaced vacuum: I_Q = 2
    StateFamily vac = [](double lam) {
        GaussianState s;
        s.mean = Vec(2);
        s.mean << lam, 0.0;
        s.cov = 0.5 * Mat::Identity(2, 2);
        return s;
    };
    CHECK(qfi_sld(vac, 0.7).value == doctest::Approx(2.0).epsilon(1e-12));
    // displaced thermal: I_Q = 1/(n + 1/2)
    const double n = 2.0;
    StateFamily th = [n](double lam) {
        GaussianState s;
        s.mean = Vec(2);
        s.mean << lam, 0.0;
        s.cov = (n + 0.5) * Mat::Identity(2, 2);
        return s;
    };
    CHECK(qfi_sld(th, 0.0).value == doctest::Approx(1.0 / (n + 0.5)).epsilon(1e-12));
}

TEST_CASE("information is additive over product states") {
    std::mt19937 rng(301);
    for (int trial = 0; trial < 10; ++trial) {
        const Eigen::Matrix2d sa = mixed_cov(rng, 4.0);
        const Eigen::Matrix2d sb = mixed_cov(rng, 4.0);
        const Eigen::Matrix2d da = testutil::random_symmetric2(rng, 0.2);
        const Eigen::Matrix2d db = testutil::random_symmetric2(rng, 0.2);
        Mat sigma = Mat::Zero(4, 4), dsigma = Mat::Zero(4, 4);
        sigma.topLeftCorner<2, 2>() = sa;
        sigma.bottomRightCorner<2, 2>() = sb;
        dsigma.topLeftCorner<2, 2>() = da;
        dsigma.bottomRightCorner<2, 2>() = db;
        const double want =
            qfi_single_mode(sa, da).value + qfi_single_mode(sb, db).value;
        CHECK(qfi_sld_core(sigma, dsigma, Vec()) == doctest::Approx(want).epsilon(1e-8));
    }
}

TEST_CASE("discarding a mode never increases the information") {
    const SystemParams p = SystemParams::defaults();
    const Mat a = drift_matrix(p);
    const double lam = 100.0;
    const Mat sigma = steady_state(a, noise_matrix(p, lam));
    const Mat ds = dsigma_dLambda(p);
    const double full = qfi_sld_core(sigma, ds, Vec());
    const CovarianceBlocks sb = blocks(sigma);
    const CovarianceBlocks db = blocks(ds);
    const double mech = qfi_single_mode(sb.sigma_M, db.sigma_M).value;
    const double opt = qfi_single_mode(sb.sigma_L, db.sigma_L).value;
    CHECK(full >= mech * (1.0 - 1e-9));
    CHECK(full >= opt * (1.0 - 1e-9));
    CHECK(mech > 0.0);
    CHECK(opt > 0.0);
}

TEST_CASE("strong measurement squeezing approaches the homodyne limit") {
    Eigen::Matrix2d sigma, dsigma;
    sigma << 1.3, 0.2, 0.2, 0.9;
    dsigma << 0.5, 0.1, 0.1, -0.2;
    for (double theta : {0.0, 0.7, 1.9}) {
        const double hom =
            fisher_gaussian(sigma, dsigma, MeasurementSpec::homodyne_at(theta)).value;
        const double fin = fisher_gaussian(sigma, dsigma, {1e-8, theta}).value;
        CHECK(fin == doctest::Approx(hom).epsilon(1e-6));
    }
}

TEST_CASE("no Gaussian measurement beats the quantum bound") {
    std::mt19937 rng(77);
    const double pi = 3.14159265358979323846;
    for (int trial = 0; trial < 5; ++trial) {
        const Eigen::Matrix2d sigma = mixed_cov(rng, 8.0);
        const Eigen::Matrix2d dsigma = testutil::random_symmetric2(rng, 0.5);
        const double bound = qfi_single_mode(sigma, dsigma).value * (1.0 + 1e-9);
        for (double l : {1e-2, 0.1, 1.0, 10.0, 100.0})
            for (double theta : {0.0, pi / 6.0, pi / 3.0, pi / 2.0})
                CHECK(fisher_gaussian(sigma, dsigma, {l, theta}).value <= bound);
        for (double theta : {0.0, pi / 4.0, pi / 2.0, 3.0 * pi / 4.0})
            CHECK(fisher_gaussian(sigma, dsigma, MeasurementSpec::homodyne_at(theta)).value <=
                  bound);
    }
}

TEST_CASE("signal-to-noise ratio and reparameterization") {
    FisherResult f{2.0, "Lambda", 0.5};
    CHECK(snr(3.0, f) == doctest::Approx(18.0).epsilon(1e-15));
    CHECK_THROWS_AS(snr(1.0, FisherResult{-1.0, "Lambda", std::nullopt}), DomainError);

    const FisherResult g = reparameterize(f, 4.0);
    CHECK(g.value == doctest::Approx(32.0).epsilon(1e-15));
    CHECK(g.parameter == "gamma");
    REQUIRE(g.alt_value.has_value());
    CHECK(*g.alt_value == doctest::Approx(8.0).epsilon(1e-15));
    CHECK_THROWS_AS(reparameterize(f, 0.0), DomainError);
    CHECK_THROWS_AS(reparameterize(f, -2.0), DomainError);

    // the SNR is invariant under Lambda = c * gamma reparameterization
    const double c = 5e3, lambda = 0.37, gamma = lambda / c;
    const FisherResult in_gamma = reparameterize(f, c);
    CHECK(snr(gamma, in_gamma) == doctest::Approx(snr(lambda, f)).epsilon(1e-12));
}

TEST_CASE("fidelity route on a thermal family and its guards") {
    StateFamily th = [](double lam) {
        GaussianState s;
        s.mean = Vec::Zero(2);
        s.cov = (lam + 0.5) * Mat::Identity(2, 2);
        return s;
    };
    const double n = 3.0;
    CHECK(qfi_fidelity(th, n).value ==
          doctest::Approx(1.0 / (n * (n + 1.0))).epsilon(1e-6));
    // parameter-independent family: zero information, no throw
    StateFamily flat = [](double) {
        GaussianState s;
        s.mean = Vec::Zero(2);
        s.cov = 2.0 * Mat::Identity(2, 2);
        return s;
    };
    CHECK(qfi_fidelity(flat, 1.0).value == 0.0);
    StateFamily two = [](double lam) {
        GaussianState s;
        s.mean = Vec::Zero(4);
        s.cov = (lam + 1.0) * Mat::Identity(4, 4);
        return s;
    };
    CHECK_THROWS_AS(qfi_fidelity(two, 0.0), DomainError);
}

TEST_CASE("pure-state divergence is detected") {
    // heating at vacuum: vanishing SLD denominator with nonzero numerator
    CHECK_THROWS_AS(qfi_sld_core(0.5 * Mat::Identity(2, 2), Mat::Identity(2, 2), Vec()),
                    PureStateDivergence);
    StateFamily heat = [](double lam) {
        GaussianState s;
        s.mean = Vec::Zero(2);
        s.cov = (0.5 + lam) * Mat::Identity(2, 2);
        return s;
    };
    CHECK_THROWS_AS(qfi_sld(heat, 0.0), PureStateDivergence);
}

} // TEST_SUITE
