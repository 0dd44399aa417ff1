#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "test_support.hpp"

using namespace fraclife;
using testkit::coxian3_raw;
using testkit::error_code_of;
using testkit::random_coxian;

TEST_CASE("validate accepts a scalar rate block") {
    Eigen::MatrixXd T(1, 1);
    T << -1.0;
    auto S = validate_subintensity(T);
    CHECK(S.dim() == 1);
    CHECK(S.exit_vector()(0) == doctest::Approx(1.0));
    CHECK(S.repaired_rows().empty());
}

TEST_CASE("validate repairs tiny positive row sums by lowering the diagonal") {
    auto S = validate_subintensity(coxian3_raw(), 1e-3);
    REQUIRE(S.repaired_rows().size() == 1);
    CHECK(S.repaired_rows()[0] == 1);
    CHECK(S.matrix()(1, 1) == doctest::Approx(-0.5664).epsilon(1e-12));
    CHECK(S.exit_vector()(0) == doctest::Approx(0.0137).epsilon(1e-12));
    CHECK(S.exit_vector()(1) == doctest::Approx(0.0));
    CHECK(S.exit_vector()(2) == doctest::Approx(0.0052).epsilon(1e-12));
}

TEST_CASE("validate rejects row sums beyond the repair tolerance") {
    Eigen::MatrixXd T(2, 2);
    T << -1.0, 2.0, 0.0, -1.0;
    CHECK(error_code_of([&] { validate_subintensity(T); }) ==
          ErrorCode::RowSumViolation);
}

TEST_CASE("validate rejects shape and sign violations") {
    Eigen::MatrixXd R(2, 3);
    R.setZero();
    CHECK(error_code_of([&] { validate_subintensity(R); }) == ErrorCode::NonSquare);

    Eigen::MatrixXd D(2, 2);
    D << 1.0, 0.0, 0.0, -1.0;
    CHECK(error_code_of([&] { validate_subintensity(D); }) == ErrorCode::SignPattern);

    Eigen::MatrixXd O(2, 2);
    O << -1.0, -0.1, 0.0, -1.0;
    CHECK(error_code_of([&] { validate_subintensity(O); }) == ErrorCode::SignPattern);
}

TEST_CASE("validate rejects conservative generators with a zero eigenvalue") {
    Eigen::MatrixXd T(2, 2);
    T << -1.0, 1.0, 1.0, -1.0;
    CHECK(error_code_of([&] { validate_subintensity(T); }) == ErrorCode::Singular);
}

TEST_CASE("matrix_exp on zero, diagonal and nilpotent inputs") {
    CHECK((matrix_exp(Eigen::MatrixXd::Zero(3, 3)) -
           Eigen::MatrixXd::Identity(3, 3)).norm() < 1e-14);

    Eigen::MatrixXd D = Eigen::Vector2d(-1.0, -2.0).asDiagonal();
    Eigen::MatrixXd E = matrix_exp(D);
    CHECK(E(0, 0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
    CHECK(E(1, 1) == doctest::Approx(std::exp(-2.0)).epsilon(1e-14));
    CHECK(std::abs(E(0, 1)) + std::abs(E(1, 0)) < 1e-15);

    Eigen::MatrixXd N(2, 2);
    N << 0.0, 1.0, 0.0, 0.0;
    Eigen::MatrixXd EN = matrix_exp(N);
    CHECK(EN(0, 0) == doctest::Approx(1.0));
    CHECK(EN(0, 1) == doctest::Approx(1.0));
    CHECK(EN(1, 0) == doctest::Approx(0.0));
    CHECK(EN(1, 1) == doctest::Approx(1.0));
}

TEST_CASE("matrix_exp reports overflow") {
    Eigen::MatrixXd H(1, 1);
    H << 1000.0;
    CHECK(error_code_of([&] { matrix_exp(H); }) == ErrorCode::Overflow);
}

TEST_CASE("matrix_exp satisfies the semigroup identity") {
    RngStream rng(11, 0);
    for (int rep = 0; rep < 5; ++rep) {
        auto model = random_coxian(rng, 4);
        const Eigen::MatrixXd& T = model.T().matrix();
        for (double s : {0.3, 1.7}) {
            for (double u : {0.9, 7.1}) {
                Eigen::MatrixXd lhs = matrix_exp(T * (s + u));
                Eigen::MatrixXd rhs = matrix_exp(T * s) * matrix_exp(T * u);
                CHECK((lhs - rhs).norm() <= 1e-9 * (1.0 + lhs.norm()));
            }
        }
    }
}

TEST_CASE("exp(T s) is sub-stochastic and vanishing") {
    RngStream rng(12, 0);
    for (int rep = 0; rep < 5; ++rep) {
        auto model = random_coxian(rng, 3);
        const Eigen::MatrixXd& T = model.T().matrix();
        double prev_mass = 1.0;
        for (double s : {0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 40.0}) {
            Eigen::MatrixXd E = matrix_exp(T * s);
            CHECK(E.minCoeff() >= -1e-12);
            Eigen::VectorXd sums = E.rowwise().sum();
            CHECK(sums.maxCoeff() <= 1.0 + 1e-12);
            double mass = (model.pi() * E).sum();
            CHECK(mass <= prev_mass + 1e-12);
            prev_mass = mass;
        }
        CHECK((model.pi() * matrix_exp(T * 200.0)).sum() < 1e-6);
    }
}

TEST_CASE("spectral_decompose orders eigenvalues and reports conditioning") {
    Eigen::MatrixXd D = Eigen::Vector2d(-1.0, -2.0).asDiagonal();
    auto sd = spectral_decompose(D);
    CHECK(sd.eigenvalues(0).real() == doctest::Approx(-1.0));
    CHECK(sd.eigenvalues(1).real() == doctest::Approx(-2.0));
    CHECK(sd.well_conditioned);

    auto S = validate_subintensity(coxian3_raw(), 1e-3);
    const auto& spec = S.spectral();
    CHECK(spec.well_conditioned);
    CHECK(spec.eigenvalues(0).real() == doctest::Approx(-0.0052).epsilon(1e-9));
    CHECK(spec.eigenvalues(1).real() == doctest::Approx(-0.1722).epsilon(1e-9));
    CHECK(spec.eigenvalues(2).real() == doctest::Approx(-0.5664).epsilon(1e-9));
    Eigen::MatrixXcd rebuilt =
        spec.P * spec.eigenvalues.asDiagonal() * spec.P_inv;
    CHECK((rebuilt - S.matrix().cast<std::complex<double>>()).norm() < 1e-10);

    Eigen::MatrixXd J(2, 2);
    J << -1.0, 1.0, 0.0, -1.0;
    CHECK_FALSE(spectral_decompose(J).well_conditioned);
}

TEST_CASE("apply_analytic reproduces the matrix and its exponential") {
    auto S = validate_subintensity(coxian3_raw(), 1e-3);
    Eigen::MatrixXd back = apply_analytic([](std::complex<double> w) { return w; }, S);
    CHECK((back - S.matrix()).norm() < 1e-12);

    Eigen::MatrixXd viaf =
        apply_analytic([](std::complex<double> w) { return std::exp(w); }, S);
    CHECK((viaf - matrix_exp(S.matrix())).norm() < 1e-12);
}

TEST_CASE("apply_analytic inverts through f(w) = 1/(-w)") {
    auto S = validate_subintensity(coxian3_raw(), 1e-3);
    Eigen::MatrixXd G =
        apply_analytic([](std::complex<double> w) { return 1.0 / (-w); }, S);
    CHECK(((-S.matrix()) * G - Eigen::MatrixXd::Identity(3, 3)).norm() < 1e-10);
}

TEST_CASE("apply_analytic refuses defective and non-analytic cases") {
    Eigen::MatrixXd J(2, 2);
    J << -1.0, 1.0, 0.0, -1.0;
    auto SJ = validate_subintensity(J);
    CHECK(error_code_of([&] {
        apply_analytic([](std::complex<double> w) { return std::exp(w); }, SJ);
    }) == ErrorCode::FallbackRequired);

    auto S = validate_subintensity(coxian3_raw(), 1e-3);
    CHECK(error_code_of([&] {
        apply_analytic([](std::complex<double> w) { return 1.0 / (w + 0.1722); }, S);
    }) == ErrorCode::NonAnalytic);
}

TEST_CASE("bilinear_coefficients contract the spectral sum") {
    auto model = testkit::coxian3_model();
    const auto& sd = model.T().spectral();
    REQUIRE(sd.well_conditioned);
    Eigen::VectorXd ones = Eigen::VectorXd::Ones(3);
    auto coef = bilinear_coefficients(model.pi(), sd, ones);

    std::complex<double> ident{0.0, 0.0};
    std::complex<double> expo{0.0, 0.0};
    for (int i = 0; i < 3; ++i) {
        ident += coef[i];
        expo += coef[i] * std::exp(sd.eigenvalues(i) * 2.5);
    }
    CHECK(std::abs(ident.imag()) < 1e-12);
    CHECK(ident.real() == doctest::Approx(1.0).epsilon(1e-12));
    double direct = (model.pi() * matrix_exp(model.T().matrix() * 2.5) * ones).value();
    CHECK(std::abs(expo.imag()) < 1e-12);
    CHECK(expo.real() == doctest::Approx(direct).epsilon(1e-10));
}

TEST_CASE("green_matrix holds expected sojourn times") {
    Eigen::MatrixXd L(1, 1);
    L << -4.0;
    CHECK(green_matrix(validate_subintensity(L))(0, 0) == doctest::Approx(0.25));

    Eigen::MatrixXd D = Eigen::Vector2d(-1.0, -2.0).asDiagonal();
    Eigen::MatrixXd G = green_matrix(validate_subintensity(D));
    CHECK(G(0, 0) == doctest::Approx(1.0));
    CHECK(G(1, 1) == doctest::Approx(0.5));

    auto S = validate_subintensity(coxian3_raw(), 1e-3);
    Eigen::MatrixXd GC = green_matrix(S);
    CHECK(GC.minCoeff() >= 0.0);
    CHECK(((-S.matrix()) * GC - Eigen::MatrixXd::Identity(3, 3)).norm() < 1e-12);
}

TEST_CASE("embedding into the full generator preserves the transient block") {
    auto S = validate_subintensity(coxian3_raw(), 1e-3);
    const Eigen::Index p = S.dim();
    Eigen::MatrixXd full = Eigen::MatrixXd::Zero(p + 1, p + 1);
    full.topLeftCorner(p, p) = S.matrix();
    full.topRightCorner(p, 1) = S.exit_vector();

    const double s = 7.3;
    Eigen::MatrixXd E = matrix_exp(full * s);
    Eigen::MatrixXd Et = matrix_exp(S.matrix() * s);
    CHECK((E.topLeftCorner(p, p) - Et).norm() < 1e-10);
    Eigen::VectorXd absorbed =
        Eigen::VectorXd::Ones(p) - Et * Eigen::VectorXd::Ones(p);
    CHECK((E.topRightCorner(p, 1) - absorbed).norm() < 1e-10);
    CHECK(E.bottomRightCorner(1, 1)(0, 0) == doctest::Approx(1.0));
}
