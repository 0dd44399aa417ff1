#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "fraclife/mittag_leffler.hpp"
#include "test_support.hpp"

using namespace fraclife;
using testkit::error_code_of;
using Cplx = std::complex<double>;

TEST_CASE("parameter domain is enforced") {
    CHECK(error_code_of([] { MlParams(0.0); }) == ErrorCode::InvalidArgument);
    CHECK(error_code_of([] { MlParams(1.2); }) == ErrorCode::InvalidArgument);
    CHECK(error_code_of([] { MlParams(std::nan("")); }) == ErrorCode::InvalidArgument);
    CHECK(error_code_of([] { MlParams(0.5, 0.0); }) == ErrorCode::InvalidArgument);
    CHECK(error_code_of([] { MlParams(0.5, -2.0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("exponential special case at unit argument") {
    CHECK(testkit::rel_err(ml_scalar(MlParams(1.0, 1.0), 1.0), std::exp(1.0)) < 1e-12);
}

TEST_CASE("value at zero is the reciprocal gamma of beta") {
    for (double alpha : {0.3, 0.7, 1.0}) {
        for (double beta : {0.5, 1.0, 2.3}) {
            CHECK(ml_scalar(MlParams(alpha, beta), 0.0) ==
                  doctest::Approx(1.0 / std::tgamma(beta)).epsilon(1e-13));
        }
    }
}

TEST_CASE("half-order values match the scaled complementary error function") {
    auto expect = [](double x) { return std::exp(x * x) * std::erfc(x); };
    CHECK(testkit::rel_err(ml_scalar(MlParams(0.5, 1.0), -1.0), expect(1.0)) < 1e-10);
    CHECK(testkit::rel_err(ml_scalar(MlParams(0.5, 1.0), -0.5), expect(0.5)) < 1e-10);
    CHECK(testkit::rel_err(ml_scalar(MlParams(0.5, 1.0), -2.0), expect(2.0)) < 1e-10);
}

TEST_CASE("order one reproduces exp on the disk of radius ten") {
    MlParams p(1.0, 1.0);
    auto check_point = [&](Cplx z) {
        Cplx want = std::exp(z);
        Cplx got = ml_scalar(p, z);
        double err = std::abs(got - want) / std::max(1.0, std::abs(want));
        CHECK(err <= 1e-12);
    };
    const double pi = std::acos(-1.0);
    for (double radius : {0.25, 1.0, 4.0, 7.5, 9.99}) {
        for (int k = 0; k < 12; ++k) {
            double phi = 2.0 * pi * k / 12.0;
            check_point(Cplx(radius * std::cos(phi), radius * std::sin(phi)));
        }
    }
    for (double x : {-10.0, -5.0, -0.1, 0.0, 0.1, 5.0, 10.0}) check_point(Cplx(x, 0.0));
}

TEST_CASE("series and contour paths agree on the negative axis") {
    RngStream rng(77, 0);
    for (double alpha : {0.5, 0.76, 0.96}) {
        for (double beta : {1.0, alpha}) {
            MlParams p(alpha, beta);
            for (int i = 0; i < 200; ++i) {
                double x = 100.0 * rng.next_uniform();
                auto ref = ml_detail::negative_axis_reference(p, x);
                auto con = ml_detail::contour_eval(p, Cplx(-x, 0.0));
                REQUIRE(ref.ok);
                REQUIRE(con.ok);
                CHECK(std::abs(ref.value - con.value) <= 5e-9);
            }
        }
    }
}

TEST_CASE("series path defers to the contour outside its radius") {
    MlParams p(0.8, 1.0);
    CHECK(ml_detail::series_preferred(p, Cplx(1.0, 0.0)));
    CHECK_FALSE(ml_detail::series_preferred(p, Cplx(-40.0, 0.0)));
}

TEST_CASE("fractional survival functions stay in (0, 1] and decrease") {
    for (double alpha : {0.4, 0.76, 1.0}) {
        for (double lam : {0.1, 1.0}) {
            MlParams p(alpha, 1.0);
            double prev = 1.0 + 1e-15;
            for (double x : {0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 30.0, 100.0}) {
                double s = ml_scalar(p, -lam * std::pow(x, alpha));
                CHECK(s > 0.0);
                CHECK(s <= 1.0);
                CHECK(s < prev);
                prev = s;
            }
        }
    }
}

TEST_CASE("matrix argument at zero scale is the identity") {
    auto model = testkit::coxian3_model();
    Eigen::MatrixXd M = ml_matrix(MlParams(0.7, 1.0), model.T(), 0.0);
    CHECK((M - Eigen::MatrixXd::Identity(3, 3)).norm() < 1e-14);
}

TEST_CASE("matrix argument at order one is the matrix exponential") {
    RngStream rng(21, 0);
    for (Eigen::Index p : {2, 4}) {
        auto model = testkit::random_coxian(rng, p);
        for (double s : {0.5, 3.0, 20.0}) {
            Eigen::MatrixXd got = ml_matrix(MlParams(1.0, 1.0), model.T(), s);
            Eigen::MatrixXd want = matrix_exp(model.T().matrix() * s);
            CHECK((got - want).norm() <= 1e-9 * (1.0 + want.norm()));
        }
    }
}

TEST_CASE("matrix series fallback handles a defective spectrum") {
    Eigen::MatrixXd J(2, 2);
    J << -1.0, 1.0, 0.0, -1.0;
    auto S = validate_subintensity(J);
    REQUIRE_FALSE(S.spectral().well_conditioned);
    for (double s : {0.5, 2.0, 6.0}) {
        Eigen::MatrixXd got = ml_matrix(MlParams(1.0, 1.0), S, s);
        Eigen::MatrixXd want = matrix_exp(J * s);
        CHECK((got - want).norm() <= 1e-9 * (1.0 + want.norm()));
    }
}

TEST_CASE("fractional matrix survival mass is a survival function") {
    auto model = testkit::coxian3_model();
    Eigen::VectorXd ones = Eigen::VectorXd::Ones(3);
    MlParams p(0.96, 1.0);
    double prev = 1.0 + 1e-12;
    for (double s = 0.0; s <= 100.0; s += 0.5) {
        Eigen::MatrixXd M = ml_matrix(p, model.T(), s);
        double mass = (model.pi() * M * ones).value();
        CHECK(mass <= prev + 1e-12);
        CHECK(mass > 0.0);
        CHECK(mass <= 1.0 + 1e-12);
        prev = mass;
    }
}
