#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "test_support.hpp"

using namespace fraclife;
using testkit::error_code_of;

namespace {

// Each clock with the largest operational time its image stays representable
// at; the exponential-growth family overflows doubles near x = 710.
struct ClockFixture {
    InhomogeneityTransform g;
    double xmax;
};

std::vector<ClockFixture> family_fixtures() {
    return {{InhomogeneityTransform::identity(), 1e4},
            {InhomogeneityTransform::power_weibull(2.0), 1e4},
            {InhomogeneityTransform::power_weibull(0.7), 1e4},
            {InhomogeneityTransform::pareto_exp(1.5), 500.0},
            {InhomogeneityTransform::gompertz_log(0.1383), 1e4}};
}

const std::vector<double>& x_grid() {
    static std::vector<double> xs = [] {
        std::vector<double> v;
        for (int i = 0; i <= 40; ++i) v.push_back(std::pow(10.0, -4.0 + i / 5.0));
        return v;
    }();
    return xs;
}

} // namespace

TEST_CASE("closed forms of the built-in clocks") {
    auto pw = InhomogeneityTransform::power_weibull(2.0);
    CHECK(pw.g(9.0) == doctest::Approx(3.0));
    CHECK(pw.g_inv(3.0) == doctest::Approx(9.0));
    CHECK(pw.lambda(3.0) == doctest::Approx(6.0));

    auto pe = InhomogeneityTransform::pareto_exp(2.0);
    CHECK(pe.g(1.0) == doctest::Approx(2.0 * (std::exp(1.0) - 1.0)));
    CHECK(pe.g_inv(2.0 * (std::exp(1.0) - 1.0)) == doctest::Approx(1.0));
    CHECK(pe.lambda(3.0) == doctest::Approx(0.2));

    auto gl = InhomogeneityTransform::gompertz_log(0.5);
    CHECK(gl.g(2.0) == doctest::Approx(std::log(2.0) / 0.5));
    CHECK(gl.g_inv(std::log(2.0) / 0.5) == doctest::Approx(2.0));
    CHECK(gl.lambda(4.0) == doctest::Approx(std::exp(2.0)));

    auto id = InhomogeneityTransform::identity();
    CHECK(id.g(7.25) == 7.25);
    CHECK(id.lambda(7.25) == 1.0);
    CHECK(id.log_lambda(7.25) == 0.0);
}

TEST_CASE("every family fixes zero and grows strictly") {
    for (const auto& f : family_fixtures()) {
        CHECK(f.g.g(0.0) == doctest::Approx(0.0));
        double prev = 0.0;
        for (double x : x_grid()) {
            if (x > f.xmax) continue;
            double t = f.g.g(x);
            CHECK(std::isfinite(t));
            CHECK(t > prev);
            prev = t;
        }
    }
}

TEST_CASE("g and g_inv round-trip to 1e-10 relative") {
    for (const auto& f : family_fixtures()) {
        for (double x : x_grid()) {
            if (x > f.xmax) continue;
            double t = f.g.g(x);
            CHECK(testkit::rel_err(f.g.g_inv(t), x) < 1e-10);
            CHECK(testkit::rel_err(f.g.g(f.g.g_inv(t)), t) < 1e-10);
        }
    }
}

TEST_CASE("lambda matches the derivative of g_inv") {
    for (const auto& f : family_fixtures()) {
        for (double x : x_grid()) {
            if (x > f.xmax) continue;
            double t = f.g.g(x);
            if (t < 1e-3) continue;
            double h = 1e-6 * t;
            double fd = (f.g.g_inv(t + h) - f.g.g_inv(t - h)) / (2.0 * h);
            CHECK(testkit::rel_err(f.g.lambda(t), fd) < 1e-6);
        }
    }
}

TEST_CASE("chain rule lambda(g(x)) * g'(x) = 1") {
    for (const auto& f : family_fixtures()) {
        for (double x : x_grid()) {
            if (x > f.xmax) continue;
            CHECK(f.g.lambda(f.g.g(x)) * f.g.g_prime(x) ==
                  doctest::Approx(1.0).epsilon(1e-9));
        }
    }
}

TEST_CASE("log_lambda agrees with log(lambda) and survives overflow") {
    for (const auto& f : family_fixtures()) {
        for (double t : {0.5, 3.0, 20.0}) {
            CHECK(f.g.log_lambda(t) ==
                  doctest::Approx(std::log(f.g.lambda(t))).epsilon(1e-12));
        }
    }
    auto gl = InhomogeneityTransform::gompertz_log(0.2);
    CHECK(std::isinf(gl.lambda(5000.0)));
    CHECK(gl.log_lambda(5000.0) == doctest::Approx(1000.0));
}

TEST_CASE("factories reject non-positive parameters") {
    CHECK(error_code_of([] { InhomogeneityTransform::power_weibull(0.0); }) ==
          ErrorCode::InvalidArgument);
    CHECK(error_code_of([] { InhomogeneityTransform::pareto_exp(-1.0); }) ==
          ErrorCode::InvalidArgument);
    CHECK(error_code_of([] {
        InhomogeneityTransform::gompertz_log(std::nan(""));
    }) == ErrorCode::InvalidArgument);
}

TEST_CASE("custom registration accepts a consistent quadruple") {
    auto doubled = InhomogeneityTransform::custom(
        "doubled", [](double x) { return 2.0 * x; },
        [](double t) { return 0.5 * t; }, [](double) { return 0.5; },
        [](double) { return 2.0; });
    CHECK(doubled.family() == TransformFamily::Custom);
    CHECK(doubled.g(3.0) == doctest::Approx(6.0));
    CHECK(doubled.g_inv(6.0) == doctest::Approx(3.0));
    CHECK(doubled.log_lambda(1.0) == doctest::Approx(std::log(0.5)));
}

TEST_CASE("custom registration rejects each broken contract") {
    auto lin = [](double x) { return x; };
    auto one = [](double) { return 1.0; };

    CHECK(error_code_of([&] {
        InhomogeneityTransform::custom("offset", [](double x) { return x + 1.0; },
                                       lin, one, one);
    }) == ErrorCode::InvalidArgument);

    CHECK(error_code_of([&] {
        InhomogeneityTransform::custom("decreasing", [](double x) { return -x; },
                                       lin, one, one);
    }) == ErrorCode::InvalidArgument);

    CHECK(error_code_of([&] {
        InhomogeneityTransform::custom("bad-inverse", lin,
                                       [](double t) { return 1.1 * t; }, one, one);
    }) == ErrorCode::InvalidArgument);

    CHECK(error_code_of([&] {
        InhomogeneityTransform::custom("bad-lambda", lin, lin,
                                       [](double) { return 2.0; }, one);
    }) == ErrorCode::InvalidArgument);

    CHECK(error_code_of([&] {
        InhomogeneityTransform::custom("bad-chain", lin, lin, one,
                                       [](double) { return 3.0; });
    }) == ErrorCode::InvalidArgument);

    CHECK(error_code_of([&] {
        InhomogeneityTransform::custom("missing", nullptr, lin, one, one);
    }) == ErrorCode::InvalidArgument);
}
