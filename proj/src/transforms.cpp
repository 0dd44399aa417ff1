#include "fraclife/transforms.hpp"

#include <cmath>
#include <sstream>
#include <utility>
#include <vector>

namespace fraclife {

namespace {

double rel_gap(double got, double want) {
    return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

} // namespace

InhomogeneityTransform::InhomogeneityTransform(TransformFamily family, double param,
                                               std::string name)
    : family_(family), param_(param), name_(std::move(name)) {}

InhomogeneityTransform InhomogeneityTransform::identity() {
    return {TransformFamily::Identity, 0.0, "identity"};
}

InhomogeneityTransform InhomogeneityTransform::power_weibull(double theta) {
    if (!std::isfinite(theta) || theta <= 0.0)
        throw Error(ErrorCode::InvalidArgument, "power-weibull requires theta > 0");
    return {TransformFamily::PowerWeibull, theta, "power-weibull"};
}

InhomogeneityTransform InhomogeneityTransform::pareto_exp(double beta) {
    if (!std::isfinite(beta) || beta <= 0.0)
        throw Error(ErrorCode::InvalidArgument, "pareto-exp requires beta > 0");
    return {TransformFamily::ParetoExp, beta, "pareto-exp"};
}

InhomogeneityTransform InhomogeneityTransform::gompertz_log(double kappa) {
    if (!std::isfinite(kappa) || kappa <= 0.0)
        throw Error(ErrorCode::InvalidArgument, "gompertz-log requires kappa > 0");
    return {TransformFamily::GompertzLog, kappa, "gompertz-log"};
}

double InhomogeneityTransform::g(double x) const {
    switch (family_) {
        case TransformFamily::Identity: return x;
        case TransformFamily::PowerWeibull: return std::pow(x, 1.0 / param_);
        case TransformFamily::ParetoExp: return param_ * std::expm1(x);
        case TransformFamily::GompertzLog: return std::log1p(param_ * x) / param_;
        case TransformFamily::Custom: return custom_g_(x);
    }
    return x;
}

double InhomogeneityTransform::g_inv(double t) const {
    switch (family_) {
        case TransformFamily::Identity: return t;
        case TransformFamily::PowerWeibull: return std::pow(t, param_);
        case TransformFamily::ParetoExp: return std::log1p(t / param_);
        case TransformFamily::GompertzLog: return std::expm1(param_ * t) / param_;
        case TransformFamily::Custom: return custom_g_inv_(t);
    }
    return t;
}

double InhomogeneityTransform::lambda(double t) const {
    switch (family_) {
        case TransformFamily::Identity: return 1.0;
        case TransformFamily::PowerWeibull: return param_ * std::pow(t, param_ - 1.0);
        case TransformFamily::ParetoExp: return 1.0 / (param_ + t);
        case TransformFamily::GompertzLog: return std::exp(param_ * t);
        case TransformFamily::Custom: return custom_lambda_(t);
    }
    return 1.0;
}

double InhomogeneityTransform::g_prime(double x) const {
    switch (family_) {
        case TransformFamily::Identity: return 1.0;
        case TransformFamily::PowerWeibull:
            return std::pow(x, 1.0 / param_ - 1.0) / param_;
        case TransformFamily::ParetoExp: return param_ * std::exp(x);
        case TransformFamily::GompertzLog: return 1.0 / (param_ * x + 1.0);
        case TransformFamily::Custom: return custom_g_prime_(x);
    }
    return 1.0;
}

double InhomogeneityTransform::log_lambda(double t) const {
    switch (family_) {
        case TransformFamily::Identity: return 0.0;
        case TransformFamily::PowerWeibull:
            return std::log(param_) + (param_ - 1.0) * std::log(t);
        case TransformFamily::ParetoExp: return -std::log(param_ + t);
        case TransformFamily::GompertzLog: return param_ * t;
        case TransformFamily::Custom: return std::log(custom_lambda_(t));
    }
    return 0.0;
}

InhomogeneityTransform InhomogeneityTransform::custom(
    std::string name, std::function<double(double)> g,
    std::function<double(double)> g_inv, std::function<double(double)> lambda,
    std::function<double(double)> g_prime) {
    if (!g || !g_inv || !lambda || !g_prime)
        throw Error(ErrorCode::InvalidArgument,
                    "custom transform requires all four callables");

    auto fail = [&name](const char* what, double where) {
        std::ostringstream os;
        os << "custom transform '" << name << "': " << what << " (near " << where
           << ")";
        throw Error(ErrorCode::InvalidArgument, os.str());
    };

    if (!(std::abs(g(0.0)) <= 1e-12)) fail("g(0) must be 0", 0.0);

    // Log-spaced operational-time grid, 1e-6 .. 1e2.
    std::vector<double> xs;
    for (int i = 0; i <= 48; ++i) xs.push_back(std::pow(10.0, -6.0 + i / 6.0));

    double prev = 0.0;
    for (double x : xs) {
        double gx = g(x);
        if (!std::isfinite(gx) || gx <= prev) fail("g must be strictly increasing", x);
        prev = gx;
    }

    for (double x : xs) {
        double t = g(x);
        if (rel_gap(g(g_inv(t)), t) > 1e-10)
            fail("g(g_inv(t)) must reproduce t to 1e-10 relative", t);

        double lam = lambda(t);
        if (!std::isfinite(lam) || lam <= 0.0) fail("lambda must be positive", t);
        if (rel_gap(lam * g_prime(x), 1.0) > 1e-6)
            fail("lambda(g(x)) * g_prime(x) must equal 1", x);

        if (t >= 1e-3) {
            double h = 6e-6 * t;
            double fd = (g_inv(t + h) - g_inv(t - h)) / (2.0 * h);
            if (rel_gap(lam, fd) > 1e-6)
                fail("lambda must match d g_inv/dt to 1e-6 relative", t);
        }
    }

    InhomogeneityTransform out(TransformFamily::Custom, 0.0, std::move(name));
    out.custom_g_ = std::move(g);
    out.custom_g_inv_ = std::move(g_inv);
    out.custom_lambda_ = std::move(lambda);
    out.custom_g_prime_ = std::move(g_prime);
    return out;
}

} // namespace fraclife
