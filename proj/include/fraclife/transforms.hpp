#pragma once

#include <functional>
#include <string>

#include "fraclife/errors.hpp"

namespace fraclife {

enum class TransformFamily {
    Identity,
    PowerWeibull,  // g(x) = x^(1/theta)
    ParetoExp,     // g(x) = beta * (e^x - 1)
    GompertzLog,   // g(x) = log(kappa * x + 1) / kappa
    Custom,
};

// Strictly increasing clock change t = g(x) with g(0) = 0, mapping the
// operational time x of the underlying jump process to observed time t.
// lambda(t) = d g^{-1}/dt is the local speed of operational time and is the
// intensity multiplier appearing in every density and hazard.
class InhomogeneityTransform {
public:
    static InhomogeneityTransform identity();
    static InhomogeneityTransform power_weibull(double theta);
    static InhomogeneityTransform pareto_exp(double beta);
    static InhomogeneityTransform gompertz_log(double kappa);

    /// Registers a user-defined clock as a (g, g_inv, lambda, g_prime)
    /// quadruple.  Registration checks, on a grid: g(0) = 0 and strict
    /// growth; the g/g_inv round trip to 1e-10 relative; lambda > 0 and
    /// agreement with a central finite difference of g_inv to 1e-6 relative;
    /// and the chain-rule identity lambda(g(x)) * g_prime(x) = 1.  Throws
    /// Error(InvalidArgument) naming the first failing check.
    static InhomogeneityTransform custom(std::string name,
                                         std::function<double(double)> g,
                                         std::function<double(double)> g_inv,
                                         std::function<double(double)> lambda,
                                         std::function<double(double)> g_prime);

    TransformFamily family() const { return family_; }
    double parameter() const { return param_; }
    const std::string& name() const { return name_; }

    double g(double x) const;
    double g_inv(double t) const;
    /// d g^{-1}/dt; may be 0 or +inf at t = 0 for non-identity families.
    double lambda(double t) const;
    double g_prime(double x) const;
    /// log(lambda(t)) in closed form where possible; stays finite for
    /// fast-growing clocks long after lambda itself overflows.
    double log_lambda(double t) const;

private:
    InhomogeneityTransform(TransformFamily family, double param, std::string name);

    TransformFamily family_;
    double param_ = 0.0;
    std::string name_;
    std::function<double(double)> custom_g_;
    std::function<double(double)> custom_g_inv_;
    std::function<double(double)> custom_lambda_;
    std::function<double(double)> custom_g_prime_;
};

} // namespace fraclife
