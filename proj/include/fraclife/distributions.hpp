#pragma once

#include <Eigen/Dense>
#include <functional>

#include "fraclife/errors.hpp"
#include "fraclife/matrix_core.hpp"
#include "fraclife/mittag_leffler.hpp"
#include "fraclife/rng.hpp"
#include "fraclife/transforms.hpp"

namespace fraclife {

// Initial distribution plus transient generator block.  pi is a probability
// vector over the transient states; starting in the absorbing state is
// excluded, so the entries must sum to 1.
class PhaseModel {
public:
    const Eigen::RowVectorXd& pi() const { return pi_; }
    const SubIntensity& T() const { return T_; }
    Eigen::Index dim() const { return T_.dim(); }

    friend PhaseModel make_phase_model(const Eigen::RowVectorXd&, SubIntensity);

private:
    PhaseModel(Eigen::RowVectorXd pi, SubIntensity T);

    Eigen::RowVectorXd pi_;
    SubIntensity T_;
};

/// Validates pi (entries >= 0, sum 1 within 1e-12, length matching T) and
/// throws Error(InvalidArgument) on violations.
PhaseModel make_phase_model(const Eigen::RowVectorXd& pi, SubIntensity T);

// Fractional time dilation.  alpha = 1 is the ordinary clock; alpha < 1 runs
// the jump process on an inverse-stable subordinated clock, which thickens
// both tails of every absorption-time law.
class FractionalClock {
public:
    explicit FractionalClock(double alpha = 1.0);
    double alpha() const { return alpha_; }
    bool fractional() const { return alpha_ < 1.0; }

private:
    double alpha_;
};

// Density evaluation result.  For alpha < 1 the density carries an integrable
// x -> 0 singularity through the g_inv(x)^(alpha-1) prefactor; evaluations in
// that zone are flagged rather than rejected.
struct DensityValue {
    double value = 0.0;
    bool singular_at_zero = false;
};

/// P(lifetime <= x).
double iph_cdf(const PhaseModel& model, const InhomogeneityTransform& g,
               const FractionalClock& clock, double x);

/// P(lifetime > x), computed directly (no 1-cdf cancellation in the tail).
double iph_survival(const PhaseModel& model, const InhomogeneityTransform& g,
                    const FractionalClock& clock, double x);

/// Lifetime density at x > 0.  Flags singular_at_zero when alpha < 1 and
/// g_inv(x) < 1e-6 (value dominated by the integrable left-edge singularity).
DensityValue iph_pdf(const PhaseModel& model, const InhomogeneityTransform& g,
                     const FractionalClock& clock, double x);

/// pdf / survival.  Throws Error(TailExhausted) once survival underflows.
double hazard(const PhaseModel& model, const InhomogeneityTransform& g,
              const FractionalClock& clock, double x);

/// -log survival.  Throws Error(TailExhausted) once survival underflows.
double cumulative_hazard(const PhaseModel& model, const InhomogeneityTransform& g,
                         const FractionalClock& clock, double x);

/// Density r * exp(-r g(u)) * g'(u) of the observed-time exponential clock
/// read on the operational scale.
double dual_density_h1(const InhomogeneityTransform& g, double r, double u);

/// Density w * exp(-w g_inv(u)) * lambda(u), the operational-time exponential
/// clock read on the observed scale.
double dual_density_h2(const InhomogeneityTransform& g, double w, double u);

/// One draw of the standard one-sided stable law with Laplace transform
/// exp(-s^alpha).  Requires alpha in (0, 1); the alpha = 1 limit is the
/// constant 1 and callers bypass the subordinator entirely, so it is
/// rejected with Error(InvalidArgument).
double sample_one_sided_stable(double alpha, RngStream& rng);

/// One lifetime draw: embedded-chain absorption time with exponential
/// sojourns, stable-dilated when alpha < 1, then mapped through g.
double sample_lifetime(const PhaseModel& model, const InhomogeneityTransform& g,
                       const FractionalClock& clock, RngStream& rng);

/// E[h(lifetime)] by adaptive quadrature against the density, written on the
/// s = g_inv(x)^alpha scale so the left-edge singularity drops out.  Relative
/// target 1e-7.  Throws Error(Diverged) when the integral fails to settle
/// (heavy tails with no mean land here).
double expectation(const PhaseModel& model, const InhomogeneityTransform& g,
                   const FractionalClock& clock,
                   const std::function<double(double)>& h);

} // namespace fraclife
