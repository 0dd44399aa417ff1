#pragma once

#include <Eigen/Dense>
#include <limits>
#include <vector>

#include "fraclife/distributions.hpp"

namespace fraclife {

inline constexpr double kInfiniteHorizon = std::numeric_limits<double>::infinity();

// Payment schedule of a life contract over the p transient states.  Rates
// accrue while sojourning; lump sums are paid at transition instants.
struct Contract {
    Eigen::VectorXd a;  // annuity rates per state
    Eigen::VectorXd c;  // premium rates per state
    Eigen::MatrixXd B;  // lump sums at internal transitions, zero diagonal
    Eigen::VectorXd b;  // lump sums at death from each state
    double r = 0.0;     // constant force of interest
    double horizon = kInfiniteHorizon;
};

/// Throws Error(InvalidArgument) unless all payment blocks are finite with
/// dimension p, B has an exactly zero diagonal, r >= 0, horizon > 0, and
/// r > 0 whenever the horizon is infinite.
void validate_contract(const Contract& k, Eigen::Index p);

enum class ReserveMethod { SpectralClosedForm, Quadrature, DualLaplace, FractionalQuadrature };

const char* reserve_method_name(ReserveMethod m);

// Evaluation path request.  Auto prefers the spectral route and falls back to
// direct quadrature when the eigenbasis is ill-conditioned; the forced
// choices exist for cross-validation and for the CLI --method flag.
enum class ReservePath { Auto, Spectral, Quadrature };

struct ReserveReport {
    double value = 0.0;
    double annuity_component = 0.0;
    double lump_component = 0.0;
    ReserveMethod method = ReserveMethod::Quadrature;
    double quadrature_error_estimate = 0.0;
};

/// Prospective reserve at time t for the Markov (alpha = 1) case under an
/// arbitrary clock transform, conditional on the state distribution `state`.
/// Throws HorizonBeforeT when t >= horizon, FallbackRequired when the
/// spectral path is forced on an ill-conditioned model, and
/// QuadratureUnconverged when the integrals fail to settle.
ReserveReport reserve_markov(const PhaseModel& model, const InhomogeneityTransform& g,
                             const Contract& k, double t,
                             const Eigen::RowVectorXd& state,
                             ReservePath path = ReservePath::Auto);
ReserveReport reserve_markov(const PhaseModel& model, const InhomogeneityTransform& g,
                             const Contract& k, double t, Eigen::Index state,
                             ReservePath path = ReservePath::Auto);

/// Time-0 reserve for an infinite-horizon contract through the dual-density
/// route: the annuity term integrates the operational-time density
/// r*exp(-r g(u))*g'(u) against exp(T u), the lump term integrates the
/// discounted transition kernel on the observed scale.  Numerically
/// independent of reserve_markov, which it must reproduce.
ReserveReport reserve_time0_dual(const PhaseModel& model, const InhomogeneityTransform& g,
                                 const Contract& k);

/// E_a(t) = integral_1^inf exp(-t v) v^(-a) dv for t > 0, by adaptive
/// quadrature after v = 1 + s/t; relative target 1e-9.
double generalized_exp_integral(double a, double t);

/// Matrix order: spectral application of a -> E_a(t) over the order matrix;
/// series-free fallback integrates v^(-A) = exp(-log(v) A) directly.
Eigen::MatrixXd generalized_exp_integral(const Eigen::MatrixXd& a, double t);

/// Matrix argument: spectral application of t -> E_a(t) over M, whose
/// eigenvalues must have positive real part.
Eigen::MatrixXd generalized_exp_integral_at(double a, const Eigen::MatrixXd& M);

/// Closed-form time-0 reserve for the exponential clock g(x) = beta(e^x - 1)
/// (absorption times are matrix-Pareto): exp(r beta) times
/// beta E_{-T}(r beta)(a - c) plus E_{I-T}(r beta) applied to the lump
/// vector.  Horizon must be infinite.
ReserveReport reserve_closed_pareto(const PhaseModel& model, double beta,
                                    const Contract& k);

/// Closed-form time-0 reserve for the logarithmic clock
/// g(x) = log(kappa x + 1)/kappa (absorption times are matrix-Gompertz):
/// kappa^{-1} exp(-T/kappa) { E_{r/kappa+1}(-T/kappa)(a - c)
/// + E_{r/kappa}(-T/kappa) lump }.  Horizon must be infinite.
ReserveReport reserve_closed_gompertz(const PhaseModel& model, double kappa,
                                      const Contract& k);

/// Conditional reserve at observed time t for the fractional clock, given
/// the running subordinator value u (operational scale, so the state is
/// frozen until observed time g(u)) and the inverse-subordinator value v
/// with state distribution `state`.  Throws InconsistentConditioning when
/// g(u) < t.
ReserveReport reserve_fractional_conditional(const PhaseModel& model,
                                             const InhomogeneityTransform& g,
                                             const FractionalClock& clock,
                                             const Contract& k, double t, double u,
                                             double v, const Eigen::RowVectorXd& state);
ReserveReport reserve_fractional_conditional(const PhaseModel& model,
                                             const InhomogeneityTransform& g,
                                             const FractionalClock& clock,
                                             const Contract& k, double t, double u,
                                             double v, Eigen::Index state);

/// Fractional time-0 reserve of an infinite-horizon contract through the
/// generalized dual transforms; numerically independent of
/// reserve_fractional_conditional(t = u = v = 0).
ReserveReport reserve_fractional_time0(const PhaseModel& model,
                                       const InhomogeneityTransform& g,
                                       const FractionalClock& clock, const Contract& k);

/// Premium rate vector making the time-0 reserve vanish, supported on
/// `collectible` states and proportional to `profile` (uniform on the
/// collectible states when empty).  The premium field of `k` is ignored.
/// Throws Unfundable when the achievable premium direction carries no
/// discounted occupancy.
Eigen::VectorXd fair_premium(const PhaseModel& model, const InhomogeneityTransform& g,
                             const FractionalClock& clock, const Contract& k,
                             const std::vector<Eigen::Index>& collectible,
                             const Eigen::VectorXd& profile = Eigen::VectorXd());

struct LiabilityPoint {
    double alpha = 1.0;
    double n = 0.0;
    double value = 0.0;
};

/// Expected discounted liabilities (premiums must be zero) over a grid of
/// fractional exponents and horizons, each cell a time-0 reserve.
std::vector<LiabilityPoint> liability_curve(const PhaseModel& model,
                                            const InhomogeneityTransform& g,
                                            const Contract& k,
                                            const std::vector<double>& alphas,
                                            const std::vector<double>& n_grid);

} // namespace fraclife
