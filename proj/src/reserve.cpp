#include "fraclife/reserve.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "fraclife/errors.hpp"
#include "fraclife/matrix_core.hpp"
#include "fraclife/mittag_leffler.hpp"
#include "fraclife/quadrature.hpp"

namespace fraclife {
namespace {

using Cx = std::complex<double>;

constexpr QuadOptions kTermOpts{1e-10, 1e-14, 4096};
constexpr QuadOptions kSingularOpts{1e-9, 1e-14, 8192};
constexpr QuadOptions kGeiOpts{1e-11, 1e-16, 4096};

// (T o B) e + t o b: expected lump paid at the next jump out of each state.
Eigen::VectorXd lump_vector(const PhaseModel& model, const Contract& k) {
    const SubIntensity& T = model.T();
    return T.matrix().cwiseProduct(k.B).rowwise().sum() +
           T.exit_vector().cwiseProduct(k.b);
}

double discount(double r, double dt) {
    if (dt <= 0.0) return 1.0;
    const double e = r * dt;
    if (!(e < 745.0)) return 0.0;
    return std::exp(-e);
}

// exp(shift + lambda * d); zero once the real part underflows, so an infinite
// d cannot reach the imaginary part as 0 * inf.
Cx shifted_exp(Cx lambda, double d, double shift = 0.0) {
    const double re = shift + lambda.real() * d;
    if (!(re > -745.0)) return Cx(0.0, 0.0);
    return std::exp(Cx(shift, 0.0) + lambda * d);
}

// E_{alpha,beta}(lambda * s) with the exponential shortcut at alpha = 1.
Cx ml_kernel(double alpha, double beta, Cx lambda, double s) {
    if (!std::isfinite(s)) return Cx(0.0, 0.0);
    if (alpha == 1.0 && beta == 1.0) return shifted_exp(lambda, s);
    return ml_scalar(MlParams(alpha, beta), lambda * s);
}

double abs_sum(const std::vector<Cx>& c) {
    double s = 0.0;
    for (const Cx& v : c) s += std::abs(v);
    return s;
}

double combine(const std::vector<Cx>& c, const Eigen::VectorXcd& nodes) {
    Cx s(0.0, 0.0);
    for (std::size_t i = 0; i < c.size(); ++i) s += c[i] * nodes[Eigen::Index(i)];
    return s.real();
}

void check_state(const Eigen::RowVectorXd& state, Eigen::Index p) {
    if (state.size() != p)
        throw Error(ErrorCode::InvalidArgument,
                    "state distribution must have one entry per transient state");
    if (!state.allFinite())
        throw Error(ErrorCode::InvalidArgument, "state distribution must be finite");
}

Eigen::RowVectorXd unit_row(Eigen::Index p, Eigen::Index i) {
    if (i < 0 || i >= p)
        throw Error(ErrorCode::InvalidArgument, "state index out of range");
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(p);
    row[i] = 1.0;
    return row;
}

void check_time(double t) {
    if (!(t >= 0.0) || !std::isfinite(t))
        throw Error(ErrorCode::InvalidArgument,
                    "valuation time must be finite and non-negative");
}

// e^z E_a(z) = (1/q) int_0^inf exp(-(z/q) s - a log1p(s/q)) ds with q = Re z;
// the scaling keeps the integrand O(e^{-s}) for every argument size.
Cx gei_scaled_kernel(Cx a, Cx z) {
    const double q = z.real();
    if (!(q > 0.0) || !std::isfinite(q))
        throw Error(ErrorCode::InvalidArgument,
                    "exp-integral argument needs a positive finite real part");
    auto f = [&](double s) -> Cx {
        const Cx expo = -(z / q) * s - a * std::log1p(s / q);
        if (!(expo.real() > -745.0)) return Cx(0.0, 0.0);
        return std::exp(expo);
    };
    const auto out = gk_integrate_to_infinity(f, 0.0, kGeiOpts);
    if (!out.converged)
        throw Error(ErrorCode::QuadratureUnconverged,
                    "exp-integral quadrature did not converge");
    return out.value / q;
}

Cx gei_kernel(Cx a, Cx z) {
    const Cx scaled = gei_scaled_kernel(a, z);
    if (!(z.real() < 745.0)) return Cx(0.0, 0.0);
    return std::exp(-z) * scaled;
}

// P diag(f(eig)) P^{-1} with an imaginary-residue gate; *ok reports whether
// the truncation was safe.
template <typename F>
Eigen::MatrixXd spectral_apply(const SpectralDecomposition& sd, F&& f, bool* ok) {
    const Eigen::Index p = sd.eigenvalues.size();
    Eigen::VectorXcd d(p);
    for (Eigen::Index i = 0; i < p; ++i) d[i] = f(sd.eigenvalues[i]);
    const Eigen::MatrixXcd out = sd.P * d.asDiagonal() * sd.P_inv;
    const double resid = out.imag().cwiseAbs().maxCoeff();
    const double scale = out.real().cwiseAbs().maxCoeff();
    *ok = d.allFinite() && resid <= 1e-8 * (1.0 + scale);
    return out.real();
}

ReserveReport engine_markov(const PhaseModel& model, const InhomogeneityTransform& g,
                            const Contract& k, double t, const Eigen::RowVectorXd& state,
                            ReservePath path) {
    const Eigen::Index p = model.dim();
    validate_contract(k, p);
    check_state(state, p);
    check_time(t);
    if (!(t < k.horizon))
        throw Error(ErrorCode::HorizonBeforeT, "horizon does not exceed the valuation time");

    const double r = k.r;
    const double yt = g.g_inv(t);
    const double yn = std::isinf(k.horizon) ? kInfiniteHorizon : g.g_inv(k.horizon);
    const Eigen::VectorXd pay1 = k.a - k.c;
    const Eigen::VectorXd pay2 = lump_vector(model, k);

    const SpectralDecomposition& sd = model.T().spectral();
    if (path == ReservePath::Spectral && !sd.well_conditioned)
        throw Error(ErrorCode::FallbackRequired,
                    "eigenbasis too ill-conditioned for the spectral method; "
                    "rerun with the quadrature method");
    const bool spectral = path != ReservePath::Quadrature && sd.well_conditioned;

    ReserveReport rep;
    rep.method = spectral ? ReserveMethod::SpectralClosedForm : ReserveMethod::Quadrature;

    if (spectral) {
        const Eigen::VectorXcd& eig = sd.eigenvalues;
        const std::vector<Cx> c1 = bilinear_coefficients(state, sd, pay1);
        const std::vector<Cx> c2 = bilinear_coefficients(state, sd, pay2);
        const double w1 = abs_sum(c1);
        const double w2 = abs_sum(c2);

        if (w1 > 0.0) {
            auto annuity_nodes = [&](double x) -> Eigen::VectorXcd {
                Eigen::VectorXcd out = Eigen::VectorXcd::Zero(p);
                const double disc = discount(r, x - t);
                if (disc == 0.0) return out;
                const double d = std::max(0.0, g.g_inv(x) - yt);
                for (Eigen::Index i = 0; i < p; ++i) out[i] = disc * shifted_exp(eig[i], d);
                return out;
            };
            const auto q = gk_integrate_left_anchored(annuity_nodes, t, k.horizon, kTermOpts);
            if (!q.converged)
                throw Error(ErrorCode::QuadratureUnconverged, "annuity term did not converge");
            rep.annuity_component = combine(c1, q.value);
            rep.quadrature_error_estimate += q.error * w1;
        }
        if (w2 > 0.0) {
            auto lump_nodes = [&](double y) -> Eigen::VectorXcd {
                Eigen::VectorXcd out = Eigen::VectorXcd::Zero(p);
                const double disc = discount(r, g.g(y) - t);
                if (disc == 0.0) return out;
                const double d = std::max(0.0, y - yt);
                for (Eigen::Index i = 0; i < p; ++i) out[i] = disc * shifted_exp(eig[i], d);
                return out;
            };
            const auto q = gk_integrate_left_anchored(lump_nodes, yt, yn, kTermOpts);
            if (!q.converged)
                throw Error(ErrorCode::QuadratureUnconverged, "lump term did not converge");
            rep.lump_component = combine(c2, q.value);
            rep.quadrature_error_estimate += q.error * w2;
        }
    } else {
        const Eigen::MatrixXd& Tm = model.T().matrix();
        if (pay1.lpNorm<1>() > 0.0) {
            auto occupancy_row = [&](double x) -> Eigen::RowVectorXd {
                const double disc = discount(r, x - t);
                if (disc == 0.0) return Eigen::RowVectorXd::Zero(p);
                const double d = std::max(0.0, g.g_inv(x) - yt);
                if (!std::isfinite(d)) return Eigen::RowVectorXd::Zero(p);
                return disc * (state * matrix_exp(Tm * d)).eval();
            };
            const auto q = gk_integrate_left_anchored(occupancy_row, t, k.horizon, kTermOpts);
            if (!q.converged)
                throw Error(ErrorCode::QuadratureUnconverged, "annuity term did not converge");
            rep.annuity_component = q.value.dot(pay1);
            rep.quadrature_error_estimate += q.error * pay1.lpNorm<1>();
        }
        if (pay2.lpNorm<1>() > 0.0) {
            auto jump_row = [&](double y) -> Eigen::RowVectorXd {
                const double disc = discount(r, g.g(y) - t);
                if (disc == 0.0) return Eigen::RowVectorXd::Zero(p);
                const double d = std::max(0.0, y - yt);
                if (!std::isfinite(d)) return Eigen::RowVectorXd::Zero(p);
                return disc * (state * matrix_exp(Tm * d)).eval();
            };
            const auto q = gk_integrate_left_anchored(jump_row, yt, yn, kTermOpts);
            if (!q.converged)
                throw Error(ErrorCode::QuadratureUnconverged, "lump term did not converge");
            rep.lump_component = q.value.dot(pay2);
            rep.quadrature_error_estimate += q.error * pay2.lpNorm<1>();
        }
    }
    rep.value = rep.annuity_component + rep.lump_component;
    return rep;
}

ReserveReport engine_frac(const PhaseModel& model, const InhomogeneityTransform& g,
                          double alpha, const Contract& k, double t, double u,
                          const Eigen::RowVectorXd& state) {
    const Eigen::Index p = model.dim();
    validate_contract(k, p);
    check_state(state, p);
    check_time(t);
    if (!(u >= 0.0) || !std::isfinite(u))
        throw Error(ErrorCode::InvalidArgument,
                    "subordinator value must be finite and non-negative");
    if (!(t < k.horizon))
        throw Error(ErrorCode::HorizonBeforeT, "horizon does not exceed the valuation time");

    const double freeze_end = g.g(u);
    if (freeze_end < t - 1e-12 * std::max(1.0, std::abs(t)))
        throw Error(ErrorCode::InconsistentConditioning,
                    "subordinator value places the frozen interval before the valuation time");

    const double r = k.r;
    const double n = k.horizon;
    const double xb = std::max(freeze_end, t);
    const Eigen::VectorXd pay1 = k.a - k.c;
    const Eigen::VectorXd pay2 = lump_vector(model, k);

    ReserveReport rep;
    rep.method = ReserveMethod::FractionalQuadrature;

    // While the operational clock is stuck below u the state cannot move, so
    // annuities accrue deterministically and no lump can fall due.
    const double bridge_len = std::max(0.0, std::min(xb, n) - t);
    const double bridge = r > 0.0 ? -std::expm1(-r * bridge_len) / r : bridge_len;
    rep.annuity_component = bridge * state.dot(pay1);

    if (xb < n) {
        const double sn = std::isinf(n)
                              ? kInfiniteHorizon
                              : std::pow(std::max(0.0, g.g_inv(n) - u), alpha);
        const SpectralDecomposition& sd = model.T().spectral();
        if (sd.well_conditioned) {
            const Eigen::VectorXcd& eig = sd.eigenvalues;
            const std::vector<Cx> c1 = bilinear_coefficients(state, sd, pay1);
            const std::vector<Cx> c2 = bilinear_coefficients(state, sd, pay2);
            const double w1 = abs_sum(c1);
            const double w2 = abs_sum(c2);

            if (w1 > 0.0) {
                auto annuity_nodes = [&](double x) -> Eigen::VectorXcd {
                    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(p);
                    const double disc = discount(r, x - t);
                    if (disc == 0.0) return out;
                    const double d = std::max(0.0, g.g_inv(x) - u);
                    const double s = std::pow(d, alpha);
                    for (Eigen::Index i = 0; i < p; ++i)
                        out[i] = disc * ml_kernel(alpha, 1.0, eig[i], s);
                    return out;
                };
                const auto q = gk_integrate_left_anchored(annuity_nodes, xb, n, kTermOpts);
                if (!q.converged)
                    throw Error(ErrorCode::QuadratureUnconverged, "annuity term did not converge");
                rep.annuity_component += combine(c1, q.value);
                rep.quadrature_error_estimate += q.error * w1;
            }
            if (w2 > 0.0) {
                auto lump_nodes = [&](double s) -> Eigen::VectorXcd {
                    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(p);
                    const double x = g.g(u + std::pow(s, 1.0 / alpha));
                    const double disc = discount(r, x - t);
                    if (disc == 0.0) return out;
                    for (Eigen::Index i = 0; i < p; ++i)
                        out[i] = disc * ml_kernel(alpha, alpha, eig[i], s);
                    return out;
                };
                const auto q = gk_integrate_left_anchored(lump_nodes, 0.0, sn, kTermOpts);
                if (!q.converged)
                    throw Error(ErrorCode::QuadratureUnconverged, "lump term did not converge");
                rep.lump_component = combine(c2, q.value) / alpha;
                rep.quadrature_error_estimate += q.error * w2 / alpha;
            }
        } else {
            const SubIntensity& T = model.T();
            if (pay1.lpNorm<1>() > 0.0) {
                auto occupancy_row = [&](double x) -> Eigen::RowVectorXd {
                    const double disc = discount(r, x - t);
                    if (disc == 0.0) return Eigen::RowVectorXd::Zero(p);
                    const double d = std::max(0.0, g.g_inv(x) - u);
                    if (!std::isfinite(d)) return Eigen::RowVectorXd::Zero(p);
                    return disc * (state * ml_matrix(MlParams(alpha, 1.0), T, d)).eval();
                };
                const auto q = gk_integrate_left_anchored(occupancy_row, xb, n, kTermOpts);
                if (!q.converged)
                    throw Error(ErrorCode::QuadratureUnconverged, "annuity term did not converge");
                rep.annuity_component += q.value.dot(pay1);
                rep.quadrature_error_estimate += q.error * pay1.lpNorm<1>();
            }
            if (pay2.lpNorm<1>() > 0.0) {
                auto jump_row = [&](double s) -> Eigen::RowVectorXd {
                    const double scale = std::pow(s, 1.0 / alpha);
                    if (!std::isfinite(scale)) return Eigen::RowVectorXd::Zero(p);
                    const double x = g.g(u + scale);
                    const double disc = discount(r, x - t);
                    if (disc == 0.0) return Eigen::RowVectorXd::Zero(p);
                    return disc * (state * ml_matrix(MlParams(alpha, alpha), T, scale)).eval();
                };
                const auto q = gk_integrate_left_anchored(jump_row, 0.0, sn, kTermOpts);
                if (!q.converged)
                    throw Error(ErrorCode::QuadratureUnconverged, "lump term did not converge");
                rep.lump_component = q.value.dot(pay2) / alpha;
                rep.quadrature_error_estimate += q.error * pay2.lpNorm<1>() / alpha;
            }
        }
    }
    rep.value = rep.annuity_component + rep.lump_component;
    return rep;
}

} // namespace

void validate_contract(const Contract& k, Eigen::Index p) {
    if (k.a.size() != p || k.c.size() != p || k.b.size() != p)
        throw Error(ErrorCode::InvalidArgument,
                    "payment vectors must have one entry per transient state");
    if (k.B.rows() != p || k.B.cols() != p)
        throw Error(ErrorCode::InvalidArgument, "transition lump matrix must be p x p");
    if (!k.a.allFinite() || !k.c.allFinite() || !k.b.allFinite() || !k.B.allFinite())
        throw Error(ErrorCode::InvalidArgument, "payments must be finite");
    for (Eigen::Index i = 0; i < p; ++i)
        if (k.B(i, i) != 0.0)
            throw Error(ErrorCode::InvalidArgument,
                        "transition lump matrix must have a zero diagonal");
    if (!(k.r >= 0.0) || !std::isfinite(k.r))
        throw Error(ErrorCode::InvalidArgument, "interest rate must be finite and non-negative");
    if (!(k.horizon > 0.0))
        throw Error(ErrorCode::InvalidArgument, "horizon must be positive");
    if (std::isinf(k.horizon) && !(k.r > 0.0))
        throw Error(ErrorCode::InvalidArgument, "infinite horizon requires positive interest");
}

const char* reserve_method_name(ReserveMethod m) {
    switch (m) {
        case ReserveMethod::SpectralClosedForm: return "spectral-closed-form";
        case ReserveMethod::Quadrature: return "quadrature";
        case ReserveMethod::DualLaplace: return "dual-laplace";
        case ReserveMethod::FractionalQuadrature: return "fractional-quadrature";
    }
    return "unknown";
}

ReserveReport reserve_markov(const PhaseModel& model, const InhomogeneityTransform& g,
                             const Contract& k, double t, const Eigen::RowVectorXd& state,
                             ReservePath path) {
    return engine_markov(model, g, k, t, state, path);
}

ReserveReport reserve_markov(const PhaseModel& model, const InhomogeneityTransform& g,
                             const Contract& k, double t, Eigen::Index state,
                             ReservePath path) {
    return engine_markov(model, g, k, t, unit_row(model.dim(), state), path);
}

ReserveReport reserve_time0_dual(const PhaseModel& model, const InhomogeneityTransform& g,
                                 const Contract& k) {
    const Eigen::Index p = model.dim();
    validate_contract(k, p);
    if (!std::isinf(k.horizon))
        throw Error(ErrorCode::InvalidArgument, "dual route requires an infinite horizon");

    const double r = k.r;
    const Eigen::RowVectorXd& state = model.pi();
    const Eigen::VectorXd pay1 = k.a - k.c;
    const Eigen::VectorXd pay2 = lump_vector(model, k);
    const SpectralDecomposition& sd = model.T().spectral();

    ReserveReport rep;
    rep.method = ReserveMethod::DualLaplace;

    if (sd.well_conditioned) {
        const Eigen::VectorXcd& eig = sd.eigenvalues;
        const std::vector<Cx> c1 = bilinear_coefficients(state, sd, pay1);
        const std::vector<Cx> c2 = bilinear_coefficients(state, sd, pay2);
        const double w1 = abs_sum(c1);
        const double w2 = abs_sum(c2);

        if (w1 > 0.0) {
            auto annuity_nodes = [&](double u) -> Eigen::VectorXcd {
                Eigen::VectorXcd out = Eigen::VectorXcd::Zero(p);
                const double h1 = dual_density_h1(g, r, u);
                if (h1 == 0.0) return out;
                for (Eigen::Index i = 0; i < p; ++i) out[i] = h1 * shifted_exp(eig[i], u);
                return out;
            };
            const auto q = gk_integrate_to_infinity(annuity_nodes, 0.0, kTermOpts);
            if (!q.converged)
                throw Error(ErrorCode::QuadratureUnconverged, "annuity term did not converge");
            rep.annuity_component = combine(c1, q.value) / r;
            rep.quadrature_error_estimate += q.error * w1 / r;
        }
        if (w2 > 0.0) {
            auto lump_nodes = [&](double u) -> Eigen::VectorXcd {
                Eigen::VectorXcd out = Eigen::VectorXcd::Zero(p);
                const double d = g.g_inv(u);
                const double shift = -r * u + g.log_lambda(u);
                if (!std::isfinite(d) || !std::isfinite(shift)) return out;
                for (Eigen::Index i = 0; i < p; ++i)
                    out[i] = shifted_exp(eig[i], d, shift);
                return out;
            };
            const auto q = gk_integrate_to_infinity(lump_nodes, 0.0, kTermOpts);
            if (!q.converged)
                throw Error(ErrorCode::QuadratureUnconverged, "lump term did not converge");
            rep.lump_component = combine(c2, q.value);
            rep.quadrature_error_estimate += q.error * w2;
        }
    } else {
        const Eigen::MatrixXd& Tm = model.T().matrix();
        if (pay1.lpNorm<1>() > 0.0) {
            auto annuity_row = [&](double u) -> Eigen::RowVectorXd {
                const double h1 = dual_density_h1(g, r, u);
                if (h1 == 0.0) return Eigen::RowVectorXd::Zero(p);
                return h1 * (state * matrix_exp(Tm * u)).eval();
            };
            const auto q = gk_integrate_to_infinity(annuity_row, 0.0, kTermOpts);
            if (!q.converged)
                throw Error(ErrorCode::QuadratureUnconverged, "annuity term did not converge");
            rep.annuity_component = q.value.dot(pay1) / r;
            rep.quadrature_error_estimate += q.error * pay1.lpNorm<1>() / r;
        }
        if (pay2.lpNorm<1>() > 0.0) {
            auto lump_row = [&](double u) -> Eigen::RowVectorXd {
                const double d = g.g_inv(u);
                const double shift = -r * u + g.log_lambda(u);
                if (!std::isfinite(d) || !(shift > -745.0))
                    return Eigen::RowVectorXd::Zero(p);
                const Eigen::RowVectorXd row = state * matrix_exp(Tm * d);
                const double pref = std::exp(shift);
                // A non-finite prefactor can only pair with an underflowed row.
                if (!std::isfinite(pref) || row.cwiseAbs().maxCoeff() == 0.0)
                    return Eigen::RowVectorXd::Zero(p);
                return pref * row;
            };
            const auto q = gk_integrate_to_infinity(lump_row, 0.0, kTermOpts);
            if (!q.converged)
                throw Error(ErrorCode::QuadratureUnconverged, "lump term did not converge");
            rep.lump_component = q.value.dot(pay2);
            rep.quadrature_error_estimate += q.error * pay2.lpNorm<1>();
        }
    }
    rep.value = rep.annuity_component + rep.lump_component;
    return rep;
}

double generalized_exp_integral(double a, double t) {
    if (!std::isfinite(a))
        throw Error(ErrorCode::InvalidArgument, "exp-integral order must be finite");
    if (!(t > 0.0) || !std::isfinite(t))
        throw Error(ErrorCode::InvalidArgument, "exp-integral argument must be positive");
    return gei_kernel(Cx(a, 0.0), Cx(t, 0.0)).real();
}

Eigen::MatrixXd generalized_exp_integral(const Eigen::MatrixXd& a, double t) {
    if (a.rows() != a.cols() || a.rows() == 0)
        throw Error(ErrorCode::NonSquare, "exp-integral order matrix must be square");
    if (!(t > 0.0) || !std::isfinite(t))
        throw Error(ErrorCode::InvalidArgument, "exp-integral argument must be positive");
    const SpectralDecomposition sd = spectral_decompose(a);
    if (sd.well_conditioned) {
        bool ok = true;
        const Eigen::MatrixXd out =
            spectral_apply(sd, [&](Cx z) { return gei_kernel(z, Cx(t, 0.0)); }, &ok);
        if (ok) return out;
    }
    // v^{-A} = exp(-log(v) A) under v = 1 + s/t, which keeps the weight e^{-t-s}.
    const Eigen::Index p = a.rows();
    auto f = [&](double s) -> Eigen::MatrixXd {
        const double expo = -t - s;
        if (!(expo > -745.0)) return Eigen::MatrixXd::Zero(p, p);
        return (std::exp(expo) / t) * matrix_exp(-std::log1p(s / t) * a);
    };
    const auto q = gk_integrate_to_infinity(f, 0.0, kGeiOpts);
    if (!q.converged)
        throw Error(ErrorCode::QuadratureUnconverged,
                    "exp-integral quadrature did not converge");
    return q.value;
}

Eigen::MatrixXd generalized_exp_integral_at(double a, const Eigen::MatrixXd& M) {
    if (M.rows() != M.cols() || M.rows() == 0)
        throw Error(ErrorCode::NonSquare, "exp-integral argument matrix must be square");
    if (!std::isfinite(a))
        throw Error(ErrorCode::InvalidArgument, "exp-integral order must be finite");
    const SpectralDecomposition sd = spectral_decompose(M);
    double qmin = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < sd.eigenvalues.size(); ++i)
        qmin = std::min(qmin, sd.eigenvalues[i].real());
    if (!(qmin > 0.0))
        throw Error(ErrorCode::InvalidArgument,
                    "exp-integral argument matrix needs eigenvalues with positive real part");
    if (sd.well_conditioned) {
        bool ok = true;
        const Eigen::MatrixXd out =
            spectral_apply(sd, [&](Cx z) { return gei_kernel(Cx(a, 0.0), z); }, &ok);
        if (ok) return out;
    }
    const Eigen::Index p = M.rows();
    auto f = [&](double s) -> Eigen::MatrixXd {
        const double v = 1.0 + s / qmin;
        const Eigen::MatrixXd e = matrix_exp(-v * M);
        if (e.cwiseAbs().maxCoeff() == 0.0) return Eigen::MatrixXd::Zero(p, p);
        return (std::pow(v, -a) / qmin) * e;
    };
    const auto q = gk_integrate_to_infinity(f, 0.0, kGeiOpts);
    if (!q.converged)
        throw Error(ErrorCode::QuadratureUnconverged,
                    "exp-integral quadrature did not converge");
    return q.value;
}

ReserveReport reserve_closed_pareto(const PhaseModel& model, double beta,
                                    const Contract& k) {
    const Eigen::Index p = model.dim();
    validate_contract(k, p);
    if (!(beta > 0.0) || !std::isfinite(beta))
        throw Error(ErrorCode::InvalidArgument, "beta must be positive");
    if (!std::isinf(k.horizon))
        throw Error(ErrorCode::InvalidArgument, "closed form requires an infinite horizon");

    const double rb = k.r * beta;
    const Eigen::VectorXd pay1 = k.a - k.c;
    const Eigen::VectorXd pay2 = lump_vector(model, k);
    const SpectralDecomposition& sd = model.T().spectral();

    ReserveReport rep;
    rep.method = ReserveMethod::SpectralClosedForm;

    if (sd.well_conditioned) {
        const std::vector<Cx> c1 = bilinear_coefficients(model.pi(), sd, pay1);
        const std::vector<Cx> c2 = bilinear_coefficients(model.pi(), sd, pay2);
        Cx s1(0.0, 0.0);
        Cx s2(0.0, 0.0);
        for (std::size_t i = 0; i < c1.size(); ++i) {
            const Cx lam = sd.eigenvalues[Eigen::Index(i)];
            if (c1[i] != Cx(0.0, 0.0))
                s1 += c1[i] * gei_scaled_kernel(-lam, Cx(rb, 0.0));
            if (c2[i] != Cx(0.0, 0.0))
                s2 += c2[i] * gei_scaled_kernel(Cx(1.0, 0.0) - lam, Cx(rb, 0.0));
        }
        rep.annuity_component = beta * s1.real();
        rep.lump_component = s2.real();
    } else {
        if (!(rb < 700.0))
            throw Error(ErrorCode::Overflow,
                        "discount scale overflows the unscaled closed form; use the dual route");
        const Eigen::MatrixXd& Tm = model.T().matrix();
        const Eigen::MatrixXd ann = generalized_exp_integral(Eigen::MatrixXd(-Tm), rb);
        const Eigen::MatrixXd lmp = generalized_exp_integral(
            Eigen::MatrixXd(Eigen::MatrixXd::Identity(p, p) - Tm), rb);
        const double pref = std::exp(rb);
        rep.annuity_component = pref * beta * (model.pi() * ann * pay1).value();
        rep.lump_component = pref * (model.pi() * lmp * pay2).value();
    }
    rep.value = rep.annuity_component + rep.lump_component;
    rep.quadrature_error_estimate =
        1e-9 * (std::abs(rep.annuity_component) + std::abs(rep.lump_component));
    return rep;
}

ReserveReport reserve_closed_gompertz(const PhaseModel& model, double kappa,
                                      const Contract& k) {
    const Eigen::Index p = model.dim();
    validate_contract(k, p);
    if (!(kappa > 0.0) || !std::isfinite(kappa))
        throw Error(ErrorCode::InvalidArgument, "kappa must be positive");
    if (!std::isinf(k.horizon))
        throw Error(ErrorCode::InvalidArgument, "closed form requires an infinite horizon");

    const double rk = k.r / kappa;
    const Eigen::VectorXd pay1 = k.a - k.c;
    const Eigen::VectorXd pay2 = lump_vector(model, k);
    const SpectralDecomposition& sd = model.T().spectral();

    ReserveReport rep;
    rep.method = ReserveMethod::SpectralClosedForm;

    if (sd.well_conditioned) {
        const std::vector<Cx> c1 = bilinear_coefficients(model.pi(), sd, pay1);
        const std::vector<Cx> c2 = bilinear_coefficients(model.pi(), sd, pay2);
        Cx s1(0.0, 0.0);
        Cx s2(0.0, 0.0);
        for (std::size_t i = 0; i < c1.size(); ++i) {
            const Cx z = -sd.eigenvalues[Eigen::Index(i)] / kappa;
            if (c1[i] != Cx(0.0, 0.0))
                s1 += c1[i] * gei_scaled_kernel(Cx(rk + 1.0, 0.0), z);
            if (c2[i] != Cx(0.0, 0.0))
                s2 += c2[i] * gei_scaled_kernel(Cx(rk, 0.0), z);
        }
        rep.annuity_component = s1.real() / kappa;
        rep.lump_component = s2.real() / kappa;
    } else {
        const Eigen::MatrixXd M = -model.T().matrix() / kappa;
        const Eigen::MatrixXd pre = matrix_exp(M) / kappa;
        const Eigen::MatrixXd e1 = generalized_exp_integral_at(rk + 1.0, M);
        const Eigen::MatrixXd e2 = generalized_exp_integral_at(rk, M);
        rep.annuity_component = (model.pi() * pre * e1 * pay1).value();
        rep.lump_component = (model.pi() * pre * e2 * pay2).value();
    }
    rep.value = rep.annuity_component + rep.lump_component;
    rep.quadrature_error_estimate =
        1e-9 * (std::abs(rep.annuity_component) + std::abs(rep.lump_component));
    return rep;
}

ReserveReport reserve_fractional_conditional(const PhaseModel& model,
                                             const InhomogeneityTransform& g,
                                             const FractionalClock& clock,
                                             const Contract& k, double t, double u,
                                             double v, const Eigen::RowVectorXd& state) {
    if (!(v >= 0.0) || !std::isfinite(v))
        throw Error(ErrorCode::InvalidArgument,
                    "conditioning time must be finite and non-negative");
    return engine_frac(model, g, clock.alpha(), k, t, u, state);
}

ReserveReport reserve_fractional_conditional(const PhaseModel& model,
                                             const InhomogeneityTransform& g,
                                             const FractionalClock& clock,
                                             const Contract& k, double t, double u,
                                             double v, Eigen::Index state) {
    return reserve_fractional_conditional(model, g, clock, k, t, u, v,
                                          unit_row(model.dim(), state));
}

ReserveReport reserve_fractional_time0(const PhaseModel& model,
                                       const InhomogeneityTransform& g,
                                       const FractionalClock& clock, const Contract& k) {
    const Eigen::Index p = model.dim();
    validate_contract(k, p);
    if (!std::isinf(k.horizon))
        throw Error(ErrorCode::InvalidArgument, "dual route requires an infinite horizon");

    const double alpha = clock.alpha();
    const double r = k.r;
    const Eigen::RowVectorXd& state = model.pi();
    const Eigen::VectorXd pay1 = k.a - k.c;
    const Eigen::VectorXd pay2 = lump_vector(model, k);
    const SpectralDecomposition& sd = model.T().spectral();

    ReserveReport rep;
    rep.method = ReserveMethod::DualLaplace;

    if (sd.well_conditioned) {
        const Eigen::VectorXcd& eig = sd.eigenvalues;
        const std::vector<Cx> c1 = bilinear_coefficients(state, sd, pay1);
        const std::vector<Cx> c2 = bilinear_coefficients(state, sd, pay2);
        const double w1 = abs_sum(c1);
        const double w2 = abs_sum(c2);

        if (w1 > 0.0) {
            auto annuity_nodes = [&](double u0) -> Eigen::VectorXcd {
                Eigen::VectorXcd out = Eigen::VectorXcd::Zero(p);
                const double h1 = dual_density_h1(g, r, u0);
                if (h1 == 0.0) return out;
                const double s = std::pow(u0, alpha);
                for (Eigen::Index i = 0; i < p; ++i)
                    out[i] = h1 * ml_kernel(alpha, 1.0, eig[i], s);
                return out;
            };
            const auto q = gk_integrate_to_infinity(annuity_nodes, 0.0, kTermOpts);
            if (!q.converged)
                throw Error(ErrorCode::QuadratureUnconverged, "annuity term did not converge");
            rep.annuity_component = combine(c1, q.value) / r;
            rep.quadrature_error_estimate += q.error * w1 / r;
        }
        if (w2 > 0.0) {
            auto lump_nodes = [&](double u0) -> Eigen::VectorXcd {
                Eigen::VectorXcd out = Eigen::VectorXcd::Zero(p);
                const double d = g.g_inv(u0);
                if (!(d > 0.0) || !std::isfinite(d)) return out;
                const double shift =
                    -r * u0 + g.log_lambda(u0) + (alpha - 1.0) * std::log(d);
                if (!(shift > -745.0) || !std::isfinite(shift)) return out;
                const double pref = std::exp(shift);
                if (!std::isfinite(pref)) return out;
                const double s = std::pow(d, alpha);
                for (Eigen::Index i = 0; i < p; ++i)
                    out[i] = pref * ml_kernel(alpha, alpha, eig[i], s);
                return out;
            };
            const auto q = gk_integrate_to_infinity(lump_nodes, 0.0, kSingularOpts);
            if (!q.converged)
                throw Error(ErrorCode::QuadratureUnconverged, "lump term did not converge");
            rep.lump_component = combine(c2, q.value);
            rep.quadrature_error_estimate += q.error * w2;
        }
    } else {
        const SubIntensity& T = model.T();
        if (pay1.lpNorm<1>() > 0.0) {
            auto annuity_row = [&](double u0) -> Eigen::RowVectorXd {
                const double h1 = dual_density_h1(g, r, u0);
                if (h1 == 0.0) return Eigen::RowVectorXd::Zero(p);
                return h1 * (state * ml_matrix(MlParams(alpha, 1.0), T, u0)).eval();
            };
            const auto q = gk_integrate_to_infinity(annuity_row, 0.0, kTermOpts);
            if (!q.converged)
                throw Error(ErrorCode::QuadratureUnconverged, "annuity term did not converge");
            rep.annuity_component = q.value.dot(pay1) / r;
            rep.quadrature_error_estimate += q.error * pay1.lpNorm<1>() / r;
        }
        if (pay2.lpNorm<1>() > 0.0) {
            auto lump_row = [&](double u0) -> Eigen::RowVectorXd {
                const double d = g.g_inv(u0);
                if (!(d > 0.0) || !std::isfinite(d)) return Eigen::RowVectorXd::Zero(p);
                const double shift =
                    -r * u0 + g.log_lambda(u0) + (alpha - 1.0) * std::log(d);
                if (!(shift > -745.0) || !std::isfinite(shift))
                    return Eigen::RowVectorXd::Zero(p);
                const double pref = std::exp(shift);
                const Eigen::RowVectorXd row =
                    state * ml_matrix(MlParams(alpha, alpha), T, d);
                if (!std::isfinite(pref) || row.cwiseAbs().maxCoeff() == 0.0)
                    return Eigen::RowVectorXd::Zero(p);
                return pref * row;
            };
            const auto q = gk_integrate_to_infinity(lump_row, 0.0, kSingularOpts);
            if (!q.converged)
                throw Error(ErrorCode::QuadratureUnconverged, "lump term did not converge");
            rep.lump_component = q.value.dot(pay2);
            rep.quadrature_error_estimate += q.error * pay2.lpNorm<1>();
        }
    }
    rep.value = rep.annuity_component + rep.lump_component;
    return rep;
}

Eigen::VectorXd fair_premium(const PhaseModel& model, const InhomogeneityTransform& g,
                             const FractionalClock& clock, const Contract& k,
                             const std::vector<Eigen::Index>& collectible,
                             const Eigen::VectorXd& profile) {
    const Eigen::Index p = model.dim();
    if (collectible.empty())
        throw Error(ErrorCode::InvalidArgument, "collectible state set must not be empty");
    for (Eigen::Index i : collectible)
        if (i < 0 || i >= p)
            throw Error(ErrorCode::InvalidArgument, "collectible state index out of range");

    Eigen::VectorXd prof;
    if (profile.size() == 0) {
        prof = Eigen::VectorXd::Zero(p);
        for (Eigen::Index i : collectible) prof[i] = 1.0;
    } else {
        if (profile.size() != p)
            throw Error(ErrorCode::InvalidArgument,
                        "premium profile must have one entry per transient state");
        if (!profile.allFinite() || (profile.array() < 0.0).any())
            throw Error(ErrorCode::InvalidArgument,
                        "premium profile must be finite and non-negative");
        Eigen::VectorXd mask = Eigen::VectorXd::Zero(p);
        for (Eigen::Index i : collectible) mask[i] = 1.0;
        for (Eigen::Index i = 0; i < p; ++i)
            if (mask[i] == 0.0 && profile[i] != 0.0)
                throw Error(ErrorCode::InvalidArgument,
                            "premium profile must vanish outside the collectible states");
        if (profile.lpNorm<1>() == 0.0)
            throw Error(ErrorCode::InvalidArgument, "premium profile must not be zero");
        prof = profile;
    }

    Contract numer = k;
    numer.c = Eigen::VectorXd::Zero(p);
    Contract denom = numer;
    denom.a = prof;
    denom.B = Eigen::MatrixXd::Zero(p, p);
    denom.b = Eigen::VectorXd::Zero(p);

    auto quote = [&](const Contract& kk) -> double {
        if (clock.fractional())
            return reserve_fractional_conditional(model, g, clock, kk, 0.0, 0.0, 0.0,
                                                  model.pi()).value;
        return reserve_markov(model, g, kk, 0.0, model.pi()).value;
    };
    const double liabilities = quote(numer);
    const double occupancy = quote(denom);
    if (!(std::abs(occupancy) > 1e-12 * std::max(1.0, std::abs(liabilities))))
        throw Error(ErrorCode::Unfundable,
                    "premium profile collects no discounted occupancy");
    return (liabilities / occupancy) * prof;
}

std::vector<LiabilityPoint> liability_curve(const PhaseModel& model,
                                            const InhomogeneityTransform& g,
                                            const Contract& k,
                                            const std::vector<double>& alphas,
                                            const std::vector<double>& n_grid) {
    const Eigen::Index p = model.dim();
    validate_contract(k, p);
    if (k.c.lpNorm<1>() != 0.0)
        throw Error(ErrorCode::InvalidArgument,
                    "liability curves require zero premium rates");

    std::vector<LiabilityPoint> out;
    out.reserve(alphas.size() * n_grid.size());
    for (double alpha : alphas) {
        const FractionalClock clock(alpha);
        for (double n : n_grid) {
            Contract cell = k;
            cell.horizon = n;
            const double value =
                clock.fractional()
                    ? reserve_fractional_conditional(model, g, clock, cell, 0.0, 0.0,
                                                     0.0, model.pi()).value
                    : reserve_markov(model, g, cell, 0.0, model.pi()).value;
            out.push_back(LiabilityPoint{alpha, n, value});
        }
    }
    return out;
}

} // namespace fraclife
