#pragma once

#include <complex>
#include <limits>

#include "fraclife/matrix_core.hpp"

namespace fraclife {

// Two-parameter Mittag-Leffler family E_{alpha,beta} restricted to the
// regime used by time-fractional absorption models.
struct MlParams {
    double alpha = 1.0;
    double beta = 1.0;

    MlParams(double a, double b = 1.0) : alpha(a), beta(b) {
        if (!(a > 0.0) || !(a <= 1.0) || !std::isfinite(a))
            throw Error(ErrorCode::InvalidArgument, "ml alpha must lie in (0, 1]");
        if (!(b > 0.0) || !std::isfinite(b))
            throw Error(ErrorCode::InvalidArgument, "ml beta must be positive");
    }
};

/// E_{alpha,beta}(z).  Power series with compensated summation below the
/// switch radius (when its conditioning permits), otherwise trapezoidal
/// quadrature of the inverse-Laplace form on a parabolic contour.  Throws
/// Error(Unconverged) if the contour stages fail to stabilise.
std::complex<double> ml_scalar(const MlParams& p, std::complex<double> z);

/// Real-argument convenience wrapper; the result of a real argument is real.
double ml_scalar(const MlParams& p, double z);

/// E_{alpha,beta}(T * scale^alpha) for a validated sub-intensity block.
/// Uses the eigenbasis when well conditioned, otherwise the entire-function
/// series in matrix arithmetic with compensated accumulation.
Eigen::MatrixXd ml_matrix(const MlParams& p, const SubIntensity& T, double scale);

namespace ml_detail {

struct Eval {
    std::complex<double> value{0.0, 0.0};
    double error = std::numeric_limits<double>::infinity();
    bool ok = false;
};

/// Truncated power series in extended precision with a running condition
/// estimate; `ok` is false when cancellation exhausts the accuracy budget.
Eval series_eval(const MlParams& p, std::complex<double> z);

/// Large-argument expansion at z = -x (x > 0): algebraic part truncated at
/// its smallest term plus the conjugate exponential pair where admissible.
Eval asymptotic_eval(const MlParams& p, double x);

/// Branch-cut integral representation at real negative z (0 < alpha < 1,
/// beta <= 1); adaptive quadrature of the monotone kernel.
Eval kernel_eval(const MlParams& p, double z);

/// Parabolic inverse-Laplace contour with residue accounting; the general
/// production path.
Eval contour_eval(const MlParams& p, std::complex<double> z);

/// Composite reference value on the negative real axis built from the
/// non-contour evaluators (series, then asymptotic, then kernel).
Eval negative_axis_reference(const MlParams& p, double x);

/// Radius separating the series and contour production paths.
inline constexpr double z_switch = 5.0;

/// True when the power series can meet the accuracy contract at z.
bool series_preferred(const MlParams& p, std::complex<double> z);

} // namespace ml_detail

} // namespace fraclife
