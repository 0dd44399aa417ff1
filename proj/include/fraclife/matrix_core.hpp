#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <memory>
#include <vector>

#include "fraclife/errors.hpp"

namespace fraclife {

// Eigenstructure of a sub-intensity matrix.  `well_conditioned` gates the
// spectral evaluation path: eigenvalue separation must exceed
// 1e-8 * ||T||_1 and the eigenvector condition estimate must stay below 1e8.
struct SpectralDecomposition {
    Eigen::VectorXcd eigenvalues;   // sorted by descending real part
    Eigen::MatrixXcd P;             // eigenvectors, unit columns
    Eigen::MatrixXcd P_inv;
    double condition_estimate = 0.0;
    double min_separation = 0.0;
    bool well_conditioned = false;
};

// Validated generator block of a terminating jump process: off-diagonals are
// non-negative, diagonals negative, row sums non-positive (tiny positive sums
// are repaired by lowering the diagonal), and every eigenvalue has strictly
// negative real part.  Immutable after construction and cheap to copy.
class SubIntensity {
public:
    const Eigen::MatrixXd& matrix() const { return T_; }
    const Eigen::VectorXd& exit_vector() const { return exit_; }
    Eigen::Index dim() const { return T_.rows(); }
    const std::vector<Eigen::Index>& repaired_rows() const { return repaired_; }
    const SpectralDecomposition& spectral() const { return *spectral_; }

    friend SubIntensity validate_subintensity(const Eigen::MatrixXd&, double);

private:
    SubIntensity() = default;

    Eigen::MatrixXd T_;
    Eigen::VectorXd exit_;
    std::vector<Eigen::Index> repaired_;
    std::shared_ptr<const SpectralDecomposition> spectral_;
};

/// Checks the sign pattern and row sums of `raw`, repairing row sums in
/// (0, repair_tolerance] by decreasing the diagonal entry.  Throws Error with
/// NonSquare, SignPattern, RowSumViolation or Singular on violations.
SubIntensity validate_subintensity(const Eigen::MatrixXd& raw,
                                   double repair_tolerance = 1e-3);

/// Matrix exponential by scaling-and-squaring with a degree-13 Pade
/// approximant.  Throws Error(Overflow) if the result is not finite.
Eigen::MatrixXd matrix_exp(const Eigen::MatrixXd& A);

/// Eigen decomposition of an arbitrary real square matrix with the same
/// ordering and conditioning report as SubIntensity::spectral().
SpectralDecomposition spectral_decompose(const Eigen::MatrixXd& A);

/// Evaluates an analytic function of the matrix through the eigenbasis:
/// P diag(f(eig)) P^{-1}, truncating the imaginary residue.  Throws
/// Error(FallbackRequired) when the decomposition is ill-conditioned and
/// Error(NonAnalytic) when f produces non-finite values or the residue is
/// too large to truncate.
Eigen::MatrixXd apply_analytic(
    const std::function<std::complex<double>(std::complex<double>)>& f,
    const SubIntensity& T);

/// Coefficients c_i with x * f(A) * y = sum_i c_i * f(eig_i) for any analytic
/// f, computed as (x*P)_i * (P_inv*y)_i.  Callers must gate on
/// well_conditioned themselves; the sum is conjugate-symmetric, so its
/// imaginary part cancels for real x, y.
std::vector<std::complex<double>> bilinear_coefficients(
    const Eigen::RowVectorXd& x, const SpectralDecomposition& sd,
    const Eigen::VectorXd& y);

/// Green matrix (-T)^{-1}; entries are expected sojourn times and are
/// non-negative for any valid sub-intensity.
Eigen::MatrixXd green_matrix(const SubIntensity& T);

} // namespace fraclife
