#include "fraclife/matrix_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace fraclife {

namespace {

double one_norm(const Eigen::MatrixXd& A) {
    return A.cwiseAbs().colwise().sum().maxCoeff();
}

double one_norm(const Eigen::MatrixXcd& A) {
    return A.cwiseAbs().colwise().sum().maxCoeff();
}

SpectralDecomposition decompose(const Eigen::MatrixXd& A) {
    Eigen::EigenSolver<Eigen::MatrixXd> solver(A);
    if (solver.info() != Eigen::Success)
        throw Error(ErrorCode::Unconverged, "eigen decomposition did not converge");

    const Eigen::Index p = A.rows();
    std::vector<Eigen::Index> order(static_cast<size_t>(p));
    std::iota(order.begin(), order.end(), 0);
    const Eigen::VectorXcd& ev = solver.eigenvalues();
    std::sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) {
        if (ev[i].real() != ev[j].real()) return ev[i].real() > ev[j].real();
        return ev[i].imag() > ev[j].imag();
    });

    SpectralDecomposition sd;
    sd.eigenvalues.resize(p);
    sd.P.resize(p, p);
    for (Eigen::Index k = 0; k < p; ++k) {
        sd.eigenvalues[k] = ev[order[static_cast<size_t>(k)]];
        sd.P.col(k) = solver.eigenvectors().col(order[static_cast<size_t>(k)]);
    }

    Eigen::FullPivLU<Eigen::MatrixXcd> lu(sd.P);
    double min_sep = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < p; ++i)
        for (Eigen::Index j = i + 1; j < p; ++j)
            min_sep = std::min(min_sep, std::abs(sd.eigenvalues[i] - sd.eigenvalues[j]));
    sd.min_separation = min_sep;

    if (!lu.isInvertible()) {
        sd.condition_estimate = std::numeric_limits<double>::infinity();
        sd.well_conditioned = false;
        return sd;
    }
    sd.P_inv = lu.inverse();
    sd.condition_estimate = one_norm(sd.P) * one_norm(sd.P_inv);

    const double scale = std::max(one_norm(A), 1e-300);
    sd.well_conditioned =
        sd.min_separation > 1e-8 * scale && sd.condition_estimate < 1e8;
    return sd;
}

} // namespace

SubIntensity validate_subintensity(const Eigen::MatrixXd& raw, double repair_tolerance) {
    if (raw.rows() != raw.cols())
        throw Error(ErrorCode::NonSquare, "sub-intensity matrix must be square");
    const Eigen::Index p = raw.rows();
    if (p == 0)
        throw Error(ErrorCode::NonSquare, "sub-intensity matrix must be non-empty");
    if (!raw.allFinite())
        throw Error(ErrorCode::SignPattern, "sub-intensity entries must be finite");
    if (repair_tolerance < 0.0)
        throw Error(ErrorCode::InvalidArgument, "repair tolerance must be >= 0");

    Eigen::MatrixXd T = raw;
    std::vector<Eigen::Index> repaired;
    for (Eigen::Index i = 0; i < p; ++i) {
        for (Eigen::Index j = 0; j < p; ++j) {
            if (i == j) continue;
            if (T(i, j) < 0.0) {
                std::ostringstream msg;
                msg << "off-diagonal entry (" << i << "," << j << ") is negative";
                throw Error(ErrorCode::SignPattern, msg.str());
            }
        }
        if (T(i, i) >= 0.0) {
            std::ostringstream msg;
            msg << "diagonal entry (" << i << "," << i << ") must be negative";
            throw Error(ErrorCode::SignPattern, msg.str());
        }
        const double row_sum = T.row(i).sum();
        if (row_sum > repair_tolerance) {
            std::ostringstream msg;
            msg << "row " << i << " sums to " << row_sum
                << ", above the repair tolerance " << repair_tolerance;
            throw Error(ErrorCode::RowSumViolation, msg.str());
        }
        if (row_sum > 0.0) {
            T(i, i) -= row_sum;
            repaired.push_back(i);
        }
    }

    auto sd = std::make_shared<SpectralDecomposition>(decompose(T));
    if (sd->eigenvalues.size() > 0 && sd->eigenvalues[0].real() >= 0.0)
        throw Error(ErrorCode::Singular,
                    "sub-intensity is not strictly stable; some state cannot reach the exit");

    SubIntensity out;
    out.T_ = std::move(T);
    out.exit_ = -out.T_.rowwise().sum();
    out.repaired_ = std::move(repaired);
    out.spectral_ = std::move(sd);
    return out;
}

Eigen::MatrixXd matrix_exp(const Eigen::MatrixXd& A) {
    if (A.rows() != A.cols())
        throw Error(ErrorCode::NonSquare, "matrix exponential requires a square matrix");
    const Eigen::Index p = A.rows();
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(p, p);

    // Degree-13 Pade coefficients (Higham 2005).
    static const double b[] = {
        64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
        1187353796428800.0,  129060195264000.0,   10559470521600.0,
        670442572800.0,      33522128640.0,       1323241920.0,
        40840800.0,          960960.0,            16380.0,
        182.0,               1.0};
    const double theta13 = 5.371920351148152;

    const double norm = one_norm(A);
    int squarings = 0;
    if (norm > theta13) {
        squarings = static_cast<int>(std::ceil(std::log2(norm / theta13)));
        squarings = std::max(squarings, 0);
    }
    const Eigen::MatrixXd As = A / std::ldexp(1.0, squarings);

    const Eigen::MatrixXd A2 = As * As;
    const Eigen::MatrixXd A4 = A2 * A2;
    const Eigen::MatrixXd A6 = A2 * A4;
    const Eigen::MatrixXd U =
        As * (A6 * (b[13] * A6 + b[11] * A4 + b[9] * A2) +
              b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * I);
    const Eigen::MatrixXd V =
        A6 * (b[12] * A6 + b[10] * A4 + b[8] * A2) +
        b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * I;

    Eigen::MatrixXd R = (V - U).partialPivLu().solve(V + U);
    for (int k = 0; k < squarings; ++k) R = R * R;

    if (!R.allFinite())
        throw Error(ErrorCode::Overflow, "matrix exponential overflowed");
    return R;
}

SpectralDecomposition spectral_decompose(const Eigen::MatrixXd& A) {
    if (A.rows() != A.cols())
        throw Error(ErrorCode::NonSquare, "spectral decomposition requires a square matrix");
    return decompose(A);
}

Eigen::MatrixXd apply_analytic(
    const std::function<std::complex<double>(std::complex<double>)>& f,
    const SubIntensity& T) {
    const SpectralDecomposition& sd = T.spectral();
    if (!sd.well_conditioned)
        throw Error(ErrorCode::FallbackRequired,
                    "spectral path ill-conditioned; use a quadrature fallback");

    const Eigen::Index p = T.dim();
    Eigen::VectorXcd fe(p);
    for (Eigen::Index i = 0; i < p; ++i) {
        const std::complex<double> w = f(sd.eigenvalues[i]);
        if (!std::isfinite(w.real()) || !std::isfinite(w.imag()))
            throw Error(ErrorCode::NonAnalytic,
                        "function value at an eigenvalue is not finite");
        fe[i] = w;
    }

    const Eigen::MatrixXcd C = sd.P * fe.asDiagonal() * sd.P_inv;
    const double imag_residue = C.imag().cwiseAbs().maxCoeff();
    const double scale = std::max(1.0, C.real().cwiseAbs().maxCoeff());
    if (imag_residue > 1e-10 * scale)
        throw Error(ErrorCode::NonAnalytic,
                    "imaginary residue too large to truncate; function is not "
                    "conjugate-symmetric on the spectrum");
    return C.real();
}

std::vector<std::complex<double>> bilinear_coefficients(
    const Eigen::RowVectorXd& x, const SpectralDecomposition& sd,
    const Eigen::VectorXd& y) {
    const Eigen::Index p = sd.eigenvalues.size();
    if (x.size() != p || y.size() != p)
        throw Error(ErrorCode::NonSquare,
                    "bilinear coefficients: vector lengths must match the spectrum");
    const Eigen::RowVectorXcd left = x.cast<std::complex<double>>() * sd.P;
    const Eigen::VectorXcd right = sd.P_inv * y.cast<std::complex<double>>();
    std::vector<std::complex<double>> out(static_cast<std::size_t>(p));
    for (Eigen::Index i = 0; i < p; ++i)
        out[static_cast<std::size_t>(i)] = left[i] * right[i];
    return out;
}

Eigen::MatrixXd green_matrix(const SubIntensity& T) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(-T.matrix());
    if (!lu.isInvertible())
        throw Error(ErrorCode::Singular, "green matrix solve failed; -T is singular");
    return lu.inverse();
}

} // namespace fraclife
