#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "fraclife/distributions.hpp"
#include "fraclife/matrix_core.hpp"
#include "fraclife/reserve.hpp"
#include "fraclife/rng.hpp"
#include "fraclife/transforms.hpp"

namespace testkit {

using namespace fraclife;

// Three-state progressive model (healthy -> impaired -> frail -> dead) whose
// second row needs the documented row-sum repair.  Paired with a logarithmic
// observed clock, it exercises every mixed-scale code path.
inline Eigen::MatrixXd coxian3_raw() {
    Eigen::MatrixXd T(3, 3);
    T << -0.1722, 0.1585, 0.0,
          0.0,    -0.5663, 0.5664,
          0.0,     0.0,   -0.0052;
    return T;
}

inline PhaseModel coxian3_model() {
    Eigen::RowVectorXd pi(3);
    pi << 1.0, 0.0, 0.0;
    return make_phase_model(pi, validate_subintensity(coxian3_raw(), 1e-3));
}

inline InhomogeneityTransform coxian3_clock() {
    return InhomogeneityTransform::gompertz_log(0.1383);
}

// Unit annuity in every state plus a unit lump sum on every transition,
// including the absorbing one.
inline Contract unit_benefits_contract(double n) {
    Contract k;
    k.a = Eigen::VectorXd::Ones(3);
    k.c = Eigen::VectorXd::Zero(3);
    k.B = Eigen::MatrixXd::Ones(3, 3) - Eigen::MatrixXd::Identity(3, 3);
    k.b = Eigen::VectorXd::Ones(3);
    k.r = 0.03;
    k.horizon = n;
    return k;
}

// Half-unit annuity, a lump on the impaired -> frail transition, and a large
// death benefit from every state.
inline Contract death_benefit_contract(double n) {
    Contract k;
    k.a = Eigen::VectorXd::Constant(3, 0.5);
    k.c = Eigen::VectorXd::Zero(3);
    k.B = Eigen::MatrixXd::Zero(3, 3);
    k.B(1, 2) = 1.0;
    k.b = Eigen::VectorXd::Constant(3, 50.0);
    k.r = 0.03;
    k.horizon = n;
    return k;
}

// Random bidiagonal generator with distinct diagonal rates: both evaluation
// paths stay available and the spectrum is simple with probability one.
inline PhaseModel random_coxian(RngStream& rng, Eigen::Index p) {
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(p, p);
    for (Eigen::Index i = 0; i < p; ++i) {
        const double through = 0.2 + 2.0 * rng.next_uniform();
        const double out = 0.1 + 1.0 * rng.next_uniform();
        if (i + 1 < p) {
            T(i, i + 1) = through;
            T(i, i) = -(through + out);
        } else {
            T(i, i) = -out;
        }
    }
    Eigen::RowVectorXd pi = Eigen::RowVectorXd::Zero(p);
    pi[0] = 1.0;
    return make_phase_model(pi, validate_subintensity(T));
}

inline Contract random_contract(RngStream& rng, Eigen::Index p, double r, double n) {
    Contract k;
    k.a = Eigen::VectorXd(p);
    k.c = Eigen::VectorXd(p);
    k.b = Eigen::VectorXd(p);
    k.B = Eigen::MatrixXd(p, p);
    for (Eigen::Index i = 0; i < p; ++i) {
        k.a[i] = rng.next_uniform();
        k.c[i] = 0.5 * rng.next_uniform();
        k.b[i] = 5.0 * rng.next_uniform();
        for (Eigen::Index j = 0; j < p; ++j)
            k.B(i, j) = i == j ? 0.0 : rng.next_uniform();
    }
    k.r = r;
    k.horizon = n;
    return k;
}

inline double rel_err(double got, double want) {
    const double scale = std::max(std::abs(want), 1e-30);
    return std::abs(got - want) / scale;
}

// Runs fn, which must throw fraclife::Error, and reports the code it threw.
template <typename Fn>
inline ErrorCode error_code_of(Fn&& fn) {
    try {
        std::forward<Fn>(fn)();
    } catch (const Error& e) {
        return e.code();
    }
    throw std::runtime_error("expected a fraclife::Error to be thrown");
}

} // namespace testkit
