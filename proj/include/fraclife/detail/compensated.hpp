#pragma once

#include <cmath>
#include <complex>

namespace fraclife::detail {

// Error-free transformations used to keep long alternating sums from losing
// the digits we promised.  A Dd value carries roughly 32 significant digits.
struct Dd {
    double hi = 0.0;
    double lo = 0.0;
};

inline Dd two_sum(double a, double b) {
    double s = a + b;
    double bb = s - a;
    double err = (a - (s - bb)) + (b - bb);
    return {s, err};
}

inline Dd quick_two_sum(double a, double b) {
    double s = a + b;
    return {s, b - (s - a)};
}

inline Dd two_prod(double a, double b) {
    double p = a * b;
    double err = std::fma(a, b, -p);
    return {p, err};
}

inline Dd dd_add(Dd a, double b) {
    Dd s = two_sum(a.hi, b);
    s.lo += a.lo;
    return quick_two_sum(s.hi, s.lo);
}

inline Dd dd_add(Dd a, Dd b) {
    Dd s = two_sum(a.hi, b.hi);
    s.lo += a.lo + b.lo;
    return quick_two_sum(s.hi, s.lo);
}

inline Dd dd_mul(Dd a, double b) {
    Dd p = two_prod(a.hi, b);
    p.lo += a.lo * b;
    return quick_two_sum(p.hi, p.lo);
}

inline double dd_value(Dd a) { return a.hi + a.lo; }

// Classic compensated accumulator for cases where plain double suffices but
// we still want the n*eps^2 behaviour (Monte Carlo merges, matrix series).
template <typename T>
struct KahanSum {
    T sum{};
    T carry{};

    void add(const T& x) {
        T y = x - carry;
        T t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }

    const T& value() const { return sum; }
};

} // namespace fraclife::detail
