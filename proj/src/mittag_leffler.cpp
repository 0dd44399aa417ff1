#include "fraclife/mittag_leffler.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "fraclife/detail/compensated.hpp"
#include "fraclife/quadrature.hpp"

namespace fraclife {
namespace ml_detail {

namespace {

using Cplx = std::complex<double>;
using CplxL = std::complex<long double>;

constexpr double kPi = 3.14159265358979323846264338327950288;
constexpr double kInf = std::numeric_limits<double>::infinity();

// sin(pi*y) with exact integer reduction.
double sinpi(double y) {
    const double k = std::nearbyint(y);
    const double s = std::sin(kPi * (y - k));
    return std::fmod(std::abs(k), 2.0) == 0.0 ? s : -s;
}

// Reciprocal gamma values 1/Gamma(alpha*k + beta), cached per parameter pair.
const std::vector<long double>& recip_gammas(double alpha, double beta, size_t count) {
    struct Table {
        double alpha = -1.0;
        double beta = -1.0;
        std::vector<long double> recip;
    };
    thread_local Table table;
    if (table.alpha != alpha || table.beta != beta) {
        table.alpha = alpha;
        table.beta = beta;
        table.recip.clear();
    }
    while (table.recip.size() < count) {
        const long double y = static_cast<long double>(alpha) * table.recip.size() +
                              static_cast<long double>(beta);
        table.recip.push_back(expl(-lgammal(y)));
    }
    return table.recip;
}

} // namespace

Eval series_eval(const MlParams& p, std::complex<double> z) {
    Eval out;
    const double x = std::abs(z);
    if (x == 0.0) {
        out.value = 1.0 / std::tgamma(p.beta);
        out.error = 1e-17;
        out.ok = true;
        return out;
    }

    const double xa = std::pow(x, 1.0 / p.alpha);
    const double k_peak = (xa + 5.0) / p.alpha;
    if (!(k_peak < 20000.0)) return out;
    const size_t k_max = static_cast<size_t>(std::min(60000.0, 3.5 * k_peak + 120.0));
    const auto& rg = recip_gammas(p.alpha, p.beta, k_max + 1);

    const CplxL zl(static_cast<long double>(z.real()), static_cast<long double>(z.imag()));
    detail::KahanSum<CplxL> acc;
    CplxL zp(1.0L, 0.0L);
    long double abs_sum = 0.0L;
    long double last_abs = 0.0L;
    int small_streak = 0;
    for (size_t k = 0; k <= k_max; ++k) {
        const CplxL term = zp * rg[k];
        acc.add(term);
        last_abs = std::abs(term);
        abs_sum += last_abs;
        const long double s_abs = std::max(std::abs(acc.value()), 1e-300L);
        if (last_abs <= 5e-22L * s_abs && static_cast<double>(k) > k_peak) {
            if (++small_streak >= 3) break;
        } else {
            small_streak = 0;
        }
        zp *= zl;
    }

    const CplxL s = acc.value();
    out.value = Cplx(static_cast<double>(s.real()), static_cast<double>(s.imag()));
    // roundoff grows with the power recurrence depth and the lgamma magnitude
    const double ypk = p.alpha * k_peak + p.beta;
    const double growth = 4.0 + k_peak + 2.0 * ypk * std::log1p(ypk);
    out.error = 1.1e-19 * growth * static_cast<double>(abs_sum) +
                2.0 * static_cast<double>(last_abs) + 1e-17 * std::abs(out.value);
    out.ok = small_streak >= 3 && std::isfinite(out.value.real()) &&
             std::isfinite(out.value.imag());
    return out;
}

Eval asymptotic_eval(const MlParams& p, double x) {
    Eval out;
    if (!(x > 0.0)) return out;

    const double lx = std::log(x);
    detail::KahanSum<double> alg;
    double prev_abs = kInf;
    double trunc_err = kInf;
    bool any_nonzero = false;
    for (int k = 1; k <= 400; ++k) {
        // term_k = -z^{-k}/Gamma(y) at z = -x
        const double y = p.beta - p.alpha * k;
        double term;
        double term_abs;
        bool near_pole = false;
        if (y > 0.5) {
            term_abs = std::exp(-k * lx - std::lgamma(y));
            term = (k % 2 == 0) ? -term_abs : term_abs;
        } else {
            const double sp = sinpi(y);
            if (sp == 0.0) continue;  // exact zero at a Gamma pole; later terms may not be
            near_pole = std::abs(sp) < 0.01;  // isolated dip, not evidence of decay
            const double w1 = 1.0 - y;
            term_abs = std::exp(-k * lx + std::lgamma(w1) + std::log(std::abs(sp) / kPi));
            double sign = ((k % 2 == 0) ? 1.0 : -1.0) * (sp > 0.0 ? 1.0 : -1.0);
            if (w1 < 0.0 && static_cast<long long>(std::floor(w1)) % 2 != 0) sign = -sign;
            term = -sign * term_abs;
        }
        if (!near_pole && k > 2 && term_abs > prev_abs) {
            trunc_err = prev_abs;  // divergence onset: stop at the smallest term
            break;
        }
        alg.add(term);
        any_nonzero = true;
        if (near_pole) continue;
        prev_abs = term_abs;
        if (term_abs < 1e-18) {
            trunc_err = term_abs;
            break;
        }
    }
    if (!std::isfinite(trunc_err)) trunc_err = any_nonzero ? prev_abs : 0.0;

    const double alg_scale = std::abs(alg.value()) + 1e-30;
    double exp_part = 0.0;
    double exp_err = 0.0;
    if (p.alpha == 1.0) {
        if (p.beta == 1.0)
            exp_part = std::exp(-x);  // exact: the expansion terminates
        else
            exp_err = std::exp(-x);
    } else if (p.alpha > 2.0 / 3.0) {
        // exponentially small saddle contribution; its Stokes multiplier varies,
        // so it enters the error bound rather than the value
        const double r = std::pow(x, 1.0 / p.alpha);
        const double theta = kPi / p.alpha;
        exp_err = 2.0 * (2.0 / p.alpha) * std::exp(r * std::cos(theta)) *
                  std::pow(r, 1.0 - p.beta);
    }

    out.value = alg.value() + exp_part;
    out.error = 3.0 * trunc_err + exp_err + 1e-16 * alg_scale;
    out.ok = std::isfinite(out.value.real()) && std::isfinite(out.error);
    return out;
}

Eval kernel_eval(const MlParams& p, double z) {
    Eval out;
    if (!(z < 0.0) || p.alpha >= 1.0 || p.beta > 1.0) return out;

    const double x = -z;
    const double c = std::cos(kPi * p.alpha);
    const double s1 = sinpi(1.0 - p.beta);
    const double s2 = sinpi(1.0 - p.beta + p.alpha);
    const double off = x * x * (1.0 - c * c);
    const double pref = 1.0 / (p.alpha * kPi);
    const double inv_alpha = 1.0 / p.alpha;
    const double pw = (1.0 - p.beta) * inv_alpha;

    auto f = [&](double r) -> double {
        if (r <= 0.0) return p.beta == 1.0 ? pref * s2 / x : 0.0;
        const double expo = -std::pow(r, inv_alpha);
        if (expo < -745.0) return 0.0;
        const double d1 = r + x * c;
        const double den = d1 * d1 + off;
        return pref * std::pow(r, pw) * std::exp(expo) * (r * s1 + x * s2) / den;
    };

    QuadOptions opts;
    opts.rel_tol = 1e-12;
    opts.abs_tol = 1e-15;
    opts.max_intervals = 4000;
    const auto res = gk_integrate_to_infinity(f, 0.0, opts);
    out.value = res.value;
    out.error = res.error + 1e-15 * std::abs(res.value);
    out.ok = res.converged;
    return out;
}

Eval contour_eval(const MlParams& p, std::complex<double> z) {
    Eval out;
    const double az = std::abs(z);
    if (az == 0.0) {
        out.value = 1.0 / std::tgamma(p.beta);
        out.error = 1e-16;
        out.ok = true;
        return out;
    }

    const double argz = std::arg(z);
    const bool has_pole = std::abs(argz) <= p.alpha * kPi * (1.0 + 1e-14);
    Cplx s_star(0.0, 0.0);
    if (has_pole)
        s_star = p.alpha == 1.0 ? z : std::polar(std::pow(az, 1.0 / p.alpha), argz / p.alpha);

    // Contour scale: default width, shrunk or grown until the pole keeps a
    // safe distance from the parabola s(u) = mu*(1+iu)^2.
    double mu = 6.0;
    bool inside = false;
    if (has_pole) {
        static const double cand[] = {6.0, 3.0, 12.0, 1.5, 24.0, 0.75, 48.0, 96.0};
        double fallback_mu = 6.0;
        double fallback_clear = -1.0;
        bool fallback_inside = false;
        bool found = false;
        const double pr = s_star.real();
        const double pi_abs = std::abs(s_star.imag());
        for (double m : cand) {
            const double U = std::sqrt(1.0 + 38.0 / m);
            double clear = kInf;
            for (int i = 0; i <= 64; ++i) {
                const double u = U * i / 64.0;
                clear = std::min(clear, std::hypot(m * (1.0 - u * u) - pr, 2.0 * m * u - pi_abs));
            }
            const bool in = pr > m - s_star.imag() * s_star.imag() / (4.0 * m);
            const double thr = std::max(1.5, std::min(std::abs(s_star), 60.0) / 8.0);
            if (clear >= thr) {
                mu = m;
                inside = in;
                found = true;
                break;
            }
            if (clear > fallback_clear) {
                fallback_clear = clear;
                fallback_mu = m;
                fallback_inside = in;
            }
        }
        if (!found) {
            mu = fallback_mu;
            inside = fallback_inside;
        }
    }

    Cplx residue(0.0, 0.0);
    if (has_pole && inside) {
        const double ex = s_star.real() + (1.0 - p.beta) * std::log(std::abs(s_star));
        if (ex > 709.0) {
            out.value = Cplx(kInf, 0.0);
            out.error = kInf;
            out.ok = true;
            return out;
        }
        residue = std::exp(s_star + (1.0 - p.beta) * std::log(s_star)) / p.alpha;
    }

    const double U = std::sqrt(1.0 + 38.0 / mu);
    const bool sym = std::abs(z.imag()) <= 1e-14 * (1.0 + az);
    auto node = [&](double u) -> Cplx {
        const Cplx s = mu * Cplx(1.0 - u * u, 2.0 * u);
        const Cplx ls = std::log(s);
        const Cplx sa = std::exp(p.alpha * ls);
        const Cplx sab = std::exp((p.alpha - p.beta) * ls);
        return std::exp(s) * sab * Cplx(1.0, u) / (sa - z);
    };
    struct StageOut {
        Cplx value;
        double abs_scale;
    };
    auto stage = [&](int n_side) -> StageOut {
        const double h = U / n_side;
        const double w = mu * h / kPi;
        if (sym) {
            double acc = node(0.0).real();
            double mag = std::abs(acc);
            for (int k = 1; k <= n_side; ++k) {
                const double nr = node(k * h).real();
                acc += 2.0 * nr;
                mag += 2.0 * std::abs(nr);
            }
            return {Cplx(acc * w, 0.0), mag * w};
        }
        Cplx acc = node(0.0);
        double mag = std::abs(acc);
        for (int k = 1; k <= n_side; ++k) {
            const Cplx a = node(k * h);
            const Cplx b = node(-k * h);
            acc += a + b;
            mag += std::abs(a) + std::abs(b);
        }
        return {acc * w, mag * w};
    };

    int n = std::max(28, static_cast<int>(std::ceil(U / 0.10)));
    StageOut prev = stage(n);
    StageOut cur = prev;
    double err = kInf;
    double noise = 0.0;
    for (int it = 0; it < 6; ++it) {
        n = static_cast<int>(std::ceil(n * 1.6));
        cur = stage(n);
        err = std::abs(cur.value - prev.value);
        noise = 4.4e-15 * cur.abs_scale;
        const double tol = std::max({noise, 1e-12 * std::abs(cur.value + residue),
                                     4e-16 * std::abs(cur.value)});
        if (err <= tol) {
            out.ok = true;
            break;
        }
        prev = cur;
    }

    out.value = cur.value + residue;
    out.error = 1.6 * err + noise + 4e-16 * std::abs(out.value);
    if (!std::isfinite(out.value.real()) || !std::isfinite(out.value.imag())) out.ok = false;
    return out;
}

Eval negative_axis_reference(const MlParams& p, double x) {
    if (x == 0.0) {
        Eval out;
        out.value = 1.0 / std::tgamma(p.beta);
        out.error = 1e-17;
        out.ok = true;
        return out;
    }
    const Eval s = series_eval(p, Cplx(-x, 0.0));
    if (s.ok && s.error <= 1.2e-9) return s;
    const Eval a = asymptotic_eval(p, x);
    if (a.ok && a.error <= 1.2e-9) return a;
    if (p.alpha < 1.0 && p.beta <= 1.0) {
        const Eval k = kernel_eval(p, -x);
        if (k.ok) return k;
    }
    return s.error < a.error ? s : a;
}

bool series_preferred(const MlParams& p, std::complex<double> z) {
    const double x = std::abs(z);
    if (x == 0.0) return true;
    const double xa = std::pow(x, 1.0 / p.alpha);
    if ((xa + 5.0) / p.alpha > 3000.0) return false;
    if (z.imag() == 0.0 && z.real() >= 0.0) return true;
    if (x <= 1.0) return true;
    const double e_max = xa - (p.beta / p.alpha) * std::log(x);
    return e_max <= 11.4;
}

} // namespace ml_detail

std::complex<double> ml_scalar(const MlParams& p, std::complex<double> z) {
    using namespace ml_detail;
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
        throw Error(ErrorCode::InvalidArgument, "ml_scalar argument must be finite");
    if (std::abs(z) == 0.0) return {1.0 / std::tgamma(p.beta), 0.0};
    if (std::abs(z) <= z_switch && series_preferred(p, z)) {
        const Eval s = series_eval(p, z);
        if (s.ok) return s.value;
    }
    const Eval c = contour_eval(p, z);
    if (!c.ok)
        throw Error(ErrorCode::Unconverged,
                    "mittag-leffler contour quadrature did not stabilise");
    return c.value;
}

double ml_scalar(const MlParams& p, double z) {
    return ml_scalar(p, std::complex<double>(z, 0.0)).real();
}

Eigen::MatrixXd ml_matrix(const MlParams& p, const SubIntensity& T, double scale) {
    if (!(scale >= 0.0) || !std::isfinite(scale))
        throw Error(ErrorCode::InvalidArgument, "ml_matrix scale must be finite and non-negative");

    const double sa = std::pow(scale, p.alpha);
    if (T.spectral().well_conditioned) {
        return apply_analytic(
            [&](std::complex<double> w) { return ml_scalar(p, w * sa); }, T);
    }

    // Entire-series fallback in matrix arithmetic for defective spectra.
    const Eigen::MatrixXd A = T.matrix() * sa;
    const double nrm = A.cwiseAbs().colwise().sum().maxCoeff();
    if (nrm > 0.0) {
        const double e_max =
            std::pow(nrm, 1.0 / p.alpha) - (p.beta / p.alpha) * std::max(0.0, std::log(nrm));
        if (e_max > 12.0)
            throw Error(ErrorCode::Unconverged,
                        "matrix series conditioning exhausted; argument norm too large "
                        "for the fallback path");
    }

    const Eigen::Index pd = T.dim();
    detail::KahanSum<Eigen::MatrixXd> acc;
    acc.sum = Eigen::MatrixXd::Zero(pd, pd);
    acc.carry = Eigen::MatrixXd::Zero(pd, pd);
    Eigen::MatrixXd Mk = Eigen::MatrixXd::Identity(pd, pd);
    int streak = 0;
    for (int k = 0; k <= 5000; ++k) {
        const double rg = std::exp(-std::lgamma(p.alpha * k + p.beta));
        acc.add(Mk * rg);
        const double tn = (Mk * rg).cwiseAbs().colwise().sum().maxCoeff();
        const double sn =
            std::max(acc.value().cwiseAbs().colwise().sum().maxCoeff(), 1e-300);
        if (tn / sn < 1e-16) {
            if (++streak >= 3) break;
        } else {
            streak = 0;
        }
        Mk = Mk * A;
        if (!Mk.allFinite())
            throw Error(ErrorCode::Overflow, "matrix mittag-leffler series overflowed");
    }
    if (streak < 3)
        throw Error(ErrorCode::Unconverged, "matrix mittag-leffler series did not converge");
    return acc.value();
}

} // namespace fraclife
