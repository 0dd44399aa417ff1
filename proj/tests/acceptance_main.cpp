// Acceptance gate: one PASS/FAIL line per shipped guarantee, nonzero exit on
// any failure.  Tolerances and budgets here are the product contract; the
// doctest binaries cover the finer-grained behavior.
#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "fraclife/distributions.hpp"
#include "fraclife/mittag_leffler.hpp"
#include "fraclife/model_io.hpp"
#include "fraclife/reserve.hpp"
#include "fraclife/simulation.hpp"
#include "test_support.hpp"

using namespace fraclife;
using testkit::coxian3_clock;
using testkit::coxian3_model;
using testkit::death_benefit_contract;
using testkit::random_contract;
using testkit::random_coxian;
using testkit::rel_err;
using testkit::unit_benefits_contract;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

double elapsed_s(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
}

std::vector<InhomogeneityTransform> three_families(RngStream& rng) {
    return {InhomogeneityTransform::power_weibull(1.2 + rng.next_uniform()),
            InhomogeneityTransform::pareto_exp(0.3 + rng.next_uniform()),
            InhomogeneityTransform::gompertz_log(0.05 + 0.25 * rng.next_uniform())};
}

Outcome check_degeneration() {
    const auto t0 = std::chrono::steady_clock::now();
    double worst = 0.0;
    for (int m = 0; m < 20; ++m) {
        RngStream rng(101, static_cast<std::uint64_t>(m));
        const Eigen::Index p = 2 + (m % 4);
        const PhaseModel model = random_coxian(rng, p);
        const Contract k = random_contract(rng, p, 0.03, 40.0);
        for (const InhomogeneityTransform& g : three_families(rng)) {
            const double frac =
                reserve_fractional_conditional(model, g, FractionalClock(1.0), k,
                                               0.0, 0.0, 0.0, model.pi())
                    .value;
            const double markov = reserve_markov(model, g, k, 0.0, model.pi()).value;
            worst = std::max(worst, std::abs(frac - markov));
        }
    }
    const double secs = elapsed_s(t0);
    Outcome o;
    o.pass = worst <= 1e-7 && secs < 10.0;
    o.detail = "max gap " + num(worst) + " (tol 1e-7), " + num(secs) + "s < 10s";
    return o;
}

Outcome check_scalar_ml() {
    Outcome o;
    double worst_exp = 0.0;
    const double pi_c = std::acos(-1.0);
    const MlParams one(1.0, 1.0);
    for (double radius : {0.5, 2.0, 5.0, 8.0, 10.0}) {
        for (int a = 0; a < 16; ++a) {
            const std::complex<double> z =
                std::polar(radius, 2.0 * pi_c * a / 16.0);
            const std::complex<double> want = std::exp(z);
            const double scale = std::max(1.0, std::abs(want));
            worst_exp = std::max(worst_exp, std::abs(ml_scalar(one, z) - want) / scale);
        }
    }
    for (double x = -10.0; x <= 10.0; x += 0.5) {
        const double want = std::exp(x);
        const double scale = std::max(1.0, std::abs(want));
        worst_exp = std::max(worst_exp, std::abs(ml_scalar(one, x) - want) / scale);
    }

    const double half_want = std::exp(1.0) * std::erfc(1.0);
    const double half_gap =
        std::abs(ml_scalar(MlParams(0.5), -1.0) - half_want);

    double worst_axis = 0.0;
    int points = 0;
    RngStream axis_rng(183, 0);
    for (double alpha : {0.5, 0.76, 0.96}) {
        for (double beta : {1.0, alpha}) {
            const MlParams p(alpha, beta);
            for (int i = 0; i < 34; ++i) {
                const double x = 100.0 * axis_rng.next_uniform();
                const auto ref = ml_detail::negative_axis_reference(p, x);
                const auto con =
                    ml_detail::contour_eval(p, std::complex<double>(-x, 0.0));
                if (!ref.ok || !con.ok) {
                    o.detail = "internal evaluator failed at x=" + num(x);
                    return o;
                }
                worst_axis =
                    std::max(worst_axis, std::abs(ref.value - con.value));
                ++points;
            }
        }
    }

    o.pass = worst_exp <= 1e-12 && half_gap <= 1e-10 && worst_axis <= 5e-9;
    o.detail = "exp gap " + num(worst_exp) + " (tol 1e-12), erfc gap " +
               num(half_gap) + " (tol 1e-10), series/contour gap " +
               num(worst_axis) + " on " + std::to_string(points) +
               " points (tol 5e-9)";
    return o;
}

Outcome check_lifetime_ks() {
    const auto t0 = std::chrono::steady_clock::now();
    const PhaseModel model = coxian3_model();
    const InhomogeneityTransform g = coxian3_clock();
    const FractionalClock clock(0.96);
    const int n = 1000000;
    std::vector<double> draws(n);
    for (int i = 0; i < n; ++i) {
        RngStream rng(42, static_cast<std::uint64_t>(i));
        draws[static_cast<std::size_t>(i)] = sample_lifetime(model, g, clock, rng);
    }
    std::sort(draws.begin(), draws.end());
    double ks = 0.0;
    for (int i = 0; i < n; ++i) {
        const double f = iph_cdf(model, g, clock, draws[static_cast<std::size_t>(i)]);
        ks = std::max(ks, std::max(f - static_cast<double>(i) / n,
                                   static_cast<double>(i + 1) / n - f));
    }
    const double critical = 1.63 / std::sqrt(static_cast<double>(n));
    const double secs = elapsed_s(t0);
    Outcome o;
    o.pass = ks < critical && secs < 60.0;
    o.detail = "KS " + num(ks) + " < " + num(critical) + ", " + num(secs) +
               "s < 60s";
    return o;
}

Outcome check_reserve_vs_mc() {
    const auto t0 = std::chrono::steady_clock::now();
    const PhaseModel model = coxian3_model();
    const InhomogeneityTransform g = coxian3_clock();
    double worst_se = 0.0;
    std::uint64_t seed = 4000;
    int cells = 0;
    for (int which : {0, 1}) {
        for (double n : {20.0, 60.0, 100.0}) {
            const Contract k = which == 0 ? unit_benefits_contract(n)
                                          : death_benefit_contract(n);
            for (double alpha : {1.0, 0.96, 0.8}) {
                const FractionalClock clock(alpha);
                const double analytic =
                    alpha == 1.0
                        ? reserve_markov(model, g, k, 0.0, model.pi()).value
                        : reserve_fractional_conditional(model, g, clock, k, 0.0,
                                                         0.0, 0.0, model.pi())
                              .value;
                const McEstimate est =
                    mc_reserve(model, g, clock, k, 0.0, 100000, seed++);
                worst_se = std::max(
                    worst_se, std::abs(est.mean - analytic) / est.std_error);
                ++cells;
            }
        }
    }
    const double secs = elapsed_s(t0);
    Outcome o;
    o.pass = worst_se <= 3.0 && secs < 300.0;
    o.detail = "worst deviation " + num(worst_se) + " SE over " +
               std::to_string(cells) + " cells (tol 3), " + num(secs) +
               "s < 300s";
    return o;
}

Outcome check_closed_forms() {
    double worst = 0.0;
    for (int m = 0; m < 10; ++m) {
        RngStream rng(505, static_cast<std::uint64_t>(m));
        const Eigen::Index p = 2 + (m % 4);
        const PhaseModel model = random_coxian(rng, p);
        const Contract k = random_contract(rng, p, 0.03, kInfiniteHorizon);

        const double beta = 0.4 + 3.0 * rng.next_uniform();
        const double closed_p = reserve_closed_pareto(model, beta, k).value;
        const double dual_p =
            reserve_time0_dual(model, InhomogeneityTransform::pareto_exp(beta), k)
                .value;
        worst = std::max(worst, rel_err(closed_p, dual_p));

        const double kappa = 0.1 + 2.0 * rng.next_uniform();
        const double closed_g = reserve_closed_gompertz(model, kappa, k).value;
        const double dual_g =
            reserve_time0_dual(model, InhomogeneityTransform::gompertz_log(kappa), k)
                .value;
        worst = std::max(worst, rel_err(closed_g, dual_g));
    }
    Outcome o;
    o.pass = worst <= 1e-6;
    o.detail = "max relative gap " + num(worst) + " over 10 models x 2 families "
               "(tol 1e-6)";
    return o;
}

Outcome check_orderings() {
    const PhaseModel model = coxian3_model();
    const InhomogeneityTransform g = coxian3_clock();

    std::vector<double> tails;
    for (double alpha : {0.9, 0.76, 0.6, 0.4})
        tails.push_back(iph_survival(model, g, FractionalClock(alpha), 100.0));
    bool tail_ordered = true;
    for (std::size_t i = 1; i < tails.size(); ++i)
        tail_ordered = tail_ordered && tails[i] > tails[i - 1];

    const Contract k100 = unit_benefits_contract(100.0);
    const auto curve =
        liability_curve(model, g, k100, {1.0, 0.96, 0.8}, {100.0});
    const bool liab_ordered =
        curve[1].value > curve[0].value && curve[2].value > curve[1].value;

    const Contract inf_k = unit_benefits_contract(kInfiniteHorizon);
    std::vector<double> pareto;
    for (double beta : {1.0, 10.0, 100.0})
        pareto.push_back(reserve_closed_pareto(model, beta, inf_k).value);
    const bool pareto_ordered = pareto[1] > pareto[0] && pareto[2] > pareto[1];

    Outcome o;
    o.pass = tail_ordered && liab_ordered && pareto_ordered;
    o.detail = "tail at 100: " + num(tails[0]) + " < " + num(tails[1]) + " < " +
               num(tails[2]) + " < " + num(tails[3]) + "; liabilities " +
               num(curve[0].value) + " < " + num(curve[1].value) + " < " +
               num(curve[2].value) + "; pareto " + num(pareto[0]) + " < " +
               num(pareto[1]) + " < " + num(pareto[2]);
    return o;
}

Outcome check_fair_premium() {
    double worst = 0.0;
    const InhomogeneityTransform id = InhomogeneityTransform::identity();
    for (int m = 0; m < 20; ++m) {
        RngStream rng(707, static_cast<std::uint64_t>(m));
        const Eigen::Index p = 2 + (m % 4);
        const PhaseModel model = random_coxian(rng, p);
        Contract k = random_contract(rng, p, 0.03,
                                     m % 4 == 3 ? kInfiniteHorizon
                                                : 10.0 + 20.0 * rng.next_uniform());
        const Eigen::MatrixXd& T = model.T().matrix();
        k.c = k.a + T.cwiseProduct(k.B).rowwise().sum() +
              model.T().exit_vector().cwiseProduct(k.b);
        worst = std::max(
            worst, std::abs(reserve_markov(model, id, k, 0.0, model.pi()).value));
    }

    const PhaseModel model = coxian3_model();
    const InhomogeneityTransform g = coxian3_clock();
    const FractionalClock clock(0.96);
    Contract k = unit_benefits_contract(60.0);
    const Eigen::VectorXd rate = fair_premium(model, g, clock, k, {0});
    k.c = rate;
    const McEstimate est = mc_reserve(model, g, clock, k, 0.0, 100000, 7100);
    const double mc_se = std::abs(est.mean) / est.std_error;

    Outcome o;
    o.pass = worst <= 1e-9 && mc_se <= 3.0;
    o.detail = "natural premium |Y0| max " + num(worst) +
               " (tol 1e-9); restricted premium MC deviation " + num(mc_se) +
               " SE (tol 3)";
    return o;
}

std::string capture(const std::string& command, int& status) {
    std::string out;
    FILE* pipe = popen((command + " 2>&1").c_str(), "r");
    if (!pipe) {
        status = -1;
        return out;
    }
    std::array<char, 4096> buf;
    while (std::size_t n = fread(buf.data(), 1, buf.size(), pipe))
        out.append(buf.data(), n);
    const int rc = pclose(pipe);
    status = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    return out;
}

Outcome check_mc_determinism() {
    const std::string cli = "'" + std::string(FRACLIFE_CLI_PATH) + "'";
    const std::string dir = FRACLIFE_SAMPLES_DIR;
    const std::string args = " mc '" + dir + "/coxian3_gompertz.json' '" + dir +
                             "/unit_benefits.json' --paths 20000 --seed 66";
    Outcome o;
    std::vector<std::string> outputs;
    for (const char* workers : {"1", "4", "8", "4"}) {
        int status = -1;
        const std::string got =
            capture("FRACLIFE_THREADS=" + std::string(workers) + " " + cli + args,
                    status);
        if (status != 0) {
            o.detail = "cli exited with status " + std::to_string(status);
            return o;
        }
        outputs.push_back(got);
    }
    o.pass = outputs[1] == outputs[0] && outputs[2] == outputs[0] &&
             outputs[3] == outputs[0] && !outputs[0].empty();
    o.detail = o.pass ? "identical bytes across workers 1/4/8 and a rerun"
                      : "outputs differ across worker counts";
    return o;
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"fractional reserves at alpha=1 match markov reserves "
         "(20 models x 3 transforms)",
         check_degeneration},
        {"scalar mittag-leffler special cases and series/contour agreement",
         check_scalar_ml},
        {"simulated lifetimes match the analytic cdf (1e6 draws, KS 1% level)",
         check_lifetime_ks},
        {"analytic reserves within 3 SE of 1e5-path monte carlo "
         "(2 contracts x 3 horizons x 3 alphas)",
         check_reserve_vs_mc},
        {"pareto and gompertz closed forms match the dual quadrature",
         check_closed_forms},
        {"heavier fractional tails order survival, liabilities and "
         "pareto reserves",
         check_orderings},
        {"fair premiums zero the time-0 reserve (analytic and monte carlo)",
         check_fair_premium},
        {"monte carlo output is byte-identical across reruns and 1/4/8 workers",
         check_mc_determinism},
    };

    bool all = true;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        std::printf("%s  %zu. %s [%s]\n", o.pass ? "PASS" : "FAIL", i + 1,
                    criteria[i].first.c_str(), o.detail.c_str());
        std::fflush(stdout);
        all = all && o.pass;
    }
    return all ? 0 : 1;
}
