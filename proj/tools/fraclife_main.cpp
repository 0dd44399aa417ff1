#include <charconv>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fraclife/distributions.hpp"
#include "fraclife/errors.hpp"
#include "fraclife/model_io.hpp"
#include "fraclife/reserve.hpp"
#include "fraclife/simulation.hpp"
#include "fraclife/transforms.hpp"

namespace {

using namespace fraclife;

// 12 significant digits, '.' decimal point, locale-free.
std::string fmt(double v) {
    char buf[48];
    const auto res =
        std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 12);
    return std::string(buf, res.ptr);
}

// Exit 2: the request itself is unusable (files, flags, conditioning).
// Exit 3: the request is well-posed but the computation failed.
int exit_code_for(ErrorCode c) {
    switch (c) {
        case ErrorCode::Parse:
        case ErrorCode::InvalidArgument:
        case ErrorCode::InconsistentConditioning:
        case ErrorCode::HorizonBeforeT:
        case ErrorCode::NonSquare:
        case ErrorCode::SignPattern:
        case ErrorCode::RowSumViolation:
            return 2;
        default:
            return 3;
    }
}

template <typename F>
int guarded(F&& body) {
    try {
        body();
        return 0;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << " [" << error_code_name(e.code())
                  << "]\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}

double parse_double_token(const std::string& token, const std::string& what) {
    double out = 0.0;
    const char* begin = token.data();
    const char* end = begin + token.size();
    const auto res = std::from_chars(begin, end, out);
    if (token.empty() || res.ec != std::errc() || res.ptr != end)
        throw Error(ErrorCode::Parse,
                    "malformed " + what + " \"" + token + "\"");
    return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::size_t pos = 0;
    while (true) {
        const std::size_t next = s.find(sep, pos);
        if (next == std::string::npos) {
            parts.push_back(s.substr(pos));
            return parts;
        }
        parts.push_back(s.substr(pos, next - pos));
        pos = next + 1;
    }
}

std::vector<double> parse_grid(const std::string& spec) {
    const auto parts = split(spec, ':');
    if (parts.size() != 3)
        throw Error(ErrorCode::Parse, "malformed grid \"" + spec +
                                          "\"; expected start:stop:step");
    const double start = parse_double_token(parts[0], "grid start");
    const double stop = parse_double_token(parts[1], "grid stop");
    const double step = parse_double_token(parts[2], "grid step");
    if (!std::isfinite(start) || !std::isfinite(stop) || !(step > 0.0) ||
        !std::isfinite(step) || stop < start)
        throw Error(ErrorCode::Parse,
                    "malformed grid \"" + spec +
                        "\"; need finite start <= stop and step > 0");
    const double count = std::floor((stop - start) / step * (1.0 + 1e-12) + 1e-9);
    if (count > 1e7)
        throw Error(ErrorCode::Parse, "grid \"" + spec + "\" has too many points");
    std::vector<double> pts;
    pts.reserve(static_cast<std::size_t>(count) + 1);
    for (long long i = 0; i <= static_cast<long long>(count); ++i)
        pts.push_back(start + static_cast<double>(i) * step);
    return pts;
}

std::vector<double> parse_double_list(const std::string& spec,
                                      const std::string& what) {
    std::vector<double> out;
    if (spec.empty()) return out;
    for (const std::string& token : split(spec, ','))
        out.push_back(parse_double_token(token, what));
    return out;
}

ReservePath reserve_path_of(const std::string& method) {
    if (method == "spectral") return ReservePath::Spectral;
    if (method == "quadrature") return ReservePath::Quadrature;
    return ReservePath::Auto;
}

struct ReserveArgs {
    std::string model_path;
    std::string contract_path;
    double t = 0.0;
    double u = 0.0;
    double v = 0.0;
    bool has_u = false;
    bool has_v = false;
    std::string method = "auto";
};

void run_reserve(const ReserveArgs& a) {
    const ModelFile mf = load_model_file(a.model_path);
    const Contract k = load_contract_file(a.contract_path, mf.model.dim());
    if (!std::isfinite(a.t) || a.t < 0.0)
        throw Error(ErrorCode::InvalidArgument, "--time must be finite and >= 0");

    ReserveReport rep;
    if (a.method == "dual") {
        if (a.t != 0.0 || a.has_u || a.has_v)
            throw Error(ErrorCode::InvalidArgument,
                        "--method dual computes the time-0 reserve; drop "
                        "--time/--u/--v");
        rep = mf.clock.fractional()
                  ? reserve_fractional_time0(mf.model, mf.transform, mf.clock, k)
                  : reserve_time0_dual(mf.model, mf.transform, k);
    } else if (!mf.clock.fractional() && !a.has_u && !a.has_v) {
        rep = reserve_markov(mf.model, mf.transform, k, a.t, mf.model.pi(),
                             reserve_path_of(a.method));
    } else {
        if (a.method == "spectral")
            throw Error(ErrorCode::InvalidArgument,
                        "the spectral method covers alpha = 1 without --u/--v; "
                        "use auto or quadrature here");
        if (!a.has_u && a.t > 0.0)
            throw Error(ErrorCode::InvalidArgument,
                        "a fractional reserve at t > 0 needs the operational "
                        "conditioning point --u");
        rep = reserve_fractional_conditional(mf.model, mf.transform, mf.clock, k,
                                             a.t, a.has_u ? a.u : 0.0,
                                             a.has_v ? a.v : 0.0, mf.model.pi());
    }

    std::cout << "value,annuity,lumps,method,error_estimate\n"
              << fmt(rep.value) << ',' << fmt(rep.annuity_component) << ','
              << fmt(rep.lump_component) << ',' << reserve_method_name(rep.method)
              << ',' << fmt(rep.quadrature_error_estimate) << '\n';
}

struct DistArgs {
    std::string model_path;
    std::string what = "cdf";
    std::string grid;
};

void run_dist(const DistArgs& a) {
    const ModelFile mf = load_model_file(a.model_path);
    const std::vector<double> grid = parse_grid(a.grid);

    if (a.what == "pdf") {
        std::cout << "x,value,singular\n";
        for (double x : grid) {
            const DensityValue d = iph_pdf(mf.model, mf.transform, mf.clock, x);
            std::cout << fmt(x) << ',' << fmt(d.value) << ','
                      << (d.singular_at_zero ? '1' : '0') << '\n';
        }
        return;
    }

    double (*eval)(const PhaseModel&, const InhomogeneityTransform&,
                   const FractionalClock&, double) = nullptr;
    if (a.what == "cdf")
        eval = iph_cdf;
    else if (a.what == "survival")
        eval = iph_survival;
    else if (a.what == "hazard")
        eval = hazard;
    else
        throw Error(ErrorCode::InvalidArgument,
                    "--what must be cdf, pdf, survival or hazard");

    std::cout << "x,value\n";
    for (double x : grid)
        std::cout << fmt(x) << ','
                  << fmt(eval(mf.model, mf.transform, mf.clock, x)) << '\n';
}

struct McArgs {
    std::string model_path;
    std::string contract_path;
    double t = 0.0;
    std::uint64_t paths = 10000;
    std::uint64_t seed = 1;
};

void run_mc(const McArgs& a) {
    const ModelFile mf = load_model_file(a.model_path);
    const Contract k = load_contract_file(a.contract_path, mf.model.dim());
    if (a.paths < 100)
        throw Error(ErrorCode::InvalidArgument, "--paths must be at least 100");
    const McEstimate est =
        mc_reserve(mf.model, mf.transform, mf.clock, k, a.t, a.paths, a.seed);
    std::cout << "mean,std_error,paths,seed\n"
              << fmt(est.mean) << ',' << fmt(est.std_error) << ','
              << est.paths << ',' << est.seed << '\n';
}

struct CurveArgs {
    std::string model_path;
    std::string contract_path;
    std::string alphas;
    std::string n_grid;
    bool zero_premiums = false;
};

void run_liability_curve(const CurveArgs& a) {
    const ModelFile mf = load_model_file(a.model_path);
    Contract k = load_contract_file(a.contract_path, mf.model.dim());

    const std::vector<double> alphas = parse_double_list(a.alphas, "alpha");
    if (alphas.empty())
        throw Error(ErrorCode::InvalidArgument, "--alphas must list at least one value");
    for (double alpha : alphas)
        if (!(alpha > 0.0) || alpha > 1.0)
            throw Error(ErrorCode::InvalidArgument,
                        "--alphas entries must lie in (0, 1]");
    const std::vector<double> n_grid = parse_grid(a.n_grid);

    if (k.c.lpNorm<1>() != 0.0) {
        if (!a.zero_premiums)
            throw Error(ErrorCode::InvalidArgument,
                        "contract premiums are nonzero; pass --zero-premiums to "
                        "price the liabilities alone");
        k.c.setZero();
    }

    std::cout << "alpha,n,liability\n";
    for (const LiabilityPoint& pt :
         liability_curve(mf.model, mf.transform, k, alphas, n_grid))
        std::cout << fmt(pt.alpha) << ',' << fmt(pt.n) << ',' << fmt(pt.value)
                  << '\n';
}

struct PremiumArgs {
    std::string model_path;
    std::string contract_path;
    std::string states;
    std::string profile;
    bool has_states = false;
    bool has_profile = false;
};

void run_fair_premium(const PremiumArgs& a) {
    const ModelFile mf = load_model_file(a.model_path);
    const Contract k = load_contract_file(a.contract_path, mf.model.dim());
    const Eigen::Index p = mf.model.dim();

    std::vector<Eigen::Index> collectible;
    if (a.has_states) {
        for (const std::string& token : split(a.states, ',')) {
            const double v = parse_double_token(token, "state index");
            if (v != std::floor(v) || v < 0.0 || v >= static_cast<double>(p))
                throw Error(ErrorCode::InvalidArgument,
                            "--states entries must be state indices in [0, " +
                                std::to_string(p - 1) + "]");
            collectible.push_back(static_cast<Eigen::Index>(v));
        }
    } else {
        for (Eigen::Index i = 0; i < p; ++i) collectible.push_back(i);
    }

    Eigen::VectorXd profile;
    if (a.has_profile) {
        const std::vector<double> w = parse_double_list(a.profile, "profile weight");
        if (static_cast<Eigen::Index>(w.size()) != p)
            throw Error(ErrorCode::InvalidArgument,
                        "--profile must list one weight per state");
        profile = Eigen::Map<const Eigen::VectorXd>(w.data(), p);
    }

    const Eigen::VectorXd rate =
        fair_premium(mf.model, mf.transform, mf.clock, k, collectible, profile);
    std::cout << "state,premium_rate\n";
    for (Eigen::Index i = 0; i < p; ++i)
        std::cout << i << ',' << fmt(rate[i]) << '\n';
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-state life insurance reserves under Markov and "
                 "fractional phase-type lifetime models"};
    app.require_subcommand(1);

    ReserveArgs res;
    CLI::App* cmd_reserve =
        app.add_subcommand("reserve", "Analytic reserve at a given time");
    cmd_reserve->add_option("model", res.model_path, "model JSON file")->required();
    cmd_reserve->add_option("contract", res.contract_path, "contract JSON file")
        ->required();
    cmd_reserve->add_option("--time", res.t, "evaluation time t >= 0");
    CLI::Option* opt_u = cmd_reserve->add_option(
        "--u", res.u, "operational conditioning point (fractional clock)");
    CLI::Option* opt_v = cmd_reserve->add_option(
        "--v", res.v, "inverse-subordinator conditioning value");
    cmd_reserve->add_option("--method", res.method, "auto|spectral|quadrature|dual")
        ->check(CLI::IsMember({"auto", "spectral", "quadrature", "dual"}));

    DistArgs dist;
    CLI::App* cmd_dist =
        app.add_subcommand("dist", "Lifetime distribution curves as CSV");
    cmd_dist->add_option("model", dist.model_path, "model JSON file")->required();
    cmd_dist->add_option("--what", dist.what, "cdf|pdf|survival|hazard")
        ->check(CLI::IsMember({"cdf", "pdf", "survival", "hazard"}));
    cmd_dist->add_option("--grid", dist.grid, "evaluation grid start:stop:step")
        ->required();

    McArgs mc;
    CLI::App* cmd_mc =
        app.add_subcommand("mc", "Monte Carlo reserve estimate");
    cmd_mc->add_option("model", mc.model_path, "model JSON file")->required();
    cmd_mc->add_option("contract", mc.contract_path, "contract JSON file")
        ->required();
    cmd_mc->add_option("--time", mc.t, "evaluation time t >= 0");
    cmd_mc->add_option("--paths", mc.paths, "number of simulated paths (>= 100)");
    cmd_mc->add_option("--seed", mc.seed, "random seed");

    CurveArgs curve;
    CLI::App* cmd_curve = app.add_subcommand(
        "liability-curve", "Expected discounted liabilities over alpha and n");
    cmd_curve->add_option("model", curve.model_path, "model JSON file")->required();
    cmd_curve->add_option("contract", curve.contract_path, "contract JSON file")
        ->required();
    cmd_curve->add_option("--alphas", curve.alphas,
                          "comma-separated fractional exponents in (0, 1]")
        ->required();
    cmd_curve->add_option("--n-grid", curve.n_grid, "horizon grid start:stop:step")
        ->required();
    cmd_curve->add_flag("--zero-premiums", curve.zero_premiums,
                        "ignore the contract's premium rates");

    PremiumArgs prem;
    CLI::App* cmd_prem = app.add_subcommand(
        "fair-premium", "Premium rates that zero the time-0 reserve");
    cmd_prem->add_option("model", prem.model_path, "model JSON file")->required();
    cmd_prem->add_option("contract", prem.contract_path, "contract JSON file")
        ->required();
    CLI::Option* opt_states = cmd_prem->add_option(
        "--states", prem.states, "comma-separated collectible state indices (0-based)");
    CLI::Option* opt_profile = cmd_prem->add_option(
        "--profile", prem.profile, "comma-separated premium weights, one per state");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    res.has_u = opt_u->count() > 0;
    res.has_v = opt_v->count() > 0;
    prem.has_states = opt_states->count() > 0;
    prem.has_profile = opt_profile->count() > 0;

    if (cmd_reserve->parsed()) return guarded([&] { run_reserve(res); });
    if (cmd_dist->parsed()) return guarded([&] { run_dist(dist); });
    if (cmd_mc->parsed()) return guarded([&] { run_mc(mc); });
    if (cmd_curve->parsed()) return guarded([&] { run_liability_curve(curve); });
    if (cmd_prem->parsed()) return guarded([&] { run_fair_premium(prem); });
    return 2;
}
