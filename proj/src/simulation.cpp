#include "fraclife/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>

#include "fraclife/detail/compensated.hpp"
#include "fraclife/errors.hpp"

namespace fraclife {

namespace {

// A slot exhausting this many rejection attempts is treated as evidence that
// conditioning is infeasible (acceptance well below the 0.1% floor).
constexpr std::uint32_t kMaxAttempts = 10000;

Eigen::Index draw_initial(const Eigen::RowVectorXd& pi, RngStream& rng) {
    const double draw = rng.next_uniform();
    double acc = 0.0;
    Eigen::Index state = -1;
    for (Eigen::Index i = 0; i < pi.size(); ++i) {
        if (pi[i] <= 0.0) continue;
        acc += pi[i];
        state = i;
        if (draw <= acc) break;
    }
    return state;
}

unsigned default_workers() {
    if (const char* s = std::getenv("FRACLIFE_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(s, &end, 10);
        if (end != s && *end == '\0' && v > 0 && v <= 4096)
            return static_cast<unsigned>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

struct SlotResult {
    double annuity = 0.0;
    double lumps = 0.0;
    std::uint32_t attempts = 0;
    bool exhausted = false;
};

SlotResult run_slot(const PhaseModel& model, const InhomogeneityTransform& g,
                    const FractionalClock& clock, const Contract& contract,
                    double t, double scale, std::uint64_t seed,
                    std::uint64_t slot) {
    RngStream rng(seed, slot);
    SlotResult out;
    while (out.attempts < kMaxAttempts) {
        ++out.attempts;
        PathSample path = simulate_path(model, g, clock, contract.horizon, rng);
        if (t > 0.0 && path.absorbed && path.entry_times.back() <= t) continue;
        const PaymentTotals pay = accrue_payments(path, contract, t);
        out.annuity = pay.annuity * scale;
        out.lumps = pay.lumps * scale;
        return out;
    }
    out.exhausted = true;
    return out;
}

} // namespace

PathSample simulate_path(const PhaseModel& model, const InhomogeneityTransform& g,
                         const FractionalClock& clock, double horizon,
                         RngStream& rng) {
    const Eigen::MatrixXd& T = model.T().matrix();
    const Eigen::VectorXd& exit = model.T().exit_vector();
    const Eigen::Index p = model.dim();
    const bool frac = clock.fractional();
    const double alpha = clock.alpha();

    PathSample path;
    Eigen::Index state = draw_initial(model.pi(), rng);
    path.states.push_back(state);
    path.entry_times.push_back(0.0);

    double zcum = 0.0;
    while (true) {
        const double rate = -T(state, state);
        double w = rng.next_exponential() / rate;
        if (frac) w = std::pow(w, 1.0 / alpha) * sample_one_sided_stable(alpha, rng);
        zcum += w;
        const double tnext = g.g(zcum);
        if (!(tnext < horizon)) break;

        // Off-diagonal segments first, absorption as the tail segment.
        const double draw = rng.next_uniform() * rate;
        double acc = 0.0;
        Eigen::Index next = -1;
        Eigen::Index last_jump = -1;
        for (Eigen::Index j = 0; j < p && next < 0; ++j) {
            if (j == state || T(state, j) <= 0.0) continue;
            acc += T(state, j);
            last_jump = j;
            if (draw <= acc) next = j;
        }
        if (next < 0 && exit[state] <= 0.0) next = last_jump;

        if (next < 0) {
            path.states.push_back(p);
            path.entry_times.push_back(tnext);
            path.absorbed = true;
            break;
        }
        path.states.push_back(next);
        path.entry_times.push_back(tnext);
        state = next;
    }
    return path;
}

PaymentTotals accrue_payments(const PathSample& path, const Contract& contract,
                              double t_start) {
    const double r = contract.r;
    const double n = contract.horizon;
    const Eigen::Index p = contract.a.size();
    PaymentTotals out;

    const std::size_t m = path.states.size();
    for (std::size_t i = 0; i < m; ++i) {
        const Eigen::Index s = path.states[i];
        if (s == p) break;

        const bool last = (i + 1 == m);
        const double lo = std::max(path.entry_times[i], t_start);
        const double hi = std::min(last ? n : path.entry_times[i + 1], n);
        if (hi > lo) {
            const double net = contract.a[s] - contract.c[s];
            if (net != 0.0) {
                out.annuity += (r == 0.0)
                                   ? net * (hi - lo)
                                   : net * (std::exp(-r * lo) - std::exp(-r * hi)) / r;
            }
        }

        if (!last) {
            const double when = path.entry_times[i + 1];
            if (when >= t_start && when < n) {
                const Eigen::Index to = path.states[i + 1];
                const double lump = (to == p) ? contract.b[s] : contract.B(s, to);
                if (lump != 0.0) out.lumps += lump * std::exp(-r * when);
            }
        }
    }
    return out;
}

McEstimate mc_reserve(const PhaseModel& model, const InhomogeneityTransform& g,
                      const FractionalClock& clock, const Contract& contract,
                      double t, std::uint64_t paths, std::uint64_t seed,
                      int workers) {
    validate_contract(contract, model.dim());
    if (!std::isfinite(t) || t < 0.0)
        throw Error(ErrorCode::InvalidArgument,
                    "mc_reserve: conditioning time must be finite and nonnegative");
    if (t > 0.0 && t >= contract.horizon)
        throw Error(ErrorCode::HorizonBeforeT,
                    "mc_reserve: conditioning time " + std::to_string(t) +
                        " is not before the contract horizon");
    if (paths < 100)
        throw Error(ErrorCode::InvalidArgument,
                    "mc_reserve: at least 100 paths required, got " +
                        std::to_string(paths));

    const double scale = (t > 0.0) ? std::exp(contract.r * t) : 1.0;

    // Pilot on slot 0 so hopeless conditioning fails fast instead of after
    // the whole batch has spun through its attempt budget.
    if (t > 0.0 && run_slot(model, g, clock, contract, t, scale, seed, 0).exhausted)
        throw Error(ErrorCode::AllAbsorbed,
                    "mc_reserve: conditioning on survival past t rejected "
                    "nearly every path");

    std::vector<SlotResult> slots(paths);
    unsigned nw = workers > 0 ? static_cast<unsigned>(workers) : default_workers();
    if (static_cast<std::uint64_t>(nw) > paths) nw = static_cast<unsigned>(paths);

    auto work = [&](std::uint64_t lo, std::uint64_t hi) {
        for (std::uint64_t slot = lo; slot < hi; ++slot)
            slots[slot] = run_slot(model, g, clock, contract, t, scale, seed, slot);
    };

    if (nw <= 1) {
        work(0, paths);
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(nw);
        const std::uint64_t chunk = (paths + nw - 1) / nw;
        for (unsigned w = 0; w < nw; ++w) {
            const std::uint64_t lo = w * chunk;
            const std::uint64_t hi = std::min(paths, lo + chunk);
            pool.emplace_back([&, w, lo, hi] {
                try {
                    work(lo, hi);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
        for (auto& th : pool) th.join();
        for (auto& err : errors)
            if (err) std::rethrow_exception(err);
    }

    std::uint64_t attempts = 0;
    bool exhausted = false;
    for (const SlotResult& s : slots) {
        attempts += s.attempts;
        exhausted = exhausted || s.exhausted;
    }
    const double rejected = static_cast<double>(attempts - paths);
    if (exhausted || (t > 0.0 && rejected > 0.999 * static_cast<double>(attempts)))
        throw Error(ErrorCode::AllAbsorbed,
                    "mc_reserve: conditioning on survival past t rejected " +
                        std::to_string(100.0 * rejected / static_cast<double>(attempts)) +
                        "% of paths");

    detail::KahanSum<double> ann_sum;
    detail::KahanSum<double> lump_sum;
    for (const SlotResult& s : slots) {
        ann_sum.add(s.annuity);
        lump_sum.add(s.lumps);
    }

    McEstimate est;
    est.paths = paths;
    est.seed = seed;
    est.annuity_mean = ann_sum.value() / static_cast<double>(paths);
    est.lump_mean = lump_sum.value() / static_cast<double>(paths);
    est.mean = est.annuity_mean + est.lump_mean;

    detail::KahanSum<double> m2;
    for (const SlotResult& s : slots) {
        const double d = (s.annuity + s.lumps) - est.mean;
        m2.add(d * d);
    }
    const double np = static_cast<double>(paths);
    est.std_error = std::sqrt(std::max(0.0, m2.value()) / (np - 1.0)) / std::sqrt(np);
    return est;
}

} // namespace fraclife
