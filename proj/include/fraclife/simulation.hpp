#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "fraclife/distributions.hpp"
#include "fraclife/reserve.hpp"
#include "fraclife/rng.hpp"
#include "fraclife/transforms.hpp"

namespace fraclife {

// One simulated trajectory of the jump process on the observed time scale.
// states holds the embedded chain with the absorbing state reported as index
// p (one past the transient block); entry_times[k] is when states[k] was
// entered, starting at 0.  Jumps landing at or beyond the simulation horizon
// are dropped, so absorbed is true iff the recorded sequence ends in the
// absorbing index.
struct PathSample {
    std::vector<Eigen::Index> states;
    std::vector<double> entry_times;
    bool absorbed = false;
    double discounted_annuity = 0.0;
    double discounted_lumps = 0.0;
};

// Discounted payment totals of a single path, split by payment kind.
struct PaymentTotals {
    double annuity = 0.0;
    double lumps = 0.0;
};

// Monte Carlo summary.  mean is exactly annuity_mean + lump_mean; std_error
// is the sample standard deviation of the per-path totals divided by
// sqrt(paths).
struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    double annuity_mean = 0.0;
    double lump_mean = 0.0;
    std::uint64_t paths = 0;
    std::uint64_t seed = 0;
};

/// Simulates one path up to the horizon.  Sojourns are exponential with the
/// diagonal rates; when the clock is fractional each sojourn is dilated by
/// W^(1/alpha) times an independent one-sided stable draw, and cumulative
/// operational time is mapped through g.
PathSample simulate_path(const PhaseModel& model, const InhomogeneityTransform& g,
                         const FractionalClock& clock, double horizon,
                         RngStream& rng);

/// Accumulates the contract's discounted payments along a path, counting only
/// payments inside [t_start, horizon) and discounting to time 0.  Annuity
/// minus premium accrues per sojourn in closed form; lumps are discounted at
/// the jump instants; nothing accrues after absorption.  The path must have
/// been simulated to at least the contract horizon.
PaymentTotals accrue_payments(const PathSample& path, const Contract& contract,
                              double t_start);

/// Monte Carlo reserve at time t: the mean discounted payment stream on
/// [t, horizon), discounted to t, conditioned on survival past t by rejection
/// resampling.  Each path index gets its own substream of seed, so the result
/// is bit-identical for fixed (seed, paths) under any worker count; workers
/// <= 0 reads the FRACLIFE_THREADS environment variable, falling back to the
/// hardware count.  Throws Error(InvalidArgument) when paths < 100,
/// Error(HorizonBeforeT) when t is not before the contract horizon, and
/// Error(AllAbsorbed) when more than 99.9% of candidate paths are rejected.
McEstimate mc_reserve(const PhaseModel& model, const InhomogeneityTransform& g,
                      const FractionalClock& clock, const Contract& contract,
                      double t, std::uint64_t paths, std::uint64_t seed,
                      int workers = 0);

} // namespace fraclife
