#pragma once

#include <array>
#include <optional>
#include <vector>

#include "subdiff/core.hpp"
#include "subdiff/fit.hpp"
#include "subdiff/lattice.hpp"
#include "subdiff/model.hpp"

namespace subdiff {

struct MsdSeries {
    std::vector<double> t, msd, stderr_, n;

    std::size_t size() const { return t.size(); }
    Series as_series() const { return {t, msd}; }
};

struct CtrwOptions {
    AgeProfile ages = AgeProfile::dirac();
    std::optional<GridMeasure> rho0;          // start positions drawn from it; origin otherwise
    std::optional<SpaceLattice> histogram;    // bin positions on this lattice at every snapshot
    bool keep_positions = false;              // per-particle positions (for msd_estimate)
    double memory_budget = 1e9;               // bytes for histograms and kept positions
    std::size_t chunk = 4096;                 // particles per RNG/merge chunk
};

struct EnsembleSnapshot {
    double t = 0;
    std::vector<std::array<double, 2>> origin;    // x(0) per particle
    std::vector<std::array<double, 2>> position;  // x(t) per particle
};

struct CtrwResult {
    MsdSeries msd;                      // |x(t) - x(0)|^2
    Series mean_x;                      // ensemble mean of the x displacement
    Series sd_x;                        // its per-particle standard deviation
    std::vector<GridMeasure> snapshots; // empirical densities (when a histogram lattice is given)
    std::vector<EnsembleSnapshot> ensemble;
    std::size_t jumps = 0;
    std::size_t outside = 0;  // histogram entries that wrapped around the period
};

// event-driven CTRW: waiting times scaled by eps^(2/alpha), jumps by eps. Snapshots at the given
// times (default: 10^(k/8) up to T). Particle i uses RNG stream (seed, i); chunk results are merged
// in chunk order, so the output does not depend on the thread count.
CtrwResult simulate(const SurvivalModel& m, const JumpKernel& k, double eps, std::size_t n_particles, double T,
                    std::uint64_t seed, std::vector<double> snapshot_times = {}, const CtrwOptions& opts = {});

enum class Origin { initial, ensemble_mean };
MsdSeries msd_estimate(const std::vector<EnsembleSnapshot>& snaps, Origin origin = Origin::initial);

// weighted least squares of log msd vs log t with weights (msd / stderr)^2
PowerFit fit_power_law(const MsdSeries& s, double lo, double hi, bool weighted = true);

}  // namespace subdiff
