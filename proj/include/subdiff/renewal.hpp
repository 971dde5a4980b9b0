#pragma once

#include <vector>

#include "subdiff/core.hpp"
#include "subdiff/fit.hpp"
#include "subdiff/model.hpp"
#include "subdiff/special.hpp"

namespace subdiff {

struct AgeGrid {
    double da = 0;
    double a_max = 0;
    std::size_t n_cells = 0;
};

// cell masses of n(t, a) on [j da, (j+1) da); `tail` is mass beyond a_max
struct AgeDensity {
    double t = 0;
    AgeGrid grid;
    std::vector<double> mass;
    double tail = 0;
    double boundary = 0;

    double total() const;
};

// N(t_j). cell_average: values[j] is the mean rate over (t_{j-1}, t_j] (j >= 1),
// otherwise point values on the nodes
struct BoundarySeries {
    UniformTimeGrid grid;
    std::vector<double> values;
    bool cell_average = false;
};

struct RenewalResult {
    BoundarySeries N;
    std::vector<AgeDensity> snapshots;
    double max_mass_error = 0;  // relative, over all steps
    double max_N = 0;
};

// age transport along characteristics with dt = da. Jumpers live in birth cohorts that
// shift one cell per step with exact cell survival factors; the initial cohort is aged
// analytically, so nothing is truncated.
RenewalResult solve_renewal(const SurvivalModel& m, const AgeProfile& n0, double T, double dt,
                            const std::vector<double>& snapshot_times = {}, double da = -1);

// N = phi*N + int phi(a+t)/psi(a) n0(a) da, product trapezoid with exact phi moments
BoundarySeries boundary_volterra(const SurvivalModel& m, const AgeProfile& n0, const UniformTimeGrid& grid);

struct PsiConvolutionCheck {
    Series residual;  // |psi*N(t) - total0| at log-spaced nodes
    double C = 0;     // sup over t in [1, 100] of residual * (1+t)^alpha
    double bound_ratio = 0;  // sup over t >= 100 of residual * (1+t)^alpha / C
    PowerFit decay;   // fit over [1e2, min(1e4, t_max)], left empty when t_max < 1e3
};

PsiConvolutionCheck check_psi_convolution(const BoundarySeries& N, const SurvivalModel& m, double total0);

struct ConvolutionAsymptotics {
    Series ratio;  // (N*Y_mu)(t) / Y_{mu+alpha}(t)
    double limit = 0;  // total0 / (Psi Gamma(1-alpha))
    double final_rel_dev = 0;
};

ConvolutionAsymptotics convol_asymptotics(const BoundarySeries& N, double mu, const SurvivalModel& m, double total0);

// (psi*N)(t_n) under the series' own interpolation rule
double psi_convolution_at(const BoundarySeries& N, const SurvivalModel& m, std::size_t n);

}  // namespace subdiff
