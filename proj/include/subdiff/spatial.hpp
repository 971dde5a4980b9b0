#pragma once

#include <vector>

#include "subdiff/core.hpp"
#include "subdiff/lattice.hpp"
#include "subdiff/model.hpp"
#include "subdiff/special.hpp"

namespace subdiff {

// internal (fast) time tau = eps^(-2/alpha) t. The tau mesh is uniform with step `da` up to
// `a_uniform`, then geometric with ratio `growth`; requested output times are inserted.
struct AgeMeshSpec {
    double da = 0.25;
    double a_uniform = 10;
    double growth = 1.01;
};

struct SpatialOptions {
    AgeMeshSpec mesh;
    std::vector<std::vector<double>> pair_with;  // test functions paired at every mesh node
    bool keep_modes = false;                     // keep per-mode boundary series (jumpers_part needs them)
    bool keep_all_nodes = false;                 // snapshot at every mesh node, not only the outputs
    double clip = 1e-12;                         // negatives above -clip * max are round-off
};

// per distinct z = w^(eps k): cell averages of the arrival rate in tau, one series per
// initial-condition piece (piece-major)
struct ModeState {
    std::vector<cplx> z;
    std::vector<std::size_t> mode_of;  // lattice index -> position in z
    std::vector<std::vector<std::vector<cplx>>> boundary;  // [piece][group][cell]
};

struct SpatialSolution {
    double eps = 1;
    double time_scale = 1;  // eps^(2/alpha): t = time_scale * tau
    TimeMesh tau;           // internal mesh
    TimeMesh t;             // the same nodes in physical time
    Trajectory traj;
    std::vector<Series> pairings;       // <rho(t), phi>
    std::vector<Series> dual_pairings;  // <rho(t), dual Laplacian of phi>
    ModeState modes;
    double max_mass_error = 0;  // relative, over stored snapshots
    std::size_t clipped = 0;    // round-off negatives set to zero
    double min_value = 0;       // most negative value left after clipping (0 if none)
};

// rescaled age-structured jump model on a periodic lattice, mode by mode.
// Physical horizon T; output_times are physical.
SpatialSolution solve_agepde(const SurvivalModel& m, const JumpKernel& k, const InitialCondition& r0, double eps,
                             double T, const std::vector<double>& output_times, const SpatialOptions& opts = {});

// contribution of particles that jumped at least once, per lattice mode, at a mesh node time t
std::vector<cplx> jumpers_part(const SpatialSolution& sol, const SurvivalModel& m, const InitialCondition& r0,
                               double t);
// particles still carrying their initial age: int psi(a + tau)/psi(a) r0^(a, k) da
std::vector<cplx> nonjumpers_part(const InitialCondition& r0, const SurvivalModel& m, double eps, double t);

// eps^-2 sum_z w(z) (phi(x + eps z) - phi(x)); real-space shifts when eps z lands on the
// lattice, the Fourier symbol otherwise
std::vector<double> dual_discrete_laplacian(const JumpKernel& k, double eps, const SpaceLattice& lat,
                                            const std::vector<double>& phi);

// sup_t |P(t) - P(0) - coeff (Y_alpha * Q)(t)| with P = <rho, phi>, Q = <rho, dual Laplacian phi>,
// coeff = 2 d D_alpha / sigma2
double weak_form_residual(const Series& P, const Series& Q, double alpha, double coeff);
double weak_form_residual(const Trajectory& traj, const std::vector<double>& phi, const SurvivalModel& m,
                          const JumpKernel& k, double eps, double D_alpha);

// throws if phi does not vanish on the outer band of the period (wrap contamination)
void check_compact_support(const SpaceLattice& lat, const std::vector<double>& phi);

}  // namespace subdiff
