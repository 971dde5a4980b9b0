#pragma once

#include <vector>

#include "subdiff/core.hpp"
#include "subdiff/lattice.hpp"
#include "subdiff/model.hpp"
#include "subdiff/special.hpp"

namespace subdiff {

// d^alpha rho = D_alpha Laplacian rho on a periodic lattice, discrete Laplacian in space
struct FractionalHeatProblem {
    double alpha = 0.5;
    double D_alpha = 0;
    SpaceLattice lattice;
    GridMeasure rho0;
};

// sigma^2 / (2 d Psi Gamma(1 - alpha))
double diffusion_coefficient(const SurvivalModel& m, const JumpKernel& k, int d);

// u0 E_alpha(-c t^alpha), the solution of u = u0 - c Y_alpha * u
double exact_mode_solution(double alpha, double c, double t, double u0 = 1.0);

struct MildOptions {
    double dt = 0;            // > 0: uniform steps; otherwise a graded mesh
    // graded mesh: the first node is set so that c_max t^alpha stays below 1e-3 there
    double per_decade = 100;
    double tol = 1e-3;        // startup check of the stiffest modes against the oracle
    int max_refine = 4;
    double memory_budget = 2e9;  // bytes for stored mode histories
    std::vector<std::vector<double>> pair_with;  // test functions paired at every mesh node
};

struct MildSolution {
    TimeMesh mesh;
    Trajectory traj;              // at the requested output times
    std::vector<Series> pairings;  // one per MildOptions::pair_with, on all mesh nodes
    // distinct values of c = -D_alpha * symbol and their histories on the mesh
    std::vector<double> mode_c;
    std::vector<std::vector<double>> mode_u;
    std::vector<std::size_t> mode_of;  // lattice index -> position in mode_c
    double validation_error = 0;
    int refinements = 0;
};

// full-memory product integration of rho = rho0 + D_alpha Y_alpha * (Lap_h rho), mode by mode
MildSolution solve_mild(const FractionalHeatProblem& p, double T, const std::vector<double>& output_times,
                        const MildOptions& opts = {});

// scalar version on a given mesh: u = 1 - c Y_alpha * u
std::vector<double> solve_mode(double alpha, double c, const TimeMesh& mesh);

// L1 Caputo derivative of f sampled on the grid / mesh
std::vector<double> caputo_l1(const std::vector<double>& f, const UniformTimeGrid& grid, double alpha);
std::vector<double> caputo_l1(const std::vector<double>& f, const TimeMesh& mesh, double alpha);

struct MomentSeries {
    Series mass;
    Series first;  // x component
    Series second;
    double max_wrap = 0;
};

// mass, first and second moment along a trajectory; refuses when mass sits near the period edge
MomentSeries moments(const Trajectory& traj, double wrap_limit = 1e-6);

// sin(pi a)/(pi a) sigma2 / Psi, the t^alpha coefficient of the second-moment law per unit mass
double msd_prefactor(double alpha, double sigma2, double Psi);

}  // namespace subdiff
