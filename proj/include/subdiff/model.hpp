#pragma once

#include <array>
#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "subdiff/lattice.hpp"
#include "subdiff/rng.hpp"

namespace subdiff {

// waiting-time law: escape rate beta, survival psi = exp(-int beta), density phi = beta psi
class SurvivalModel {
public:
    enum class Family { prototype, tabulated, exponential };

    // beta(a) = alpha/(K+a), psi(t) = (1+t/K)^-alpha
    static SurvivalModel prototype(double alpha, double K, std::optional<double> delta = {});
    // beta sampled on a uniform age grid (piecewise linear); continued past the
    // table with a rate of the form alpha/(a+c) matching the last sample
    static SurvivalModel tabulated(double alpha, double da, std::vector<double> beta,
                                   std::optional<double> delta = {});
    // constant rate beta0: thin-tailed, fails the heavy-tail assumptions on purpose
    static SurvivalModel exponential(double beta0);

    Family family() const { return family_; }
    double alpha() const { return alpha_; }
    double delta() const { return delta_; }
    double K() const { return K_; }
    double beta0() const { return beta0_; }
    double tail_constant() const;
    double table_end() const { return a_end_; }

    double beta(double a) const;
    double psi(double t) const;
    double phi(double t) const;
    double beta_sup() const;
    // int_a^b psi, accurate also for b - a << a
    double psi_integral(double a, double b) const;
    // psi(t1) - psi(t2) for t1 <= t2, accurate also for t2 - t1 << t1
    double survival_drop(double t1, double t2) const;

    // t with P(T > t) = u
    double invert_survival(double u) const;
    // residual waiting time of a particle already aged a: P(T > t) = psi(a+t)/psi(a)
    double invert_residual(double a, double u) const;

private:
    double log_psi(double t) const;
    double beta_integral_between(double t1, double t2) const;

    Family family_ = Family::prototype;
    double alpha_ = 0.5;
    double delta_ = 0.45;
    double K_ = 1;
    double beta0_ = 0;
    double Psi_ = 1;
    // tabulated
    double da_ = 0;
    std::vector<double> beta_;
    std::vector<double> cum_;  // int_0^{j da} beta
    double a_end_ = 0, K_tail_ = 0;
};

double default_delta(double alpha);

double psi_eval(const SurvivalModel& m, double t);
double phi_eval(const SurvivalModel& m, double t);
double tail_constant(const SurvivalModel& m);
double sample_waiting_time(const SurvivalModel& m, Philox& rng);

// spatial jump law w (unit scale)
struct JumpKernel {
    enum class Variant { lattice_nn, discrete_pmf, gaussian };
    Variant variant = Variant::lattice_nn;
    int d = 1;
    double sigma2 = 1;  // declared second moment int |z|^2 w
    std::vector<std::array<double, 2>> offsets;
    std::vector<double> probs;

    static JumpKernel lattice_nn(int d);
    static JumpKernel gaussian(int d, double sigma2);
    // sigma2 computed from the table unless declared
    static JumpKernel pmf(int d, std::vector<std::array<double, 2>> offsets, std::vector<double> probs,
                          std::optional<double> declared_sigma2 = {});
};

std::complex<double> kernel_char_fn(const JumpKernel& k, std::array<double, 2> wavevector);
std::array<double, 2> sample_jump(const JumpKernel& k, Philox& rng);

struct ValidationReport {
    bool pass = true;
    std::vector<std::string> failures;
    std::array<double, 2> kernel_mean{0, 0};
    double kernel_sigma2 = 0;
    double prob_sum = 1;
    double tail_C = 0;      // fitted on t in [1, 1e3]
    double tail_ratio = 0;  // sup over [1e3, 1e6] of |t^a psi - Psi| t^delta / C
};

ValidationReport validate_assumptions(const SurvivalModel& m, const JumpKernel& k);

// initial age profile n0: optional point mass at age 0 plus a density on panels
class AgeProfile {
public:
    static AgeProfile dirac(double mass = 1.0);
    static AgeProfile uniform(double width, double mass = 1.0);
    static AgeProfile exponential(double rate, double mass = 1.0);
    // piecewise-constant densities on [j da, (j+1) da)
    static AgeProfile cells(double da, const std::vector<double>& density);
    static AgeProfile zero() { return AgeProfile{}; }

    double mass() const;
    // int (1+a)^alpha n0(a) da
    double weighted_mass(double alpha) const;
    // int n0 over [a0, a1)
    double mass_between(double a0, double a1) const;
    double support() const { return edges_.empty() ? 0.0 : edges_.back(); }
    bool has_dirac() const { return dirac_ > 0; }
    double density(double a) const { return density_ ? density_(a) : 0.0; }

    // int n0(a) psi(a+t)/psi(a) da   (survivors of the initial cohort)
    double aged_mass(const SurvivalModel& m, double t) const;
    // survivors at t1 minus survivors at t2
    double aged_drop(const SurvivalModel& m, double t1, double t2) const;
    // int n0(a) phi(a+t)/psi(a) da   (first-jump rate of the initial cohort)
    double aged_rate(const SurvivalModel& m, double t) const;
    // quadrature nodes (age, weight*density); the point mass is not included
    const std::vector<std::array<double, 2>>& nodes() const { return nodes_; }
    double dirac_mass() const { return dirac_; }
    // an age drawn from n0 / int n0
    double sample(Philox& rng) const;

private:
    void build(std::vector<double> edges, std::function<double(double)> density);

    double dirac_ = 0;
    std::vector<double> edges_;
    std::function<double(double)> density_;
    std::vector<std::array<double, 2>> nodes_;
    std::vector<double> panel_cum_;  // cumulative panel masses (after the point mass)
};

// r0(a,x) as a sum of separable pieces n_c(a) rho_c(x) / int n_c
struct InitialCondition {
    struct Piece {
        AgeProfile age;
        GridMeasure rho;
    };
    std::vector<Piece> pieces;

    static InitialCondition separable(AgeProfile age, GridMeasure rho);
    // full (a,x) table: density[j] is the spatial density of ages in [j da, (j+1) da)
    static InitialCondition table(double da, const std::vector<GridMeasure>& density);

    double mass() const;
    // int int r0 (1+a)^alpha
    double weighted_mass(double alpha) const;
    const SpaceLattice& lattice() const { return pieces.at(0).rho.lattice; }
};

}  // namespace subdiff
