#include <doctest.h>

#include <cmath>
#include <cstdlib>

#include "subdiff/ctrw.hpp"

using namespace subdiff;

TEST_CASE("exponential waits give normal diffusion") {
    // rate 1, unit jumps: msd(t) = t
    auto m = SurvivalModel::exponential(1.0);
    auto r = simulate(m, JumpKernel::lattice_nn(1), 1.0, 20000, 50, 11, {5, 20, 50});
    for (std::size_t i = 0; i < r.msd.size(); ++i) CHECK(std::abs(r.msd.msd[i] - r.msd.t[i]) < 4 * r.msd.stderr_[i]);
    CHECK(std::abs(r.mean_x.v.back()) < 4 * r.sd_x.v.back() / std::sqrt(20000.0));
}

TEST_CASE("subdiffusive growth") {
    auto m = SurvivalModel::prototype(0.5, 1.0);
    auto r = simulate(m, JumpKernel::lattice_nn(1), 1.0, 20000, 1e4, 3, log_times(1, 1e4));
    auto f = fit_power_law(r.msd, 1e2, 1e4);
    CHECK(f.exponent == doctest::Approx(0.5).epsilon(0.1));
    auto fu = fit_power_law(r.msd, 1e2, 1e4, false);
    CHECK(fu.exponent == doctest::Approx(f.exponent).epsilon(0.05));
}

TEST_CASE("same seed, same output; thread count does not matter") {
    auto m = SurvivalModel::prototype(0.5, 1.0);
    auto k = JumpKernel::lattice_nn(1);
    CtrwOptions o;
    o.histogram = SpaceLattice(1, 64, 1.0);
    o.chunk = 512;
    setenv("SUBDIFF_THREADS", "1", 1);
    auto a = simulate(m, k, 1.0, 5000, 100, 42, {10, 100}, o);
    setenv("SUBDIFF_THREADS", "4", 1);
    auto b = simulate(m, k, 1.0, 5000, 100, 42, {10, 100}, o);
    unsetenv("SUBDIFF_THREADS");
    CHECK(a.msd.msd == b.msd.msd);
    CHECK(a.msd.stderr_ == b.msd.stderr_);
    CHECK(a.jumps == b.jumps);
    for (std::size_t s = 0; s < 2; ++s) CHECK(a.snapshots[s].v == b.snapshots[s].v);
    CHECK(a.snapshots[1].mass() == doctest::Approx(1.0).epsilon(1e-12));
    auto c = simulate(m, k, 1.0, 5000, 100, 43, {10, 100}, o);
    CHECK(c.msd.msd != a.msd.msd);
}

TEST_CASE("msd estimators on kept positions") {
    auto m = SurvivalModel::prototype(0.5, 1.0);
    CtrwOptions o;
    o.keep_positions = true;
    SpaceLattice lat(1, 64, 1.0);
    o.rho0 = gaussian_bump(lat, 3.0);
    auto r = simulate(m, JumpKernel::lattice_nn(1), 1.0, 4000, 100, 5, {10, 100}, o);
    auto e = msd_estimate(r.ensemble, Origin::initial);
    for (std::size_t i = 0; i < e.size(); ++i) CHECK(e.msd[i] == doctest::Approx(r.msd.msd[i]).epsilon(1e-12));
    // about the ensemble mean: includes the spread of the starting points (variance ~ 9)
    auto c = msd_estimate(r.ensemble, Origin::ensemble_mean);
    CHECK(c.msd[0] > e.msd[0]);
    CHECK_THROWS_AS(msd_estimate({EnsembleSnapshot{1.0, {{0, 0}}, {{1, 0}}}}), DomainError);
}

TEST_CASE("aged start waits longer") {
    auto m = SurvivalModel::prototype(0.5, 1.0);
    CtrwOptions young, old;
    old.ages = AgeProfile::uniform(1e3);
    auto a = simulate(m, JumpKernel::lattice_nn(1), 1.0, 20000, 10, 1, {10}, young);
    auto b = simulate(m, JumpKernel::lattice_nn(1), 1.0, 20000, 10, 1, {10}, old);
    CHECK(b.msd.msd[0] < a.msd.msd[0]);
}

TEST_CASE("argument checks") {
    auto m = SurvivalModel::prototype(0.5, 1.0);
    auto k = JumpKernel::lattice_nn(1);
    CHECK_THROWS_AS(simulate(m, k, 1.0, 0, 10, 1), DomainError);
    CHECK_THROWS_AS(simulate(m, k, 1.0, 10, 10, 1, {20}), DomainError);
    CtrwOptions o;
    o.histogram = SpaceLattice(2, 16, 1.0);
    CHECK_THROWS_AS(simulate(m, k, 1.0, 10, 10, 1, {1}, o), MismatchError);
    CtrwOptions big;
    big.histogram = SpaceLattice(2, 1024, 1.0);
    big.memory_budget = 1e6;
    CHECK_THROWS_AS(simulate(m, JumpKernel::lattice_nn(2), 1.0, 10, 10, 1, {1}, big), SchemeError);
}
