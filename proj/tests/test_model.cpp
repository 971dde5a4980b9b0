#include <doctest.h>

#include <cmath>
#include <string>

#include "subdiff/core.hpp"
#include "subdiff/model.hpp"
#include "subdiff/rng.hpp"

using namespace subdiff;

TEST_CASE("prototype law closed forms") {
    auto m = SurvivalModel::prototype(0.5, 1.0);
    CHECK(m.delta() == doctest::Approx(0.45));
    CHECK(m.beta(3.0) == doctest::Approx(0.5 / 4.0));
    CHECK(m.psi(3.0) == doctest::Approx(0.5));
    CHECK(m.phi(3.0) == doctest::Approx(0.5 / 4.0 * 0.5));
    CHECK(m.psi_integral(0, 10) == doctest::Approx(4.6332495807107997).epsilon(1e-13));
    CHECK(m.survival_drop(0, 3) == doctest::Approx(0.5));
    // psi(t) = 1/4  ->  t = 15 ; psi(1 + t)/psi(1) = 1/4 -> t = 30
    CHECK(m.invert_survival(0.25) == doctest::Approx(15.0).epsilon(1e-12));
    CHECK(m.invert_residual(1.0, 0.25) == doctest::Approx(30.0).epsilon(1e-12));
    CHECK(SurvivalModel::prototype(0.5, 4.0).tail_constant() == doctest::Approx(2.0));
    CHECK(m.beta_sup() == doctest::Approx(0.5));
}

TEST_CASE("parameter validation names the violated constraint") {
    try {
        SurvivalModel::prototype(1.5, 1.0);
        FAIL("no throw");
    } catch (const DomainError& e) {
        CHECK(std::string(e.what()).find("alpha must lie in (0,1)") != std::string::npos);
    }
    try {
        SurvivalModel::prototype(0.5, 1.0, 0.6);
        FAIL("no throw");
    } catch (const DomainError& e) {
        CHECK(std::string(e.what()).find("δ∈(0,1−α)") != std::string::npos);
    }
    CHECK_THROWS_AS(SurvivalModel::prototype(0.5, -1.0), DomainError);
    CHECK_THROWS_AS(SurvivalModel::exponential(0.0), DomainError);
}

TEST_CASE("tabulated model reproduces the prototype") {
    const double da = 0.05;
    std::vector<double> b;
    for (int j = 0; j <= 4000; ++j) b.push_back(0.5 / (1.0 + j * da));
    auto t = SurvivalModel::tabulated(0.5, da, b);
    auto p = SurvivalModel::prototype(0.5, 1.0);
    for (double s : {0.5, 10.0, 150.0, 1e4}) CHECK(t.psi(s) == doctest::Approx(p.psi(s)).epsilon(1e-4));
    CHECK(t.tail_constant() == doctest::Approx(1.0).epsilon(2e-2));  // fitted from a finite table
    double s = t.invert_survival(0.1);
    CHECK(t.psi(s) == doctest::Approx(0.1).epsilon(1e-10));
    CHECK_THROWS_AS(SurvivalModel::tabulated(0.5, da, {0.5, 0.4, 0.3}), DomainError);
}

TEST_CASE("exponential waiting times") {
    auto e = SurvivalModel::exponential(2.0);
    CHECK(e.psi(1.0) == doctest::Approx(std::exp(-2.0)));
    CHECK(e.invert_survival(std::exp(-1.0)) == doctest::Approx(0.5));
    CHECK(e.invert_residual(7.0, std::exp(-1.0)) == doctest::Approx(0.5));
    CHECK_THROWS_AS(e.tail_constant(), DomainError);
}

TEST_CASE("sampled waiting times follow psi") {
    auto m = SurvivalModel::prototype(0.5, 1.0);
    Philox r(3, 4);
    const int n = 100000;
    int beyond = 0;
    for (int i = 0; i < n; ++i)
        if (sample_waiting_time(m, r) > 3.0) ++beyond;
    // P(tau > 3) = psi(3) = 1/2
    CHECK(static_cast<double>(beyond) / n == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("jump kernels") {
    auto nn = JumpKernel::lattice_nn(1);
    CHECK(nn.sigma2 == 1);
    CHECK(kernel_char_fn(nn, {0.7, 0}).real() == doctest::Approx(std::cos(0.7)));
    auto nn2 = JumpKernel::lattice_nn(2);
    CHECK(kernel_char_fn(nn2, {0.7, 0.0}).real() == doctest::Approx((std::cos(0.7) + 1) / 2));
    auto g = JumpKernel::gaussian(1, 2.0);
    CHECK(kernel_char_fn(g, {0.5, 0}).real() == doctest::Approx(std::exp(-0.25)));
    auto p = JumpKernel::pmf(1, {{2, 0}, {-2, 0}}, {0.5, 0.5});
    CHECK(p.sigma2 == doctest::Approx(4));
    Philox r(9, 9);
    double s2 = 0;
    for (int i = 0; i < 50000; ++i) {
        auto z = sample_jump(g, r);
        s2 += z[0] * z[0];
    }
    CHECK(s2 / 50000 == doctest::Approx(2.0).epsilon(0.03));
}

TEST_CASE("assumption validator") {
    auto ok = validate_assumptions(SurvivalModel::prototype(0.5, 1.0), JumpKernel::lattice_nn(1));
    CHECK(ok.pass);
    auto thin = validate_assumptions(SurvivalModel::exponential(1.0), JumpKernel::lattice_nn(1));
    CHECK_FALSE(thin.pass);
    auto drift = validate_assumptions(SurvivalModel::prototype(0.5, 1.0), JumpKernel::pmf(1, {{1, 0}, {-1, 0}}, {0.7, 0.3}));
    CHECK_FALSE(drift.pass);
}

TEST_CASE("age profiles") {
    auto m = SurvivalModel::prototype(0.5, 1.0);
    auto u = AgeProfile::uniform(2.0, 3.0);
    CHECK(u.mass() == doctest::Approx(3.0));
    CHECK(u.mass_between(0, 1) == doctest::Approx(1.5));
    CHECK(u.support() == doctest::Approx(2.0));
    auto d = AgeProfile::dirac(2.0);
    CHECK(d.dirac_mass() == 2.0);
    // a newborn cohort decays like psi
    CHECK(d.aged_mass(m, 3.0) == doctest::Approx(1.0));
    auto e = AgeProfile::exponential(1.0);
    CHECK(e.mass() == doctest::Approx(1.0).epsilon(1e-8));
    Philox r(5, 5);
    double s = 0;
    for (int i = 0; i < 40000; ++i) s += u.sample(r);
    CHECK(s / 40000 == doctest::Approx(1.0).epsilon(0.01));
    CHECK(AgeProfile::zero().mass() == 0);
    CHECK_THROWS_AS(AgeProfile::uniform(-1.0), DomainError);
}
