#include <doctest.h>

#include <cmath>

#include "subdiff/renewal.hpp"

using namespace subdiff;

TEST_CASE("constant escape rate: stationary flux and closed-form residual") {
    auto m = SurvivalModel::exponential(0.7);
    auto n0 = AgeProfile::uniform(1.0, 2.0);
    auto r = solve_renewal(m, n0, 200, 0.5);
    for (std::size_t j = 1; j < r.N.values.size(); ++j) REQUIRE(r.N.values[j] == doctest::Approx(1.4).epsilon(1e-12));
    auto c = check_psi_convolution(r.N, m, 2.0);
    for (std::size_t i = 0; i < c.residual.size(); ++i)
        CHECK(std::abs(c.residual.v[i] - 2.0 * std::exp(-0.7 * c.residual.t[i])) <= 1e-4 * 2.0);
    CHECK_THROWS_AS(convol_asymptotics(r.N, 1.0, m, 2.0), DomainError);
}

TEST_CASE("mass conservation and boundedness for the prototype") {
    auto m = SurvivalModel::prototype(0.5, 1.0);
    auto n0 = AgeProfile::uniform(1.0);
    auto r = solve_renewal(m, n0, 500, 0.25, {10.0, 100.0});
    CHECK(r.max_mass_error < 1e-12);
    CHECK(r.max_N <= m.beta_sup());
    REQUIRE(r.snapshots.size() == 2);
    for (const auto& s : r.snapshots) CHECK(s.total() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("zero data stays zero") {
    auto m = SurvivalModel::prototype(0.5, 1.0);
    auto r = solve_renewal(m, AgeProfile::zero(), 100, 0.5);
    for (double v : r.N.values) CHECK(v == 0.0);
    for (std::size_t n : {1, 10, 200}) CHECK(psi_convolution_at(r.N, m, n) == 0.0);
}

TEST_CASE("Volterra form agrees with the transport solver at first order") {
    auto m = SurvivalModel::prototype(0.5, 1.0);
    auto n0 = AgeProfile::uniform(1.0);
    std::vector<double> diffs;
    for (double dt : {0.1, 0.05}) {
        auto r = solve_renewal(m, n0, 20, dt);
        auto v = boundary_volterra(m, n0, r.N.grid);
        // compare on the common nodes t = 1, 2, ..., 20 through psi*N, which both rules define pointwise
        double d = 0;
        const auto stride = static_cast<std::size_t>(std::lround(1.0 / dt));
        for (std::size_t n = stride; n < r.N.values.size(); n += stride)
            d = std::max(d, std::abs(psi_convolution_at(r.N, m, n) - psi_convolution_at(v, m, n)));
        diffs.push_back(d);
    }
    CHECK(diffs[0] < 5e-3);
    CHECK(diffs[1] < diffs[0]);
}

TEST_CASE("renewal limit and convolution asymptotics on a long horizon") {
    auto m = SurvivalModel::prototype(0.5, 1.0);
    auto r = solve_renewal(m, AgeProfile::uniform(1.0), 1e4, 0.5);
    auto c = check_psi_convolution(r.N, m, 1.0);
    CHECK(c.decay.exponent == doctest::Approx(-0.5).epsilon(0.2));
    CHECK(c.bound_ratio < 1.5);
    auto a = convol_asymptotics(r.N, 1.0, m, 1.0);
    CHECK(a.limit == doctest::Approx(1.0 / std::sqrt(M_PI)).epsilon(1e-12));
    CHECK(std::abs(a.final_rel_dev) < 0.05);
    CHECK_THROWS_AS(convol_asymptotics(r.N, 0.4, m, 1.0), DomainError);
}

TEST_CASE("argument checks") {
    auto m = SurvivalModel::prototype(0.5, 1.0);
    CHECK_THROWS_AS(solve_renewal(m, AgeProfile::dirac(), 10, 0.5, {}, 0.25), MismatchError);
    CHECK_THROWS_AS(solve_renewal(m, AgeProfile::dirac(), -1, 0.5), DomainError);
    auto r = solve_renewal(m, AgeProfile::dirac(), 50, 0.5);
    CHECK_THROWS_AS(check_psi_convolution(r.N, m, 1.0), DomainError);
}
