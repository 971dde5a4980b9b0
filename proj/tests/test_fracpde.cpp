#include <doctest.h>

#include <cmath>
#include <numbers>

#include "subdiff/fracpde.hpp"

using namespace subdiff;

TEST_CASE("constants") {
    auto m = SurvivalModel::prototype(0.5, 1.0);
    auto k = JumpKernel::lattice_nn(1);
    CHECK(diffusion_coefficient(m, k, 1) == doctest::Approx(0.28209479177387814).epsilon(1e-14));
    CHECK(msd_prefactor(0.5, 1.0, 1.0) == doctest::Approx(2 / std::numbers::pi).epsilon(1e-15));
    CHECK(exact_mode_solution(0.5, 1.0, 1.0) == doctest::Approx(0.427583576155807).epsilon(1e-10));
    CHECK(exact_mode_solution(0.5, 0.0, 5.0) == 1.0);
}

TEST_CASE("scalar relaxation against Mittag-Leffler") {
    auto mesh = graded_mesh(1e-8, 10.0, 800, {0.1, 1.0, 10.0});
    for (double c : {0.1, 1.0, 10.0}) {
        auto u = solve_mode(0.5, c, mesh);
        for (double t : {0.1, 1.0, 10.0}) {
            double ex = exact_mode_solution(0.5, c, t);
            CHECK(u[mesh.index_of(t)] == doctest::Approx(ex).epsilon(1e-3));
        }
    }
}

TEST_CASE("moments of the lattice solution") {
    SpaceLattice lat(1, 512, 0.05);
    auto m = SurvivalModel::prototype(0.5, 1.0);
    FractionalHeatProblem p{0.5, diffusion_coefficient(m, JumpKernel::lattice_nn(1), 1), lat, point_mass(lat)};
    auto s = solve_mild(p, 2.0, {0.1, 1.0, 2.0});
    CHECK(s.validation_error <= 1e-3);
    auto mo = moments(s.traj);
    for (std::size_t i = 0; i < mo.second.size(); ++i) {
        double t = mo.second.t[i];
        CHECK(mo.mass.v[i] == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(std::abs(mo.first.v[i]) < 1e-12);
        CHECK(mo.second.v[i] == doctest::Approx(2 / std::numbers::pi * std::sqrt(t)).epsilon(0.02));
    }
}

TEST_CASE("Caputo L1 of simple functions") {
    // d^a t = t^(1-a) / Gamma(2-a), exact for L1 on linear data
    UniformTimeGrid g{0.01, 200};
    std::vector<double> f(g.size());
    for (std::size_t j = 0; j < f.size(); ++j) f[j] = g.at(j);
    auto d = caputo_l1(f, g, 0.4);
    for (std::size_t j = 1; j < f.size(); j += 37)
        CHECK(d[j] == doctest::Approx(std::pow(g.at(j), 0.6) / subdiff::gamma(1.6)).epsilon(1e-10));
    auto mesh = graded_mesh(1e-3, 2.0, 60);
    std::vector<double> q(mesh.size());
    for (std::size_t i = 0; i < q.size(); ++i) q[i] = 3 * mesh.t[i];
    auto dq = caputo_l1(q, mesh, 0.4);
    CHECK(dq.back() == doctest::Approx(3 * std::pow(2.0, 0.6) / subdiff::gamma(1.6)).epsilon(1e-10));
    CHECK_THROWS_AS(caputo_l1(f, g, 1.2), DomainError);
}

TEST_CASE("argument checks") {
    SpaceLattice a(1, 64, 0.1), b(1, 64, 0.2);
    CHECK_THROWS_AS(solve_mild({0.5, 1.0, a, point_mass(b)}, 1.0, {1.0}), MismatchError);
    CHECK_THROWS_AS(solve_mild({1.5, 1.0, a, point_mass(a)}, 1.0, {1.0}), DomainError);
    CHECK_THROWS_AS(solve_mild({0.5, -1.0, a, point_mass(a)}, 1.0, {1.0}), DomainError);
    // a spread reaching the period edge makes the moments meaningless
    FractionalHeatProblem p{0.5, 1.0, a, uniform_density(a)};
    auto s = solve_mild(p, 1.0, {1.0});
    CHECK_THROWS_AS(moments(s.traj), DomainError);
}
