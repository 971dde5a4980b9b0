#include <doctest.h>

#include <cmath>

#include "subdiff/fracpde.hpp"
#include "subdiff/spatial.hpp"

using namespace subdiff;

namespace {

const SurvivalModel model = SurvivalModel::prototype(0.5, 1.0);
const JumpKernel nn = JumpKernel::lattice_nn(1);

}  // namespace

TEST_CASE("mass conservation and positivity") {
    SpaceLattice lat(1, 128, 0.1);
    auto r0 = InitialCondition::separable(AgeProfile::uniform(1.0), gaussian_bump(lat, 1.0));
    auto s = solve_agepde(model, nn, r0, 0.2, 1.0, {0.1, 0.5, 1.0});
    CHECK(s.max_mass_error < 1e-12);
    REQUIRE(s.traj.t.size() == 3);
    for (const auto& r : s.traj.rho) {
        CHECK(r.mass() == doctest::Approx(1.0).epsilon(1e-12));
        for (double v : r.v) CHECK(v >= 0);
    }
    CHECK(s.time_scale == doctest::Approx(std::pow(0.2, 4.0)));
}

TEST_CASE("uniform density is stationary") {
    SpaceLattice lat(1, 64, 0.1);
    auto r0 = InitialCondition::separable(AgeProfile::uniform(1.0), uniform_density(lat));
    auto s = solve_agepde(model, nn, r0, 0.1, 1.0, {0.5, 1.0});
    for (const auto& r : s.traj.rho)
        for (std::size_t i = 0; i < r.v.size(); ++i) CHECK(r.v[i] == doctest::Approx(r0.pieces[0].rho.v[i]).epsilon(1e-12));
}

TEST_CASE("jumpers and non-jumpers add up to the solution") {
    SpaceLattice lat(1, 64, 0.2);
    auto r0 = InitialCondition::separable(AgeProfile::uniform(1.0), gaussian_bump(lat, 1.0));
    SpatialOptions o;
    o.keep_modes = true;
    const double t = 0.5;
    auto s = solve_agepde(model, nn, r0, 0.2, 1.0, {t}, o);
    auto J = jumpers_part(s, model, r0, t);
    auto Nj = nonjumpers_part(r0, model, 0.2, t);
    auto hat = fft_forward(lat, s.traj.rho[0].v);
    for (std::size_t i = 0; i < hat.size(); ++i) CHECK(std::abs(J[i] + Nj[i] - hat[i]) < 1e-10);
}

TEST_CASE("dual Laplacian: real-space shifts agree with the symbol") {
    SpaceLattice lat(1, 128, 0.05);
    std::vector<double> phi(lat.n);
    for (std::size_t i = 0; i < lat.n; ++i) phi[i] = std::exp(-std::pow(lat.coord(i), 2));
    // eps = 0.1 is 2 cells: commensurate; eps = 0.07 goes through the FFT path
    auto a = dual_discrete_laplacian(nn, 0.1, lat, phi);
    for (std::size_t i = 0; i < lat.n; ++i) {
        double x = lat.coord(i);
        double want = (std::exp(-std::pow(x + 0.1, 2)) + std::exp(-std::pow(x - 0.1, 2)) - 2 * phi[i]) / 0.02;
        if (std::abs(x) < 2) CHECK(a[i] == doctest::Approx(want).epsilon(1e-6));
    }
    auto b = dual_discrete_laplacian(nn, 0.07, lat, phi);
    double mx = 0;
    for (std::size_t i = 0; i < lat.n; ++i) mx = std::max(mx, std::abs(b[i] - a[i]));
    CHECK(mx < 0.05);  // both approximate phi''/2 (sigma2 = 1)
}

TEST_CASE("weak-form residual falls with eps") {
    SpaceLattice lat(1, 256, 0.05);
    auto fam = test_family(lat);
    SpatialOptions o;
    o.pair_with = {fam[0].values, fam[2].values};
    auto r0 = InitialCondition::separable(AgeProfile::uniform(1.0), gaussian_bump(lat, 1.0));
    const double D = diffusion_coefficient(model, nn, 1);
    const double coeff = 2 * D / nn.sigma2;
    std::vector<double> R;
    for (double eps : {0.2, 0.1}) {
        auto s = solve_agepde(model, nn, r0, eps, 1.0, {0.5, 1.0}, o);
        double r = 0;
        for (std::size_t f = 0; f < o.pair_with.size(); ++f)
            r = std::max(r, weak_form_residual(s.pairings[f], s.dual_pairings[f], 0.5, coeff));
        R.push_back(r);
    }
    CHECK(R[1] < R[0] / 2.5);
}

TEST_CASE("argument checks") {
    SpaceLattice lat(1, 64, 0.1);
    auto r0 = InitialCondition::separable(AgeProfile::dirac(), point_mass(lat));
    CHECK_THROWS_AS(solve_agepde(model, nn, r0, 1.5, 1.0, {1.0}), DomainError);
    CHECK_THROWS_AS(solve_agepde(model, nn, r0, 0.0, 1.0, {1.0}), DomainError);
    CHECK_THROWS(solve_agepde(model, JumpKernel::lattice_nn(2), r0, 0.5, 1.0, {1.0}));
    std::vector<double> ones(lat.n, 1.0);
    CHECK_THROWS(check_compact_support(lat, ones));
    CHECK_NOTHROW(check_compact_support(lat, test_family(lat)[0].values));
}
