#include <doctest.h>

#include <cmath>
#include <numbers>

#include "subdiff/core.hpp"
#include "subdiff/special.hpp"

using namespace subdiff;

TEST_CASE("gamma and power kernels") {
    CHECK(subdiff::gamma(0.5) == doctest::Approx(std::sqrt(std::numbers::pi)).epsilon(1e-14));
    CHECK(subdiff::gamma(5.0) == doctest::Approx(24.0).epsilon(1e-14));
    CHECK(y_eval({1.0}, 3.0) == doctest::Approx(1.0));
    CHECK(y_eval({2.0}, 3.0) == doctest::Approx(3.0));
    CHECK(y_eval({0.5}, 4.0) == doctest::Approx(0.5 / std::sqrt(std::numbers::pi)));
    // B(0.3, 0.7) = pi / sin(0.3 pi)
    CHECK(beta_integral(0.3, 0.7) == doctest::Approx(3.8832220774509333).epsilon(1e-13));
    CHECK_THROWS_AS(beta_integral(0.0, 1.0), DomainError);
}

TEST_CASE("Mittag-Leffler against high-precision values") {
    // mpmath series at 120 digits; large arguments cross-checked with the asymptotic series
    struct Case {
        double a, z, v;
    };
    const Case cases[] = {
        {0.5, -1, 0.427583576155807},          {0.5, -10, 0.056140992743822586},
        {0.3, -2, 0.29023222616787536},        {0.7, -0.5, 0.60514759205956427},
        {0.9, -3, 0.083888354033773262},       {0.3, -50, 0.015228201501814695},
        {0.8, -20, 0.011617250451432778},
    };
    for (const auto& c : cases) {
        CAPTURE(c.a);
        CAPTURE(c.z);
        CHECK(mittag_leffler(c.a, c.z) == doctest::Approx(c.v).epsilon(1e-10));
    }
    CHECK(mittag_leffler(1.0, -2.0) == doctest::Approx(std::exp(-2.0)).epsilon(1e-15));
    CHECK(mittag_leffler(0.4, 0.0) == 1.0);
    // E_{1/2}(-x) = exp(x^2) erfc(x)
    for (double x : {0.05, 0.7, 1.3, 4.0})
        CHECK(mittag_leffler(0.5, -x) == doctest::Approx(std::exp(x * x) * std::erfc(x)).epsilon(1e-11));
    CHECK_THROWS_AS(mittag_leffler(1.5, -1), DomainError);
    CHECK_THROWS_AS(mittag_leffler(0.5, 1), DomainError);
}

TEST_CASE("Y_mu * Y_nu = Y_{mu+nu} with first-order convergence") {
    for (auto [mu, nu] : {std::pair{0.5, 0.5}, {0.3, 0.7}, {1.0, 0.5}}) {
        std::vector<double> errs;
        for (double dt : {1e-2, 5e-3}) {
            const auto n = static_cast<std::size_t>(std::lround(2 / dt));
            UniformTimeGrid g{dt, n};
            std::vector<double> f(n + 1, 0.0);
            for (std::size_t j = 1; j <= n; ++j) f[j] = y_eval({nu}, g.at(j));
            std::optional<double> se;
            if (nu < 1) se = nu;
            auto r = product_convolve_y({mu}, f, g, se);
            const auto stride = static_cast<std::size_t>(std::lround(1e-2 / dt));
            double e = 0;
            for (std::size_t j = stride; j <= n; j += stride) e = std::max(e, std::abs(r[j] - y_eval({mu + nu}, g.at(j))));
            errs.push_back(e);
        }
        CAPTURE(mu);
        CHECK(errs[0] < 0.1);  // worst at the first node, where Y_nu is singular
        CHECK(std::log2(errs[0] / errs[1]) >= 0.9);
    }
}

TEST_CASE("cell weights integrate the kernel exactly") {
    // left + right = int_0^h Y_nu(u + h - s) ds = Y_{nu+1}(u + h) - Y_{nu+1}(u)
    for (double nu : {0.3, 0.5, 1.0}) {
        auto w = y_cell_weights(nu, 0.7, 0.2);
        CHECK(w.left + w.right == doctest::Approx(y_eval({nu + 1}, 0.9) - y_eval({nu + 1}, 0.7)).epsilon(1e-12));
    }
    // f linear and exact: Y_nu * s = Y_{nu+2}
    auto mesh = graded_mesh(1e-3, 1.0, 40);
    std::vector<double> f(mesh.size());
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = mesh.t[i];
    auto r = product_convolve_y({0.5}, f, mesh);
    for (std::size_t i = 1; i < f.size(); ++i) CHECK(r[i] == doctest::Approx(y_eval({2.5}, mesh.t[i])).epsilon(1e-10));
}

TEST_CASE("meshes and plain convolution") {
    auto m = graded_mesh(1e-2, 10, 20, {0.5, 3.0});
    CHECK(m.t.front() == 0);
    CHECK(m.t.back() == doctest::Approx(10));
    CHECK(m.t[m.index_of(3.0)] == doctest::Approx(3.0));
    CHECK_THROWS(m.index_of(3.3333));
    auto u = uniform_mesh(0.1, 10);
    CHECK(u.size() == 11);
    CHECK(u.h(3) == doctest::Approx(0.1));

    UniformTimeGrid g{0.01, 100};
    std::vector<double> a(101), b(101);
    for (std::size_t j = 0; j <= 100; ++j) {
        a[j] = std::sin(g.at(j));
        b[j] = 1.0 + g.at(j);
    }
    auto ab = convolve(a, b, g), ba = convolve(b, a, g);
    for (std::size_t j = 0; j <= 100; ++j) CHECK(ab[j] == ba[j]);
    // 1 * 1 = t
    std::vector<double> one(101, 1.0);
    auto c = convolve(one, one, g);
    CHECK(c.back() == doctest::Approx(1.0).epsilon(1e-12));
}
