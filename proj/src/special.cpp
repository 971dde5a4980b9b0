#include "subdiff/special.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "subdiff/core.hpp"

namespace subdiff {

namespace {

constexpr double pi = std::numbers::pi;

// 8-point Gauss-Legendre mapped to [0,1]; boost stores the nonnegative half on [-1,1]
std::array<double, 8> make_gl_x() {
    using G = boost::math::quadrature::gauss<double, 8>;
    std::array<double, 8> x{};
    for (int i = 0; i < 4; ++i) {
        x[3 - i] = 0.5 * (1 - G::abscissa()[i]);
        x[4 + i] = 0.5 * (1 + G::abscissa()[i]);
    }
    return x;
}
std::array<double, 8> make_gl_w() {
    using G = boost::math::quadrature::gauss<double, 8>;
    std::array<double, 8> w{};
    for (int i = 0; i < 4; ++i) w[3 - i] = w[4 + i] = 0.5 * G::weights()[i];
    return w;
}

// (k+1)^p - 2k^p + (k-1)^p, series for large k to dodge cancellation
double second_diff_pow(double k, double p) {
    if (k < 40) return std::pow(k + 1, p) - 2 * std::pow(k, p) + std::pow(k - 1, p);
    double s = 0, c = 1, inv = 1 / k;
    double x = 1;
    for (int m = 1; m <= 12; ++m) {
        c *= (p - m + 1) / m;
        x *= inv;
        if (m % 2 == 0) s += 2 * c * x;
    }
    return std::pow(k, p) * s;
}

// (n-1)^p - (n-p)n^(p-1), i.e. the far-end product-trapezoid weight
double end_weight(double n, double p) {
    if (n < 40) return std::pow(n - 1, p) - (n - p) * std::pow(n, p - 1);
    double s = 0, c = 1, x = 1, inv = -1 / n;
    for (int m = 1; m <= 12; ++m) {
        c *= (p - m + 1) / m;
        x *= inv;
        if (m >= 2) s += c * x;
    }
    return std::pow(n, p) * s;
}

}  // namespace

const std::array<double, 8> gl8_x = make_gl_x();
const std::array<double, 8> gl8_w = make_gl_w();

double gamma(double x) {
    if (!(x > 0)) throw DomainError("gamma: argument must be positive");
    return std::tgamma(x);
}

double y_eval(PowerKernel k, double t) {
    if (!(k.nu > 0)) throw DomainError("y_eval: nu must be positive");
    if (t < 0) throw DomainError("y_eval: t must be nonnegative");
    if (t == 0) {
        if (k.nu < 1) throw DomainError("y_eval: Y_nu is singular at 0 for nu < 1");
        return k.nu == 1 ? 1.0 : 0.0;
    }
    if (k.nu == 1) return 1.0;
    return std::pow(t, k.nu - 1) / gamma(k.nu);
}

double beta_integral(double mu, double nu) {
    if (!(mu > 0) || !(nu > 0)) throw DomainError("beta_integral: arguments must be positive");
    if (mu + nu < 150) return gamma(mu) * gamma(nu) / gamma(mu + nu);
    return std::exp(std::lgamma(mu) + std::lgamma(nu) - std::lgamma(mu + nu));
}

double mittag_leffler(double alpha, double z) {
    if (!(alpha > 0) || alpha > 1) throw DomainError("mittag_leffler: alpha must lie in (0,1]");
    if (z > 0) throw DomainError("mittag_leffler: z must be nonpositive");
    if (z == 0) return 1.0;
    if (alpha == 1) return std::exp(z);
    double x = -z;
    if (x <= 1) {
        double s = 0;
        double zk = 1;
        for (int k = 0; k < 2000; ++k) {
            double term = zk / gamma(alpha * k + 1);
            s += term;
            if (k > 2 && std::abs(term) < 1e-17 * std::max(1.0, std::abs(s))) break;
            zk *= z;
        }
        return s;
    }
    // E_a(-x) = sin(pi a)/(pi a) int_0^inf exp(-(x s)^(1/a)) / (s^2 + 2 s cos(pi a) + 1) ds
    double ca = std::cos(pi * alpha);
    double ia = 1 / alpha;
    auto f = [&](double s) {
        double den = s * s + 2 * s * ca + 1;
        return std::exp(-std::pow(x * s, ia)) / den;
    };
    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    // beyond s_max the exponential factor is below 1e-300
    double s_max = std::pow(700.0, alpha) / x;
    std::vector<double> cuts = {0.0};
    for (double c : {0.25 * s_max, 0.5 * s_max, 0.9, 1.0, 1.1, 2.0, s_max})
        if (c > cuts.back() && c <= s_max) cuts.push_back(c);
    double total = 0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) total += GK::integrate(f, cuts[i], cuts[i + 1], 15, 1e-13);
    return std::sin(pi * alpha) / (pi * alpha) * total;
}

std::vector<double> product_convolve_y(PowerKernel k, const std::vector<double>& f, const UniformTimeGrid& grid,
                                       std::optional<double> singular_exponent) {
    if (f.empty()) return {};
    if (!(k.nu > 0)) throw DomainError("product_convolve_y: nu must be positive");
    if (f.size() > grid.size()) throw MismatchError("product_convolve_y: series longer than grid");
    const std::size_t n = f.size();
    const double nu = k.nu, p = nu + 1, dt = grid.dt;
    const double scale = std::pow(dt, nu) / gamma(nu + 2);

    std::vector<double> lag(n, 0.0);
    for (std::size_t j = 1; j < n; ++j) lag[j] = second_diff_pow(static_cast<double>(j), p);

    double f0 = f[0];
    double c = 0, g = 0;
    if (singular_exponent) {
        g = *singular_exponent;
        if (!(g > 0 && g < 1)) throw DomainError("product_convolve_y: singular exponent must lie in (0,1)");
        f0 = 0;
        if (n > 1) c = f[1] * std::pow(dt, 1 - g);
    }
    double d1 = 0, d2 = 0, d3 = 0;
    if (singular_exponent) {
        d1 = -std::riemann_zeta(1 - g);
        d2 = -std::riemann_zeta(-g);
        d3 = -std::riemann_zeta(-1 - g) - std::riemann_zeta(1 - g) / 6;
    }
    const double gnu = gamma(nu);

    std::vector<double> out(n, 0.0);
    for (std::size_t m = 1; m < n; ++m) {
        double s = end_weight(static_cast<double>(m), p) * f0 + f[m];
        for (std::size_t j = 1; j < m; ++j) s += lag[m - j] * f[j];
        out[m] = scale * s;
        if (singular_exponent && c != 0) {
            double t = grid.at(m);
            double K0 = std::pow(t, nu - 1) / gnu;
            double K1 = (nu - 1) * std::pow(t, nu - 2) / gnu;
            double K2 = (nu - 1) * (nu - 2) * std::pow(t, nu - 3) / gnu;
            out[m] += c * std::pow(dt, g) * (K0 * d1 - K1 * dt * d2 + K2 * dt * dt / 2 * d3);
        }
    }
    return out;
}

std::vector<double> convolve(const std::vector<double>& f, const std::vector<double>& g, const UniformTimeGrid& grid) {
    if (f.size() != g.size()) throw MismatchError("convolve: series lengths differ");
    if (f.size() > grid.size()) throw MismatchError("convolve: series longer than grid");
    const std::size_t n = f.size();
    std::vector<double> out(n, 0.0);
    for (std::size_t m = 1; m < n; ++m) {
        // pair (i, m-i) with (m-i, i): the sum is the same expression after swapping f and g
        double s = 0.5 * (f[0] * g[m] + f[m] * g[0]);
        for (std::size_t i = 1; 2 * i < m; ++i) s += f[i] * g[m - i] + f[m - i] * g[i];
        if (m % 2 == 0) s += f[m / 2] * g[m / 2];
        out[m] = grid.dt * s;
    }
    return out;
}

std::size_t TimeMesh::index_of(double tt) const {
    auto it = std::lower_bound(t.begin(), t.end(), tt * (1 - 1e-9));
    if (it == t.end() || std::abs(*it - tt) > 1e-9 * std::max(1.0, std::abs(tt)))
        throw MismatchError("time " + std::to_string(tt) + " is not a mesh node");
    return static_cast<std::size_t>(it - t.begin());
}

TimeMesh uniform_mesh(double dt, std::size_t n_steps) {
    TimeMesh m;
    m.t.resize(n_steps + 1);
    for (std::size_t j = 0; j <= n_steps; ++j) m.t[j] = static_cast<double>(j) * dt;
    return m;
}

TimeMesh graded_mesh(double t_first, double T, std::size_t n, const std::vector<double>& extra) {
    if (!(t_first > 0) || !(T > t_first) || n < 2) throw DomainError("graded_mesh: bad parameters");
    std::vector<double> t;
    t.push_back(0.0);
    double r = std::pow(T / t_first, 1.0 / static_cast<double>(n - 1));
    for (std::size_t i = 0; i < n; ++i) t.push_back(i + 1 == n ? T : t_first * std::pow(r, static_cast<double>(i)));
    for (double e : extra)
        if (e > 0 && e <= T * (1 + 1e-12)) t.push_back(std::min(e, T));
    std::sort(t.begin(), t.end());
    // drop geometric nodes that crowd an inserted one
    TimeMesh m;
    for (double x : t) {
        if (!m.t.empty()) {
            double prev = m.t.back();
            double gap = x - prev;
            bool x_extra = std::find(extra.begin(), extra.end(), x) != extra.end();
            if (gap <= 1e-12 * std::max(1.0, x)) continue;
            if (prev > 0 && gap < 0.25 * (r - 1) * prev) {
                bool prev_extra = std::find(extra.begin(), extra.end(), prev) != extra.end();
                if (x_extra && !prev_extra) {
                    m.t.back() = x;
                    continue;
                }
                if (!x_extra) continue;
            }
        }
        m.t.push_back(x);
    }
    if (m.t.back() < T * (1 - 1e-12)) m.t.push_back(T);
    return m;
}

CellWeights y_cell_weights(double nu, double u, double h) {
    if (u >= 4 * h) {
        double l = 0, r = 0;
        for (int q = 0; q < 8; ++q) {
            double x = gl8_x[q];
            double y = std::pow(u + h * (1 - x), nu - 1);
            l += gl8_w[q] * y * (1 - x);
            r += gl8_w[q] * y * x;
        }
        double s = h / gamma(nu);
        return {l * s, r * s};
    }
    double g1 = gamma(nu + 1), g2 = gamma(nu) * (nu + 1);
    auto I0 = [&](double v) { return std::pow(v, nu) / g1; };
    auto I1 = [&](double v) { return std::pow(v, nu + 1) / g2; };
    double w0 = I0(u + h) - I0(u);
    double right = ((u + h) * w0 - (I1(u + h) - I1(u))) / h;
    return {w0 - right, right};
}

std::vector<double> product_convolve_y(PowerKernel k, const std::vector<double>& f, const TimeMesh& mesh) {
    if (f.size() != mesh.size()) throw MismatchError("product_convolve_y: series/mesh size mismatch");
    std::vector<double> out(f.size(), 0.0);
    for (std::size_t m = 1; m < f.size(); ++m) {
        double s = 0;
        for (std::size_t i = 0; i < m; ++i) {
            auto w = y_cell_weights(k.nu, mesh.t[m] - mesh.t[i + 1], mesh.h(i));
            s += w.left * f[i] + w.right * f[i + 1];
        }
        out[m] = s;
    }
    return out;
}

}  // namespace subdiff
