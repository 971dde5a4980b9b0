#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <vector>

namespace subdiff {

double gamma(double x);

// Y_nu(t) = t^(nu-1) / Gamma(nu)
struct PowerKernel {
    double nu;
};

double y_eval(PowerKernel k, double t);

double beta_integral(double mu, double nu);

// E_alpha(z) for 0 < alpha <= 1, z <= 0
double mittag_leffler(double alpha, double z);

struct UniformTimeGrid {
    double dt = 0;
    std::size_t n_steps = 0;

    double at(std::size_t j) const { return static_cast<double>(j) * dt; }
    std::size_t size() const { return n_steps + 1; }
};

// (Y_nu * f)(t_j) with product-trapezoid weights. When f behaves like c*s^(g-1)
// near 0 (0 < g < 1), pass g: f[0] is then ignored and a zeta-type endpoint
// correction is added.
std::vector<double> product_convolve_y(PowerKernel k, const std::vector<double>& f,
                                       const UniformTimeGrid& grid,
                                       std::optional<double> singular_exponent = {});

// plain trapezoid discrete convolution, symmetric in (f, g) bit for bit
std::vector<double> convolve(const std::vector<double>& f, const std::vector<double>& g,
                             const UniformTimeGrid& grid);

// nonuniform time nodes, t[0] = 0
struct TimeMesh {
    std::vector<double> t;

    std::size_t size() const { return t.size(); }
    double h(std::size_t i) const { return t[i + 1] - t[i]; }
    // index of the node equal to tt (within relative 1e-9); throws if absent
    std::size_t index_of(double tt) const;
};

TimeMesh uniform_mesh(double dt, std::size_t n_steps);

// 0, then n geometric nodes from t_first to T, with `extra` times merged in
TimeMesh graded_mesh(double t_first, double T, std::size_t n, const std::vector<double>& extra = {});

// weights of int_a^b Y_nu(t - s) f(s) ds for f linear on [a,b]:
// left multiplies f(a), right multiplies f(b); u = t - b >= 0, h = b - a
struct CellWeights {
    double left;
    double right;
};
CellWeights y_cell_weights(double nu, double u, double h);

std::vector<double> product_convolve_y(PowerKernel k, const std::vector<double>& f, const TimeMesh& mesh);

// 8-point Gauss-Legendre on [0,1]
extern const std::array<double, 8> gl8_x;
extern const std::array<double, 8> gl8_w;

}  // namespace subdiff
