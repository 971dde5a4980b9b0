#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <vector>

namespace subdiff {

using cplx = std::complex<double>;

// periodic lattice, n nodes per axis (power of two), spacing h. node 0 is the origin;
// coordinates are wrapped into (-L/2, L/2]
struct SpaceLattice {
    int d = 1;
    std::size_t n = 0;
    double h = 1;

    SpaceLattice() = default;
    SpaceLattice(int d_, std::size_t n_, double h_);

    double L() const { return static_cast<double>(n) * h; }
    std::size_t nodes() const { return d == 1 ? n : n * n; }
    double cell() const { return d == 1 ? h : h * h; }
    // wrapped coordinate of index i along one axis
    double coord(std::size_t i) const;
    // physical wavenumber of FFT index m along one axis
    double wavenumber(std::size_t m) const;
    // position of flat node index
    std::array<double, 2> position(std::size_t idx) const;
    std::array<double, 2> wavevector(std::size_t idx) const;
    bool operator==(const SpaceLattice& o) const { return d == o.d && n == o.n && h == o.h; }
};

struct GridMeasure {
    SpaceLattice lattice;
    std::vector<double> v;

    GridMeasure() = default;
    explicit GridMeasure(const SpaceLattice& lat) : lattice(lat), v(lat.nodes(), 0.0) {}

    double mass() const;
    std::array<double, 2> first_moment() const;
    double second_moment() const;
    // mass within L/16 of the antipode along any axis, relative to |mass|
    double wrap_fraction() const;
    // <this, phi> = sum rho * phi * h^d
    double pair(const std::vector<double>& phi) const;
};

// densities at increasing times
struct Trajectory {
    std::vector<double> t;
    std::vector<GridMeasure> rho;
};

// unnormalized forward DFT (exp(-i k x)) and its inverse (with the 1/N)
std::vector<cplx> fft_forward(const SpaceLattice& lat, const std::vector<double>& f);
std::vector<double> fft_inverse_real(const SpaceLattice& lat, const std::vector<cplx>& F);

// initial densities
GridMeasure point_mass(const SpaceLattice& lat, double mass = 1.0);
GridMeasure gaussian_bump(const SpaceLattice& lat, double width, double mass = 1.0);
GridMeasure uniform_density(const SpaceLattice& lat, double mass = 1.0);

// the six-function weak test family on a lattice
struct TestFunction {
    const char* name;
    std::vector<double> values;
};
std::vector<TestFunction> test_family(const SpaceLattice& lat);

// 3-point / 5-point discrete Laplacian and its Fourier symbol
std::vector<double> discrete_laplacian(const SpaceLattice& lat, const std::vector<double>& f);
double laplacian_symbol(const SpaceLattice& lat, std::size_t idx);

}  // namespace subdiff
