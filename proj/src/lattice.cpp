#include "subdiff/lattice.hpp"

#include <cmath>
#include <mutex>
#include <numbers>

#include <fftw3.h>

#include "subdiff/core.hpp"

namespace subdiff {

namespace {

constexpr double pi = std::numbers::pi;

std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}

void run_dft(const SpaceLattice& lat, std::vector<cplx>& a, int sign) {
    auto* p = reinterpret_cast<fftw_complex*>(a.data());
    fftw_plan plan;
    {
        // only plan creation/destruction is not thread safe in FFTW
        std::lock_guard lk(plan_mutex());
        if (lat.d == 1)
            plan = fftw_plan_dft_1d(static_cast<int>(lat.n), p, p, sign, FFTW_ESTIMATE);
        else
            plan = fftw_plan_dft_2d(static_cast<int>(lat.n), static_cast<int>(lat.n), p, p, sign, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    std::lock_guard lk(plan_mutex());
    fftw_destroy_plan(plan);
}

double taper(double r, double r1, double r2) {
    if (r <= r1) return 1.0;
    if (r >= r2) return 0.0;
    return 0.5 * (1 + std::cos(pi * (r - r1) / (r2 - r1)));
}

}  // namespace

SpaceLattice::SpaceLattice(int d_, std::size_t n_, double h_) : d(d_), n(n_), h(h_) {
    if (d != 1 && d != 2) throw DomainError("lattice dimension must be 1 or 2");
    if (n < 2 || (n & (n - 1)) != 0) throw DomainError("lattice nodes per axis must be a power of two");
    if (!(h > 0)) throw DomainError("lattice spacing must be positive");
}

double SpaceLattice::coord(std::size_t i) const {
    return i <= n / 2 ? static_cast<double>(i) * h : (static_cast<double>(i) - static_cast<double>(n)) * h;
}

double SpaceLattice::wavenumber(std::size_t m) const {
    double mm = m <= n / 2 ? static_cast<double>(m) : static_cast<double>(m) - static_cast<double>(n);
    return 2 * pi * mm / L();
}

std::array<double, 2> SpaceLattice::position(std::size_t idx) const {
    if (d == 1) return {coord(idx), 0.0};
    return {coord(idx / n), coord(idx % n)};
}

std::array<double, 2> SpaceLattice::wavevector(std::size_t idx) const {
    if (d == 1) return {wavenumber(idx), 0.0};
    return {wavenumber(idx / n), wavenumber(idx % n)};
}

double GridMeasure::mass() const {
    double s = 0;
    for (double x : v) s += x;
    return s * lattice.cell();
}

std::array<double, 2> GridMeasure::first_moment() const {
    std::array<double, 2> m{0, 0};
    const std::size_t half = lattice.n / 2;
    for (std::size_t i = 0; i < v.size(); ++i) {
        auto x = lattice.position(i);
        // the antipodal row sits at +L/2 and -L/2 equally; counting it on one side biases the mean
        if (lattice.d == 1 ? i == half : i / lattice.n == half) x[0] = 0;
        if (lattice.d == 2 && i % lattice.n == half) x[1] = 0;
        m[0] += x[0] * v[i];
        m[1] += x[1] * v[i];
    }
    m[0] *= lattice.cell();
    m[1] *= lattice.cell();
    return m;
}

double GridMeasure::second_moment() const {
    double s = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        auto x = lattice.position(i);
        s += (x[0] * x[0] + x[1] * x[1]) * v[i];
    }
    return s * lattice.cell();
}

double GridMeasure::wrap_fraction() const {
    double edge = lattice.L() / 2 - lattice.L() / 16;
    double w = 0, tot = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        auto x = lattice.position(i);
        tot += std::abs(v[i]);
        bool far = std::abs(x[0]) >= edge || (lattice.d == 2 && std::abs(x[1]) >= edge);
        if (far) w += std::abs(v[i]);
    }
    return tot > 0 ? w / tot : 0.0;
}

double GridMeasure::pair(const std::vector<double>& phi) const {
    if (phi.size() != v.size()) throw MismatchError("pairing: test function has wrong size");
    double s = 0;
    for (std::size_t i = 0; i < v.size(); ++i) s += v[i] * phi[i];
    return s * lattice.cell();
}

std::vector<cplx> fft_forward(const SpaceLattice& lat, const std::vector<double>& f) {
    if (f.size() != lat.nodes()) throw MismatchError("fft: size mismatch");
    std::vector<cplx> a(f.begin(), f.end());
    run_dft(lat, a, FFTW_FORWARD);
    return a;
}

std::vector<double> fft_inverse_real(const SpaceLattice& lat, const std::vector<cplx>& F) {
    if (F.size() != lat.nodes()) throw MismatchError("fft: size mismatch");
    std::vector<cplx> a = F;
    run_dft(lat, a, FFTW_BACKWARD);
    std::vector<double> out(a.size());
    double inv = 1.0 / static_cast<double>(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i].real() * inv;
    return out;
}

GridMeasure point_mass(const SpaceLattice& lat, double mass) {
    GridMeasure g(lat);
    g.v[0] = mass / lat.cell();
    return g;
}

GridMeasure gaussian_bump(const SpaceLattice& lat, double width, double mass) {
    GridMeasure g(lat);
    double s = 0;
    for (std::size_t i = 0; i < g.v.size(); ++i) {
        auto x = lat.position(i);
        g.v[i] = std::exp(-(x[0] * x[0] + x[1] * x[1]) / (2 * width * width));
        s += g.v[i];
    }
    for (double& x : g.v) x *= mass / (s * lat.cell());
    return g;
}

GridMeasure uniform_density(const SpaceLattice& lat, double mass) {
    GridMeasure g(lat);
    double val = mass / (static_cast<double>(lat.nodes()) * lat.cell());
    for (double& x : g.v) x = val;
    return g;
}

std::vector<TestFunction> test_family(const SpaceLattice& lat) {
    const double L = lat.L();
    const double r1 = L / 8, r2 = L / 4;
    struct Bump {
        double c, w;
    };
    const Bump bumps[3] = {{0.0, L / 16}, {L / 32, L / 32}, {-L / 16, L / 8}};
    std::vector<TestFunction> fam;
    const char* bump_names[3] = {"bump_center", "bump_narrow", "bump_wide"};
    for (int b = 0; b < 3; ++b) {
        TestFunction tf{bump_names[b], std::vector<double>(lat.nodes())};
        for (std::size_t i = 0; i < tf.values.size(); ++i) {
            auto x = lat.position(i);
            double r = std::hypot(x[0] - bumps[b].c, x[1]);
            tf.values[i] = r < bumps[b].w ? 0.5 * (1 + std::cos(pi * r / bumps[b].w)) : 0.0;
        }
        fam.push_back(std::move(tf));
    }
    TestFunction tx{"tapered_x", std::vector<double>(lat.nodes())};
    TestFunction tx2{"tapered_x2", std::vector<double>(lat.nodes())};
    TestFunction tc{"tapered_cos", std::vector<double>(lat.nodes())};
    const double k = 2 * pi * 4 / L;
    for (std::size_t i = 0; i < lat.nodes(); ++i) {
        auto x = lat.position(i);
        double r = std::hypot(x[0], x[1]);
        double t = taper(r, r1, r2);
        tx.values[i] = x[0] * t;
        tx2.values[i] = (x[0] * x[0] + x[1] * x[1]) * t;
        tc.values[i] = std::cos(k * x[0]) * t;
    }
    fam.push_back(std::move(tx));
    fam.push_back(std::move(tx2));
    fam.push_back(std::move(tc));
    return fam;
}

std::vector<double> discrete_laplacian(const SpaceLattice& lat, const std::vector<double>& f) {
    if (f.size() != lat.nodes()) throw MismatchError("laplacian: size mismatch");
    const std::size_t n = lat.n;
    const double ih2 = 1.0 / (lat.h * lat.h);
    std::vector<double> out(f.size());
    if (lat.d == 1) {
        for (std::size_t i = 0; i < n; ++i) out[i] = (f[(i + 1) % n] - 2 * f[i] + f[(i + n - 1) % n]) * ih2;
        return out;
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double c = f[i * n + j];
            out[i * n + j] = (f[((i + 1) % n) * n + j] + f[((i + n - 1) % n) * n + j] + f[i * n + (j + 1) % n] +
                              f[i * n + (j + n - 1) % n] - 4 * c) *
                             ih2;
        }
    return out;
}

double laplacian_symbol(const SpaceLattice& lat, std::size_t idx) {
    auto k = lat.wavevector(idx);
    double ih2 = 1.0 / (lat.h * lat.h);
    double s = (2 * std::cos(k[0] * lat.h) - 2) * ih2;
    if (lat.d == 2) s += (2 * std::cos(k[1] * lat.h) - 2) * ih2;
    return s;
}

}  // namespace subdiff
