#include "subdiff/fracpde.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace subdiff {

namespace {

// product-trapezoid weights of Y_alpha on a mesh. Uniform meshes only need one row per lag.
class MemoryWeights {
public:
    MemoryWeights(double alpha, const TimeMesh& mesh) : mesh_(mesh) {
        const std::size_t M = mesh.size();
        double h0 = mesh.h(0);
        uniform_ = true;
        for (std::size_t i = 1; i + 1 < M && uniform_; ++i)
            if (std::abs(mesh.h(i) - h0) > 1e-9 * h0) uniform_ = false;
        if (uniform_) {
            lag_.resize(M);
            for (std::size_t k = 0; k + 1 < M; ++k) lag_[k] = y_cell_weights(alpha, h0 * static_cast<double>(k), h0);
        } else {
            packed_.resize(M * (M - 1) / 2);
            parallel_for(M - 1, [&](std::size_t r) {
                std::size_t m = r + 1;
                for (std::size_t i = 0; i < m; ++i)
                    packed_[m * (m - 1) / 2 + i] = y_cell_weights(alpha, mesh.t[m] - mesh.t[i + 1], mesh.h(i));
            });
        }
    }

    // weights of cell i in the integral up to node m
    const CellWeights& at(std::size_t m, std::size_t i) const {
        return uniform_ ? lag_[m - 1 - i] : packed_[m * (m - 1) / 2 + i];
    }

private:
    const TimeMesh& mesh_;
    bool uniform_ = false;
    std::vector<CellWeights> lag_, packed_;
};

std::vector<double> mode_history(double c, const MemoryWeights& W, std::size_t M) {
    std::vector<double> u(M);
    u[0] = 1;
    for (std::size_t m = 1; m < M; ++m) {
        double acc = 0;
        for (std::size_t i = 0; i + 1 < m; ++i) {
            const auto& w = W.at(m, i);
            acc += w.left * u[i] + w.right * u[i + 1];
        }
        const auto& last = W.at(m, m - 1);
        acc += last.left * u[m - 1];
        u[m] = (1 - c * acc) / (1 + c * last.right);
    }
    return u;
}

}  // namespace

double diffusion_coefficient(const SurvivalModel& m, const JumpKernel& k, int d) {
    if (d != 1 && d != 2) throw DomainError("dimension must be 1 or 2");
    return k.sigma2 / (2.0 * d * m.tail_constant() * gamma(1 - m.alpha()));
}

double exact_mode_solution(double alpha, double c, double t, double u0) {
    if (c < 0 || t < 0) throw DomainError("exact_mode_solution: c and t must be nonnegative");
    if (c == 0 || t == 0) return u0;
    return u0 * mittag_leffler(alpha, -c * std::pow(t, alpha));
}

double msd_prefactor(double alpha, double sigma2, double Psi) {
    double pa = std::numbers::pi * alpha;
    return std::sin(pa) / pa * sigma2 / Psi;
}

std::vector<double> solve_mode(double alpha, double c, const TimeMesh& mesh) {
    MemoryWeights W(alpha, mesh);
    return mode_history(c, W, mesh.size());
}

MildSolution solve_mild(const FractionalHeatProblem& p, double T, const std::vector<double>& output_times,
                        const MildOptions& opts) {
    if (!(p.alpha > 0 && p.alpha <= 1)) throw DomainError("alpha must lie in (0,1]");
    if (!(p.D_alpha > 0)) throw DomainError("D_alpha must be positive");
    if (!(T > 0)) throw DomainError("horizon must be positive");
    if (!(p.rho0.lattice == p.lattice)) throw MismatchError("initial density lives on a different lattice");
    for (double x : p.rho0.v)
        if (x < 0) throw DomainError("initial density must be nonnegative");
    const SpaceLattice& lat = p.lattice;
    const std::size_t N = lat.nodes();

    // distinct decay rates, grouped with a relative tolerance (mirror modes differ by rounding only)
    std::vector<std::pair<double, std::size_t>> cs(N);
    for (std::size_t i = 0; i < N; ++i) cs[i] = {-p.D_alpha * laplacian_symbol(lat, i), i};
    std::sort(cs.begin(), cs.end());
    MildSolution out;
    out.mode_of.resize(N);
    for (auto& [c, i] : cs) {
        c = std::max(c, 0.0);
        if (out.mode_c.empty() || c - out.mode_c.back() > 1e-12 * std::max(1.0, c)) out.mode_c.push_back(c);
        out.mode_of[i] = out.mode_c.size() - 1;
    }
    const std::size_t G = out.mode_c.size();

    std::vector<double> checks;
    {
        std::vector<double> o = output_times;
        std::sort(o.begin(), o.end());
        o.erase(std::remove(o.begin(), o.end(), 0.0), o.end());
        if (o.empty()) o = {T / 100, T / 10, T};
        // a handful of check times is enough; each costs one Mittag-Leffler call per probe
        const std::size_t K = std::min<std::size_t>(o.size(), 5);
        for (std::size_t q = 0; q < K; ++q) checks.push_back(o[K == 1 ? 0 : q * (o.size() - 1) / (K - 1)]);
    }
    // stiffest mode plus a spread of intermediate ones
    std::vector<std::size_t> probe;
    for (int q = 1; q <= 4; ++q) probe.push_back((G - 1) * static_cast<std::size_t>(q) / 4);

    double dt = opts.dt;
    double per_decade = opts.per_decade;
    const double t_first = std::min(T / 10, std::pow(1e-3 / std::max(out.mode_c.back(), 1e-300), 1 / p.alpha));
    for (int attempt = 0;; ++attempt) {
        std::vector<double> extra = output_times;
        extra.insert(extra.end(), checks.begin(), checks.end());
        if (dt > 0) {
            auto steps = static_cast<std::size_t>(std::llround(T / dt));
            out.mesh = uniform_mesh(T / static_cast<double>(steps), steps);
        } else {
            auto nodes = static_cast<std::size_t>(std::ceil(per_decade * std::log10(T / t_first)));
            out.mesh = graded_mesh(t_first, T, std::max<std::size_t>(nodes, 2), extra);
        }
        const std::size_t M = out.mesh.size();
        if (static_cast<double>(G) * static_cast<double>(M) * 8.0 > opts.memory_budget)
            throw SchemeError("solve_mild: memory budget exceeded for stored mode histories");
        MemoryWeights W(p.alpha, out.mesh);

        double err = 0;
        for (std::size_t g : probe) {
            auto u = mode_history(out.mode_c[g], W, M);
            for (double t : checks) {
                std::size_t m = out.mesh.index_of(dt > 0 ? std::round(t / out.mesh.h(0)) * out.mesh.h(0) : t);
                double ex = exact_mode_solution(p.alpha, out.mode_c[g], out.mesh.t[m]);
                err = std::max(err, std::abs(u[m] - ex) / std::abs(ex));
            }
        }
        out.validation_error = err;
        out.refinements = attempt;
        if (err <= opts.tol) break;
        if (attempt >= opts.max_refine)
            throw SchemeError("solve_mild: mode oracle check failed after refinement (rel. error " +
                              std::to_string(err) + ")");
        if (dt > 0)
            dt /= 2;
        else
            per_decade *= 2;
    }

    const std::size_t M = out.mesh.size();
    MemoryWeights W(p.alpha, out.mesh);
    out.mode_u.assign(G, {});
    parallel_for(G, [&](std::size_t g) { out.mode_u[g] = mode_history(out.mode_c[g], W, M); });
    for (double x : out.mode_u[out.mode_of[0]])
        if (std::abs(x - 1) > 1e-8) throw SchemeError("solve_mild: mode-0 drift (instability)");

    auto rho0_hat = fft_forward(lat, p.rho0.v);
    for (double t : output_times) {
        std::size_t m = out.mesh.index_of(dt > 0 ? std::round(t / out.mesh.h(0)) * out.mesh.h(0) : t);
        std::vector<cplx> F(N);
        for (std::size_t i = 0; i < N; ++i) F[i] = rho0_hat[i] * out.mode_u[out.mode_of[i]][m];
        GridMeasure g(lat);
        g.v = fft_inverse_real(lat, F);
        out.traj.t.push_back(out.mesh.t[m]);
        out.traj.rho.push_back(std::move(g));
    }

    // <rho(t), phi> = h^d/N sum_k rho0^(k) u_k(t) conj(phi^(k)), summed per group first
    const double scale = lat.cell() / static_cast<double>(N);
    for (const auto& phi : opts.pair_with) {
        auto phi_hat = fft_forward(lat, phi);
        std::vector<double> Gsum(G, 0.0);
        for (std::size_t i = 0; i < N; ++i) Gsum[out.mode_of[i]] += (rho0_hat[i] * std::conj(phi_hat[i])).real();
        Series s;
        for (std::size_t m = 0; m < M; ++m) {
            double v = 0;
            for (std::size_t g = 0; g < G; ++g) v += Gsum[g] * out.mode_u[g][m];
            s.push(out.mesh.t[m], v * scale);
        }
        out.pairings.push_back(std::move(s));
    }
    return out;
}

std::vector<double> caputo_l1(const std::vector<double>& f, const UniformTimeGrid& grid, double alpha) {
    if (!(alpha > 0 && alpha < 1)) throw DomainError("caputo_l1: alpha must lie in (0,1)");
    if (f.size() != grid.size()) throw MismatchError("caputo_l1: series does not match the grid");
    const std::size_t n = f.size();
    std::vector<double> b(n);
    for (std::size_t j = 0; j < n; ++j)
        b[j] = std::pow(static_cast<double>(j + 1), 1 - alpha) - std::pow(static_cast<double>(j), 1 - alpha);
    const double s = std::pow(grid.dt, -alpha) / gamma(2 - alpha);
    std::vector<double> out(n, 0.0);
    for (std::size_t m = 1; m < n; ++m) {
        double acc = 0;
        for (std::size_t j = 0; j < m; ++j) acc += b[j] * (f[m - j] - f[m - j - 1]);
        out[m] = s * acc;
    }
    return out;
}

std::vector<double> caputo_l1(const std::vector<double>& f, const TimeMesh& mesh, double alpha) {
    if (!(alpha > 0 && alpha < 1)) throw DomainError("caputo_l1: alpha must lie in (0,1)");
    if (f.size() != mesh.size()) throw MismatchError("caputo_l1: series does not match the mesh");
    const double g = gamma(2 - alpha);
    std::vector<double> out(f.size(), 0.0);
    parallel_for(f.size() - 1, [&](std::size_t r) {
        std::size_t m = r + 1;
        double acc = 0;
        for (std::size_t i = 0; i < m; ++i) {
            double w = std::pow(mesh.t[m] - mesh.t[i], 1 - alpha) - std::pow(mesh.t[m] - mesh.t[i + 1], 1 - alpha);
            acc += (f[i + 1] - f[i]) / mesh.h(i) * w;
        }
        out[m] = acc / g;
    });
    return out;
}

MomentSeries moments(const Trajectory& traj, double wrap_limit) {
    MomentSeries ms;
    for (std::size_t i = 0; i < traj.t.size(); ++i) {
        const auto& r = traj.rho[i];
        double w = r.wrap_fraction();
        ms.max_wrap = std::max(ms.max_wrap, w);
        if (w > wrap_limit)
            throw DomainError("moments: mass near the period edge (" + std::to_string(w) + ") makes moments unreliable");
        ms.mass.push(traj.t[i], r.mass());
        ms.first.push(traj.t[i], r.first_moment()[0]);
        ms.second.push(traj.t[i], r.second_moment());
    }
    return ms;
}

}  // namespace subdiff
