#include "subdiff/spatial.hpp"

#include <algorithm>
#include <cmath>

namespace subdiff {

namespace {

bool is_extra(const std::vector<double>& extra, double x) {
    return std::binary_search(extra.begin(), extra.end(), x);
}

// uniform then geometric nodes up to tau_max, with the extra nodes kept exactly
TimeMesh tau_mesh(const AgeMeshSpec& s, double tau_max, std::vector<double> extra) {
    if (!(s.da > 0) || !(s.growth > 1) || !(s.a_uniform >= s.da)) throw DomainError("age mesh: bad spec");
    std::vector<double> base{0.0};
    double x = 0;
    while (x < tau_max) {
        x = x < s.a_uniform * (1 - 1e-12) ? x + s.da : x * s.growth;
        base.push_back(std::min(x, tau_max));
    }
    std::sort(extra.begin(), extra.end());
    extra.erase(std::unique(extra.begin(), extra.end()), extra.end());
    std::vector<double> all = base;
    for (double e : extra)
        if (e > 0 && e <= tau_max) all.push_back(e);
    std::sort(all.begin(), all.end());
    TimeMesh m;
    for (double y : all) {
        if (!m.t.empty()) {
            double prev = m.t.back();
            double gap = y - prev;
            if (gap <= 1e-12 * std::max(1.0, y)) {
                if (is_extra(extra, y)) m.t.back() = y;
                continue;
            }
            double local = std::max(s.da, (s.growth - 1) * prev);
            if (gap < 0.25 * local) {
                if (is_extra(extra, y) && !is_extra(extra, prev) && m.t.size() > 1) {
                    m.t.back() = y;
                    continue;
                }
                if (!is_extra(extra, y)) continue;
            }
        }
        m.t.push_back(y);
    }
    return m;
}

// D(i, j) = int_{cell i} psi(tau_j - s) - psi(tau_{j+1} - s) ds, with psi = 1 for negative times.
// Stored by column: D[j (j+1)/2 + i], i <= j.
std::vector<double> death_weights(const SurvivalModel& m, const TimeMesh& mesh) {
    const std::size_t C = mesh.size() - 1;
    std::vector<double> D(C * (C + 1) / 2);
    parallel_for(C, [&](std::size_t j) {
        const double tj = mesh.t[j], tj1 = mesh.t[j + 1];
        double* col = &D[j * (j + 1) / 2];
        for (std::size_t i = 0; i < j; ++i) {
            const double a = mesh.t[i], b = mesh.t[i + 1], h = b - a;
            if (tj - b >= 4 * h) {
                double s = 0;
                for (int q = 0; q < 8; ++q) {
                    double sig = a + h * gl8_x[q];
                    s += gl8_w[q] * m.survival_drop(tj - sig, tj1 - sig);
                }
                col[i] = s * h;
            } else {
                col[i] = m.psi_integral(tj - b, tj - a) - m.psi_integral(tj1 - b, tj1 - a);
            }
        }
        const double h = tj1 - tj;
        col[j] = h - m.psi_integral(0, h);
    });
    return D;
}

void check_kernel_lattice(const JumpKernel& k, double eps, const SpaceLattice& lat) {
    if (k.d != lat.d) throw MismatchError("kernel dimension differs from lattice dimension");
    if (k.variant == JumpKernel::Variant::gaussian) return;
    double r = eps / lat.h;
    for (auto& z : k.offsets)
        for (int ax = 0; ax < lat.d; ++ax) {
            double s = z[ax] * r;
            if (std::abs(s - std::round(s)) > 1e-9)
                throw MismatchError("kernel steps are not lattice-commensurate: eps * offset must be a multiple of h");
        }
}

// per lattice mode: group index by distinct z
void group_modes(const JumpKernel& k, double eps, const SpaceLattice& lat, ModeState& ms) {
    const std::size_t N = lat.nodes();
    std::vector<std::pair<cplx, std::size_t>> zs(N);
    for (std::size_t i = 0; i < N; ++i) {
        auto w = lat.wavevector(i);
        zs[i] = {kernel_char_fn(k, {eps * w[0], eps * w[1]}), i};
    }
    auto less = [](const auto& x, const auto& y) {
        if (x.first.real() != y.first.real()) return x.first.real() < y.first.real();
        return x.first.imag() < y.first.imag();
    };
    std::sort(zs.begin(), zs.end(), less);
    ms.z.clear();
    ms.mode_of.assign(N, 0);
    for (auto& [z, i] : zs) {
        if (ms.z.empty() || std::abs(z - ms.z.back()) > 1e-13) ms.z.push_back(z);
        ms.mode_of[i] = ms.z.size() - 1;
    }
}

}  // namespace

SpatialSolution solve_agepde(const SurvivalModel& m, const JumpKernel& k, const InitialCondition& r0, double eps,
                             double T, const std::vector<double>& output_times, const SpatialOptions& opts) {
    if (!(eps > 0)) throw DomainError("eps must be positive");
    if (eps > 1) throw DomainError("eps must lie in (0,1]");
    if (!(T > 0)) throw DomainError("horizon must be positive");
    if (r0.pieces.empty()) throw DomainError("initial condition is empty");
    const SpaceLattice& lat = r0.lattice();
    for (auto& p : r0.pieces) {
        if (!(p.rho.lattice == lat)) throw MismatchError("initial pieces live on different lattices");
        if (!(p.age.mass() > 0)) throw DomainError("every initial piece needs a positive age mass");
    }
    check_kernel_lattice(k, eps, lat);
    const double alpha = m.family() == SurvivalModel::Family::exponential ? 1.0 : m.alpha();

    SpatialSolution sol;
    sol.eps = eps;
    sol.time_scale = std::pow(eps, 2 / alpha);
    std::vector<double> extra;
    for (double t : output_times) {
        if (t < 0 || t > T * (1 + 1e-12)) throw DomainError("output time outside [0, T]");
        extra.push_back(t / sol.time_scale);
    }
    sol.tau = tau_mesh(opts.mesh, T / sol.time_scale, extra);
    sol.t.t.resize(sol.tau.size());
    for (std::size_t i = 0; i < sol.tau.size(); ++i) sol.t.t[i] = sol.tau.t[i] * sol.time_scale;
    for (double t : output_times) sol.t.t[sol.tau.index_of(t / sol.time_scale)] = t;

    const std::size_t M = sol.tau.size(), C = M - 1, N = lat.nodes(), P = r0.pieces.size();
    const auto D = death_weights(m, sol.tau);
    group_modes(k, eps, lat, sol.modes);
    const std::size_t G = sol.modes.z.size();

    // F[p][g][m] = 1 + (z - 1) * (cumulative jumps up to tau_m) for a unit-mass age profile
    std::vector<std::vector<std::vector<cplx>>> F(P, std::vector<std::vector<cplx>>(G));
    if (opts.keep_modes) sol.modes.boundary.assign(P, std::vector<std::vector<cplx>>(G));
    for (std::size_t p = 0; p < P; ++p) {
        const auto& age = r0.pieces[p].age;
        const double inv = 1.0 / age.mass();
        std::vector<double> drop(C);
        for (std::size_t j = 0; j < C; ++j) drop[j] = age.aged_drop(m, sol.tau.t[j], sol.tau.t[j + 1]) * inv;
        parallel_for(G, [&](std::size_t g) {
            const cplx z = sol.modes.z[g];
            std::vector<cplx> b(C);
            auto& f = F[p][g];
            f.assign(M, 1.0);
            cplx cum = 0;
            for (std::size_t j = 0; j < C; ++j) {
                const double* col = &D[j * (j + 1) / 2];
                cplx s = 0;
                for (std::size_t i = 0; i < j; ++i) s += b[i] * col[i];
                b[j] = z * (s + drop[j]) / (sol.tau.h(j) - z * col[j]);
                cum += s + b[j] * col[j] + drop[j];
                f[j + 1] = 1.0 + (z - 1.0) * cum;
            }
            if (opts.keep_modes) sol.modes.boundary[p][g] = std::move(b);
        });
    }

    std::vector<std::vector<cplx>> hat0(P);
    for (std::size_t p = 0; p < P; ++p) hat0[p] = fft_forward(lat, r0.pieces[p].rho.v);
    const double mass0 = r0.mass();

    std::vector<std::size_t> snap_nodes;
    if (opts.keep_all_nodes) {
        for (std::size_t i = 0; i < M; ++i) snap_nodes.push_back(i);
    } else {
        for (double t : output_times) snap_nodes.push_back(sol.tau.index_of(t / sol.time_scale));
    }
    for (std::size_t node : snap_nodes) {
        std::vector<cplx> R(N, 0.0);
        for (std::size_t p = 0; p < P; ++p)
            for (std::size_t i = 0; i < N; ++i) R[i] += hat0[p][i] * F[p][sol.modes.mode_of[i]][node];
        GridMeasure g(lat);
        g.v = fft_inverse_real(lat, R);
        double mx = 0;
        for (double x : g.v) mx = std::max(mx, x);
        for (double& x : g.v) {
            if (x >= 0) continue;
            if (x >= -opts.clip * mx) {
                x = 0;
                ++sol.clipped;
            } else {
                sol.min_value = std::min(sol.min_value, x);
            }
        }
        if (mass0 != 0) sol.max_mass_error = std::max(sol.max_mass_error, std::abs(g.mass() / mass0 - 1));
        sol.traj.t.push_back(sol.t.t[node]);
        sol.traj.rho.push_back(std::move(g));
    }

    // pairings from group sums: scale * Re sum_p sum_g (sum_{k in g} hat0 conj(phi^)) F
    const double scale = lat.cell() / static_cast<double>(N);
    auto pair_series = [&](const std::vector<double>& phi) {
        auto ph = fft_forward(lat, phi);
        std::vector<std::vector<cplx>> S(P, std::vector<cplx>(G, 0.0));
        for (std::size_t p = 0; p < P; ++p)
            for (std::size_t i = 0; i < N; ++i) S[p][sol.modes.mode_of[i]] += hat0[p][i] * std::conj(ph[i]);
        Series s;
        for (std::size_t node = 0; node < M; ++node) {
            cplx v = 0;
            for (std::size_t p = 0; p < P; ++p)
                for (std::size_t g = 0; g < G; ++g) v += S[p][g] * F[p][g][node];
            s.push(sol.t.t[node], v.real() * scale);
        }
        return s;
    };
    for (const auto& phi : opts.pair_with) {
        if (phi.size() != N) throw MismatchError("test function has wrong size");
        sol.pairings.push_back(pair_series(phi));
        sol.dual_pairings.push_back(pair_series(dual_discrete_laplacian(k, eps, lat, phi)));
    }
    return sol;
}

std::vector<cplx> nonjumpers_part(const InitialCondition& r0, const SurvivalModel& m, double eps, double t) {
    const double alpha = m.family() == SurvivalModel::Family::exponential ? 1.0 : m.alpha();
    const double tau = t / std::pow(eps, 2 / alpha);
    const SpaceLattice& lat = r0.lattice();
    std::vector<cplx> out(lat.nodes(), 0.0);
    for (auto& p : r0.pieces) {
        auto h = fft_forward(lat, p.rho.v);
        double f = p.age.aged_mass(m, tau) / p.age.mass();
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += h[i] * f;
    }
    return out;
}

std::vector<cplx> jumpers_part(const SpatialSolution& sol, const SurvivalModel& m, const InitialCondition& r0,
                               double t) {
    if (sol.modes.boundary.empty()) throw DomainError("jumpers_part needs a solution computed with keep_modes");
    const std::size_t node = sol.t.index_of(t);
    const auto& tau = sol.tau.t;
    std::vector<double> W(node);
    for (std::size_t i = 0; i < node; ++i) W[i] = m.psi_integral(tau[node] - tau[i + 1], tau[node] - tau[i]);
    const SpaceLattice& lat = r0.lattice();
    const std::size_t G = sol.modes.z.size();
    std::vector<cplx> out(lat.nodes(), 0.0);
    for (std::size_t p = 0; p < r0.pieces.size(); ++p) {
        std::vector<cplx> J(G, 0.0);
        for (std::size_t g = 0; g < G; ++g)
            for (std::size_t i = 0; i < node; ++i) J[g] += sol.modes.boundary[p][g][i] * W[i];
        auto h = fft_forward(lat, r0.pieces[p].rho.v);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += h[i] * J[sol.modes.mode_of[i]];
    }
    return out;
}

std::vector<double> dual_discrete_laplacian(const JumpKernel& k, double eps, const SpaceLattice& lat,
                                            const std::vector<double>& phi) {
    if (phi.size() != lat.nodes()) throw MismatchError("test function has wrong size");
    if (k.d != lat.d) throw MismatchError("kernel dimension differs from lattice dimension");
    const double ie2 = 1.0 / (eps * eps);
    bool on_lattice = k.variant != JumpKernel::Variant::gaussian;
    if (on_lattice)
        for (auto& z : k.offsets)
            for (int ax = 0; ax < 2; ++ax) {
                double s = z[ax] * eps / lat.h;
                if (std::abs(s - std::round(s)) > 1e-9) on_lattice = false;
            }
    std::vector<double> out(phi.size(), 0.0);
    if (on_lattice) {
        const auto n = static_cast<long>(lat.n);
        auto wrap = [n](long i) { return ((i % n) + n) % n; };
        for (std::size_t q = 0; q < k.probs.size(); ++q) {
            long sx = std::lround(k.offsets[q][0] * eps / lat.h);
            long sy = std::lround(k.offsets[q][1] * eps / lat.h);
            for (std::size_t idx = 0; idx < phi.size(); ++idx) {
                std::size_t src;
                if (lat.d == 1) {
                    src = static_cast<std::size_t>(wrap(static_cast<long>(idx) + sx));
                } else {
                    long ix = static_cast<long>(idx / lat.n), iy = static_cast<long>(idx % lat.n);
                    src = static_cast<std::size_t>(wrap(ix + sx) * n + wrap(iy + sy));
                }
                out[idx] += k.probs[q] * (phi[src] - phi[idx]);
            }
        }
        for (double& x : out) x *= ie2;
        return out;
    }
    auto ph = fft_forward(lat, phi);
    for (std::size_t i = 0; i < ph.size(); ++i) {
        auto w = lat.wavevector(i);
        ph[i] *= (std::conj(kernel_char_fn(k, {eps * w[0], eps * w[1]})) - 1.0) * ie2;
    }
    return fft_inverse_real(lat, ph);
}

void check_compact_support(const SpaceLattice& lat, const std::vector<double>& phi) {
    if (phi.size() != lat.nodes()) throw MismatchError("test function has wrong size");
    double mx = 0;
    for (double x : phi) mx = std::max(mx, std::abs(x));
    const double edge = lat.L() / 2 - lat.L() / 16;
    for (std::size_t i = 0; i < phi.size(); ++i) {
        auto x = lat.position(i);
        bool far = std::abs(x[0]) >= edge || (lat.d == 2 && std::abs(x[1]) >= edge);
        if (far && std::abs(phi[i]) > 1e-12 * mx)
            throw DomainError("test function is not compactly supported inside the period (wrap contamination)");
    }
}

double weak_form_residual(const Series& P, const Series& Q, double alpha, double coeff) {
    if (P.size() != Q.size() || P.empty()) throw MismatchError("weak_form_residual: P and Q must share their times");
    for (std::size_t i = 0; i < P.size(); ++i)
        if (P.t[i] != Q.t[i]) throw MismatchError("weak_form_residual: P and Q must share their times");
    if (P.t[0] != 0) throw DomainError("weak_form_residual: series must start at t = 0");
    TimeMesh mesh{P.t};
    auto YQ = product_convolve_y(PowerKernel{alpha}, Q.v, mesh);
    double r = 0;
    for (std::size_t i = 0; i < P.size(); ++i) r = std::max(r, std::abs(P.v[i] - P.v[0] - coeff * YQ[i]));
    return r;
}

double weak_form_residual(const Trajectory& traj, const std::vector<double>& phi, const SurvivalModel& m,
                          const JumpKernel& k, double eps, double D_alpha) {
    if (traj.rho.empty()) throw DomainError("weak_form_residual: empty trajectory");
    const SpaceLattice& lat = traj.rho[0].lattice;
    check_compact_support(lat, phi);
    auto dphi = dual_discrete_laplacian(k, eps, lat, phi);
    Series P, Q;
    for (std::size_t i = 0; i < traj.t.size(); ++i) {
        P.push(traj.t[i], traj.rho[i].pair(phi));
        Q.push(traj.t[i], traj.rho[i].pair(dphi));
    }
    const double alpha = m.family() == SurvivalModel::Family::exponential ? 1.0 : m.alpha();
    return weak_form_residual(P, Q, alpha, 2.0 * lat.d * D_alpha / k.sigma2);
}

}  // namespace subdiff
