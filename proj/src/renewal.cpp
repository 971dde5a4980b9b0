#include "subdiff/renewal.hpp"

#include <algorithm>
#include <cmath>

namespace subdiff {

namespace {

std::vector<std::size_t> checkpoint_nodes(const UniformTimeGrid& g, std::size_t last, double t_lo) {
    std::vector<std::size_t> out;
    for (double t : log_times(std::max(t_lo, g.dt), g.at(last))) {
        auto n = static_cast<std::size_t>(std::llround(t / g.dt));
        n = std::clamp<std::size_t>(n, 1, last);
        if (out.empty() || out.back() != n) out.push_back(n);
    }
    return out;
}

// cell integrals of psi over [j dt, (j+1) dt)
std::vector<double> psi_cells(const SurvivalModel& m, double dt, std::size_t n) {
    std::vector<double> P(n);
    for (std::size_t j = 0; j < n; ++j) P[j] = m.psi_integral(dt * static_cast<double>(j), dt * static_cast<double>(j + 1));
    return P;
}

// weights of int_0^dt f(k dt + x) * (1 - x/dt) and * (x/dt)
template <class F>
std::pair<double, double> hat_moments(F f, double k_dt, double dt) {
    double a = 0, b = 0;
    for (int q = 0; q < 8; ++q) {
        double x = gl8_x[q];
        double v = f(k_dt + dt * x) * gl8_w[q] * dt;
        a += v * (1 - x);
        b += v * x;
    }
    return {a, b};
}

}  // namespace

double AgeDensity::total() const {
    double s = tail;
    for (double x : mass) s += x;
    return s;
}

RenewalResult solve_renewal(const SurvivalModel& m, const AgeProfile& n0, double T, double dt,
                            const std::vector<double>& snapshot_times, double da) {
    if (!(dt > 0) || !(T > 0)) throw DomainError("solve_renewal: T and dt must be positive");
    if (da > 0 && std::abs(da - dt) > 1e-12 * dt) throw MismatchError("solve_renewal: age step must equal time step (dt = da)");
    const auto n_steps = static_cast<std::size_t>(std::llround(T / dt));
    const double total0 = n0.mass();

    // cell survival: a cohort in age cell j keeps P[j+1]/P[j] of its mass over one step
    std::vector<double> P = psi_cells(m, dt, n_steps + 2);
    std::vector<double> loss(n_steps + 1);
    for (std::size_t j = 0; j <= n_steps; ++j) {
        double a = dt * static_cast<double>(j);
        double drop = 0;
        for (int q = 0; q < 8; ++q) {
            double x = a + dt * gl8_x[q];
            drop += gl8_w[q] * dt * m.survival_drop(x, x + dt);
        }
        loss[j] = drop / P[j];
    }

    RenewalResult res;
    res.N.grid = {dt, n_steps};
    res.N.cell_average = true;
    res.N.values.assign(n_steps + 1, 0.0);
    res.N.values[0] = n0.aged_rate(m, 0.0);

    std::vector<std::size_t> snap_nodes;
    for (double t : snapshot_times) {
        auto n = static_cast<std::size_t>(std::llround(t / dt));
        if (n <= n_steps) snap_nodes.push_back(n);
    }
    std::sort(snap_nodes.begin(), snap_nodes.end());
    snap_nodes.erase(std::unique(snap_nodes.begin(), snap_nodes.end()), snap_nodes.end());
    std::size_t next_snap = 0;

    AgeGrid grid{dt, T + n0.support() + dt, 0};
    grid.n_cells = static_cast<std::size_t>(std::ceil(grid.a_max / dt));
    auto snapshot = [&](std::size_t n, const std::vector<double>& cohort) {
        AgeDensity s;
        s.t = dt * static_cast<double>(n);
        s.grid = grid;
        s.mass.assign(grid.n_cells, 0.0);
        s.boundary = res.N.values[n];
        for (std::size_t b = 1; b <= n; ++b) s.mass[n - b] += cohort[b];
        auto put = [&](double age, double mass) {
            auto j = static_cast<std::size_t>(age / dt);
            if (j < grid.n_cells)
                s.mass[j] += mass;
            else
                s.tail += mass;
        };
        if (n0.dirac_mass() > 0) put(s.t, n0.dirac_mass() * m.psi(s.t));
        for (auto& q : n0.nodes()) put(q[0] + s.t, q[1] * m.psi(q[0] + s.t) / m.psi(q[0]));
        return s;
    };

    // cohort[b]: mass born during step b
    std::vector<double> cohort(n_steps + 1, 0.0);
    if (next_snap < snap_nodes.size() && snap_nodes[next_snap] == 0) res.snapshots.push_back(snapshot(0, cohort)), ++next_snap;
    double max_err = 0;
    for (std::size_t n = 1; n <= n_steps; ++n) {
        double deaths = n0.aged_drop(m, dt * static_cast<double>(n - 1), dt * static_cast<double>(n));
        double alive = 0;
        for (std::size_t b = 1; b < n; ++b) {
            double d = cohort[b] * loss[n - 1 - b];
            cohort[b] -= d;
            deaths += d;
            alive += cohort[b];
        }
        cohort[n] = deaths;
        res.N.values[n] = deaths / P[0];
        alive += deaths;
        if (total0 > 0) {
            double err = std::abs(alive + n0.aged_mass(m, dt * static_cast<double>(n)) - total0) / total0;
            max_err = std::max(max_err, err);
        }
        while (next_snap < snap_nodes.size() && snap_nodes[next_snap] == n) {
            res.snapshots.push_back(snapshot(n, cohort));
            ++next_snap;
        }
    }
    res.max_mass_error = max_err;
    res.max_N = *std::max_element(res.N.values.begin(), res.N.values.end());
    return res;
}

BoundarySeries boundary_volterra(const SurvivalModel& m, const AgeProfile& n0, const UniformTimeGrid& grid) {
    const std::size_t n = grid.n_steps;
    const double dt = grid.dt;
    std::vector<double> A(n + 1), B(n + 1);
    auto phi = [&](double t) { return m.phi(t); };
    for (std::size_t k = 0; k <= n; ++k) {
        auto [a, b] = hat_moments(phi, dt * static_cast<double>(k), dt);
        A[k] = a;
        B[k] = b;
    }
    BoundarySeries out;
    out.grid = grid;
    out.values.assign(n + 1, 0.0);
    auto& N = out.values;
    N[0] = n0.aged_rate(m, 0.0);
    for (std::size_t j = 1; j <= n; ++j) {
        double s = n0.aged_rate(m, grid.at(j)) + B[0] * N[j - 1];
        for (std::size_t k = 1; k < j; ++k) s += A[k] * N[j - k] + B[k] * N[j - k - 1];
        N[j] = s / (1 - A[0]);
    }
    return out;
}

double psi_convolution_at(const BoundarySeries& N, const SurvivalModel& m, std::size_t n) {
    const double dt = N.grid.dt;
    double s = 0;
    if (N.cell_average) {
        for (std::size_t b = 1; b <= n; ++b)
            s += N.values[b] * m.psi_integral(dt * static_cast<double>(n - b), dt * static_cast<double>(n - b + 1));
        return s;
    }
    auto psi = [&](double t) { return m.psi(t); };
    for (std::size_t k = 0; k < n; ++k) {
        auto [a, b] = hat_moments(psi, dt * static_cast<double>(k), dt);
        s += a * N.values[n - k] + b * N.values[n - k - 1];
    }
    return s;
}

PsiConvolutionCheck check_psi_convolution(const BoundarySeries& N, const SurvivalModel& m, double total0) {
    const std::size_t last = N.values.size() - 1;
    const double t_max = N.grid.at(last);
    if (t_max < 1e2 * (1 - 1e-9)) throw DomainError("check_psi_convolution: horizon too short (needs t_max >= 100)");
    PsiConvolutionCheck out;
    const double a = m.family() == SurvivalModel::Family::exponential ? 1.0 : m.alpha();
    for (std::size_t n : checkpoint_nodes(N.grid, last, N.grid.dt)) {
        double t = N.grid.at(n);
        out.residual.push(t, std::abs(psi_convolution_at(N, m, n) - total0));
    }
    double C = 0, late = 0;
    for (std::size_t i = 0; i < out.residual.size(); ++i) {
        double t = out.residual.t[i], w = out.residual.v[i] * std::pow(1 + t, a);
        if (t >= 1 && t <= 1e2 * (1 + 1e-9)) C = std::max(C, w);
        if (t >= 1e2 * (1 - 1e-9)) late = std::max(late, w);
    }
    out.C = C;
    out.bound_ratio = C > 0 ? late / C : (late > 0 ? INFINITY : 0.0);
    bool all_positive = true;
    for (std::size_t i = 0; i < out.residual.size(); ++i)
        if (out.residual.t[i] >= 1e2 * (1 - 1e-9) && !(out.residual.v[i] > 0)) all_positive = false;
    // the decay fit needs a full decade past t = 100
    if (all_positive && total0 > 0 && t_max >= 1e3 * (1 - 1e-9)) out.decay = fit_power_law(out.residual, 1e2, std::min(1e4, t_max));
    return out;
}

ConvolutionAsymptotics convol_asymptotics(const BoundarySeries& N, double mu, const SurvivalModel& m, double total0) {
    if (m.family() == SurvivalModel::Family::exponential)
        throw DomainError("convol_asymptotics: waiting times are not heavy tailed (alpha must lie in (0,1))");
    const double alpha = m.alpha();
    if (!(mu > 1 - alpha)) throw DomainError("convol_asymptotics: mu must exceed 1 - alpha");
    ConvolutionAsymptotics out;
    out.limit = total0 / (m.tail_constant() * gamma(1 - alpha));
    const std::size_t last = N.values.size() - 1;
    const double dt = N.grid.dt;
    const double g1 = gamma(mu + 1);
    // int_{u}^{u+h} Y_mu written as u^mu expm1(...) to keep far cells accurate
    auto cellY = [&](double u, double h) {
        if (u == 0) return std::pow(h, mu) / g1;
        return std::pow(u, mu) * std::expm1(mu * std::log1p(h / u)) / g1;
    };
    for (std::size_t n : checkpoint_nodes(N.grid, last, 1.0)) {
        double t = N.grid.at(n);
        double s = 0;
        if (N.cell_average) {
            for (std::size_t b = 1; b <= n; ++b) s += N.values[b] * cellY(dt * static_cast<double>(n - b), dt);
        } else {
            for (std::size_t k = 0; k < n; ++k) {
                auto w = y_cell_weights(mu, dt * static_cast<double>(k), dt);
                s += w.right * N.values[n - k] + w.left * N.values[n - k - 1];
            }
        }
        out.ratio.push(t, s / y_eval({mu + alpha}, t));
    }
    if (!out.ratio.empty() && out.limit != 0) out.final_rel_dev = out.ratio.v.back() / out.limit - 1;
    return out;
}

}  // namespace subdiff
