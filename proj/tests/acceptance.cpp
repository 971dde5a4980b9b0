// one line per acceptance criterion; exit status 1 if any is red
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include "subdiff/cli.hpp"
#include "subdiff/harness.hpp"

using namespace subdiff;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int id, const std::string& title, bool ok, const std::string& detail, double seconds) {
    std::printf("[%s] criterion %2d  %-28s %s  (%.1fs)\n", ok ? "PASS" : "FAIL", id, title.c_str(), detail.c_str(), seconds);
    std::fflush(stdout);
    if (!ok) ++failures;
}

std::string fmt(const char* f, double a) {
    char b[128];
    std::snprintf(b, sizeof b, f, a);
    return b;
}

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double s() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); }
};

// checks a list of metrics; detail lists each as name=value
bool metrics_ok(const ExperimentReport& r, const std::vector<std::string>& names, std::string& detail) {
    bool ok = true;
    for (const auto& n : names) {
        const Metric* m = r.find(n);
        if (!m) {
            detail += n + "=missing ";
            ok = false;
            continue;
        }
        char b[160];
        std::snprintf(b, sizeof b, "%s=%.4g%s ", n.c_str(), m->value, m->pass ? "" : "(!)");
        detail += b;
        ok = ok && m->pass;
    }
    return ok;
}

void kernel_algebra() {
    Timer tm;
    bool ok = true;
    std::string detail;
    double unit_gap = 0;
    for (auto [mu, nu] : {std::pair{0.5, 0.5}, {0.3, 0.7}, {1.0, 0.5}}) {
        std::vector<double> errs;
        for (double dt : {1e-2, 5e-3, 2.5e-3}) {
            const auto n = static_cast<std::size_t>(std::lround(10 / dt));
            UniformTimeGrid g{dt, n};
            std::vector<double> f(n + 1, 0.0);
            for (std::size_t j = 1; j <= n; ++j) f[j] = y_eval({nu}, g.at(j));
            std::optional<double> se;
            if (nu < 1) se = nu;
            auto r = product_convolve_y({mu}, f, g, se);
            // compare on the nodes all three grids share
            const auto stride = static_cast<std::size_t>(std::lround(1e-2 / dt));
            double e = 0;
            for (std::size_t j = stride; j <= n; j += stride) e = std::max(e, std::abs(r[j] - y_eval({mu + nu}, g.at(j))));
            errs.push_back(e);
            if (mu == 0.3 && dt == 2.5e-3) unit_gap = e;
        }
        double o1 = std::log2(errs[0] / errs[1]), o2 = std::log2(errs[1] / errs[2]);
        ok = ok && errs[1] < errs[0] && errs[2] < errs[1] && std::min(o1, o2) >= 1.0;
        char b[128];
        std::snprintf(b, sizeof b, "(%.1f,%.1f) order %.2f/%.2f; ", mu, nu, o1, o2);
        detail += b;
    }
    ok = ok && unit_gap <= 1e-3;
    detail += fmt("|Y.3*Y.7-1|=%.2e", unit_gap);
    report(1, "kernel algebra", ok, detail, tm.s());
}

void renewal_criteria() {
    Timer tm;
    RenewalConfig c;  // prototype alpha 0.5, K 1, uniform n0 on [0,1], T 1e4, dt 0.5
    auto r = renewal_experiment(c);
    const double el = tm.s();
    std::string d2, d3;
    bool ok2 = metrics_ok(r, {"psi_convolution_decay", "mass_error"}, d2);
    bool ok3 = metrics_ok(r, {"convolution_ratio_rel_dev"}, d3);
    report(2, "renewal limit", ok2, d2, el);
    report(3, "convolution asymptotics", ok3, d3, 0);
}

void msd_criteria() {
    Timer tm;
    MsdConfig c;
    c.alphas = {0.5, 0.3, 0.7};
    auto r = msd_experiment(c);
    const double el = tm.s();
    std::string d4;
    bool ok4 = metrics_ok(r, {"spatial_exponent[alpha=0.5]", "ctrw_exponent[alpha=0.5]", "spatial_prefactor_rel[alpha=0.5]",
                              "ctrw_prefactor_rel[alpha=0.5]", "spatial_exponent[alpha=0.3]", "ctrw_exponent[alpha=0.3]",
                              "spatial_exponent[alpha=0.7]", "ctrw_exponent[alpha=0.7]"},
                          d4);
    report(4, "MSD law", ok4, d4, el);
    std::string d9;
    bool ok9 = metrics_ok(r, {"ctrw_vs_spatial_se[alpha=0.5]", "ctrw_vs_fracpde_se[alpha=0.5]", "spatial_vs_fracpde_rel[alpha=0.5]"}, d9);
    report(9, "cross-method agreement", ok9, d9, 0);
}

void fractional_criteria() {
    Timer tm;
    SpaceLattice lat(1, 1024, 0.05);
    auto m = SurvivalModel::prototype(0.5, 1.0);
    auto k = JumpKernel::lattice_nn(1);
    FractionalHeatProblem p{0.5, diffusion_coefficient(m, k, 1), lat, point_mass(lat)};
    auto fam = test_family(lat);
    MildOptions o;
    o.pair_with = {fam[0].values, discrete_laplacian(lat, fam[0].values)};
    auto times = log_times(0.1, 10);
    auto s = solve_mild(p, 10, times, o);
    auto mo = moments(s.traj);
    double m2 = 0, mass = 0, first = 0;
    for (std::size_t i = 0; i < mo.second.size(); ++i) {
        const double t = mo.second.t[i];
        m2 = std::max(m2, std::abs(mo.second.v[i] / (2 / std::numbers::pi * std::sqrt(t)) - 1));
        mass = std::max(mass, std::abs(mo.mass.v[i] - 1));
        first = std::max(first, std::abs(mo.first.v[i]));
    }
    std::string d5 = fmt("M2 rel %.2e; ", m2) + fmt("mass %.2e; ", mass) + fmt("first %.2e", first);
    report(5, "fractional moments", m2 <= 0.02 && mass <= 1e-10 && first <= 1e-8, d5, tm.s());

    Timer t6;
    double worst = 0;
    for (double t : {0.1, 1.0, 10.0}) {
        const std::size_t i = s.mesh.index_of(t);
        for (std::size_t g = 0; g < s.mode_c.size(); ++g) {
            double ex = exact_mode_solution(0.5, s.mode_c[g], t);
            worst = std::max(worst, std::abs(s.mode_u[g][i] - ex) / ex);
        }
    }
    // d^a <rho, phi> = D <rho, Lap phi>, checked from t = 0.1 on
    auto cap = caputo_l1(s.pairings[0].v, s.mesh, 0.5);
    double res = 0, scale = 0;
    for (std::size_t i = 1; i < s.mesh.size(); ++i) {
        if (s.mesh.t[i] < 0.1) continue;
        res = std::max(res, std::abs(cap[i] - p.D_alpha * s.pairings[1].v[i]));
        scale = std::max(scale, std::abs(p.D_alpha * s.pairings[1].v[i]));
    }
    std::string d6 = fmt("worst mode rel %.2e over ", worst) + std::to_string(s.mode_c.size()) + " modes; " +
                     fmt("Caputo round trip rel %.2e", res / scale);
    report(6, "mode oracle", worst <= 1e-3 && res / scale <= 1e-2, d6, t6.s() + tm.s());
}

void convergence_criteria() {
    Timer tm;
    ConvergenceConfig c;  // alpha 0.5, delta 0.45, Gaussian bump, eps 0.2 .. 0.025, T = 1
    auto r = convergence_experiment(c);
    const double el = tm.s();
    std::string d7;
    bool ok7 = metrics_ok(r, {"E[eps=0.2]", "E[eps=0.1]", "E[eps=0.05]", "E[eps=0.025]", "E_step_ratio_max", "limit_mode_validation"}, d7);
    report(7, "weak convergence", ok7, d7, el);
    std::string d8;
    bool ok8 = metrics_ok(r, {"weak_residual_rate"}, d8);
    report(8, "weak-form residual rate", ok8, d8 + "(target 1.8 +- 0.3)", 0);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void determinism() {
    Timer tm;
    const auto root = fs::temp_directory_path() / "subdiff_acceptance";
    fs::remove_all(root);
    bool ok = true;
    std::size_t files = 0;
    std::string detail;
    for (const char* sc : {"experiment-renewal", "experiment-msd", "experiment-convergence", "simulate-ctrw"}) {
        fs::path dirs[2];
        for (int rep = 0; rep < 2; ++rep) {
            setenv("SUBDIFF_THREADS", rep == 0 ? "1" : "3", 1);
            Overrides ov{{"subcommand", sc}, {"out", (root / std::to_string(rep)).string()}};
            if (std::string(sc) == "experiment-convergence") {
                ov.push_back({"n", "512"});
            }
            if (std::string(sc) == "simulate-ctrw") {
                ov.push_back({"n", "256"});
                ov.push_back({"n_particles", "20000"});
            }
            auto cfg = parse_config("", ov);
            std::ostringstream o, e;
            int code = dispatch(cfg, o, e);
            if (code == 2 || code == 3) {
                ok = false;
                detail += std::string(sc) + " exit " + std::to_string(code) + " ";
            }
            dirs[rep] = run_directory(cfg);
        }
        for (const auto& f : fs::directory_iterator(dirs[0])) {
            ++files;
            if (slurp(f.path()) != slurp(dirs[1] / f.path().filename())) {
                ok = false;
                detail += "differs: " + f.path().filename().string() + " ";
            }
        }
    }
    unsetenv("SUBDIFF_THREADS");
    detail += std::to_string(files) + " files compared across SUBDIFF_THREADS=1/3";
    report(10, "determinism", ok, detail, tm.s());
}

}  // namespace

int main() {
    auto guard = [](int id, const char* title, void (*fn)()) {
        try {
            fn();
        } catch (const std::exception& e) {
            report(id, title, false, std::string("threw: ") + e.what(), 0);
        }
    };
    guard(1, "kernel algebra", kernel_algebra);
    guard(2, "renewal limit", renewal_criteria);
    guard(4, "MSD law", msd_criteria);
    guard(5, "fractional moments", fractional_criteria);
    guard(7, "weak convergence", convergence_criteria);
    guard(10, "determinism", determinism);
    std::printf("%d criteria red\n", failures);
    return failures == 0 ? 0 : 1;
}
