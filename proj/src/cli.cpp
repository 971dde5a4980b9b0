#include "subdiff/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "subdiff/harness.hpp"

namespace subdiff {

namespace fs = std::filesystem;

namespace {

enum class Type { num, count, str, list, flag, choice };

struct Key {
    std::string name;
    Type type;
    std::vector<std::string> groups;               // where the key applies; empty = everywhere
    std::map<std::string, std::string> defaults;   // group -> default, "*" fallback
    std::vector<std::string> choices;
};

const std::map<std::string, std::string>& subcommand_groups() {
    static const std::map<std::string, std::string> g{
        {"solve-renewal", "renewal"},        {"solve-agepde", "agepde"},
        {"simulate-ctrw", "ctrw"},           {"solve-fracpde", "fracpde"},
        {"experiment-convergence", "convergence"}, {"experiment-msd", "msd"},
        {"experiment-renewal", "xrenewal"},  {"validate", "validate"},
    };
    return g;
}

const std::map<std::string, std::string>& aliases() {
    static const std::map<std::string, std::string> a{
        {"msd", "experiment-msd"}, {"convergence", "experiment-convergence"}, {"renewal", "experiment-renewal"}};
    return a;
}

const std::vector<Key>& schema() {
    using V = std::vector<std::string>;
    const V models{"renewal", "xrenewal", "agepde", "ctrw", "fracpde", "convergence", "validate"};
    const V kernels{"agepde", "ctrw", "fracpde", "convergence", "msd", "validate"};
    const V lattices{"agepde", "ctrw", "fracpde", "convergence", "msd"};
    const V ages{"renewal", "xrenewal", "agepde", "ctrw", "convergence"};
    const V spaces{"agepde", "ctrw", "fracpde", "convergence"};
    const V meshes{"agepde", "convergence", "msd"};
    const V snaps{"agepde", "ctrw", "fracpde"};
    static const std::vector<Key> keys{
        {"subcommand", Type::str, {}, {{"*", ""}}, {}},
        {"seed", Type::count, {}, {{"*", "7"}}, {}},
        {"out", Type::str, {}, {{"*", "runs"}}, {}},
        {"format", Type::choice, {}, {{"*", "both"}}, {"json", "csv", "both"}},
        {"family", Type::choice, models, {{"*", "prototype"}}, {"prototype", "tabulated", "exponential"}},
        {"alpha", Type::num, {}, {{"*", "0.5"}}, {}},
        {"K", Type::num, {}, {{"*", "1"}}, {}},
        {"delta", Type::num, models, {{"*", ""}}, {}},
        {"beta_table", Type::str, models, {{"*", ""}}, {}},
        {"beta0", Type::num, models, {{"*", "1"}}, {}},
        {"kernel", Type::choice, kernels, {{"*", "lattice_nn"}}, {"lattice_nn", "gaussian", "pmf"}},
        {"d", Type::count, kernels, {{"*", "1"}}, {}},
        {"sigma2", Type::num, kernels, {{"*", ""}}, {}},
        {"pmf", Type::str, kernels, {{"*", ""}}, {}},
        {"n", Type::count, lattices, {{"*", "1024"}, {"msd", "512"}, {"ctrw", "0"}}, {}},
        {"h", Type::num, lattices, {{"*", "0.025"}, {"msd", "1"}, {"ctrw", "1"}}, {}},
        {"L", Type::num, lattices, {{"*", ""}}, {}},
        {"T", Type::num, {"renewal", "xrenewal", "agepde", "ctrw", "fracpde", "convergence", "msd"},
         {{"*", "1"}, {"renewal", "1e4"}, {"xrenewal", "1e4"}, {"ctrw", "1e4"}, {"msd", "1e4"}}, {}},
        {"dt", Type::num, {"renewal", "xrenewal", "fracpde"}, {{"*", "0.5"}, {"fracpde", "0"}}, {}},
        {"a_max", Type::num, {"renewal"}, {{"*", ""}}, {}},
        {"eps", Type::num, {"agepde", "ctrw", "msd"}, {{"*", "0.1"}, {"ctrw", "1"}, {"msd", "1"}}, {}},
        {"eps_list", Type::list, {"convergence"}, {{"*", "0.2,0.1,0.05,0.025"}}, {}},
        {"n_particles", Type::count, {"ctrw", "msd"}, {{"*", "100000"}}, {}},
        {"age", Type::choice, ages, {{"*", "uniform"}, {"ctrw", "dirac"}}, {"dirac", "uniform", "exponential"}},
        {"age_width", Type::num, ages, {{"*", "1"}}, {}},
        {"age_rate", Type::num, ages, {{"*", "1"}}, {}},
        {"mass", Type::num, {"renewal", "xrenewal", "agepde", "fracpde"}, {{"*", "1"}}, {}},
        {"space", Type::choice, spaces, {{"*", "gaussian"}, {"ctrw", "point"}}, {"point", "gaussian", "uniform"}},
        {"width", Type::num, spaces, {{"*", "1"}}, {}},
        {"self_similar", Type::flag, {"convergence"}, {{"*", "false"}}, {}},
        {"mesh_da", Type::num, meshes, {{"*", "0.125"}}, {}},
        {"mesh_uniform", Type::num, meshes, {{"*", "10"}}, {}},
        {"mesh_growth", Type::num, meshes, {{"*", "1.005"}}, {}},
        {"per_decade", Type::num, {"fracpde"}, {{"*", "100"}}, {}},
        {"outputs", Type::list, {"renewal", "agepde", "ctrw", "fracpde"}, {{"*", ""}}, {}},
        {"snapshot_format", Type::choice, snaps, {{"*", "csv"}}, {"csv", "binary"}},
        {"alphas", Type::list, {"msd"}, {{"*", ""}}, {}},
        {"fit_lo", Type::num, {"msd"}, {{"*", "1e2"}}, {}},
        {"fit_hi", Type::num, {"msd"}, {{"*", "1e4"}}, {}},
        {"det_lo", Type::num, {"msd"}, {{"*", "1e3"}}, {}},
        {"mu", Type::num, {"xrenewal"}, {{"*", "1"}}, {}},
        {"tol.exponent", Type::num, {"msd"}, {{"*", "0.05"}}, {}},
        {"tol.prefactor", Type::num, {"msd"}, {{"*", "0.1"}}, {}},
        {"tol.se", Type::num, {"msd"}, {{"*", "4"}}, {}},
        {"tol.det", Type::num, {"msd"}, {{"*", "0.05"}}, {}},
        {"tol.mc_resolution", Type::num, {"msd"}, {{"*", "0.05"}}, {}},
        {"tol.rate", Type::num, {"convergence"}, {{"*", "0.3"}}, {}},
        {"tol.decay", Type::num, {"xrenewal"}, {{"*", "0.1"}}, {}},
        {"tol.ratio", Type::num, {"xrenewal"}, {{"*", "0.05"}}, {}},
        {"tol.bound_headroom", Type::num, {"xrenewal"}, {{"*", "1.5"}}, {}},
        {"tol.mass", Type::num, {"renewal", "agepde", "fracpde"}, {{"*", "1e-10"}, {"renewal", "1e-9"}}, {}},
        {"tol.validation", Type::num, {"fracpde"}, {{"*", "1e-3"}}, {}},
        {"tol.drift_se", Type::num, {"ctrw"}, {{"*", "5"}}, {}},
    };
    return keys;
}

const Key* find_key(const std::string& name) {
    for (const auto& k : schema())
        if (k.name == name) return &k;
    return nullptr;
}

bool applies(const Key& k, const std::string& group) {
    return k.groups.empty() || std::find(k.groups.begin(), k.groups.end(), group) != k.groups.end();
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string fmt(double x) {
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

bool parse_double(const std::string& s, double& out) {
    const char* b = s.data();
    const char* e = b + s.size();
    if (b != e && *b == '+') ++b;
    auto r = std::from_chars(b, e, out);
    return r.ec == std::errc() && r.ptr == e && std::isfinite(out);
}

double to_num(const std::string& key, const std::string& v) {
    double x;
    if (!parse_double(trim(v), x)) throw UsageError("type mismatch for " + key + ": expected a number, got '" + v + "'");
    return x;
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    if (trim(v).empty()) return out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_num(key, item));
    return out;
}

// normalized textual form, so 1e4 and 10000 resolve identically
std::string normalize(const Key& k, const std::string& raw) {
    std::string v = trim(raw);
    switch (k.type) {
        case Type::num:
            return v.empty() ? v : fmt(to_num(k.name, v));
        case Type::count: {
            double x = to_num(k.name, v);
            if (x < 0 || x != std::floor(x) || x > 9.0e18)
                throw UsageError("type mismatch for " + k.name + ": expected a nonnegative integer, got '" + raw + "'");
            return std::to_string(static_cast<unsigned long long>(x));
        }
        case Type::list: {
            std::string out;
            for (double x : to_list(k.name, v)) out += (out.empty() ? "" : ",") + fmt(x);
            return out;
        }
        case Type::flag:
            if (v == "true" || v == "1" || v == "yes") return "true";
            if (v == "false" || v == "0" || v == "no") return "false";
            throw UsageError("type mismatch for " + k.name + ": expected true or false, got '" + raw + "'");
        case Type::choice:
            if (std::find(k.choices.begin(), k.choices.end(), v) == k.choices.end()) {
                std::string all;
                for (const auto& c : k.choices) all += (all.empty() ? "" : ", ") + c;
                throw UsageError("invalid value for " + k.name + ": '" + raw + "' (one of " + all + ")");
            }
            return v;
        case Type::str:
            return v;
    }
    return v;
}

// ---- object construction from a config

std::vector<double> read_beta_table(const std::string& path, double& da) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read beta table " + path);
    std::vector<double> a, b;
    std::string line;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        double x, y;
        if (!(ls >> x >> y)) {
            if (a.empty()) continue;  // header
            throw UsageError("beta table " + path + ": malformed line '" + line + "'");
        }
        a.push_back(x);
        b.push_back(y);
    }
    if (a.size() < 2) throw UsageError("beta table " + path + ": needs at least two rows");
    da = a[1] - a[0];
    if (a[0] != 0 || !(da > 0)) throw UsageError("beta table " + path + ": ages must start at 0 and increase");
    for (std::size_t i = 0; i < a.size(); ++i)
        if (std::abs(a[i] - static_cast<double>(i) * da) > 1e-9 * std::max(1.0, a[i]))
            throw UsageError("beta table " + path + ": ages must be uniformly spaced");
    return b;
}

SurvivalModel make_model(const RunConfig& c, double alpha) {
    const std::string fam = c.has("family") ? c.str("family") : "prototype";
    std::optional<double> delta;
    if (c.has("delta") && !c.str("delta").empty()) delta = c.num("delta");
    if (fam == "exponential") return SurvivalModel::exponential(c.num("beta0"));
    if (fam == "tabulated") {
        if (c.str("beta_table").empty()) throw UsageError("missing required key beta_table (family=tabulated)");
        double da = 0;
        auto b = read_beta_table(c.str("beta_table"), da);
        return SurvivalModel::tabulated(alpha, da, b, delta);
    }
    return SurvivalModel::prototype(alpha, c.num("K"), delta);
}

SurvivalModel make_model(const RunConfig& c) { return make_model(c, c.num("alpha")); }

JumpKernel make_kernel(const RunConfig& c) {
    const auto d = static_cast<int>(c.count("d"));
    const std::string v = c.str("kernel");
    std::optional<double> s2;
    if (!c.str("sigma2").empty()) s2 = c.num("sigma2");
    if (v == "lattice_nn") {
        auto k = JumpKernel::lattice_nn(d);
        if (s2 && std::abs(*s2 - k.sigma2) > 1e-12) throw UsageError("sigma2 of the nearest-neighbour kernel is fixed at " + fmt(k.sigma2));
        return k;
    }
    if (v == "gaussian") return JumpKernel::gaussian(d, s2.value_or(1.0));
    // pmf: "x:p;x:p" (d=1) or "x,y:p;..." (d=2)
    std::vector<std::array<double, 2>> off;
    std::vector<double> pr;
    std::stringstream ss(c.str("pmf"));
    std::string item;
    while (std::getline(ss, item, ';')) {
        if (trim(item).empty()) continue;
        auto colon = item.find(':');
        if (colon == std::string::npos) throw UsageError("pmf entry '" + item + "' is not offset:probability");
        auto xs = to_list("pmf", item.substr(0, colon));
        if (static_cast<int>(xs.size()) != d) throw UsageError("pmf entry '" + item + "' does not have " + std::to_string(d) + " coordinates");
        off.push_back({xs[0], d == 2 ? xs[1] : 0.0});
        pr.push_back(to_num("pmf", item.substr(colon + 1)));
    }
    if (off.empty()) throw UsageError("missing required key pmf (kernel=pmf)");
    return JumpKernel::pmf(d, off, pr, s2);
}

SpaceLattice make_lattice(const RunConfig& c) {
    return SpaceLattice(static_cast<int>(c.count("d")), c.count("n"), c.num("h"));
}

AgeProfile make_ages(const RunConfig& c, double mass) {
    const std::string a = c.str("age");
    if (a == "dirac") return AgeProfile::dirac(mass);
    if (a == "exponential") return AgeProfile::exponential(c.num("age_rate"), mass);
    return AgeProfile::uniform(c.num("age_width"), mass);
}

GridMeasure make_space(const RunConfig& c, const SpaceLattice& lat, double mass) {
    const std::string s = c.str("space");
    if (s == "point") return point_mass(lat, mass);
    if (s == "uniform") return uniform_density(lat, mass);
    return gaussian_bump(lat, c.num("width"), mass);
}

AgeMeshSpec make_mesh(const RunConfig& c) { return {c.num("mesh_da"), c.num("mesh_uniform"), c.num("mesh_growth")}; }

std::vector<double> output_times(const RunConfig& c, double T) {
    auto o = c.list("outputs");
    if (o.empty()) o = log_times(1e-3 * T, T);
    std::sort(o.begin(), o.end());
    return o;
}

void require(bool ok, const std::string& what) {
    if (!ok) throw UsageError(what);
}

// preconditions of the target module, checked before anything runs; also fills derived values
void validate_and_derive(RunConfig& c) {
    const std::string group = subcommand_groups().at(c.subcommand());
    const bool has_model = c.has("family");
    try {
        if (group == "msd") {
            if (c.str("alphas").empty()) c.kv["alphas"] = c.str("alpha");
            for (double a : c.list("alphas")) SurvivalModel::prototype(a, c.num("K"));
        } else {
            auto m = make_model(c);
            if (has_model && m.family() != SurvivalModel::Family::exponential) c.kv["delta"] = fmt(m.delta());
            if (group == "xrenewal" || group == "convergence") {
                if (m.family() == SurvivalModel::Family::exponential && group == "convergence")
                    throw UsageError("the convergence experiment needs heavy-tailed waiting times: alpha must lie in (0,1)");
            }
        }
        if (c.has("kernel")) {
            auto k = make_kernel(c);
            c.kv["sigma2"] = fmt(k.sigma2);
        }
        if (c.has("n") && !(group == "ctrw" && c.count("n") == 0)) {
            auto lat = make_lattice(c);
            const double L = lat.L();
            if (!c.str("L").empty())
                require(std::abs(c.num("L") - L) <= 1e-12 * L, "L must equal n*h (" + fmt(L) + ")");
            c.kv["L"] = fmt(L);
        } else if (c.has("L")) {
            require(c.str("L").empty(), "L needs a lattice (n > 0)");
        }
        if (c.has("T")) require(c.num("T") > 0, "T must be positive");
        if (c.has("eps")) require(c.num("eps") > 0 && c.num("eps") <= 1, "eps must lie in (0,1]");
        if (c.has("age")) make_ages(c, 1.0);
        if (c.has("mass")) require(c.num("mass") >= 0, "mass must be nonnegative");
        if (c.has("width")) require(c.num("width") > 0, "width must be positive");
        if (c.has("mesh_da"))
            require(c.num("mesh_da") > 0 && c.num("mesh_uniform") >= 0 && c.num("mesh_growth") >= 1,
                    "mesh needs mesh_da > 0, mesh_uniform >= 0, mesh_growth >= 1");
        if (c.has("n_particles")) require(c.count("n_particles") >= 1, "n_particles must be at least 1");
        if (c.has("outputs"))
            for (double t : c.list("outputs")) require(t >= 0 && t <= c.num("T"), "outputs must lie in [0, T]");

        if (group == "renewal" || group == "xrenewal") require(c.num("dt") > 0, "dt must be positive");
        if (group == "renewal") {
            const double support = make_ages(c, 1.0).support();
            if (c.str("a_max").empty()) c.kv["a_max"] = fmt(c.num("T") + support + c.num("dt"));
            require(c.num("a_max") > 0, "a_max must be positive");
        }
        if (group == "xrenewal") {
            require(c.num("T") >= 1e4, "experiment-renewal needs T >= 1e4");
            require(c.num("mu") > 0, "mu must be positive");
        }
        if (group == "fracpde") {
            require(c.num("dt") >= 0, "dt must be nonnegative (0 selects the graded mesh)");
            require(c.num("per_decade") >= 1, "per_decade must be at least 1");
        }
        if (group == "convergence") {
            auto e = c.list("eps_list");
            require(e.size() >= 4, "eps_list needs at least 4 values (got " + std::to_string(e.size()) + ")");
            for (std::size_t i = 0; i < e.size(); ++i) {
                require(e[i] > 0 && e[i] <= 1, "eps_list values must lie in (0,1]");
                if (i) require(e[i] < e[i - 1], "eps_list must be strictly decreasing");
            }
            require(c.str("space") != "point" || c.flag("self_similar"), "the convergence experiment needs a spread-out initial density");
        }
        if (group == "msd") {
            require(c.num("T") >= 1e4, "experiment-msd needs T >= 1e4");
            require(c.num("fit_lo") > 0 && c.num("fit_lo") < c.num("fit_hi") && c.num("fit_hi") <= c.num("T") &&
                        c.num("det_lo") >= c.num("fit_lo") && c.num("det_lo") < c.num("fit_hi"),
                    "fit windows need 0 < fit_lo <= det_lo < fit_hi <= T");
        }
        if (group == "ctrw" && c.count("n") == 0)
            require(c.str("space") == "point", "space=" + c.str("space") + " needs a lattice (set n and h)");
    } catch (const DomainError& e) {
        throw UsageError(e.what());
    } catch (const MismatchError& e) {
        throw UsageError(e.what());
    }
}

// ---- run helpers

void add_moment_series(ExperimentReport& rep, const Trajectory& tr) {
    Attachment a{"moments", {"t", "mass", "first_moment", "second_moment", "wrap_fraction"}, {}};
    for (std::size_t i = 0; i < tr.t.size(); ++i) {
        const auto& r = tr.rho[i];
        a.rows.push_back({tr.t[i], r.mass(), r.first_moment()[0], r.second_moment(), r.wrap_fraction()});
    }
    rep.series.push_back(std::move(a));
}

void write_snapshots(const RunConfig& c, const std::string& dir, ExperimentReport& rep, const Trajectory& tr,
                     double dt, double eps) {
    if (tr.rho.empty()) return;
    if (c.str("snapshot_format") == "binary") {
        write_snapshots_binary((fs::path(dir) / "snapshots.bin").string(), tr, dt, eps);
        rep.artifacts.push_back("snapshots.bin");
    } else {
        write_snapshots_csv((fs::path(dir) / "snapshots.csv").string(), tr);
        rep.artifacts.push_back("snapshots.csv");
    }
}

ExperimentReport run_solve_renewal(const RunConfig& c, const std::string& dir) {
    auto m = make_model(c);
    auto n0 = make_ages(c, c.num("mass"));
    const double T = c.num("T"), dt = c.num("dt"), a_max = c.num("a_max");
    auto snaps = c.list("outputs");
    auto r = solve_renewal(m, n0, T, dt, snaps);
    ExperimentReport rep;
    rep.experiment = "solve-renewal";
    Attachment nt{"boundary", {"t", "N"}, {}};
    for (std::size_t j = 0; j < r.N.values.size(); ++j) nt.rows.push_back({r.N.grid.at(j), r.N.values[j]});
    rep.series.push_back(std::move(nt));
    if (!r.snapshots.empty()) {
        // cells starting below a_max; the last row per time (age = a_max) holds everything older
        Attachment ad{"age_density", {"t", "age", "mass"}, {}};
        for (const auto& s : r.snapshots) {
            double beyond = s.tail;
            for (std::size_t j = 0; j < s.mass.size(); ++j) {
                double a0 = static_cast<double>(j) * s.grid.da;
                if (a0 < a_max)
                    ad.rows.push_back({s.t, a0, s.mass[j]});
                else
                    beyond += s.mass[j];
            }
            ad.rows.push_back({s.t, a_max, beyond});
        }
        rep.series.push_back(std::move(ad));
    }
    rep.at_most("mass_error", r.max_mass_error, c.num("tol.mass"), "the renewal equation conserves mass");
    if (n0.mass() > 0 && m.family() != SurvivalModel::Family::tabulated)
        rep.at_most("N_bound", r.max_N / (m.beta_sup() * n0.mass()), 1.0 + 1e-12, "boundary flux bounded by sup beta times the mass");
    (void)dir;
    return rep;
}

ExperimentReport run_solve_agepde(const RunConfig& c, const std::string& dir) {
    auto m = make_model(c);
    auto k = make_kernel(c);
    auto lat = make_lattice(c);
    auto r0 = InitialCondition::separable(make_ages(c, 1.0), make_space(c, lat, c.num("mass")));
    const double T = c.num("T"), eps = c.num("eps");
    SpatialOptions so;
    so.mesh = make_mesh(c);
    auto s = solve_agepde(m, k, r0, eps, T, output_times(c, T), so);
    ExperimentReport rep;
    rep.experiment = "solve-agepde";
    add_moment_series(rep, s.traj);
    write_snapshots(c, dir, rep, s.traj, 0.0, eps);
    rep.at_most("max_mass_error", s.max_mass_error, c.num("tol.mass"), "the age-structured jump model conserves mass");
    rep.at_most("negative_part", -s.min_value, 1e-12, "the density stays nonnegative");
    return rep;
}

ExperimentReport run_solve_fracpde(const RunConfig& c, const std::string& dir) {
    auto m = make_model(c);
    auto k = make_kernel(c);
    auto lat = make_lattice(c);
    const double T = c.num("T");
    MildOptions mo;
    mo.dt = c.num("dt");
    mo.per_decade = c.num("per_decade");
    mo.tol = c.num("tol.validation");
    FractionalHeatProblem p{m.alpha(), diffusion_coefficient(m, k, lat.d), lat, make_space(c, lat, c.num("mass"))};
    auto s = solve_mild(p, T, output_times(c, T), mo);
    ExperimentReport rep;
    rep.experiment = "solve-fracpde";
    add_moment_series(rep, s.traj);
    write_snapshots(c, dir, rep, s.traj, mo.dt, 1.0);
    rep.at_most("mode_validation", s.validation_error, mo.tol, "lattice modes follow the Mittag-Leffler relaxation");
    const double m0 = p.rho0.mass();
    double drift = 0;
    for (const auto& r : s.traj.rho) drift = std::max(drift, std::abs(r.mass() - m0) / std::max(m0, 1e-300));
    rep.at_most("mass_drift", drift, c.num("tol.mass"), "the fractional heat equation conserves mass");
    return rep;
}

ExperimentReport run_simulate_ctrw(const RunConfig& c, const std::string& dir) {
    auto m = make_model(c);
    auto k = make_kernel(c);
    const double T = c.num("T"), eps = c.num("eps");
    const std::size_t N = c.count("n_particles");
    CtrwOptions opts;
    opts.ages = make_ages(c, 1.0);
    if (c.count("n") > 0) {
        auto lat = make_lattice(c);
        opts.histogram = lat;
        if (c.str("space") != "point") opts.rho0 = make_space(c, lat, 1.0);
    }
    auto times = output_times(c, T);
    auto r = simulate(m, k, eps, N, T, c.count("seed"), times, opts);
    ExperimentReport rep;
    rep.experiment = "simulate-ctrw";
    write_msd_csv((fs::path(dir) / "msd.csv").string(), r.msd);
    rep.artifacts.push_back("msd.csv");
    Attachment mx{"mean_displacement", {"t", "mean_x", "sd_x"}, {}};
    for (std::size_t i = 0; i < r.mean_x.size(); ++i) mx.rows.push_back({r.mean_x.t[i], r.mean_x.v[i], r.sd_x.v[i]});
    rep.series.push_back(std::move(mx));
    if (opts.histogram) {
        Trajectory tr;
        tr.t = times;
        tr.rho = r.snapshots;
        write_snapshots(c, dir, rep, tr, 0.0, eps);
        rep.at_most("histogram_wrap_fraction", static_cast<double>(r.outside) / static_cast<double>(N * times.size()), 1e-6,
                    "the histogram lattice holds the walkers without wrapping");
    }
    auto v = validate_assumptions(m, k);
    if (std::hypot(v.kernel_mean[0], v.kernel_mean[1]) <= 1e-12 && N > 1) {
        const double se = r.sd_x.v.back() / std::sqrt(static_cast<double>(N));
        const double z = se > 0 ? std::abs(r.mean_x.v.back()) / se : 0.0;
        rep.at_most("mean_drift_se", z, c.num("tol.drift_se"), "a centered jump law gives no drift");
    }
    return rep;
}

ExperimentReport run_validate(const RunConfig& c) {
    auto m = make_model(c);
    auto k = make_kernel(c);
    auto v = validate_assumptions(m, k);
    ExperimentReport rep;
    rep.experiment = "validate";
    rep.within("kernel_prob_sum", v.prob_sum, 1.0, 1e-12, "the jump law is a probability distribution");
    rep.at_most("kernel_mean_abs", std::hypot(v.kernel_mean[0], v.kernel_mean[1]), 1e-12, "the jump law is centered");
    rep.within("kernel_sigma2", v.kernel_sigma2, k.sigma2, 1e-12 * std::max(1.0, k.sigma2), "declared jump variance matches the law");
    if (m.family() != SurvivalModel::Family::exponential)
        rep.at_most("tail_band_ratio", v.tail_ratio, 1.0, "survival tail psi ~ Psi t^-alpha with an O(t^-delta) correction");
    for (const auto& f : v.failures) rep.flag("assumption: " + f, false, "waiting-time and jump assumptions");
    rep.flag("assumptions_hold", v.pass, "waiting-time and jump assumptions");
    return rep;
}

ExperimentReport run_convergence(const RunConfig& c) {
    ConvergenceConfig cc;
    cc.model = make_model(c);
    cc.kernel = make_kernel(c);
    cc.lattice = make_lattice(c);
    cc.eps_list = c.list("eps_list");
    cc.ages = make_ages(c, 1.0);
    cc.space = c.str("space") == "uniform" ? ConvergenceConfig::Space::uniform : ConvergenceConfig::Space::gaussian;
    cc.width = c.num("width");
    cc.self_similar = c.flag("self_similar");
    cc.T = c.num("T");
    cc.mesh = make_mesh(c);
    cc.rate_tol = c.num("tol.rate");
    return convergence_experiment(cc);
}

ExperimentReport run_msd(const RunConfig& c) {
    MsdConfig mc;
    mc.alphas = c.list("alphas");
    mc.K = c.num("K");
    mc.kernel = make_kernel(c);
    mc.lattice = make_lattice(c);
    mc.eps = c.num("eps");
    mc.T = c.num("T");
    mc.particles = c.count("n_particles");
    mc.seed = c.count("seed");
    mc.fit_lo = c.num("fit_lo");
    mc.fit_hi = c.num("fit_hi");
    mc.det_lo = c.num("det_lo");
    mc.exponent_tol = c.num("tol.exponent");
    mc.prefactor_tol = c.num("tol.prefactor");
    mc.se_factor = c.num("tol.se");
    mc.det_tol = c.num("tol.det");
    mc.mc_resolution = c.num("tol.mc_resolution");
    mc.mesh = make_mesh(c);
    return msd_experiment(mc);
}

ExperimentReport run_renewal_experiment(const RunConfig& c) {
    RenewalConfig rc;
    rc.model = make_model(c);
    rc.n0 = make_ages(c, c.num("mass"));
    rc.T = c.num("T");
    rc.dt = c.num("dt");
    rc.mu = c.num("mu");
    rc.decay_tol = c.num("tol.decay");
    rc.ratio_tol = c.num("tol.ratio");
    rc.bound_headroom = c.num("tol.bound_headroom");
    return renewal_experiment(rc);
}

std::string error_line(int code, const std::string& kind, const std::string& msg) {
    nlohmann::json j{{"status", "error"}, {"exit", code}, {"kind", kind}, {"message", msg}};
    return j.dump();
}

}  // namespace

// ---- RunConfig

bool RunConfig::has(const std::string& key) const { return kv.count(key) != 0; }

const std::string& RunConfig::str(const std::string& key) const {
    auto it = kv.find(key);
    if (it == kv.end()) throw UsageError("missing required key " + key);
    return it->second;
}

double RunConfig::num(const std::string& key) const { return to_num(key, str(key)); }

std::size_t RunConfig::count(const std::string& key) const {
    double x = num(key);
    if (x < 0 || x != std::floor(x)) throw UsageError("type mismatch for " + key + ": expected a nonnegative integer");
    return static_cast<std::size_t>(x);
}

bool RunConfig::flag(const std::string& key) const { return str(key) == "true"; }

std::vector<double> RunConfig::list(const std::string& key) const { return to_list(key, str(key)); }

std::string RunConfig::resolved_text() const {
    std::string s;
    for (const auto& [k, v] : kv)
        if (k != "out") s += k + "=" + v + "\n";
    return s;
}

std::string RunConfig::digest() const { return digest_hex(resolved_text()); }

std::pair<std::string, std::string> split_assignment(const std::string& s) {
    auto eq = s.find('=');
    if (eq == std::string::npos) throw UsageError("expected key=value, got '" + s + "'");
    auto k = trim(s.substr(0, eq));
    if (k.empty()) throw UsageError("empty key in '" + s + "'");
    return {k, trim(s.substr(eq + 1))};
}

RunConfig parse_config(const std::string& text, const Overrides& overrides) {
    static const std::set<std::string> sections{"run", "model", "kernel", "grid", "init", "mc", "mesh", "experiment", "output", "tol"};
    std::map<std::string, std::string> raw;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw UsageError("line " + std::to_string(lineno) + ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            if (!sections.count(section)) throw UsageError("line " + std::to_string(lineno) + ": unknown section [" + section + "]");
            continue;
        }
        auto [k, v] = split_assignment(line);
        if (section == "tol" && k.rfind("tol.", 0) != 0) k = "tol." + k;
        raw[k] = v;
    }
    for (const auto& [k, v] : overrides) raw[k] = v;

    auto sc = raw.find("subcommand");
    if (sc == raw.end() || sc->second.empty()) throw UsageError("missing required key subcommand");
    if (aliases().count(sc->second)) sc->second = aliases().at(sc->second);
    if (!subcommand_groups().count(sc->second)) throw UsageError("unknown subcommand '" + sc->second + "'");
    const std::string group = subcommand_groups().at(sc->second);

    RunConfig c;
    for (const auto& [k, v] : raw) {
        const Key* key = find_key(k);
        if (!key) throw UsageError("unknown key '" + k + "'");
        if (!applies(*key, group)) throw UsageError("key '" + k + "' does not apply to " + sc->second);
        c.kv[k] = normalize(*key, v);
    }
    for (const auto& key : schema()) {
        if (!applies(key, group) || c.kv.count(key.name)) continue;
        auto it = key.defaults.find(group);
        const std::string& d = it != key.defaults.end() ? it->second : key.defaults.at("*");
        c.kv[key.name] = d.empty() ? d : normalize(key, d);
    }
    validate_and_derive(c);
    return c;
}

RunConfig load_config(const std::optional<std::string>& path, const Overrides& overrides) {
    std::string text;
    if (path) {
        std::ifstream in(*path);
        if (!in) throw UsageError("cannot read config file " + *path);
        std::ostringstream ss;
        ss << in.rdbuf();
        text = ss.str();
    }
    return parse_config(text, overrides);
}

std::string run_directory(const RunConfig& cfg) { return (fs::path(cfg.str("out")) / cfg.digest()).string(); }

int dispatch(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const std::string dir = run_directory(cfg);
    ExperimentReport rep;
    try {
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec) throw std::runtime_error("cannot create " + dir + ": " + ec.message());
        {
            std::ofstream f(fs::path(dir) / "config.resolved", std::ios::trunc);
            f << cfg.resolved_text();
            if (!f) throw std::runtime_error("write failed: " + (fs::path(dir) / "config.resolved").string());
        }
        const std::string& sc = cfg.subcommand();
        if (sc == "solve-renewal") rep = run_solve_renewal(cfg, dir);
        else if (sc == "solve-agepde") rep = run_solve_agepde(cfg, dir);
        else if (sc == "solve-fracpde") rep = run_solve_fracpde(cfg, dir);
        else if (sc == "simulate-ctrw") rep = run_simulate_ctrw(cfg, dir);
        else if (sc == "validate") rep = run_validate(cfg);
        else if (sc == "experiment-convergence") rep = run_convergence(cfg);
        else if (sc == "experiment-msd") rep = run_msd(cfg);
        else if (sc == "experiment-renewal") rep = run_renewal_experiment(cfg);
        else throw UsageError("unknown subcommand '" + sc + "'");
        rep.config_digest = cfg.digest();
        rep.artifacts.push_back("config.resolved");
        const std::string f = cfg.str("format");
        write_report(rep, dir, f == "json" ? ReportFormat::json : f == "csv" ? ReportFormat::csv : ReportFormat::both);
    } catch (const UsageError& e) {
        err << error_line(2, "usage", e.what()) << "\n";
        return 2;
    } catch (const DomainError& e) {
        err << error_line(2, "usage", e.what()) << "\n";
        return 2;
    } catch (const MismatchError& e) {
        err << error_line(2, "usage", e.what()) << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << error_line(3, "internal", e.what()) << "\n";
        return 3;
    }

    std::vector<std::string> failed;
    for (const auto& m : rep.metrics) {
        out << (m.pass ? "PASS " : "FAIL ") << m.name << " = " << fmt(m.value) << " (tol " << fmt(m.tol) << ")\n";
        if (!m.pass) failed.push_back(m.name);
    }
    out << "run directory: " << dir << "\n";
    if (failed.empty()) return 0;
    nlohmann::json j{{"status", "fail"}, {"exit", 1}, {"experiment", rep.experiment}, {"run_dir", dir}, {"failed", failed}};
    err << j.dump() << "\n";
    return 1;
}

}  // namespace subdiff
