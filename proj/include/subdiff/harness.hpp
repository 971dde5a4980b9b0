#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "subdiff/ctrw.hpp"
#include "subdiff/fracpde.hpp"
#include "subdiff/model.hpp"
#include "subdiff/renewal.hpp"
#include "subdiff/spatial.hpp"

namespace subdiff {

// one checked quantity. `claim` names the statement it tests; it is serialized under "paper_ref"
struct Metric {
    std::string name;
    double value = 0;
    double tol = 0;
    bool pass = false;
    std::string claim;

    bool operator==(const Metric&) const = default;
};

// a table written as <name>.csv
struct Attachment {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

struct ExperimentReport {
    std::string experiment;
    std::string config_digest;
    std::vector<Metric> metrics;
    std::vector<Attachment> series;
    std::vector<std::string> artifacts;

    // pass iff |value - target| <= tol
    void within(const std::string& name, double value, double target, double tol, const std::string& claim);
    // pass iff value <= tol
    void at_most(const std::string& name, double value, double tol, const std::string& claim);
    void flag(const std::string& name, bool ok, const std::string& claim);
    bool pass() const;
    const Metric* find(const std::string& name) const;
};

// ---- experiments

struct ConvergenceConfig {
    SurvivalModel model = SurvivalModel::prototype(0.5, 1.0, 0.45);
    JumpKernel kernel = JumpKernel::lattice_nn(1);
    SpaceLattice lattice{1, 1024, 0.025};
    std::vector<double> eps_list{0.2, 0.1, 0.05, 0.025};
    AgeProfile ages = AgeProfile::uniform(1.0);
    enum class Space { gaussian, uniform } space = Space::gaussian;
    double width = 1.0;
    bool self_similar = false;  // r0_eps(a, x) = eps^-d r0(a, x / eps), limit is a point mass
    double T = 1.0;
    AgeMeshSpec mesh{0.125, 10, 1.005};
    double rate_target = -1;  // default min(2, 2 delta / alpha)
    double rate_tol = 0.3;
};

ExperimentReport convergence_experiment(const ConvergenceConfig& c);

struct MsdConfig {
    std::vector<double> alphas{0.5};
    double K = 1.0;
    JumpKernel kernel = JumpKernel::lattice_nn(1);
    SpaceLattice lattice{1, 512, 1.0};
    double eps = 1.0;
    double T = 1e4;
    std::size_t particles = 100000;
    std::uint64_t seed = 7;
    double fit_lo = 1e2, fit_hi = 1e4;
    double det_lo = 1e3;  // start of the window where the fractional limit is compared
    double exponent_tol = 0.05, prefactor_tol = 0.10, se_factor = 4, det_tol = 0.05;
    double mc_resolution = 0.05;  // required resolving power of 4 standard errors at T
    AgeMeshSpec mesh{0.125, 10, 1.005};
};

ExperimentReport msd_experiment(const MsdConfig& c);

struct RenewalConfig {
    SurvivalModel model = SurvivalModel::prototype(0.5, 1.0);
    AgeProfile n0 = AgeProfile::uniform(1.0);
    double T = 1e4;
    double dt = 0.5;
    double mu = 1.0;
    double decay_tol = 0.1, ratio_tol = 0.05, bound_headroom = 1.5;
};

ExperimentReport renewal_experiment(const RenewalConfig& c);

// ---- serialization

enum class ReportFormat { json, csv, both };

// writes report.json and/or metrics.csv plus one CSV per attachment into dir; artifacts becomes
// the sorted union of what was already listed and what was written here
void write_report(ExperimentReport& r, const std::string& dir, ReportFormat f = ReportFormat::both);
std::string report_json(const ExperimentReport& r);
ExperimentReport parse_report_json(const std::string& text);

void write_series_csv(const std::string& path, const Series& s);
void write_msd_csv(const std::string& path, const MsdSeries& s);
void write_snapshots_csv(const std::string& path, const Trajectory& tr);
// binary: "SDGM", u32 version, u32 d, u64 n, u64 n_times, f64 h, f64 dt, f64 eps, then per time
// f64 t followed by the row-major values
void write_snapshots_binary(const std::string& path, const Trajectory& tr, double dt, double eps);
Trajectory read_snapshots_binary(const std::string& path, double* dt = nullptr, double* eps = nullptr);

// FNV-1a 64-bit, lowercase hex
std::string digest_hex(const std::string& text);

}  // namespace subdiff
