#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "subdiff/harness.hpp"

using namespace subdiff;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / ("subdiff_test_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace

TEST_CASE("FNV-1a digest") {
    CHECK(digest_hex("") == "cbf29ce484222325");
    CHECK(digest_hex("a") == "af63dc4c8601ec8c");
    CHECK(digest_hex("alpha=0.5\n") == digest_hex("alpha=0.5\n"));
    CHECK(digest_hex("alpha=0.5\n") != digest_hex("alpha=0.6\n"));
}

TEST_CASE("report JSON: schema and round trip") {
    ExperimentReport empty;
    empty.experiment = "none";
    auto j = nlohmann::json::parse(report_json(empty));
    CHECK(j.at("metrics").is_array());
    CHECK(j.at("metrics").empty());
    CHECK(j.at("artifacts").is_array());

    ExperimentReport r;
    r.experiment = "x";
    r.config_digest = "0123";
    r.within("a", 0.51, 0.5, 0.05, "claim a");
    r.at_most("b", 2.0, 1.0, "claim b");
    r.flag("c", true, "claim c");
    r.metrics.push_back({"d", std::numeric_limits<double>::infinity(), 0.1, false, "claim d"});
    r.artifacts = {"f.csv"};
    CHECK(r.metrics[0].pass);
    CHECK_FALSE(r.metrics[1].pass);
    CHECK_FALSE(r.pass());
    auto back = parse_report_json(report_json(r));
    CHECK(back.experiment == r.experiment);
    CHECK(back.config_digest == r.config_digest);
    CHECK(back.metrics == r.metrics);
    CHECK(back.artifacts == r.artifacts);
    auto mj = nlohmann::json::parse(report_json(r)).at("metrics")[0];
    for (const char* key : {"name", "value", "tol", "pass", "paper_ref"}) CHECK(mj.contains(key));
}

TEST_CASE("write_report is deterministic") {
    ExperimentReport r;
    r.experiment = "x";
    r.at_most("m", 0.1, 1.0, "c");
    r.series.push_back({"s", {"t", "v"}, {{1.0, 0.1}, {2.0, 1.0 / 3.0}}});
    auto d1 = scratch("rep1"), d2 = scratch("rep2");
    auto r1 = r, r2 = r;
    write_report(r1, d1.string());
    write_report(r2, d2.string());
    CHECK(r1.artifacts == std::vector<std::string>{"metrics.csv", "s.csv"});
    for (const char* f : {"report.json", "metrics.csv", "s.csv"}) CHECK(slurp(d1 / f) == slurp(d2 / f));
    CHECK(slurp(d1 / "s.csv") == "t,v\n1,0.1\n2,0.3333333333333333\n");
    auto only = r;
    write_report(only, scratch("rep3").string(), ReportFormat::json);
    CHECK(only.artifacts == std::vector<std::string>{"s.csv"});
    CHECK_THROWS(write_report(r1, "/proc/definitely/not/writable"));
}

TEST_CASE("snapshot files") {
    SpaceLattice lat(2, 8, 0.5);
    Trajectory tr;
    tr.t = {0.5, 1.0};
    tr.rho = {gaussian_bump(lat, 1.0), point_mass(lat)};
    auto d = scratch("snap");
    fs::create_directories(d);
    write_snapshots_binary((d / "s.bin").string(), tr, 0.25, 0.1);
    double dt = 0, eps = 0;
    auto back = read_snapshots_binary((d / "s.bin").string(), &dt, &eps);
    CHECK(dt == 0.25);
    CHECK(eps == 0.1);
    CHECK(back.t == tr.t);
    CHECK(back.rho[0].lattice == lat);
    CHECK(back.rho[0].v == tr.rho[0].v);
    CHECK(back.rho[1].v == tr.rho[1].v);
    write_snapshots_csv((d / "s.csv").string(), tr);
    std::ifstream in(d / "s.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header == "t,i,j,density");
    std::ofstream bad(d / "bad.bin");
    bad << "nope";
    bad.close();
    CHECK_THROWS(read_snapshots_binary((d / "bad.bin").string()));
}

TEST_CASE("renewal experiment") {
    RenewalConfig c;
    auto r = renewal_experiment(c);
    CHECK(r.pass());
    REQUIRE(r.find("psi_convolution_decay"));
    CHECK(r.find("psi_convolution_decay")->value == doctest::Approx(-0.5).epsilon(0.2));

    RenewalConfig flat;
    flat.model = SurvivalModel::exponential(1.0);
    auto f = renewal_experiment(flat);
    CHECK(f.pass());
    CHECK(f.find("residual_closed_form"));

    RenewalConfig zero;
    zero.n0 = AgeProfile::zero();
    auto z = renewal_experiment(zero);
    CHECK(z.pass());
    CHECK(z.find("zero_data_residual")->value == 0.0);

    RenewalConfig shortT;
    shortT.T = 100;
    CHECK_THROWS_AS(renewal_experiment(shortT), DomainError);
}

TEST_CASE("experiment preconditions") {
    ConvergenceConfig c;
    c.eps_list = {0.2};
    CHECK_THROWS_AS(convergence_experiment(c), DomainError);
    c.eps_list = {0.1, 0.2, 0.05, 0.025};
    CHECK_THROWS_AS(convergence_experiment(c), DomainError);

    MsdConfig m;
    m.particles = 50;  // far too few to resolve 5 %
    CHECK_THROWS_AS(msd_experiment(m), SchemeError);
    m.T = 100;
    CHECK_THROWS_AS(msd_experiment(m), DomainError);
}

TEST_CASE("convergence experiment on a small lattice") {
    ConvergenceConfig c;
    c.lattice = SpaceLattice(1, 512, 0.025);
    c.mesh = {0.25, 10, 1.01};
    auto r = convergence_experiment(c);
    REQUIRE(r.find("E_step_ratio_max"));
    CHECK(r.find("E_step_ratio_max")->pass);
    CHECK(r.find("weak_residual_rate")->value == doctest::Approx(1.8).epsilon(0.2));
    CHECK(r.series.at(0).rows.size() == 4);
}
