#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qbc/experiments.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace qbc;
using experiments::ExperimentConfig;
using experiments::Kind;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::filesystem::path fresh_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / name;
    std::filesystem::remove_all(dir);
    return dir;
}

} // namespace

TEST_CASE("empty config gives the documented defaults") {
    const auto cfg = experiments::parse_config_text("");
    CHECK(cfg.experiment == Kind::single_charge);
    CHECK(cfg.tbar == doctest::Approx(0.1));
    CHECK(cfg.chi == doctest::Approx(1.0));
    CHECK(cfg.k_collisions == 30);
    CHECK(cfg.cutoff_left == 25);
    CHECK(cfg.cutoff_lindblad == 12);
    CHECK(cfg.seed == 12345);
}

TEST_CASE("config parsing and validation errors") {
    CHECK_THROWS_WITH_AS(experiments::parse_config_text("chi = 0\n"),
                         doctest::Contains("chi must be > 0"), experiments::ConfigError);
    CHECK_THROWS_WITH_AS(experiments::parse_config_text("unknown_knob = 3\n"),
                         doctest::Contains("unknown_knob"), experiments::ConfigError);
    CHECK_THROWS_WITH_AS(experiments::parse_config_text("tbar\n"),
                         doctest::Contains("line 1"), experiments::ConfigError);
    CHECK_THROWS_WITH_AS(experiments::parse_config_text("# fine\n\ntbar = abc\n"),
                         doctest::Contains("line 3"), experiments::ConfigError);

    const auto cfg = experiments::parse_config_text(
        "experiment = eta-sweep\n"
        "tbar_list = 0.05, 0.1\n"
        "eta_steps = 11   # comment after the value\n");
    CHECK(cfg.experiment == Kind::eta_sweep);
    CHECK(cfg.tbar_list.size() == 2);
    CHECK(cfg.eta_steps == 11);
}

TEST_CASE("single-charge run writes self-describing deterministic output") {
    ExperimentConfig cfg;
    cfg.experiment = Kind::single_charge;
    cfg.tbar = 0.0;     // pure one-photon input: the peak gain is exactly 2 p_g
    cfg.cutoff_left = 14;
    cfg.cutoff_right = 14;
    cfg.time_points = 40;

    const auto dir_a = fresh_dir("qbc_run_a");
    const auto dir_b = fresh_dir("qbc_run_b");
    const auto res_a = experiments::run_experiment(cfg, dir_a.string());
    const auto res_b = experiments::run_experiment(cfg, dir_b.string());
    CHECK(res_a.exit_code == 0);
    REQUIRE(res_a.files.size() == 3);

    const std::string csv = slurp(res_a.files[0]);
    CHECK(csv.rfind("experiment,series,lambda_t,u_q,tbar,chi,delta,n_added,alpha,"
                    "cutoff_left,cutoff_right\n", 0) == 0);
    // Byte-identical rerun.
    for (std::size_t i = 0; i < res_a.files.size(); ++i) {
        CHECK(slurp(res_a.files[i]) == slurp(res_b.files[i]));
    }

    const std::string summary = slurp(res_a.files.back());
    CHECK(summary.find("peak_delta_u_spats = 2\n") != std::string::npos);
}

TEST_CASE("eta sweep finds the midpoint crossing") {
    ExperimentConfig cfg;
    cfg.experiment = Kind::eta_sweep;
    cfg.tbar_list = {0.1};
    cfg.eta_steps = 21;
    cfg.cutoff_left = 16;
    cfg.cutoff_right = 16;
    const auto dir = fresh_dir("qbc_eta");
    const auto res = experiments::run_experiment(cfg, dir.string());
    CHECK(res.exit_code == 0);
    const std::string summary = slurp(res.files.back());
    const auto pos = summary.find("eta_crossing_tbar_0.1 = ");
    REQUIRE(pos != std::string::npos);
    const double crossing = std::stod(summary.substr(pos + 24));
    CHECK(crossing == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("appendix checks pass end to end") {
    ExperimentConfig cfg;
    cfg.experiment = Kind::appendix_checks;
    const auto dir = fresh_dir("qbc_appendix");
    const auto res = experiments::run_experiment(cfg, dir.string());
    CHECK(res.exit_code == 0);
    const std::string csv = slurp(res.files.front());
    CHECK(csv.find("FAIL") == std::string::npos);
    CHECK(slurp(res.files.back()).find("failures = 0") != std::string::npos);
}

TEST_CASE("collisions experiment emits one row per battery") {
    ExperimentConfig cfg;
    cfg.experiment = Kind::collisions;
    cfg.chi_list = {1.0};
    cfg.k_collisions = 3;
    cfg.cutoff_left = 12;
    cfg.cutoff_right = 12;
    const auto dir = fresh_dir("qbc_coll");
    const auto res = experiments::run_experiment(cfg, dir.string());
    CHECK(res.exit_code == 0);
    const std::string csv = slurp(res.files.front());
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);   // header + 3 rows
    CHECK(csv.find("collisions,1,1,0,-1,") != std::string::npos);
}

TEST_CASE("check suite is green") {
    std::stringstream log;
    CHECK(experiments::run_check_suite(20240917u, log) == 0);
    CHECK(log.str().find("FAIL") == std::string::npos);
}
