#include "doctest.h"

#include "levyns/config.hpp"
#include "levyns/report_io.hpp"
#include "levyns/verification.hpp"

#include "json.hpp"

#include <sstream>

using namespace levyns;

namespace {

EnsembleReport tiny_report(RunConfig& c) {
    c = parse_config_text(R"({"basis": {"n": 4, "resolution": 8}, "time": {"T": 0.25, "dt": 0.0625},
                               "ensemble": {"n_paths": 3, "theta": [0.0625, 0.125]}})");
    return run_ensemble(build_problem(c), 1);
}

int lines(const std::string& s) {
    int n = 0;
    for (char ch : s) n += ch == '\n';
    return n;
}

} // namespace

TEST_CASE("ensemble report is versioned and reproducible") {
    RunConfig c;
    const auto rep = tiny_report(c);
    const auto text = report_json(rep, c, "simulate");
    const auto j = nlohmann::json::parse(text);
    CHECK(j["schema_version"] == kReportSchemaVersion);
    CHECK(j["n_paths"] == 3);
    CHECK(j["increment_table"].size() == 2);
    CHECK(text.find("utc") == std::string::npos);
    CHECK(text.find("timestamp") == std::string::npos);
    RunConfig c2;
    CHECK(report_json(tiny_report(c2), c2, "simulate") == text);
}

TEST_CASE("csv and plot artifacts have the documented shape") {
    RunConfig c;
    const auto rep = tiny_report(c);
    const auto inc = increments_csv(rep);
    CHECK(inc.rfind("theta,estimate,stderr,u_estimate,u_stderr\n", 0) == 0);
    CHECK(lines(inc) == 3);
    const auto mom = moments_csv(rep);
    CHECK(mom.rfind("p,estimate,stderr,gronwall_bound,grad_estimate,grad_stderr\n", 0) == 0);
    CHECK(lines(mom) == 3);
    CHECK(plot_script(rep, 2).find("trajectories/path_%d.csv") != std::string::npos);
}

TEST_CASE("trajectory records") {
    EnergyLedger l;
    l.record(0.0, 1.0, 1.0, 2.0, 0, 0.5, 2.0);
    l.record(0.1, 0.9, 0.95, 1.8, 1, 0.5, 2.0);
    const auto jl = trajectory_jsonl(l);
    CHECK(lines(jl) == 2);
    CHECK(nlohmann::json::parse(jl.substr(0, jl.find('\n')))["energy"] == 1.0);
    CHECK(lines(trajectory_csv(l)) == 3);
}

TEST_CASE("acceptance report omits timings") {
    CriterionResult r;
    r.id = 2;
    r.name = "x";
    r.pass = true;
    r.seconds = 12.5;
    r.metrics = {{"a", 1.0}};
    const auto text = acceptance_report_json({r}, 5);
    CHECK(text.find("12.5") == std::string::npos);
    const auto j = nlohmann::json::parse(text);
    CHECK(j["all_pass"] == true);
    CHECK(j["criteria"][0]["metrics"]["a"] == 1.0);
    CHECK(format_result_line(r).rfind("[PASS] 2 x", 0) == 0);
}
