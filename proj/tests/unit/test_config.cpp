#include "doctest.h"

#include "levyns/config.hpp"
#include "levyns/errors.hpp"

#include <string>

using namespace levyns;

namespace {

std::string config_error(const std::string& text) {
    try {
        parse_config_text(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

bool contains(const std::string& s, const std::string& what) { return s.find(what) != std::string::npos; }

} // namespace

TEST_CASE("minimal file fills the documented defaults") {
    const auto c = parse_config_text(R"({"basis": {"n": 6}, "time": {"T": 0.5, "dt": 0.0625}})");
    CHECK(c.basis.n == 6);
    CHECK(c.basis.provider == "torus_fourier");
    CHECK(c.basis.resolution == 32);
    CHECK(c.physics.nu == doctest::Approx(0.05));
    CHECK(c.noise.intensity == "tempered_stable");
    CHECK(c.forcing.name == "linear_damping");
    CHECK(c.initial.m == doctest::Approx(0.5));
    CHECK(c.initial.M == doctest::Approx(2.0));
    CHECK(c.n_steps() == 8);
    CHECK(c.ensemble.moments == std::vector<int>{2, 4});
    const auto th = default_theta(c);
    // T/64 and T/32 are finer than the storage grid (dt = T/8)
    CHECK(th == std::vector<double>{0.0625, 0.125});
}

TEST_CASE("missing required keys are named") {
    const auto msg = config_error(R"({"basis": {"resolution": 16}, "time": {"T": 1}})");
    CHECK(contains(msg, "basis.n"));
    CHECK(contains(msg, "time.dt"));
}

TEST_CASE("vacuum densities are rejected citing the bound requirement") {
    const auto msg = config_error(R"({"basis": {"n": 4}, "time": {"T": 1, "dt": 0.1}, "initial": {"m": 0}})");
    CHECK(contains(msg, "0 < m <= rho0 <= M"));
}

TEST_CASE("lags off the storage grid name both grids") {
    const auto msg = config_error(
        R"({"basis": {"n": 4}, "time": {"T": 1, "dt": 0.125, "storage_stride": 2}, "ensemble": {"theta": [0.125]}})");
    CHECK(contains(msg, "theta"));
    CHECK(contains(msg, "storage grid"));
    CHECK(contains(msg, "0.25"));
}

TEST_CASE("all violations are reported together") {
    const auto msg = config_error(
        R"({"basis": {"n": 4}, "time": {"T": -1, "dt": 0.1}, "physics": {"nu": -2}, "ensemble": {"n_paths": 0}})");
    CHECK(contains(msg, "time.T"));
    CHECK(contains(msg, "nu"));
    CHECK(contains(msg, "n_paths"));
}

TEST_CASE("unknown keys and catalog names are errors") {
    CHECK(contains(config_error(R"({"basis": {"n": 4, "nn": 3}, "time": {"T": 1, "dt": 0.1}})"), "nn"));
    CHECK(contains(config_error(R"({"basis": {"n": 4}, "time": {"T": 1, "dt": 0.1}, "extra": {}})"), "extra"));
    const auto msg = config_error(R"({"basis": {"n": 4}, "time": {"T": 1, "dt": 0.1}, "forcing": {"name": "wind"}})");
    CHECK(contains(msg, "linear_damping"));
    CHECK(contains(config_error(R"({"basis": {"n": 4}, "time": {"T": 1, "dt": 0.1}, "ensemble": {"moments": [3]}})"),
                   "moments"));
    CHECK(contains(config_error("{not json"), "JSON"));
}

TEST_CASE("configuration echo round trips") {
    const auto a = parse_config_text(R"({"basis": {"n": 6}, "time": {"T": 0.5, "dt": 0.0625}, "noise": {"epsilon": 0.02}})");
    const auto echo = config_echo(a);
    const auto b = parse_config_text(echo);
    CHECK(config_echo(b) == echo);
}

TEST_CASE("problem assembly") {
    auto c = parse_config_text(R"({"basis": {"n": 4, "resolution": 8}, "time": {"T": 0.25, "dt": 0.0625}})");
    const Problem p = build_problem(c);
    CHECK(p.basis->size() == 4);
    CHECK(p.dual_basis->size() == 8);
    CHECK(p.n_steps == 4);
    CHECK(p.rho0.min() >= 0.5);
    CHECK(p.rho0.max() <= 2.0);
    CHECK(p.phi0(1) == doctest::Approx(0.5));
    c.initial.density = "constant";
    c.initial.density_parameters = {{"value", 3.0}};
    CHECK_THROWS_AS(build_problem(c), ConfigError);
}
