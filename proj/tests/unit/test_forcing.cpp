#include "doctest.h"

#include "levyns/errors.hpp"
#include "levyns/forcing.hpp"

#include <cmath>
#include <functional>

using namespace levyns;

namespace {

double simpson_log(const std::function<double(double)>& f, double lo, double hi, int panels = 100000) {
    const double a = std::log(lo), b = std::log(hi), h = (b - a) / panels;
    double s = 0.0;
    for (int i = 0; i <= panels; ++i) {
        const double r = std::exp(a + i * h);
        s += ((i == 0 || i == panels) ? 1.0 : (i % 2 ? 4.0 : 2.0)) * f(r) * r;
    }
    return s * h / 3.0;
}

} // namespace

TEST_CASE("every catalog entry satisfies its declared contract") {
    const auto grid = make_grid(2, 16, Boundary::Periodic);
    const auto mu = IntensityMeasure::tempered_stable(2, 0.5, 0.8);
    for (const auto& name : forcing_catalog()) {
        CAPTURE(name);
        const auto spec = builtin_forcing(name, forcing_defaults(name), 2, mu, grid);
        PathRng rng(5, 0, Stream::Test);
        const auto rep = verify_contract(spec, mu, grid, 200, rng);
        CHECK(rep.pass);
        CHECK(rep.lipschitz_ratio <= 1.0001);
        CHECK(rep.growth_ratio <= 1.0001);
    }
}

TEST_CASE("linear damping constants against independent quadrature") {
    const auto grid = make_grid(2, 8, Boundary::Periodic);
    const double c = 0.5, alpha = 0.8;
    const auto mu = IntensityMeasure::tempered_stable(2, c, alpha);
    const auto spec = builtin_forcing("linear_damping", forcing_defaults("linear_damping"), 2, mu, grid);
    auto nu = [&](double r) { return c * std::pow(r, -1.0 - alpha) * std::exp(-r); };
    const double a = 0.3, b = 0.3;
    // F = a min(r,1) u (shape constants 1), G = b r u/(1+|u|) (Lipschitz 1, growth 1)
    const double s2 = simpson_log([&](double r) { return a * a * r * r * nu(r); }, 1e-12, 1.0);
    const double l2 = simpson_log([&](double r) { return b * b * r * r * nu(r); }, 1.0, 100.0);
    CHECK(spec.declared.jump_lipschitz == doctest::Approx(s2 + l2).epsilon(1e-6));
    const double s4 = simpson_log([&](double r) { return std::pow(a * r, 4) * nu(r); }, 1e-12, 1.0);
    const double l4 = simpson_log([&](double r) { return std::pow(b * r, 4) * nu(r); }, 1.0, 100.0);
    CHECK(spec.declared.jump_moment_at(4) == doctest::Approx(8.0 * (s4 + l4)).epsilon(1e-6));
    // f = -kappa u and g_i = sigma u, two Brownian components
    CHECK(spec.declared.lipschitz == doctest::Approx(std::max(0.5, std::sqrt(2.0) * 0.2)));
    CHECK(spec.has_drift());
    CHECK(spec.has_brownian());
    CHECK(spec.has_jumps());
}

TEST_CASE("declared overrides replace derived constants") {
    const auto grid = make_grid(2, 8, Boundary::Periodic);
    const auto mu = IntensityMeasure::none(2);
    const auto spec =
        builtin_forcing("linear_damping", forcing_defaults("linear_damping"), 1, mu, grid, {{"lipschitz", 7.0}, {"jump_moment_8", 3.0}});
    CHECK(spec.declared.lipschitz == 7.0);
    CHECK(spec.declared.jump_moment_at(8) == 3.0);
    CHECK_THROWS_AS(spec.declared.jump_moment_at(3), UsageError);
}

TEST_CASE("the falsification sampler catches a superlinear drift") {
    const auto grid = make_grid(2, 8, Boundary::Periodic);
    const auto mu = IntensityMeasure::none(2);
    ForcingSpec spec;
    spec.name = "quadratic";
    // f(u) = |u| u claims Lipschitz and growth constant 1, which is false for large u
    spec.f.apply = [](const GridField& u, GridField& out) {
        out = u;
        for (std::size_t p = 0; p < u.node_count(); ++p) {
            const double n = std::hypot(u.at(p, 0), u.at(p, 1));
            out.at(p, 0) *= n;
            out.at(p, 1) *= n;
        }
    };
    spec.f.lipschitz = 1.0;
    spec.f.growth0 = 0.0;
    spec.f.growth1 = 1.0;
    spec.declared = derive_constants(spec, mu);
    PathRng rng(6, 0, Stream::Test);
    const auto rep = verify_contract(spec, mu, grid, 100, rng);
    CHECK_FALSE(rep.pass);
    CHECK(rep.lipschitz_ratio > 1.0);
    CHECK_FALSE(rep.failures.empty());
}

TEST_CASE("unknown catalog names list the alternatives") {
    const auto grid = make_grid(2, 8, Boundary::Periodic);
    try {
        builtin_forcing("nope", {}, 1, IntensityMeasure::none(2), grid);
        FAIL("expected an exception");
    } catch (const std::exception& e) {
        const std::string msg = e.what();
        CHECK(msg.find("linear_damping") != std::string::npos);
        CHECK(msg.find("bounded_saturation") != std::string::npos);
    }
}
