#include "doctest.h"

#include "levyns/errors.hpp"
#include "levyns/transport.hpp"

#include <cmath>
#include <numbers>

using namespace levyns;

namespace {

DensityField bumpy(const GridPtr& g, double lo, double hi) {
    GridField v(g, 1);
    for (std::size_t i = 0; i < v.node_count(); ++i) {
        const Point x = g->coord(i);
        const double s = std::sin(2 * std::numbers::pi * x[0]) * std::cos(4 * std::numbers::pi * x[1]);
        v.values[i] = lo + (hi - lo) * 0.5 * (1.0 + s);
    }
    return DensityField(std::move(v), lo, hi);
}

// Rigid rotation-like periodic field, divergence free.
GridField swirl(const GridPtr& g, double amp) {
    GridField u(g, 2);
    for (std::size_t i = 0; i < u.node_count(); ++i) {
        const Point x = g->coord(i);
        u.at(i, 0) = amp * std::sin(2 * std::numbers::pi * x[1]);
        u.at(i, 1) = amp * std::cos(2 * std::numbers::pi * x[0]);
    }
    return u;
}

} // namespace

TEST_CASE("density constructor enforces positive certified bounds") {
    const auto g = make_grid(2, 8, Boundary::Periodic);
    CHECK_THROWS_AS(DensityField(GridField(g, 1, 1.0), 0.0, 2.0), ConfigError);
    CHECK_THROWS_AS(DensityField(GridField(g, 1, 3.0), 0.5, 2.0), ConfigError);
    const auto c = DensityField::constant(g, 1.5);
    CHECK(c.mass() == doctest::Approx(1.5));
    CHECK(c.initial_mass == doctest::Approx(1.5));
}

TEST_CASE("translation by whole cells is exact") {
    const auto g = make_grid(2, 16, Boundary::Periodic);
    const auto rho = bumpy(g, 0.5, 2.0);
    const double h = g->spacing();
    // shift by (2, 1) cells in one step
    const auto out = advance_density(rho, ConstantVelocity({2 * h, h, 0.0}), 1.0);
    for (int j = 0; j < 16; ++j)
        for (int i = 0; i < 16; ++i) {
            const double expect = rho.values.values[g->node((i + 14) % 16, (j + 15) % 16)];
            CHECK(out.values.values[g->node(i, j)] == doctest::Approx(expect).epsilon(1e-12));
        }
}

TEST_CASE("zero velocity leaves the density untouched") {
    const auto g = make_grid(2, 12, Boundary::Periodic);
    const auto rho = bumpy(g, 0.5, 2.0);
    const auto out = advance_density(rho, ConstantVelocity({0.0, 0.0, 0.0}), 0.3);
    CHECK(out.values.values == rho.values.values);
}

TEST_CASE("maximum principle and mass conservation under a swirl") {
    const auto g = make_grid(2, 24, Boundary::Periodic);
    auto rho = bumpy(g, 0.5, 2.0);
    const double m0 = rho.mass();
    const auto u = swirl(g, 1.3);
    for (int step = 0; step < 60; ++step) {
        const double lo = rho.min(), hi = rho.max();
        TransportStats st;
        rho = advance_density(rho, u, 0.02, &st);
        REQUIRE(rho.min() >= lo);
        REQUIRE(rho.max() <= hi);
        CHECK(std::abs(rho.mass() - m0) <= 1e-12 * m0);
    }
}

TEST_CASE("smooth advection converges under refinement") {
    // advect by a constant non-grid-aligned velocity and compare with the exact shift
    auto error = [](int res, int steps) {
        const auto g = make_grid(2, res, Boundary::Periodic);
        const auto rho = bumpy(g, 0.5, 2.0);
        const Point v{0.37, -0.21, 0.0};
        auto r = rho;
        for (int s = 0; s < steps; ++s) r = advance_density(r, ConstantVelocity(v), 0.1 / steps);
        double e = 0.0;
        for (std::size_t i = 0; i < r.values.node_count(); ++i) {
            Point x = g->coord(i);
            const double s = std::sin(2 * std::numbers::pi * (x[0] - 0.037)) * std::cos(4 * std::numbers::pi * (x[1] + 0.021));
            e = std::max(e, std::abs(r.values.values[i] - (0.5 + 1.5 * 0.5 * (1.0 + s))));
        }
        return e;
    };
    // a single step is fourth order away from the limiter
    CHECK(error(32, 1) < error(16, 1) / 8.0);
    // repeated steps lose accuracy near extrema where the limiter clips, but still converge
    CHECK(error(128, 10) < 0.5 * error(32, 10));
}

TEST_CASE("box transport clamps departure points near the walls") {
    const auto g = make_grid(2, 11, Boundary::Dirichlet);
    auto rho = bumpy(g, 0.5, 2.0);
    const double lo = rho.min(), hi = rho.max();
    const auto out = advance_density(rho, ConstantVelocity({0.05, 0.0, 0.0}), 1.0);
    CHECK(out.min() >= lo);
    CHECK(out.max() <= hi);
    CHECK_THROWS_AS(advance_density(rho, ConstantVelocity({0.5, 0.0, 0.0}), 1.0), ConfigError);
}

TEST_CASE("the reciprocal density is transported consistently") {
    const auto g = make_grid(2, 16, Boundary::Periodic);
    std::vector<DensityField> path{bumpy(g, 0.5, 2.0)};
    std::vector<TransportStep> steps;
    auto v = std::make_shared<ConstantVelocity>(Point{2 * g->spacing(), 0.0, 0.0});
    for (int k = 0; k < 4; ++k) {
        path.push_back(advance_density(path.back(), *v, 1.0));
        steps.push_back({v, 1.0});
    }
    CHECK(reciprocal_check(path, steps).max_deviation < 1e-12);
}
