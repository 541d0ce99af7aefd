#include "doctest.h"

#include "levyns/errors.hpp"
#include "levyns/galerkin.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>

using namespace levyns;

namespace {

DensityField smooth_density(const GridPtr& g, double lo, double hi) {
    GridField v(g, 1);
    for (std::size_t i = 0; i < v.node_count(); ++i) {
        const Point x = g->coord(i);
        v.values[i] = lo + (hi - lo) * 0.5 * (1.0 + std::sin(2 * std::numbers::pi * x[0] + 0.3) *
                                                        std::cos(2 * std::numbers::pi * x[1]));
    }
    return DensityField(std::move(v), lo, hi);
}

CoefficientVector random_phi(int n, std::uint64_t seed) {
    PathRng r(seed, 0, Stream::Test);
    CoefficientVector phi(n);
    for (int k = 0; k < n; ++k) phi(k) = r.normal();
    return phi;
}

} // namespace

TEST_CASE("mass matrix equals direct quadrature and respects the density bounds") {
    const BasisSet b = build_basis(Provider::TorusFourier, 8, 16, 2);
    const auto rho = smooth_density(b.grid(), 0.5, 2.0);
    const MassMatrix m = assemble_mass(rho, b);
    for (int i = 0; i < b.size(); ++i)
        for (int j = 0; j < b.size(); ++j) {
            // naive node loop, independent of the library's matrix products
            double s = 0.0;
            for (std::size_t p = 0; p < b.grid()->node_count(); ++p)
                for (int c = 0; c < 2; ++c)
                    s += b.grid()->weights()[p] * rho.values.values[p] * b.values()(p * 2 + c, i) *
                         b.values()(p * 2 + c, j);
            CHECK(m.matrix(i, j) == doctest::Approx(s).epsilon(1e-12).scale(1.0));
        }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.matrix);
    CHECK(es.eigenvalues().minCoeff() >= 0.5 - 1e-12);
    CHECK(es.eigenvalues().maxCoeff() <= 2.0 + 1e-12);
    const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(b.size(), 1.0, 2.0);
    CHECK((m.matrix * m.solve(x) - x).norm() < 1e-12);
}

TEST_CASE("convection is energy neutral for constant and variable density") {
    const BasisSet b = build_basis(Provider::TorusFourier, 12, 24, 2);
    const auto one = DensityField::constant(b.grid(), 1.0);
    for (std::uint64_t s = 0; s < 10; ++s) {
        const auto phi = random_phi(b.size(), s);
        CHECK(std::abs(phi.dot(convection_rhs(one, phi, b))) < 1e-10 * std::pow(phi.norm(), 3));
        const GridField u = eval_velocity(phi, b);
        const Eigen::MatrixXd C = convection_matrix(one, u, b);
        CHECK((C * phi - convection_rhs(one, phi, b)).norm() < 1e-10 * phi.squaredNorm());
    }
}

TEST_CASE("convection matrix against a finite-difference oracle") {
    const BasisSet b = build_basis(Provider::TorusFourier, 6, 16, 2);
    const auto rho = smooth_density(b.grid(), 0.5, 2.0);
    const auto phi = random_phi(b.size(), 42);
    const Eigen::VectorXd got = convection_rhs(rho, phi, b);
    // b_l = sum_nodes w rho (u . grad u) . w_l with grad u by central differences of the analytic field
    const double h = 1e-6;
    Eigen::VectorXd want = Eigen::VectorXd::Zero(b.size());
    const auto& g = *b.grid();
    for (std::size_t p = 0; p < g.node_count(); ++p) {
        const Point x = g.coord(p);
        double u[3];
        b.velocity_at(x, phi, u);
        double adv[2] = {0.0, 0.0};
        for (int j = 0; j < 2; ++j) {
            Point xp = x, xm = x;
            xp[j] += h;
            xm[j] -= h;
            double up[3], um[3];
            b.velocity_at(xp, phi, up);
            b.velocity_at(xm, phi, um);
            for (int c = 0; c < 2; ++c) adv[c] += u[j] * (up[c] - um[c]) / (2 * h);
        }
        for (int l = 0; l < b.size(); ++l)
            want(l) += g.weights()[p] * rho.values.values[p] *
                       (adv[0] * b.values()(p * 2, l) + adv[1] * b.values()(p * 2 + 1, l));
    }
    CHECK((got - want).norm() < 1e-6 * (1.0 + want.norm()));
}

TEST_CASE("one-mode step matches the scalar recursion") {
    const double nu = 0.1, kappa = 0.4, sigma = 0.3, a = 0.5, rate = 5.0, R = 0.9, eps = 0.05;
    const BasisSet b = build_basis(Provider::TorusFourier, 1, 8, 2);
    const auto mu = IntensityMeasure::uniform_ball(2, rate, R);
    const auto spec = builtin_forcing("linear_damping", {{"kappa", kappa}, {"sigma", sigma}, {"a_F", a}, {"b_G", 0.0}},
                                      2, mu, b.grid());
    const GalerkinModel model(b, spec, mu, nu, eps);
    // integral_eps^R a r * rate * 2 r / R^2 dr
    const double comp = a * rate * 2.0 / (3.0 * R * R) * (R * R * R - eps * eps * eps);
    CHECK(model.compensator_scale() == doctest::Approx(comp).epsilon(1e-10));

    NoiseSpec ns;
    ns.mu = mu;
    ns.epsilon = eps;
    ns.brownian_dim = 2;
    const auto noise = NoisePath::generate(ns, 1.0, 16, 3, 0);
    REQUIRE(!noise.jumps().empty());
    CoefficientVector phi0(1);
    phi0 << 0.8;
    auto s = model.initial_state(DensityField::constant(b.grid(), 1.0), phi0);
    double x = 0.8;
    const double lam = b.eigenvalue(0);
    for (std::size_t k = 0; k < noise.slice_count(); ++k) {
        const auto sl = noise.slice(k);
        s = model.step(s, sl);
        double pre = (x * (1.0 - sl.dt * kappa - sl.dt * comp) + sigma * x * (sl.dW[0] + sl.dW[1])) / (1.0 + sl.dt * nu * lam);
        double jump = 0.0;
        for (const auto& j : sl.jumps) jump += a * std::min(j.radius, 1.0);
        x = pre * (1.0 + jump);
        CHECK(s.phi(0) == doctest::Approx(x).epsilon(1e-12));
    }
}

TEST_CASE("discrete energy never grows without forcing") {
    const BasisSet b = build_basis(Provider::TorusFourier, 8, 16, 2);
    const auto mu = IntensityMeasure::none(2);
    const GalerkinModel model(b, builtin_forcing("zero", {}, 1, mu, b.grid()), mu, 0.01, 0.01);
    NoiseSpec ns;
    ns.brownian = false;
    ns.jumps = false;
    const auto quiet = NoisePath::generate(ns, 1.0, 64, 1, 0);
    auto s = model.initial_state(smooth_density(b.grid(), 0.5, 2.0), 3.0 * random_phi(b.size(), 7));
    double e = model.energy(s);
    for (std::size_t k = 0; k < quiet.slice_count(); ++k) {
        s = model.step(s, quiet.slice(k));
        const double e1 = model.energy(s);
        CHECK(e1 <= e * (1.0 + 1e-13));
        e = e1;
    }
}

TEST_CASE("force projection and weak drift at rest") {
    const BasisSet b = build_basis(Provider::TorusFourier, 4, 8, 2);
    const auto rho = DensityField::constant(b.grid(), 2.0);
    const GridField w0 = b.mode(0);
    const Eigen::VectorXd p = project_force(w0, rho, b);
    CHECK(p(0) == doctest::Approx(2.0));
    CHECK(p.tail(3).norm() < 1e-12);

    const auto mu = IntensityMeasure::none(2);
    const GalerkinModel model(b, builtin_forcing("zero", {}, 1, mu, b.grid()), mu, 0.2, 0.01);
    CoefficientVector phi = CoefficientVector::Zero(4);
    phi(1) = 1.0;
    // -nu lambda phi for a single mode (convection of one shear mode vanishes)
    const Eigen::VectorXd d = model.weak_drift(rho.values, phi);
    CHECK(d(1) == doctest::Approx(-0.2 * b.eigenvalue(1)).epsilon(1e-10));
}

TEST_CASE("weak residual shrinks with the step on a deterministic path") {
    const BasisSet b = build_basis(Provider::TorusFourier, 4, 16, 2);
    const auto mu = IntensityMeasure::none(2);
    const GalerkinModel model(b, builtin_forcing("linear_damping", forcing_defaults("linear_damping"), 1, mu, b.grid()),
                              mu, 0.05, 0.01);
    NoiseSpec ns;
    ns.brownian = false;
    ns.jumps = false;
    const auto ref = NoisePath::generate(ns, 0.5, 256, 1, 0);
    CoefficientVector phi0(4);
    phi0 << 1.0, 0.5, -0.3, 0.2;
    const auto rho0 = smooth_density(b.grid(), 0.5, 2.0);
    auto residual = [&](int steps) {
        const auto noise = ref.coarsen(256 / steps);
        PathTrace tr;
        tr.rho0 = rho0;
        tr.phi0 = phi0;
        auto s = model.initial_state(rho0, phi0);
        for (std::size_t k = 0; k < noise.slice_count(); ++k) {
            const auto sl = noise.slice(k);
            auto next = model.advance_continuous(s, sl);
            tr.slices.push_back({sl.t0, sl.dt, s.rho.values, s.phi, next.phi, {}});
            model.apply_jumps(next, sl);
            s = std::move(next);
        }
        tr.rho_final = s.rho;
        tr.phi_final = s.phi;
        return weak_form_residual(model, tr, ref, {0, 1, 2, 3}).norm();
    };
    const double r16 = residual(16), r32 = residual(32);
    CHECK(r32 < 0.6 * r16);
    CHECK_THROWS_AS(weak_form_residual(model, PathTrace{}, ref, {9}), UsageError);
}
