#include "doctest.h"

#include "levyns/basis.hpp"
#include "levyns/basis_cache.hpp"
#include "levyns/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <filesystem>
#include <numbers>

using namespace levyns;

namespace {

Eigen::MatrixXd mass_gram(const BasisSet& b) {
    const int n = b.size();
    Eigen::MatrixXd g(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) g(i, j) = weighted_inner(b.mode(i), b.mode(j));
    return g;
}

} // namespace

TEST_CASE("torus modes are orthonormal, divergence free and sorted") {
    for (int d : {2, 3}) {
        const BasisSet b = build_basis(Provider::TorusFourier, d == 2 ? 12 : 16, d == 2 ? 16 : 12, d);
        const int n = b.size();
        CHECK((mass_gram(b) - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-12);
        const Eigen::MatrixXd gg = gradient_gram(b);
        for (int i = 0; i < n; ++i) {
            CHECK(mode_divergence_norm(b, i) < 1e-10);
            CHECK(gg(i, i) == doctest::Approx(b.eigenvalue(i)).epsilon(1e-10));
            if (i > 0) CHECK(b.eigenvalue(i) >= b.eigenvalue(i - 1));
            const auto& k = b.torus_modes()[i].k;
            const double k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
            CHECK(b.eigenvalue(i) == doctest::Approx(4.0 * std::numbers::pi * std::numbers::pi * k2));
        }
        CHECK((gg - Eigen::MatrixXd(gg.diagonal().asDiagonal())).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("torus field is pointwise divergence free and nodal evaluation is exact") {
    const BasisSet b = build_basis(Provider::TorusFourier, 6, 16, 2);
    CoefficientVector phi(6);
    phi << 0.3, -1.0, 0.5, 0.2, -0.7, 0.9;
    const double h = 1e-6;
    const Point x{0.137, 0.611, 0.0};
    double div = 0.0;
    for (int j = 0; j < 2; ++j) {
        Point xp = x, xm = x;
        xp[j] += h;
        xm[j] -= h;
        double up[3], um[3];
        b.velocity_at(xp, phi, up);
        b.velocity_at(xm, phi, um);
        div += (up[j] - um[j]) / (2 * h);
    }
    CHECK(std::abs(div) < 1e-6);

    // stored nodal gradients match central differences of the pointwise field
    CoefficientVector e = CoefficientVector::Zero(6);
    for (int k = 0; k < 6; ++k) {
        e.setZero();
        e(k) = 1.0;
        const std::size_t node = 53;
        const Point xn = b.grid()->coord(node);
        for (int j = 0; j < 2; ++j) {
            Point xp = xn, xm = xn;
            xp[j] += h;
            xm[j] -= h;
            double up[3], um[3];
            b.velocity_at(xp, e, up);
            b.velocity_at(xm, e, um);
            for (int c = 0; c < 2; ++c) {
                const double fd = (up[c] - um[c]) / (2 * h);
                CHECK(b.gradients()((node * 2 + c) * 2 + j, k) == doctest::Approx(fd).epsilon(1e-6).scale(1.0));
            }
        }
    }

    // nodal evaluation agrees with pointwise evaluation at the nodes
    const GridField u = eval_velocity(phi, b);
    for (std::size_t node : {0ul, 37ul, 200ul}) {
        double v[3];
        b.velocity_at(b.grid()->coord(node), phi, v);
        CHECK(u.at(node, 0) == doctest::Approx(v[0]).epsilon(1e-12));
        CHECK(u.at(node, 1) == doctest::Approx(v[1]).epsilon(1e-12));
    }
}

TEST_CASE("torus resolution must resolve the highest wavenumber") {
    CHECK_THROWS_AS(build_basis(Provider::TorusFourier, 20, 4, 2), ConfigError);
}

TEST_CASE("box Stokes modes against an SVD null-space oracle") {
    const int res = 12, dim = 2, n = 6, m = res - 2;
    const BasisSet b = build_basis(Provider::DirichletStokes, n, res, dim);
    REQUIRE(b.size() == n);
    const double h = 1.0 / (res - 1);
    const int unknowns = dim * m * m;
    auto id = [&](int i, int j) { return i + m * j; };

    // independent assembly of the 5-point Laplacian and centred divergence
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(unknowns, unknowns);
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(m * m, unknowns);
    for (int j = 0; j < m; ++j)
        for (int i = 0; i < m; ++i)
            for (int c = 0; c < dim; ++c) {
                const int r = id(i, j) * dim + c;
                L(r, r) = 4.0 / (h * h);
                if (i > 0) L(r, id(i - 1, j) * dim + c) = -1.0 / (h * h);
                if (i < m - 1) L(r, id(i + 1, j) * dim + c) = -1.0 / (h * h);
                if (j > 0) L(r, id(i, j - 1) * dim + c) = -1.0 / (h * h);
                if (j < m - 1) L(r, id(i, j + 1) * dim + c) = -1.0 / (h * h);
            }
    for (int j = 0; j < m; ++j)
        for (int i = 0; i < m; ++i) {
            const int r = id(i, j);
            if (i + 1 < m) D(r, id(i + 1, j) * dim + 0) += 0.5 / h;
            if (i > 0) D(r, id(i - 1, j) * dim + 0) -= 0.5 / h;
            if (j + 1 < m) D(r, id(i, j + 1) * dim + 1) += 0.5 / h;
            if (j > 0) D(r, id(i, j - 1) * dim + 1) -= 0.5 / h;
        }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(D, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    int rank = 0;
    while (rank < sv.size() && sv(rank) > 1e-10 * sv(0)) ++rank;
    const Eigen::MatrixXd Z = svd.matrixV().rightCols(unknowns - rank);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Z.transpose() * L * Z);
    for (int k = 0; k < n; ++k) CHECK(b.eigenvalue(k) == doctest::Approx(es.eigenvalues()(k)).epsilon(1e-9));

    // each returned mode is an eigenvector of the projected operator
    const Eigen::MatrixXd P = Z * Z.transpose();
    for (int k = 0; k < n; ++k) {
        Eigen::VectorXd v(unknowns);
        for (int j = 0; j < m; ++j)
            for (int i = 0; i < m; ++i)
                for (int c = 0; c < dim; ++c) v(id(i, j) * dim + c) = b.values()(b.grid()->node(i + 1, j + 1) * dim + c, k);
        CHECK((D * v).norm() < 1e-9 * v.norm() / h);
        CHECK((P * (L * v) - b.eigenvalue(k) * v).norm() < 1e-8 * b.eigenvalue(k) * v.norm());
    }
    CHECK((mass_gram(b) - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-10);
    const Eigen::MatrixXd gg = gradient_gram(b);
    for (int k = 0; k < n; ++k) CHECK(gg(k, k) == doctest::Approx(b.eigenvalue(k)).epsilon(1e-8));
}

TEST_CASE("box resolution too coarse for the requested modes") {
    CHECK_THROWS_AS(build_basis(Provider::DirichletStokes, 40, 5, 2), ConfigError);
}

TEST_CASE("basis cache round trip") {
    const auto dir = std::filesystem::temp_directory_path() / "levyns_basis_cache_test";
    std::filesystem::remove_all(dir);
    const BasisSet a = build_basis_cached(Provider::DirichletStokes, 4, 10, 2, dir);
    REQUIRE(std::filesystem::exists(dir / basis_cache_name(Provider::DirichletStokes, 4, 10, 2)));
    const BasisSet b = build_basis_cached(Provider::DirichletStokes, 4, 10, 2, dir);
    CHECK(a.eigenvalues() == b.eigenvalues());
    CHECK(a.values() == b.values());
    CHECK_FALSE(load_basis(dir / "missing.bin", Provider::DirichletStokes, 4, 10, 2).has_value());
    CHECK_THROWS_AS(load_basis(dir / basis_cache_name(Provider::DirichletStokes, 4, 10, 2), Provider::DirichletStokes, 5,
                               10, 2),
                    ConfigError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("projection inverts evaluation") {
    const BasisSet b = build_basis(Provider::TorusFourier, 10, 16, 2);
    CoefficientVector phi = CoefficientVector::LinSpaced(10, -1.0, 2.0);
    CHECK((project(eval_velocity(phi, b), b) - phi).norm() < 1e-12);
    CHECK(grad_sq_norm(phi, b) == doctest::Approx(phi.dot(Eigen::VectorXd::Map(b.eigenvalues().data(), 10).cwiseProduct(phi))));
}
