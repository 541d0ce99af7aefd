#include "doctest.h"

#include "levyns/rng.hpp"
#include "levyns/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

using namespace levyns;

TEST_CASE("pairwise sum agrees with an extended-precision sum") {
    PathRng r(3, 0, Stream::Test);
    std::vector<double> x(100003);
    for (auto& v : x) v = (r.uniform() - 0.3) * std::pow(10.0, 6.0 * r.uniform());
    long double ref = 0.0L;
    for (double v : x) ref += v;
    CHECK(pairwise_sum(x) == doctest::Approx(static_cast<double>(ref)).epsilon(1e-13));
    CHECK(pairwise_sum(std::vector<double>{}) == 0.0);
}

TEST_CASE("estimate computes mean and standard error") {
    const std::vector<double> x{1.0, 2.0, 3.0, 4.0};
    const auto e = estimate(x);
    CHECK(e.mean == doctest::Approx(2.5));
    // sample sd sqrt(5/3), divided by sqrt(4)
    CHECK(e.se == doctest::Approx(std::sqrt(5.0 / 3.0) / 2.0));
    CHECK(e.n == 4);
    CHECK(pooled_se({0, 3, 1}, {0, 4, 1}) == doctest::Approx(5.0));
}

TEST_CASE("fit_line recovers an exact line and widens with noise") {
    const std::vector<double> x{1, 2, 3, 4, 5};
    std::vector<double> y;
    for (double v : x) y.push_back(2.0 - 0.5 * v);
    const auto f = fit_line(x, y);
    CHECK(f.slope == doctest::Approx(-0.5));
    CHECK(f.intercept == doctest::Approx(2.0));
    CHECK(f.slope_se == doctest::Approx(0.0).epsilon(1e-12));

    std::vector<double> yn = y;
    yn[1] += 0.1;
    yn[3] -= 0.1;
    const auto g = fit_line(x, yn);
    CHECK(g.ci_low < g.slope);
    CHECK(g.ci_high > g.slope);

    std::vector<double> px, py;
    for (double v : x) {
        px.push_back(v);
        py.push_back(3.0 * std::pow(v, 1.5));
    }
    CHECK(fit_loglog(px, py).slope == doctest::Approx(1.5));
}

TEST_CASE("Kolmogorov-Smirnov test") {
    PathRng r(4, 0, Stream::Test);
    std::vector<double> u(2000), w(2000);
    for (std::size_t i = 0; i < u.size(); ++i) {
        u[i] = r.uniform();
        w[i] = u[i] * u[i];
    }
    auto cdf = [](double t) { return std::clamp(t, 0.0, 1.0); };
    CHECK(ks_test(u, cdf).p_value > 1e-3);
    CHECK(ks_test(w, cdf).p_value < 1e-6);
    // asymptotic Kolmogorov distribution: P(K > 1.36) ~ 0.049
    CHECK(ks_p_value(1.36 / std::sqrt(1e6), 1000000) == doctest::Approx(0.0494).epsilon(0.02));
}
