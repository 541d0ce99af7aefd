#include "doctest.h"

#include "levyns/intensity.hpp"
#include "levyns/rng.hpp"
#include "levyns/stats.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

using namespace levyns;

namespace {

// Composite Simpson in s = log r with a fixed, large panel count.
double simpson_log(const std::function<double(double)>& f, double lo, double hi, int panels = 200000) {
    const double a = std::log(lo), b = std::log(hi), h = (b - a) / panels;
    double s = 0.0;
    for (int i = 0; i <= panels; ++i) {
        const double r = std::exp(a + i * h);
        const double w = (i == 0 || i == panels) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        s += w * f(r) * r;
    }
    return s * h / 3.0;
}

double ts_density(double c, double alpha, double r) { return c * std::pow(r, -1.0 - alpha) * std::exp(-r); }

} // namespace

TEST_CASE("uniform ball closed forms") {
    const double rate = 3.0, R = 2.0;
    for (int d : {1, 2, 3}) {
        const auto mu = IntensityMeasure::uniform_ball(d, rate, R);
        const double vol = std::pow(R, d);
        CHECK(mu.large_total() == doctest::Approx(rate * (1.0 - 1.0 / vol)));
        CHECK(mu.small_total(0.25) == doctest::Approx(rate * (1.0 - std::pow(0.25, d)) / vol));
        // integral_1^R r^p * rate d r^(d-1) / R^d dr
        const double p = 2.0;
        CHECK(mu.moment(p) == doctest::Approx(rate * d / vol * (std::pow(R, p + d) - 1.0) / (p + d)));
        CHECK(mu.neglected_variance(0.1) == doctest::Approx(rate * d / vol * std::pow(0.1, d + 2) / (d + 2)));
    }
    const auto inside = IntensityMeasure::uniform_ball(2, 1.0, 0.5);
    CHECK(inside.large_total() == 0.0);
    CHECK(inside.small_total(0.1) == doctest::Approx(1.0 - 0.04));
}

TEST_CASE("tempered stable integrals against an independent Simpson rule") {
    const double c = 0.5, alpha = 0.8, eps = 1e-2;
    const auto mu = IntensityMeasure::tempered_stable(2, c, alpha);
    auto nu = [&](double r) { return ts_density(c, alpha, r); };
    CHECK(mu.radial_density(0.7) == doctest::Approx(nu(0.7)));
    CHECK(mu.small_total(eps) == doctest::Approx(simpson_log(nu, eps, 1.0)).epsilon(1e-9));
    CHECK(mu.large_total() == doctest::Approx(simpson_log(nu, 1.0, 80.0)).epsilon(1e-9));
    CHECK(mu.moment(4.0) == doctest::Approx(simpson_log([&](double r) { return r * r * r * r * nu(r); }, 1.0, 120.0))
                                .epsilon(1e-8));
    const double nv = simpson_log([&](double r) { return r * r * nu(r); }, 1e-14, eps);
    CHECK(mu.neglected_variance(eps) == doctest::Approx(nv).epsilon(1e-6));
    // closed form through the lower incomplete gamma function
    CHECK(mu.neglected_variance(eps) == doctest::Approx(c * boost::math::tgamma_lower(2.0 - alpha, eps)).epsilon(1e-10));
    // integrands that grow in r do not spoil the tail
    const double r8 = mu.radial_integral([](double r) { return std::pow(r, 8); }, 1.0);
    CHECK(std::isfinite(r8));
    CHECK(r8 == doctest::Approx(simpson_log([&](double r) { return std::pow(r, 8) * nu(r); }, 1.0, 200.0)).epsilon(1e-7));
    CHECK(mu.radial_integral([](double r) { return r * r; }, 0.0, 1.0) ==
          doctest::Approx(c * boost::math::tgamma_lower(2.0 - alpha, 1.0)).epsilon(1e-9));
}

TEST_CASE("radius samplers follow the normalised restricted laws") {
    const double c = 0.5, alpha = 0.8, eps = 1e-2;
    const auto mu = IntensityMeasure::tempered_stable(2, c, alpha);
    auto nu = [&](double r) { return ts_density(c, alpha, r); };

    auto cdf_table = [&](double lo, double hi, int n) {
        std::vector<double> r(n + 1), F(n + 1, 0.0);
        const double a = std::log(lo), b = std::log(hi);
        for (int i = 0; i <= n; ++i) r[i] = std::exp(a + (b - a) * i / n);
        for (int i = 1; i <= n; ++i) F[i] = F[i - 1] + simpson_log(nu, r[i - 1], r[i], 200);
        for (auto& f : F) f /= F.back();
        return std::make_pair(r, F);
    };
    auto interp = [](const std::vector<double>& r, const std::vector<double>& F, double x) {
        if (x <= r.front()) return 0.0;
        if (x >= r.back()) return 1.0;
        const auto it = std::upper_bound(r.begin(), r.end(), x);
        const std::size_t i = it - r.begin();
        const double t = (std::log(x) - std::log(r[i - 1])) / (std::log(r[i]) - std::log(r[i - 1]));
        return F[i - 1] + t * (F[i] - F[i - 1]);
    };

    const auto [rs, Fs] = cdf_table(eps, 1.0, 4000);
    const auto [rl, Fl] = cdf_table(1.0, 60.0, 4000);
    PathRng g(11, 0, Stream::Test);
    std::vector<double> small(3000), large(3000);
    for (auto& x : small) {
        x = mu.sample_small_radius(eps, g);
        REQUIRE(x >= eps);
        REQUIRE(x < 1.0);
    }
    for (auto& x : large) {
        x = mu.sample_large_radius(g);
        REQUIRE(x >= 1.0);
    }
    CHECK(ks_test(small, [&](double x) { return interp(rs, Fs, x); }).p_value > 1e-3);
    CHECK(ks_test(large, [&](double x) { return interp(rl, Fl, x); }).p_value > 1e-3);

    const auto ball = IntensityMeasure::uniform_ball(3, 2.0, 2.0);
    std::vector<double> lb(3000);
    for (auto& x : lb) x = ball.sample_large_radius(g);
    // |z|^3 uniform on [1, 8]
    CHECK(ks_test(lb, [](double x) { return std::clamp((x * x * x - 1.0) / 7.0, 0.0, 1.0); }).p_value > 1e-3);
}
