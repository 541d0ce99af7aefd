#include "levyns/intensity.hpp"

#include "levyns/errors.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace levyns {

namespace {

/// Integrands vanish at the far ends of the substituted ranges; overflowing
/// products there (inf * 0) are replaced by their limit 0.
double tame(double v) { return std::isfinite(v) ? v : 0.0; }

double gk(const std::function<double(double)>& f, double a, double b) {
    if (!(b > a)) return 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-13);
}

} // namespace

IntensityMeasure::IntensityMeasure(IntensityKind kind, int mark_dim, double a, double b)
    : kind_(kind), mark_dim_(mark_dim), a_(a), b_(b) {
    if (mark_dim < 1) throw ConfigError("mark_dim must be at least 1");
}

IntensityMeasure IntensityMeasure::none(int mark_dim) { return {IntensityKind::None, mark_dim, 0.0, 0.0}; }

IntensityMeasure IntensityMeasure::uniform_ball(int mark_dim, double rate, double radius) {
    if (!(rate >= 0.0)) throw ConfigError("uniform_ball intensity: rate must be nonnegative");
    if (!(radius > 0.0)) throw ConfigError("uniform_ball intensity: radius must be positive");
    return {IntensityKind::UniformBall, mark_dim, rate, radius};
}

IntensityMeasure IntensityMeasure::tempered_stable(int mark_dim, double c, double alpha) {
    if (!(c >= 0.0)) throw ConfigError("tempered_stable intensity: c must be nonnegative");
    if (!(alpha > 0.0 && alpha < 2.0)) throw ConfigError("tempered_stable intensity: alpha must lie in (0, 2)");
    return {IntensityKind::TemperedStable, mark_dim, c, alpha};
}

std::string IntensityMeasure::name() const {
    switch (kind_) {
    case IntensityKind::None: return "none";
    case IntensityKind::UniformBall: return "uniform_ball";
    case IntensityKind::TemperedStable: return "tempered_stable";
    }
    return "none";
}

double IntensityMeasure::radial_density(double r) const {
    if (!(r > 0.0)) return 0.0;
    switch (kind_) {
    case IntensityKind::None: return 0.0;
    case IntensityKind::UniformBall:
        return r < b_ ? a_ * mark_dim_ * std::pow(r, mark_dim_ - 1) / std::pow(b_, mark_dim_) : 0.0;
    case IntensityKind::TemperedStable: return a_ * std::pow(r, -1.0 - b_) * std::exp(-r);
    }
    return 0.0;
}

double IntensityMeasure::density(double r) const {
    if (!(r > 0.0)) return 0.0;
    // surface area of the unit sphere in R^m
    const double m = mark_dim_;
    const double area = 2.0 * std::pow(std::numbers::pi, m / 2.0) / std::tgamma(m / 2.0);
    return radial_density(r) / (area * std::pow(r, m - 1.0));
}

double IntensityMeasure::radial_integral(const std::function<double(double)>& g, double lo, double hi) const {
    lo = std::max(lo, 0.0);
    if (!(hi > lo) || kind_ == IntensityKind::None || a_ == 0.0) return 0.0;
    if (kind_ == IntensityKind::UniformBall) {
        hi = std::min(hi, b_);
        return gk([&](double r) { return g(r) * radial_density(r); }, lo, hi);
    }
    // tempered: log substitution on bounded pieces tames the r^(-1-alpha) spike
    double total = 0.0;
    const double split = std::isinf(hi) ? std::max(lo, 1.0) : hi;
    if (split > lo) {
        if (lo == 0.0) {
            total += boost::math::quadrature::exp_sinh<double>().integrate(
                [&](double s) {
                    const double r = split * std::exp(-s);
                    return tame(g(r) * radial_density(r) * r);
                },
                0.0, std::numeric_limits<double>::infinity());
        } else {
            total += gk(
                [&](double s) {
                    const double r = std::exp(s);
                    return tame(g(r) * radial_density(r) * r);
                },
                std::log(lo), std::log(split));
        }
    }
    if (std::isinf(hi)) {
        total += boost::math::quadrature::exp_sinh<double>().integrate(
            [&](double r) { return tame(g(r) * radial_density(r)); }, split, std::numeric_limits<double>::infinity());
    }
    return total;
}

double IntensityMeasure::small_total(double eps) const {
    return radial_integral([](double) { return 1.0; }, eps, 1.0);
}

double IntensityMeasure::large_total() const {
    return radial_integral([](double) { return 1.0; }, 1.0);
}

double IntensityMeasure::moment(double p) const {
    return radial_integral([p](double r) { return std::pow(r, p); }, 1.0);
}

double IntensityMeasure::neglected_variance(double eps) const {
    switch (kind_) {
    case IntensityKind::None: return 0.0;
    case IntensityKind::UniformBall: {
        const double e = std::min(eps, b_);
        const double m = mark_dim_;
        return a_ * m / (m + 2.0) * std::pow(e, m + 2.0) / std::pow(b_, m);
    }
    case IntensityKind::TemperedStable: return a_ * boost::math::tgamma_lower(2.0 - b_, eps);
    }
    return 0.0;
}

double IntensityMeasure::sample_large_radius(PathRng& rng) const {
    switch (kind_) {
    case IntensityKind::UniformBall: {
        if (b_ <= 1.0) throw UsageError("sample_large_radius: measure has no mass on |z| >= 1");
        const double m = mark_dim_;
        return std::pow(1.0 + rng.uniform() * (std::pow(b_, m) - 1.0), 1.0 / m);
    }
    case IntensityKind::TemperedStable:
        for (;;) {
            const double r = 1.0 + rng.exponential(1.0);
            if (rng.uniform() < std::pow(r, -1.0 - b_)) return r;
        }
    case IntensityKind::None: break;
    }
    throw UsageError("sample_large_radius: measure has no mass on |z| >= 1");
}

double IntensityMeasure::sample_small_radius(double eps, PathRng& rng) const {
    switch (kind_) {
    case IntensityKind::UniformBall: {
        const double hi = std::min(1.0, b_);
        if (eps >= hi) break;
        const double m = mark_dim_;
        const double lo_m = std::pow(eps, m);
        return std::pow(lo_m + rng.uniform() * (std::pow(hi, m) - lo_m), 1.0 / m);
    }
    case IntensityKind::TemperedStable: {
        const double ea = std::pow(eps, -b_);
        for (;;) {
            const double r = std::pow(ea - rng.uniform() * (ea - 1.0), -1.0 / b_);
            if (rng.uniform() < std::exp(-(r - eps))) return std::min(r, std::nextafter(1.0, 0.0));
        }
    }
    case IntensityKind::None: break;
    }
    throw UsageError("sample_small_radius: measure has no mass on [eps, 1)");
}

} // namespace levyns
