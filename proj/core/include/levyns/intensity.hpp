#pragma once

#include "levyns/rng.hpp"

#include <functional>
#include <limits>
#include <string>

namespace levyns {

enum class IntensityKind { None, UniformBall, TemperedStable };

/// Rotation-invariant intensity measure on R^mark_dim, described by its
/// radial density nu(r): expected jumps per unit time with |z| in [r, r+dr).
class IntensityMeasure {
public:
    static IntensityMeasure none(int mark_dim);
    /// Marks uniform on the ball of radius `radius`, total rate `rate`.
    static IntensityMeasure uniform_ball(int mark_dim, double rate, double radius);
    /// nu(r) = c r^(-1-alpha) exp(-r), alpha in (0, 2).
    static IntensityMeasure tempered_stable(int mark_dim, double c, double alpha);

    IntensityKind kind() const noexcept { return kind_; }
    std::string name() const;
    int mark_dim() const noexcept { return mark_dim_; }
    double rate() const noexcept { return a_; }
    double radius() const noexcept { return b_; }
    double scale() const noexcept { return a_; }
    double alpha() const noexcept { return b_; }

    double radial_density(double r) const;
    /// Density of mu per unit mark volume at |z| = r.
    double density(double r) const;

    /// integral of g(r) nu(r) dr over [lo, hi); hi may be +infinity.
    double radial_integral(const std::function<double(double)>& g, double lo,
                           double hi = std::numeric_limits<double>::infinity()) const;

    /// mu({eps <= |z| < 1}).
    double small_total(double eps) const;
    /// mu({|z| >= 1}).
    double large_total() const;
    /// integral over |z| >= 1 of |z|^p mu(dz).
    double moment(double p) const;
    /// integral over |z| < eps of |z|^2 mu(dz): variance dropped by truncation.
    double neglected_variance(double eps) const;

    /// |z| drawn from mu restricted to {|z| >= 1}, normalised.
    double sample_large_radius(PathRng& rng) const;
    /// |z| drawn from mu restricted to {eps <= |z| < 1}, normalised.
    double sample_small_radius(double eps, PathRng& rng) const;

private:
    IntensityMeasure(IntensityKind kind, int mark_dim, double a, double b);

    IntensityKind kind_;
    int mark_dim_;
    double a_;
    double b_;
};

} // namespace levyns
