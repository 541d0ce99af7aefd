#include "levyns/stats.hpp"

#include "levyns/errors.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <cmath>
#include <limits>
#include <vector>

namespace levyns {

double pairwise_sum(std::span<const double> x) {
    if (x.size() <= 8) {
        double s = 0.0;
        for (double v : x) s += v;
        return s;
    }
    const std::size_t half = x.size() / 2;
    return pairwise_sum(x.first(half)) + pairwise_sum(x.subspan(half));
}

Estimate estimate(std::span<const double> x) {
    Estimate e;
    e.n = x.size();
    if (x.empty()) return e;
    e.mean = pairwise_sum(x) / static_cast<double>(x.size());
    if (x.size() < 2) return e;
    std::vector<double> sq(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) sq[i] = (x[i] - e.mean) * (x[i] - e.mean);
    const double var = pairwise_sum(sq) / static_cast<double>(x.size() - 1);
    e.se = std::sqrt(var / static_cast<double>(x.size()));
    return e;
}

double pooled_se(const Estimate& a, const Estimate& b) {
    return std::sqrt(a.se * a.se + b.se * b.se);
}

LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw UsageError("fit_line needs at least two (x, y) pairs");
    const double n = static_cast<double>(x.size());
    const double mx = pairwise_sum(x) / n, my = pairwise_sum(y) / n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) throw UsageError("fit_line: x values are all equal");
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    if (x.size() > 2) {
        double rss = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double r = y[i] - f.intercept - f.slope * x[i];
            rss += r * r;
        }
        f.slope_se = std::sqrt(rss / (n - 2.0) / sxx);
        const boost::math::students_t dist(n - 2.0);
        const double q = boost::math::quantile(boost::math::complement(dist, 0.025));
        f.ci_low = f.slope - q * f.slope_se;
        f.ci_high = f.slope + q * f.slope_se;
    } else {
        f.slope_se = std::numeric_limits<double>::infinity();
        f.ci_low = -f.slope_se;
        f.ci_high = f.slope_se;
    }
    return f;
}

LinearFit fit_loglog(std::span<const double> x, std::span<const double> y) {
    std::vector<double> lx(x.size()), ly(y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw UsageError("fit_loglog needs strictly positive data");
        lx[i] = std::log(x[i]);
        ly[i] = std::log(y[i]);
    }
    return fit_line(lx, ly);
}

double ks_p_value(double d, std::size_t n) {
    // Kolmogorov distribution with the Stephens small-sample correction
    const double sn = std::sqrt(static_cast<double>(n));
    const double lambda = (sn + 0.12 + 0.11 / sn) * d;
    if (lambda < 1e-3) return 1.0;
    double p = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        p += (k % 2 ? 2.0 : -2.0) * term;
        if (term < 1e-16) break;
    }
    return std::clamp(p, 0.0, 1.0);
}

} // namespace levyns
