#pragma once

#include <span>
#include <vector>

namespace levyns {

/// Pairwise (cascade) summation: result depends only on the input order.
double pairwise_sum(std::span<const double> x);

struct Estimate {
    double mean = 0.0;
    double se = 0.0;
    std::size_t n = 0;
};

/// Sample mean and standard error of the mean.
Estimate estimate(std::span<const double> x);

/// sqrt(a.se^2 + b.se^2).
double pooled_se(const Estimate& a, const Estimate& b);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_se = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
};

/// Ordinary least squares y = intercept + slope x with a 95% Student-t
/// confidence interval on the slope.
LinearFit fit_line(std::span<const double> x, std::span<const double> y);

/// Fit of log y against log x.
LinearFit fit_loglog(std::span<const double> x, std::span<const double> y);

/// Two-sided Kolmogorov-Smirnov statistic of a sample against a CDF and
/// the asymptotic p-value.
struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
};
template <class Cdf>
KsResult ks_test(std::vector<double> sample, Cdf&& cdf);
double ks_p_value(double statistic, std::size_t n);

} // namespace levyns

#include <algorithm>
#include <cmath>

template <class Cdf>
levyns::KsResult levyns::ks_test(std::vector<double> sample, Cdf&& cdf) {
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = cdf(sample[i]);
        d = std::max({d, (i + 1) / n - f, f - i / n});
    }
    return {d, ks_p_value(d, sample.size())};
}
