#pragma once

// Small descriptive-statistics and goodness-of-fit helpers.

#include <functional>
#include <span>
#include <vector>

namespace fuzzytomo {

/// Linear-interpolation quantile (type 7) of an unsorted sample.
[[nodiscard]] double quantile(std::span<const double> sample, double q);

[[nodiscard]] double mean(std::span<const double> sample);
[[nodiscard]] double variance(std::span<const double> sample);

struct Histogram {
    double lo = 0.0;
    double hi = 1.0;
    std::vector<long> counts;
    long underflow = 0;
    long overflow = 0;
    long invalid = 0;  ///< non-finite entries

    [[nodiscard]] long total() const;
};

[[nodiscard]] Histogram make_histogram(std::span<const double> sample, double lo, double hi, int bins);

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

/// One-sample Kolmogorov-Smirnov test against a continuous CDF, p-value from
/// the asymptotic Kolmogorov distribution with Stephens' small-n correction.
[[nodiscard]] KsResult ks_test(std::span<const double> sample, const std::function<double(double)>& cdf);

/// Q_KS(x) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 x^2).
[[nodiscard]] double kolmogorov_survival(double x);

/// Upper tail P[X >= x] for X ~ chi^2(nu).
[[nodiscard]] double chi_squared_survival(double x, int nu);
[[nodiscard]] double chi_squared_cdf(double x, int nu);

}  // namespace fuzzytomo
