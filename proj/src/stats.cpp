#include "fuzzytomo/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/chi_squared.hpp>

#include "fuzzytomo/errors.hpp"

namespace fuzzytomo {

double quantile(std::span<const double> sample, double q) {
    if (sample.empty()) throw InvalidArgument("quantile: empty sample");
    if (!(q >= 0.0 && q <= 1.0)) throw InvalidArgument("quantile: q outside [0, 1]");
    std::vector<double> v(sample.begin(), sample.end());
    std::sort(v.begin(), v.end());
    const double h = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

double mean(std::span<const double> sample) {
    if (sample.empty()) throw InvalidArgument("mean: empty sample");
    return std::accumulate(sample.begin(), sample.end(), 0.0) / static_cast<double>(sample.size());
}

double variance(std::span<const double> sample) {
    if (sample.size() < 2) throw InvalidArgument("variance: need at least two values");
    const double m = mean(sample);
    double acc = 0.0;
    for (double x : sample) acc += (x - m) * (x - m);
    return acc / static_cast<double>(sample.size() - 1);
}

long Histogram::total() const {
    return std::accumulate(counts.begin(), counts.end(), 0L) + underflow + overflow + invalid;
}

Histogram make_histogram(std::span<const double> sample, double lo, double hi, int bins) {
    if (bins < 1 || !(hi > lo)) throw InvalidArgument("make_histogram: need bins >= 1 and hi > lo");
    Histogram h;
    h.lo = lo;
    h.hi = hi;
    h.counts.assign(static_cast<std::size_t>(bins), 0);
    const double width = (hi - lo) / bins;
    for (double x : sample) {
        if (!std::isfinite(x)) {
            ++h.invalid;
        } else if (x < lo) {
            ++h.underflow;
        } else if (x >= hi) {
            ++h.overflow;
        } else {
            auto b = static_cast<std::size_t>((x - lo) / width);
            ++h.counts[std::min(b, h.counts.size() - 1)];
        }
    }
    return h;
}

double kolmogorov_survival(double x) {
    if (x <= 0.0) return 1.0;
    if (x < 0.2) {
        // Series converges slowly here; the survival function is 1 to double precision.
        return 1.0;
    }
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * x * x);
        sum += (k % 2 == 1 ? term : -term);
        if (term < 1e-17) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_test(std::span<const double> sample, const std::function<double(double)>& cdf) {
    if (sample.empty()) throw InvalidArgument("ks_test: empty sample");
    std::vector<double> v(sample.begin(), sample.end());
    std::sort(v.begin(), v.end());
    const auto n = static_cast<double>(v.size());
    double d = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double f = cdf(v[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    const double sn = std::sqrt(n);
    return {d, kolmogorov_survival((sn + 0.12 + 0.11 / sn) * d)};
}

double chi_squared_survival(double x, int nu) {
    if (nu < 1) throw InvalidArgument("chi_squared_survival: nu must be >= 1");
    if (x <= 0.0) return 1.0;
    return boost::math::cdf(boost::math::complement(boost::math::chi_squared(nu), x));
}

double chi_squared_cdf(double x, int nu) {
    if (nu < 1) throw InvalidArgument("chi_squared_cdf: nu must be >= 1");
    if (x <= 0.0) return 0.0;
    return boost::math::cdf(boost::math::chi_squared(nu), x);
}

}  // namespace fuzzytomo
