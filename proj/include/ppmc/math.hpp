#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace ppmc {

/// Compensated (Kahan) accumulator for long weighted sums.
class KahanSum {
public:
    void add(double x) {
        const double y = x - c_;
        const double t = s_ + y;
        c_ = (t - s_) - y;
        s_ = t;
    }
    double value() const { return s_; }

private:
    double s_ = 0.0;
    double c_ = 0.0;
};

struct SampleStats {
    std::size_t n = 0;
    double mean = 0.0;
    double variance = 0.0; // unbiased, n-1 denominator
    double stderr_mean = 0.0;
};

inline SampleStats sample_stats(std::span<const double> xs) {
    SampleStats st;
    st.n = xs.size();
    if (st.n == 0) return st;
    KahanSum s;
    for (double x : xs) s.add(x);
    st.mean = s.value() / static_cast<double>(st.n);
    if (st.n > 1) {
        KahanSum q;
        for (double x : xs) q.add((x - st.mean) * (x - st.mean));
        st.variance = q.value() / static_cast<double>(st.n - 1);
        st.stderr_mean = std::sqrt(st.variance / static_cast<double>(st.n));
    }
    return st;
}

inline double median(std::vector<double> xs) {
    if (xs.empty()) throw std::invalid_argument("median of empty sample");
    const std::size_t mid = xs.size() / 2;
    std::nth_element(xs.begin(), xs.begin() + mid, xs.end());
    double hi = xs[mid];
    if (xs.size() % 2 == 1) return hi;
    std::nth_element(xs.begin(), xs.begin() + mid - 1, xs.end());
    return 0.5 * (hi + xs[mid - 1]);
}

/// Asymptotic survival function of the Kolmogorov statistic.
inline double kolmogorov_q(double lambda) {
    if (lambda <= 0.0) return 1.0;
    double sum = 0.0;
    double sign = 1.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += sign * term;
        if (term < 1e-16) break;
        sign = -sign;
    }
    return std::min(1.0, std::max(0.0, 2.0 * sum));
}

/// One-sample Kolmogorov-Smirnov test p-value against a cdf callable.
/// Uses the Stephens small-sample correction.
template <class Cdf>
double ks_test_pvalue(std::vector<double> sample, Cdf&& cdf) {
    const std::size_t n = sample.size();
    if (n == 0) throw std::invalid_argument("ks test on empty sample");
    std::sort(sample.begin(), sample.end());
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double f = cdf(sample[i]);
        const double lo = static_cast<double>(i) / static_cast<double>(n);
        const double hi = static_cast<double>(i + 1) / static_cast<double>(n);
        d = std::max(d, std::max(std::abs(f - lo), std::abs(hi - f)));
    }
    const double sn = std::sqrt(static_cast<double>(n));
    return kolmogorov_q(d * (sn + 0.12 + 0.11 / sn));
}

/// Least-squares slope of y against x.
inline double fit_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("fit_slope needs two equally sized samples");
    const std::size_t n = x.size();
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) { mx += x[i]; my += y[i]; }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

} // namespace ppmc
