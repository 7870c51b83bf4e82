#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace ppmc {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Survival below this value is treated as an empty conditioning event.
inline constexpr double kLogSurvivalFloor = -690.7755278982137; // log(1e-300)

struct DomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct ExhaustedSupport : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Pareto with survival p_x = min(1, x^-a), a > 1 so the mean is finite.
class Pareto {
public:
    explicit Pareto(double a) : a_(a) {
        if (!(a > 1.0)) throw DomainError("pareto: tail parameter must exceed 1 (infinite mean)");
    }

    double tail_index() const { return a_; }
    double mean() const { return a_ / (a_ - 1.0); }
    double left_endpoint() const { return 1.0; }
    static constexpr bool has_density = true;
    static constexpr bool bounded_support = false;

    double survival(double x) const { return x <= 1.0 ? 1.0 : std::pow(x, -a_); }
    double log_survival(double x) const { return x <= 1.0 ? 0.0 : -a_ * std::log(x); }
    double density(double x) const { return x < 1.0 ? 0.0 : a_ * std::pow(x, -a_ - 1.0); }
    double quantile(double q) const { return std::pow(1.0 - q, -1.0 / a_); }
    double inverse_survival(double p) const { return p >= 1.0 ? 1.0 : std::pow(p, -1.0 / a_); }
    double inverse_survival_log(double logp) const { return std::exp(-logp / a_); }
    bool exhausted_at(double) const { return false; }

    std::string spec() const { return "pareto:a=" + std::to_string(a_); }

private:
    double a_;
};

class Exponential {
public:
    explicit Exponential(double rate) : rate_(rate) {
        if (!(rate > 0.0)) throw DomainError("exponential: rate must be positive");
    }

    double rate() const { return rate_; }
    double mean() const { return 1.0 / rate_; }
    double left_endpoint() const { return 0.0; }
    static constexpr bool has_density = true;
    static constexpr bool bounded_support = false;

    double survival(double x) const { return x <= 0.0 ? 1.0 : std::exp(-rate_ * x); }
    double log_survival(double x) const { return x <= 0.0 ? 0.0 : -rate_ * x; }
    double density(double x) const { return x < 0.0 ? 0.0 : rate_ * std::exp(-rate_ * x); }
    double quantile(double q) const { return -std::log1p(-q) / rate_; }
    double inverse_survival(double p) const { return -std::log(p) / rate_; }
    double inverse_survival_log(double logp) const { return -logp / rate_; }
    bool exhausted_at(double) const { return false; }

    std::string spec() const { return "exp:rate=" + std::to_string(rate_); }

private:
    double rate_;
};

class UniformUnit {
public:
    double mean() const { return 0.5; }
    double left_endpoint() const { return 0.0; }
    static constexpr bool has_density = true;
    static constexpr bool bounded_support = true;

    double survival(double x) const { return x <= 0.0 ? 1.0 : (x >= 1.0 ? 0.0 : 1.0 - x); }
    double log_survival(double x) const {
        if (x <= 0.0) return 0.0;
        if (x >= 1.0) return -kInf;
        return std::log1p(-x);
    }
    double density(double x) const { return (x < 0.0 || x > 1.0) ? 0.0 : 1.0; }
    double quantile(double q) const { return q; }
    double inverse_survival(double p) const { return 1.0 - p; }
    double inverse_survival_log(double logp) const { return -std::expm1(logp); }
    bool exhausted_at(double logp) const { return logp < kLogSurvivalFloor; }

    std::string spec() const { return "uniform"; }
};

using AnalyticDist = std::variant<Pareto, Exponential, UniformUnit>;

/// Exact draw from the law of X conditioned on X > level, using the
/// survival-scaled inverse transform x* = S^{-1}(S(level) * u).
template <class D>
double conditional_sample_exact(const D& dist, double level, double u) {
    const double logp = dist.log_survival(level);
    if (logp == -kInf || dist.exhausted_at(logp))
        throw ExhaustedSupport("conditional sampling beyond the support");
    return dist.inverse_survival_log(logp + std::log(u));
}

/// Positive/negative decomposition of a signed sample stream,
/// x -> (max(x,0), max(-x,0)).
struct SignedSplit {
    std::vector<double> positive_part;
    std::vector<double> negative_part;
};

inline SignedSplit split_signed(std::span<const double> xs) {
    SignedSplit s;
    s.positive_part.reserve(xs.size());
    s.negative_part.reserve(xs.size());
    for (double x : xs) {
        s.positive_part.push_back(x > 0.0 ? x : 0.0);
        s.negative_part.push_back(x < 0.0 ? -x : 0.0);
    }
    return s;
}

/// E[X+] - E[X-] recombination.
inline double recombined_mean(const SignedSplit& s) {
    if (s.positive_part.empty()) throw DomainError("recombined_mean: empty split");
    double p = 0.0, n = 0.0;
    for (double x : s.positive_part) p += x;
    for (double x : s.negative_part) n += x;
    return (p - n) / static_cast<double>(s.positive_part.size());
}

} // namespace ppmc
