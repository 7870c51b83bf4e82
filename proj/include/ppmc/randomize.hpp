#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "distributions.hpp"
#include "quadrature.hpp"
#include "rng.hpp"

namespace ppmc {

struct UnsupportedCase : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Raised when i0 was not reached within the computed q-sequence; recompute
/// with a larger i_max.
struct ExtendQSequence : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct BudgetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Truncation scheme: the survival sequence beta_i = P(T >= i) of the
/// randomising variable T, plus a sampler for T. Either geometric
/// (beta_i = e^{-beta i}) or an explicit table continued by a geometric tail.
class Scheme {
public:
    static Scheme geometric(double beta, std::string label = "") {
        if (!(beta > 0.0)) throw DomainError("scheme: geometric parameter must be positive");
        Scheme s;
        s.geometric_ = true;
        s.beta_ = beta;
        s.label_ = label.empty() ? "geom:beta=" + std::to_string(beta) : std::move(label);
        return s;
    }

    /// Geometric scheme with the budget-balanced parameter
    /// beta_app = log(1 + 1/(N^2-1)).
    static Scheme geometric_app(int N);

    /// Table of survival values (beta_0 must be 1), continued beyond the
    /// table by a geometric tail with the given ratio.
    static Scheme explicit_table(std::vector<double> betas, double tail_ratio,
                                 std::string label = "explicit") {
        if (betas.empty() || betas.front() != 1.0)
            throw DomainError("scheme: explicit table must start with beta_0 = 1");
        if (!(tail_ratio > 0.0) || !(tail_ratio < 1.0))
            throw DomainError("scheme: tail ratio must lie in (0,1)");
        for (std::size_t i = 0; i < betas.size(); ++i) {
            if (!(betas[i] > 0.0)) throw DomainError("scheme: survival values must be positive");
            if (i > 0 && betas[i] > betas[i - 1] * (1.0 + 1e-12))
                throw DomainError("scheme: survival sequence must be nonincreasing");
        }
        Scheme s;
        s.geometric_ = false;
        s.log_table_.reserve(betas.size());
        for (double b : betas) s.log_table_.push_back(std::log(b));
        s.log_tail_ratio_ = std::log(tail_ratio);
        s.label_ = std::move(label);
        return s;
    }

    bool is_geometric() const { return geometric_; }
    double beta() const { return beta_; }
    const std::string& label() const { return label_; }

    double log_survival(std::uint64_t i) const {
        if (geometric_) return -beta_ * static_cast<double>(i);
        if (i < log_table_.size()) return log_table_[i];
        return log_table_.back() +
               log_tail_ratio_ * static_cast<double>(i - (log_table_.size() - 1));
    }

    double survival(std::uint64_t i) const { return std::exp(log_survival(i)); }

    std::uint64_t sample_T(Rng& rng) const {
        if (geometric_) {
            // P(T >= i) = e^{-beta i}  <=>  T = floor(E/beta), E ~ Exp(1)
            return static_cast<std::uint64_t>(rng.exponential() / beta_);
        }
        // T = max{ i : beta_i > u }, by table walk then geometric tail
        const double logu = std::log(rng.uniform01());
        std::size_t lo = 0, hi = log_table_.size();
        if (logu < log_table_.back()) {
            const double excess = (logu - log_table_.back()) / log_tail_ratio_;
            return (log_table_.size() - 1) + static_cast<std::uint64_t>(std::ceil(excess)) - 1;
        }
        // largest index with log beta_i > log u (beta_0 = 1 always qualifies)
        while (lo + 1 < hi) {
            const std::size_t mid = (lo + hi) / 2;
            if (log_table_[mid] > logu) lo = mid; else hi = mid;
        }
        return lo;
    }

    /// E[T] = sum_{i>=1} beta_i.
    double expected_T() const {
        if (geometric_) return 1.0 / std::expm1(beta_);
        double s = 0.0;
        for (std::size_t i = 1; i < log_table_.size(); ++i) s += std::exp(log_table_[i]);
        const double r = std::exp(log_tail_ratio_);
        s += std::exp(log_table_.back()) * r / (1.0 - r);
        return s;
    }

    /// Successive weights w_i = (1-1/N)^i / beta_i of the randomised
    /// estimator, generated multiplicatively where possible.
    class Weights {
    public:
        Weights(const Scheme& s, int N)
            : scheme_(&s), log_q_(std::log1p(-1.0 / static_cast<double>(N))) {
            if (s.geometric_) geo_factor_ = std::exp(log_q_ + s.beta_);
            tail_factor_ = std::exp(log_q_ - s.log_tail_ratio_);
        }

        double current() const { return w_; }

        void next() {
            ++i_;
            if (scheme_->geometric_) {
                w_ *= geo_factor_;
            } else if (i_ < scheme_->log_table_.size()) {
                w_ = std::exp(static_cast<double>(i_) * log_q_ - scheme_->log_table_[i_]);
            } else {
                w_ *= tail_factor_;
            }
        }

    private:
        const Scheme* scheme_;
        double log_q_;
        double geo_factor_ = 0.0;
        double tail_factor_ = 0.0;
        double w_ = 1.0;
        std::uint64_t i_ = 0;
    };

    Weights weights(int N) const { return Weights(*this, N); }

private:
    bool geometric_ = true;
    double beta_ = 0.0;
    std::vector<double> log_table_;
    double log_tail_ratio_ = 0.0;
    std::string label_;
};

/// beta_app(N) = log(1 + 1/(N^2-1)): the geometric parameter for which
/// gamma(beta, N) = (N+1)/2, i.e. the variance-doubling scheme.
inline double beta_app(int N) {
    if (N < 2) throw DomainError("beta_app: invalid N");
    const double n = static_cast<double>(N);
    return std::log1p(1.0 / (n * n - 1.0));
}

inline Scheme Scheme::geometric_app(int N) {
    return Scheme::geometric(beta_app(N), "geom:app");
}

/// gamma(beta, N) = N / (1 + (e^beta - 1)(N-1)^2): the effective process
/// parameter of a geometrically truncated estimator.
inline double gamma_factor(double beta, int N) {
    if (!(beta > 0.0)) throw DomainError("gamma_factor: invalid parameter, need beta > 0");
    if (N < 2) throw DomainError("gamma_factor: invalid N");
    const double n = static_cast<double>(N);
    return n / (1.0 + std::expm1(beta) * (n - 1.0) * (n - 1.0));
}

enum class QProvenance { closed_form_pareto, numerical_quadrature };

/// Coefficients q_{i,N} of the variance expansion
/// var Z = sum_i q_{i,N} / beta_i - m^2.
struct QSequence {
    std::vector<double> values;
    int N = 0;
    QProvenance provenance = QProvenance::numerical_quadrature;
    double tol = 0.0;

    double tail_ratio() const {
        if (values.size() < 2) throw DomainError("q-sequence too short for a tail ratio");
        return values.back() / values[values.size() - 2];
    }

    /// sum_i q_i - m^2 with the geometric tail beyond the table; equals
    /// var m_hat when finite.
    double sum_minus_m2(double m) const {
        double s = 0.0;
        for (double q : values) s += q;
        const double r = tail_ratio();
        if (r < 1.0) s += values.back() * r / (1.0 - r);
        return s - m * m;
    }
};

namespace detail {

/// Integral of the survival function over (x, infinity), computed in the
/// u = -log p coordinate where the integrand decays exponentially.
template <class D>
double upper_tail_mean(const D& dist, double x, double tol) {
    const double v0 = -dist.log_survival(x);
    return integrate(
        [&](double v) {
            const double lvl = dist.inverse_survival_log(-v);
            const double f = dist.density(lvl);
            if (!(f > 0.0)) return 0.0;
            return std::exp(-2.0 * v) / f;
        },
        v0, std::numeric_limits<double>::infinity(), tol);
}

} // namespace detail

/// q_{i,N} for i = 0..i_max by adaptive quadrature: in the u = -log p_{x'}
/// coordinate the inner kernel is a Gamma(i+1, N) density and the outer
/// integrand is R(x(u)) = int_x^inf p / f(x). The mass below the left
/// endpoint contributes only to q_0.
template <class D>
QSequence q_sequence_numeric(const D& dist, int N, std::uint64_t i_max, double tol = 1e-8) {
    static_assert(D::has_density, "q-sequence quadrature needs a density");
    if (N < 2) throw DomainError("q_sequence_numeric: invalid N");
    if (!(tol > 0.0)) throw DomainError("q_sequence_numeric: tolerance must be positive");

    const double n = static_cast<double>(N);
    const double xl = dist.left_endpoint();
    const double g_xl = detail::upper_tail_mean(dist, xl, tol * 0.01);
    const double m = xl + g_xl;
    const double log_q = std::log1p(-1.0 / n);

    QSequence q;
    q.N = N;
    q.provenance = QProvenance::numerical_quadrature;
    q.tol = tol;
    q.values.reserve(i_max + 1);

    for (std::uint64_t i = 0; i <= i_max; ++i) {
        const double ii = static_cast<double>(i);
        const double lg = std::lgamma(ii + 1.0);
        double v = integrate(
            [&](double u) {
                if (!(u > 0.0)) return 0.0;
                const double lvl = dist.inverse_survival_log(-u);
                const double f = dist.density(lvl);
                if (!(f > 0.0)) return 0.0;
                const double r = detail::upper_tail_mean(dist, lvl, tol * 0.01) / f;
                const double log_kernel = std::log(n) - n * u + ii * std::log(n * u) - lg;
                return r * std::exp(log_kernel);
            },
            0.0, std::numeric_limits<double>::infinity(), tol * 0.1);
        v *= (2.0 / n) * std::exp(2.0 * ii * log_q);
        if (i == 0) v += xl * xl + 2.0 * xl * g_xl;
        if (!std::isfinite(v) || !(v > 0.0))
            throw QuadratureError("q_sequence_numeric: tolerance not met at i=" + std::to_string(i));
        q.values.push_back(v);
    }

    if (q.values.size() >= 2 && q.tail_ratio() < 1.0) {
        if (!(q.sum_minus_m2(m) > 0.0))
            throw QuadratureError("q_sequence_numeric: inconsistent sum, var m_hat should be positive");
    }
    return q;
}

struct OptimalScheme {
    std::uint64_t i0 = 0;
    double S0 = 0.0; // sum_{j<=i0} q_j - m^2
    Scheme scheme = Scheme::geometric(1.0);
};

/// Optimal truncation scheme for a decreasing q-sequence: beta_i = 1 up to
/// i0, then sqrt((N+i0)/S0) sqrt(q_i) with a geometric tail.
inline OptimalScheme optimal_scheme(const QSequence& q, double m, int N) {
    if (q.values.size() < 3) throw DomainError("optimal_scheme: q-sequence too short");
    for (std::size_t i = 2; i < q.values.size(); ++i)
        if (q.values[i] >= q.values[i - 1])
            throw UnsupportedCase("optimal_scheme: q-sequence is not decreasing for i >= 1");

    // Delta_i = sum_{j<=i} q_j - m^2 - (N+i) q_{i+1}; strictly increasing.
    double cum = 0.0;
    double prev_delta = -kInf;
    std::uint64_t i0 = 0;
    bool found = false;
    for (std::size_t i = 0; i + 1 < q.values.size(); ++i) {
        cum += q.values[i];
        const double delta = cum - m * m -
                             (static_cast<double>(N) + static_cast<double>(i)) * q.values[i + 1];
        if (delta <= prev_delta)
            throw UnsupportedCase("optimal_scheme: Delta sequence is not increasing");
        prev_delta = delta;
        if (delta > 0.0) {
            i0 = i;
            found = true;
            break;
        }
    }
    if (!found) throw ExtendQSequence("optimal_scheme: i0 not reached, extend the q-sequence");

    double s0 = -m * m;
    for (std::uint64_t j = 0; j <= i0; ++j) s0 += q.values[j];
    const double c = std::sqrt((static_cast<double>(N) + static_cast<double>(i0)) / s0);

    std::vector<double> betas(q.values.size(), 1.0);
    for (std::size_t i = i0 + 1; i < q.values.size(); ++i) {
        betas[i] = c * std::sqrt(q.values[i]);
        if (betas[i] > 1.0 || betas[i] > betas[i - 1])
            throw UnsupportedCase("optimal_scheme: computed survival sequence is invalid");
    }
    OptimalScheme out;
    out.i0 = i0;
    out.S0 = s0;
    out.scheme = Scheme::explicit_table(std::move(betas), std::sqrt(q.tail_ratio()), "optimal");
    return out;
}

/// var Z = sum_i q_i / beta_i - m^2 for an arbitrary scheme, with geometric
/// tail extrapolation; +infinity when the series diverges.
inline double variance_Z_series(const QSequence& q, const Scheme& s, double m) {
    double sum = 0.0;
    for (std::size_t i = 0; i < q.values.size(); ++i)
        sum += q.values[i] * std::exp(-s.log_survival(i));
    const double rq = q.tail_ratio();
    const std::size_t last = q.values.size() - 1;
    const double tail_term_ratio =
        rq * std::exp(s.log_survival(last) - s.log_survival(last + 1));
    if (tail_term_ratio >= 1.0) return kInf;
    sum += q.values[last] * std::exp(-s.log_survival(last)) * tail_term_ratio /
           (1.0 - tail_term_ratio);
    return sum - m * m;
}

/// Expected simulation cost E[tau] = N - 1 + sum_i beta_i = N + E[T].
inline double expected_cost(const Scheme& s, int N) {
    return static_cast<double>(N) + s.expected_T();
}

/// var m_hat at a (possibly non-integer) process parameter from the N = 2
/// q-sequence: var m_hat(g) = sum_{i>=1} q_{i,2} (2/g)^i. Requires q.N == 2;
/// +infinity when the series diverges.
inline double variance_from_q2(const QSequence& q2, double g) {
    if (q2.N != 2) throw DomainError("variance_from_q2: needs the N=2 q-sequence");
    if (!(g > 0.0)) return kInf;
    const double x = 2.0 / g;
    const double rq = q2.tail_ratio();
    if (rq * x >= 1.0) return kInf;
    double sum = 0.0, pw = 1.0;
    for (std::size_t i = 1; i < q2.values.size(); ++i) {
        pw *= x;
        sum += q2.values[i] * pw;
    }
    sum += q2.values.back() * pw * (rq * x) / (1.0 - rq * x);
    return sum;
}

/// Work-variance product E[tau] * var Z; +infinity signals a diverging
/// series (scheme tail too light for the q tail).
inline double work_variance(const Scheme& s, const QSequence& q, double m, int N) {
    if (q.N != N) throw DomainError("work_variance: scheme and q-sequence use different N");
    const double v = variance_Z_series(q, s, m);
    if (!std::isfinite(v)) return kInf;
    return expected_cost(s, N) * v;
}

/// Stationarity relation Eq. between the optimal geometric parameter and N.
inline double beta_opt_relation(double n) {
    return std::log1p(2.0 / (n * n - 1.0 + (n - 1.0) * std::sqrt(n * n + 6.0 * n + 1.0)));
}

struct GeometricOptimum {
    double beta_opt = 0.0;   // continuous relaxation optimum
    double N_opt = 0.0;
    double value = kInf;     // E[tau] * var Z at the optimum
    int N_opt_int = 0;       // best integer N
    double beta_opt_int = 0.0;
    double value_int = kInf;
    double residual_eq17 = kInf;
};

namespace detail {

// Q_N as a function of gamma in (0, N): E[tau] = N + (N-1)^2 gamma / (N - gamma).
template <class VarFn>
double objective_gamma(const VarFn& var_of_gamma, double n, double g) {
    const double v = var_of_gamma(g);
    if (!std::isfinite(v)) return kInf;
    const double et = n + (n - 1.0) * (n - 1.0) * g / (n - g);
    return et * v;
}

template <class VarFn>
std::pair<double, double> minimize_over_gamma(const VarFn& var_of_gamma, double n) {
    // coarse bracket over gamma in (0, N), then golden section
    const int grid = 200;
    double best_g = -1.0, best_v = kInf;
    for (int k = 1; k < grid; ++k) {
        const double g = n * static_cast<double>(k) / static_cast<double>(grid);
        const double v = objective_gamma(var_of_gamma, n, g);
        if (v < best_v) { best_v = v; best_g = g; }
    }
    if (best_g < 0.0) return {-1.0, kInf};
    double lo = std::max(1e-12, best_g - n / grid);
    double hi = std::min(n * (1.0 - 1e-12), best_g + n / grid);
    const double phi = 0.6180339887498949;
    double a = lo, b = hi;
    double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
    double f1 = objective_gamma(var_of_gamma, n, x1);
    double f2 = objective_gamma(var_of_gamma, n, x2);
    for (int it = 0; it < 200 && (b - a) > 1e-14 * n; ++it) {
        if (f1 < f2) {
            b = x2; x2 = x1; f2 = f1;
            x1 = b - phi * (b - a);
            f1 = objective_gamma(var_of_gamma, n, x1);
        } else {
            a = x1; x1 = x2; f1 = f2;
            x2 = a + phi * (b - a);
            f2 = objective_gamma(var_of_gamma, n, x2);
        }
    }
    const double g = 0.5 * (a + b);
    return {g, objective_gamma(var_of_gamma, n, g)};
}

inline double gamma_to_beta(double g, double n) {
    return std::log1p((n - g) / (g * (n - 1.0) * (n - 1.0)));
}

} // namespace detail

/// Minimise E[tau] * var Z over geometric schemes: integer scan of N with a
/// one-dimensional search per N, then a continuous relaxation of N (the
/// variance formulas extend to real N > 1) to locate the stationary pair for
/// the Eq.-(17) residual diagnostic.
template <class VarFn>
GeometricOptimum optimize_geometric(const VarFn& var_of_gamma, int N_lo, int N_hi) {
    if (N_lo < 2 || N_hi < N_lo) throw DomainError("optimize_geometric: invalid N range");
    GeometricOptimum out;
    bool any = false;
    for (int N = N_lo; N <= N_hi; ++N) {
        auto [g, v] = detail::minimize_over_gamma(var_of_gamma, static_cast<double>(N));
        if (!std::isfinite(v)) continue; // infeasible at this N
        any = true;
        if (v < out.value_int) {
            out.value_int = v;
            out.N_opt_int = N;
            out.beta_opt_int = detail::gamma_to_beta(g, static_cast<double>(N));
        }
        if (N > out.N_opt_int + 4 && v > 4.0 * out.value_int) break; // past the minimum
    }
    if (!any) throw UnsupportedCase("optimize_geometric: no feasible N in range");

    // continuous refinement of N around the integer optimum
    auto outer = [&](double n) { return detail::minimize_over_gamma(var_of_gamma, n).second; };
    double a = std::max(1.0 + 1e-9, static_cast<double>(out.N_opt_int) - 2.0);
    double b = static_cast<double>(out.N_opt_int) + 2.0;
    const double phi = 0.6180339887498949;
    double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
    double f1 = outer(x1), f2 = outer(x2);
    for (int it = 0; it < 120 && (b - a) > 1e-11; ++it) {
        if (f1 < f2) {
            b = x2; x2 = x1; f2 = f1; x1 = b - phi * (b - a); f1 = outer(x1);
        } else {
            a = x1; x1 = x2; f1 = f2; x2 = a + phi * (b - a); f2 = outer(x2);
        }
    }
    out.N_opt = 0.5 * (a + b);
    auto [g_star, v_star] = detail::minimize_over_gamma(var_of_gamma, out.N_opt);
    out.beta_opt = detail::gamma_to_beta(g_star, out.N_opt);
    out.value = v_star;
    const double rhs = beta_opt_relation(out.N_opt);
    out.residual_eq17 = std::abs(out.beta_opt - rhs) / std::max(out.beta_opt, 1e-300);
    return out;
}

} // namespace ppmc
