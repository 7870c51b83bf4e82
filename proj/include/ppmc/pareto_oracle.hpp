#pragma once

#include <cmath>
#include <cstdint>
#include <optional>

#include "distributions.hpp"
#include "randomize.hpp"

namespace ppmc::pareto_oracle {

/// m = a/(a-1); closed-form ground truth for the Pareto family
/// p_x = min(1, x^-a).
inline double mean(double a) {
    if (!(a > 1.0)) throw DomainError("pareto oracle: infinite mean for a <= 1");
    return a / (a - 1.0);
}

/// Variances of the classical Monte Carlo, ideal and importance-sampling
/// estimators at equal sample count N. Infinite variances are values, not
/// errors.
struct Variances {
    double mc = kInf;
    double ideal = kInf;
    double is = kInf;
};

inline Variances variances(double a, int N, std::optional<double> b = std::nullopt) {
    if (N < 2) throw DomainError("pareto oracle: invalid N");
    const double m = mean(a);
    const double n = static_cast<double>(N);
    Variances v;
    if (a > 2.0) v.mc = m * (m - 1.0) * (m - 1.0) / ((2.0 - m) * n);
    if (a > 2.0 * n / (2.0 * n - 1.0)) v.ideal = m * (m - 1.0) * (m - 1.0) / (2.0 * n - m);
    if (b) {
        if (!(*b > 0.0)) throw DomainError("pareto oracle: importance parameter must be positive");
        const double B = (a - 1.0) / *b;
        if (a > 1.0 + *b / 2.0) v.is = m * m * (B - 1.0) * (B - 1.0) / (n * (2.0 * B - 1.0));
    }
    return v;
}

/// Common ratio q_{i+1}/q_i (i >= 1) of the closed-form q-sequence.
inline double q_ratio(double a, int N) {
    const double n = static_cast<double>(N);
    return a * (n - 1.0) * (n - 1.0) / (n * (a * n - 2.0));
}

/// The printed constant of the q_0 indicator term is kept for reference;
/// the corrected one is consistent with sum q_i - m^2 = var m_hat and with
/// the quadrature oracle.
enum class Q0Form { corrected, as_printed };

inline double q_closed(double a, int N, std::uint64_t i, Q0Form form = Q0Form::corrected) {
    if (N < 2) throw DomainError("pareto oracle: invalid N");
    const double n = static_cast<double>(N);
    if (!(a * (1.0 - 0.5 / n) > 1.0))
        return kInf; // q-ratio >= 1: var m_hat infinite
    const double r = q_ratio(a, N);
    double q = 2.0 / ((a - 1.0) * (a * n - 2.0)) * std::pow(r, static_cast<double>(i));
    if (i == 0) q += (form == Q0Form::corrected ? (a + 1.0) / (a - 1.0)
                                                : (a + 1.0) / (2.0 * (a - 1.0)));
    return q;
}

inline QSequence q_sequence_closed(double a, int N, std::uint64_t i_max,
                                   Q0Form form = Q0Form::corrected) {
    QSequence q;
    q.N = N;
    q.provenance = QProvenance::closed_form_pareto;
    q.values.reserve(i_max + 1);
    for (std::uint64_t i = 0; i <= i_max; ++i) q.values.push_back(q_closed(a, N, i, form));
    return q;
}

struct I0 {
    std::uint64_t exact = 0;
    double asymptotic = 0.0;
};

/// Smallest index from which the optimal scheme starts truncating, by a scan
/// of the increasing Delta sequence, plus its N -> infinity approximation
/// (N m / 2)(log N + log log N - log(m/2)).
inline I0 i0(double a, int N) {
    const double m = mean(a);
    const double n = static_cast<double>(N);
    if (!(a * (1.0 - 0.5 / n) > 1.0))
        throw DomainError("pareto oracle: q-sequence is not decreasing for these parameters");
    const double r = q_ratio(a, N);
    const double coef = 2.0 / ((a - 1.0) * (a * n - 2.0));
    double cum = q_closed(a, N, 0) - m * m;
    double q_next = coef * r;
    I0 out;
    for (std::uint64_t i = 0;; ++i) {
        if (cum > (n + static_cast<double>(i)) * q_next) {
            out.exact = i;
            break;
        }
        cum += q_next;
        q_next *= r;
        if (i > 100'000'000ull)
            throw DomainError("pareto oracle: i0 scan did not terminate");
    }
    out.asymptotic = n * m / 2.0 * (std::log(n) + std::log(std::log(n)) - std::log(m / 2.0));
    return out;
}

/// var Z under a geometric scheme: m(m-1)^2 / (2 gamma(beta,N) - m),
/// +infinity beyond the pole.
inline double var_Z_geometric(double a, double beta, int N) {
    const double m = mean(a);
    const double g = gamma_factor(beta, N);
    if (!(2.0 * g > m)) return kInf;
    return m * (m - 1.0) * (m - 1.0) / (2.0 * g - m);
}

/// Optimal geometric parameter at fixed N: log(1/B+ + 1) with B+ the
/// positive root of ((2N-m)/(N-1)^2) B^2 - 2mB - (m(N-1)^2 + 2N^2).
inline double beta_opt(double a, int N) {
    if (N < 2) throw DomainError("pareto oracle: invalid N");
    const double m = mean(a);
    const double n = static_cast<double>(N);
    const double A = (2.0 * n - m) / ((n - 1.0) * (n - 1.0));
    const double C = m * (n - 1.0) * (n - 1.0) + 2.0 * n * n;
    const double disc = m * m + A * C;
    if (!(disc > 0.0)) throw std::logic_error("pareto oracle: quadratic has no positive root");
    const double b_plus = (m + std::sqrt(disc)) / A;
    return std::log1p(1.0 / b_plus);
}

/// Minimiser of the beta_app-constrained work-variance,
/// max(m - 1 + sqrt(m^2 - m - 1), 2); a negative discriminant falls back
/// to 2 through the max branch.
inline double n_app(double m) {
    if (!(m > 1.0)) throw DomainError("pareto oracle: mean must exceed 1");
    const double disc = m * m - m - 1.0;
    if (disc < 0.0) return 2.0;
    return std::max(m - 1.0 + std::sqrt(disc), 2.0);
}

/// Large-N order of magnitude of the optimal work-variance product:
/// (m(m-1)/2)^2 log N.
inline double work_variance_asymptote(double a, double N) {
    const double m = mean(a);
    const double c = m * (m - 1.0) / 2.0;
    return c * c * std::log(N);
}

} // namespace ppmc::pareto_oracle
