#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "math.hpp"
#include "randomize.hpp"
#include "walk.hpp"

namespace ppmc {

/// Minimum-variance unbiased estimator of p_x from the pooled count M over N
/// walks: (1 - 1/N)^M.
inline double prob_mvue(std::uint64_t M, int N) {
    if (N < 2) throw DomainError("prob_mvue: invalid N");
    return std::exp(static_cast<double>(M) * std::log1p(-1.0 / static_cast<double>(N)));
}

/// Suboptimal estimator e^{-M/N}; positive bias of order 1/N with
/// E = p^{N(1 - e^{-1/N})}.
inline double prob_suboptimal(std::uint64_t M, int N) {
    if (N < 2) throw DomainError("prob_suboptimal: invalid N");
    return std::exp(-static_cast<double>(M) / static_cast<double>(N));
}

struct ProbMoments {
    double mean = 0.0;
    double variance = 0.0;
};

/// Exact moments of the MVUE: mean p, variance p^2 (p^{-1/N} - 1).
inline ProbMoments prob_oracle_moments(double p, int N) {
    if (N < 2) throw DomainError("prob_oracle_moments: invalid N");
    if (!(p > 0.0)) throw DomainError("prob_oracle_moments: degenerate probability");
    if (p > 1.0) throw DomainError("prob_oracle_moments: probability above 1");
    return {p, p * p * std::expm1(-std::log(p) / static_cast<double>(N))};
}

/// Truncated ideal estimator m_n = sum_{i=0}^{n-1} (X_{i+1}-X_i)(1-1/N)^i
/// with X_0 = 0.
inline double truncated_sum(const MergedProcess& m, std::uint64_t n) {
    if (m.n_walks < 2) throw DomainError("truncated_sum: invalid N");
    if (n > m.size()) throw InsufficientDepth("truncated_sum: fewer events than requested");
    const double f = 1.0 - 1.0 / static_cast<double>(m.n_walks);
    KahanSum acc;
    double w = 1.0, prev = 0.0;
    for (std::uint64_t i = 0; i < n; ++i) {
        acc.add((m.levels[i] - prev) * w);
        prev = m.levels[i];
        w *= f;
    }
    return acc.value();
}

/// Original nested sampling weighting on the same events:
/// sum_{i=1}^n X_i (e^{(1-i)/N} - e^{-i/N}); positive bias of order 1/N.
inline double ns_original(const MergedProcess& m, std::uint64_t n) {
    if (m.n_walks < 2) throw DomainError("ns_original: invalid N");
    if (n > m.size()) throw InsufficientDepth("ns_original: fewer events than requested");
    const double step = std::exp(-1.0 / static_cast<double>(m.n_walks));
    const double lead = std::expm1(1.0 / static_cast<double>(m.n_walks)); // e^{1/N} - 1
    KahanSum acc;
    double v = step; // e^{-i/N}
    for (std::uint64_t i = 1; i <= n; ++i) {
        acc.add(m.levels[i - 1] * v * lead);
        v *= step;
    }
    return acc.value();
}

struct ZResult {
    double value = 0.0;
    std::uint64_t T = 0;
    std::uint64_t cost = 0;
    bool exhausted = false; // bounded support reached; value is the partial sum
};

/// Randomly truncated unbiased estimator on a fixed draw of T:
/// Z = sum_{i=0}^{T} (X_{i+1} - X_i)(1 - 1/N)^i / beta_i, consuming T
/// conditional extensions plus the N initial states (tau = N + T draws).
template <class Sampler>
ZResult randomized_Z_with_T(Sampler sampler, const Scheme& scheme, std::uint64_t T, Rng& rng) {
    const int N = sampler.size();
    LastParticleStream<Sampler> stream(std::move(sampler), rng);
    auto w = scheme.weights(N);
    KahanSum acc;
    double prev = 0.0;
    ZResult out;
    out.T = T;
    for (std::uint64_t i = 0; i < T; ++i) {
        if (!stream.alive()) {
            out.exhausted = true;
            break;
        }
        const double x = stream.peek();
        acc.add((x - prev) * w.current());
        prev = x;
        w.next();
        stream.advance(rng);
    }
    if (!out.exhausted && stream.alive()) {
        acc.add((stream.peek() - prev) * w.current());
    } else {
        out.exhausted = true;
    }
    out.value = acc.value();
    out.cost = stream.cost();
    return out;
}

/// Draws T from the scheme first (so the iteration budget is known before
/// the walks start), then runs the argmin-extension loop.
template <class Sampler>
ZResult randomized_Z(Sampler sampler, const Scheme& scheme, Rng& rng) {
    const std::uint64_t T = scheme.sample_T(rng);
    return randomized_Z_with_T(std::move(sampler), scheme, T, rng);
}

/// Pooled exceedance count for a probability estimate: number of merged
/// events at or below the level.
struct ExceedanceCount {
    std::uint64_t M = 0;
    bool saturated = false;
    std::uint64_t cost = 0;
};

template <class Sampler>
ExceedanceCount count_exceedances(Sampler sampler, double level, Rng& rng) {
    LastParticleStream<Sampler> stream(std::move(sampler), rng);
    ExceedanceCount out;
    while (stream.alive() && stream.peek() <= level) {
        stream.advance(rng);
        ++out.M;
    }
    out.saturated = !stream.alive();
    out.cost = stream.cost();
    return out;
}

struct StoppingRule {
    enum class Kind { fixed_iterations, increment_fraction, information_factor };
    Kind kind = Kind::fixed_iterations;
    std::uint64_t iterations = 1; // J >= 1
    double epsilon = 0.0;         // > 0
    double factor = 0.0;          // k > 0

    static StoppingRule fixed(std::uint64_t J) {
        if (J < 1) throw DomainError("stopping rule: J must be at least 1");
        return {Kind::fixed_iterations, J, 0.0, 0.0};
    }
    static StoppingRule increment(double eps) {
        if (!(eps > 0.0)) throw DomainError("stopping rule: epsilon must be positive");
        return {Kind::increment_fraction, 0, eps, 0.0};
    }
    static StoppingRule information(double k) {
        if (!(k > 0.0)) throw DomainError("stopping rule: factor must be positive");
        return {Kind::information_factor, 0, 0.0, k};
    }
};

struct NsAdaptiveResult {
    double ideal = 0.0;    // (1 - 1/N)^i weights
    double ns = 0.0;       // original e^{-i/N} weights, same events
    std::uint64_t iterations = 0;
    double information = 0.0;
    std::uint64_t cost = 0;
    bool cap_reached = false;
    bool exhausted = false;
};

/// Runs the merged-process loop until the stopping rule fires, accumulating
/// both weightings. The information H is the running
/// sum_i (delta_i / m~) log(X_i / m~) over the nested-sampling increments.
template <class Sampler>
NsAdaptiveResult run_ns_adaptive(Sampler sampler, const StoppingRule& rule, Rng& rng,
                                 std::uint64_t hard_cap = 10'000'000ull) {
    const int N = sampler.size();
    const double n = static_cast<double>(N);
    LastParticleStream<Sampler> stream(std::move(sampler), rng);
    const double f = 1.0 - 1.0 / n;
    const double step = std::exp(-1.0 / n);
    const double lead = std::expm1(1.0 / n);
    KahanSum ideal, ns, ns_logx;
    double w = 1.0, v = step, prev = 0.0;
    NsAdaptiveResult out;
    for (std::uint64_t i = 1;; ++i) {
        if (!stream.alive()) {
            out.exhausted = true;
            break;
        }
        const double x = stream.peek();
        stream.advance(rng);
        ideal.add((x - prev) * w);
        const double delta = x * v * lead;
        ns.add(delta);
        ns_logx.add(delta * std::log(x));
        prev = x;
        w *= f;
        v *= step;
        out.iterations = i;
        const double estimate = ns.value();
        out.information = ns_logx.value() / estimate - std::log(estimate);
        bool stop = false;
        switch (rule.kind) {
            case StoppingRule::Kind::fixed_iterations:
                stop = i >= rule.iterations;
                break;
            case StoppingRule::Kind::increment_fraction:
                stop = delta < rule.epsilon * estimate;
                break;
            case StoppingRule::Kind::information_factor:
                stop = out.information > 0.0 &&
                       static_cast<double>(i) > rule.factor * n * out.information;
                break;
        }
        if (stop) break;
        if (i >= hard_cap) {
            out.cap_reached = true;
            break;
        }
    }
    out.ideal = ideal.value();
    out.ns = ns.value();
    out.cost = stream.cost();
    return out;
}

} // namespace ppmc
