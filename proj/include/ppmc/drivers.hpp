#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "estimators.hpp"
#include "report.hpp"
#include "runner.hpp"

namespace ppmc {

struct RunOptions {
    std::uint64_t replicas = 1;
    std::uint64_t seed = 0;
    int threads = 0; // <= 0: hardware concurrency
};

struct RunMeta {
    std::string distribution;
    int N = 0;
    int burn_in = 1;
};

/// Averages independent replicas of the randomised estimator Z.
template <class SamplerFactory>
EstimateReport run_Z(const SamplerFactory& make_sampler, const Scheme& scheme,
                     const RunOptions& opt, const RunMeta& meta) {
    auto outcomes = run_replicas(opt.replicas, opt.threads, opt.seed,
                                 [&](std::uint64_t, Rng& rng) {
                                     auto z = randomized_Z(make_sampler(), scheme, rng);
                                     return ReplicaOutcome{z.value, z.cost, z.T, z.exhausted};
                                 });
    return make_report("Z", meta.distribution, scheme.label(), meta.N, meta.burn_in, opt.seed,
                       outcomes);
}

/// Fixed-budget averaged estimator alpha(c). T-values are pre-drawn
/// sequentially, each charged N + b T against the budget (the draw that
/// would overshoot is discarded); the surviving replicas then run in
/// parallel.
template <class SamplerFactory>
EstimateReport alpha_budget(const SamplerFactory& make_sampler, const Scheme& scheme,
                            std::uint64_t budget, int charge_burn_in, const RunOptions& opt,
                            const RunMeta& meta) {
    if (meta.N < 2) throw DomainError("alpha_budget: invalid N");
    Rng predraw = Rng::substream(opt.seed, 0);
    std::vector<std::uint64_t> ts;
    std::uint64_t charged = 0;
    for (;;) {
        const std::uint64_t t = scheme.sample_T(predraw);
        const std::uint64_t c =
            static_cast<std::uint64_t>(meta.N) + static_cast<std::uint64_t>(charge_burn_in) * t;
        if (charged + c > budget) break;
        charged += c;
        ts.push_back(t);
        if (charged == budget) break;
    }
    if (ts.empty()) throw BudgetError("alpha_budget: budget too small for a single replica");

    auto outcomes = run_replicas(ts.size(), opt.threads, opt.seed,
                                 [&](std::uint64_t g, Rng& rng) {
                                     auto z = randomized_Z_with_T(make_sampler(), scheme, ts[g], rng);
                                     return ReplicaOutcome{z.value, z.cost, z.T, z.exhausted};
                                 });
    EstimateReport r = make_report("alpha", meta.distribution, scheme.label(), meta.N,
                                   meta.burn_in, opt.seed, outcomes);
    r.params["budget"] = budget;
    r.params["charge_burn_in"] = charge_burn_in;
    r.params["G"] = ts.size();
    r.params["charged_cost"] = charged;
    return r;
}

/// Replicated exceedance-probability estimate at a level; the report carries
/// the MVUE values, with the suboptimal variant echoed in params.
template <class SamplerFactory>
EstimateReport run_probability(const SamplerFactory& make_sampler, double level,
                               const RunOptions& opt, const RunMeta& meta) {
    std::vector<double> suboptimal(opt.replicas);
    auto outcomes = run_replicas(opt.replicas, opt.threads, opt.seed,
                                 [&](std::uint64_t r, Rng& rng) {
                                     auto c = count_exceedances(make_sampler(), level, rng);
                                     suboptimal[r] = prob_suboptimal(c.M, meta.N);
                                     return ReplicaOutcome{prob_mvue(c.M, meta.N), c.cost, c.M,
                                                           c.saturated};
                                 });
    EstimateReport r = make_report("p-mvue", meta.distribution, "", meta.N, meta.burn_in,
                                   opt.seed, outcomes);
    r.params["level"] = level;
    r.params["suboptimal_mean"] = sample_stats(suboptimal).mean;
    return r;
}

enum class NsWeighting { ideal, original };

/// Both weightings of the same fixed-iteration runs: the ideal (1-1/N)^i
/// weights and the original nested-sampling weights share every event.
struct NsBoth {
    std::vector<double> ideal;
    std::vector<double> ns;
    std::vector<std::uint64_t> costs;
    std::vector<std::uint64_t> iterations;
};

template <class SamplerFactory>
NsBoth run_ns_both(const SamplerFactory& make_sampler, std::uint64_t fixed_iterations,
                   const RunOptions& opt) {
    NsBoth out;
    out.ideal.resize(opt.replicas);
    out.ns.resize(opt.replicas);
    out.costs.resize(opt.replicas);
    out.iterations.resize(opt.replicas);
    run_replicas(opt.replicas, opt.threads, opt.seed, [&](std::uint64_t r, Rng& rng) {
        auto res = run_ns_adaptive(make_sampler(), StoppingRule::fixed(fixed_iterations), rng);
        out.ideal[r] = res.ideal;
        out.ns[r] = res.ns;
        out.costs[r] = res.cost;
        out.iterations[r] = res.iterations;
        return ReplicaOutcome{res.ideal, res.cost, res.iterations, res.exhausted};
    });
    return out;
}

/// Replicated nested-sampling run under a stopping rule; `weighting` selects
/// which of the two weightings becomes the reported value.
template <class SamplerFactory>
EstimateReport run_ns(const SamplerFactory& make_sampler, const StoppingRule& rule,
                      NsWeighting weighting, const RunOptions& opt, const RunMeta& meta,
                      std::uint64_t hard_cap = 10'000'000ull) {
    std::vector<double> other(opt.replicas);
    std::vector<std::uint64_t> iters(opt.replicas);
    std::vector<char> capped(opt.replicas, 0);
    auto outcomes = run_replicas(opt.replicas, opt.threads, opt.seed,
                                 [&](std::uint64_t r, Rng& rng) {
                                     auto res = run_ns_adaptive(make_sampler(), rule, rng, hard_cap);
                                     iters[r] = res.iterations;
                                     capped[r] = res.cap_reached ? 1 : 0;
                                     const double primary =
                                         weighting == NsWeighting::ideal ? res.ideal : res.ns;
                                     other[r] = weighting == NsWeighting::ideal ? res.ns : res.ideal;
                                     return ReplicaOutcome{primary, res.cost, res.iterations,
                                                           res.exhausted};
                                 });
    const char* name = weighting == NsWeighting::ideal ? "ideal-deep" : "ns";
    EstimateReport r =
        make_report(name, meta.distribution, "", meta.N, meta.burn_in, opt.seed, outcomes);
    r.params["mean_iterations"] = sample_stats(std::vector<double>(iters.begin(), iters.end())).mean;
    r.params["other_weighting_mean"] = sample_stats(other).mean;
    bool any_cap = false;
    for (char c : capped) any_cap |= (c != 0);
    r.params["cap_reached"] = any_cap;
    return r;
}

} // namespace ppmc
