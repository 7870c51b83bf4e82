#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "blackbox.hpp"
#include "distributions.hpp"
#include "rng.hpp"

namespace ppmc {

/// State of the reversible random-walk kernel used for conditional sampling
/// above a threshold.
struct KernelState {
    std::vector<double> u;
    double sigma = 0.3;
    std::uint64_t accepted = 0;
    std::uint64_t proposed = 0;
    int burn_in = 20;

    double acceptance_rate() const {
        return proposed == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(proposed);
    }
    void reset_window() { accepted = proposed = 0; }
};

/// Multiplicative step-size update targeting acceptance 0.5, clamped to
/// [1e-3, 10].
inline double adapt_sigma(double sigma, double observed_rate) {
    if (!(sigma > 0.0)) throw DomainError("adapt_sigma: sigma must be positive");
    if (observed_rate < 0.0 || observed_rate > 1.0)
        throw DomainError("adapt_sigma: rate must lie in [0,1]");
    return std::clamp(sigma * std::exp(0.5 * (observed_rate - 0.5)), 1e-3, 10.0);
}

/// One transition of the autoregressive Gaussian kernel:
/// U* = (u + sigma W)/sqrt(1+sigma^2), accepted iff g(U*) > x. The proposal
/// preserves the standard normal law, so the chain is reversible with
/// respect to N(0, I) restricted to {g > x}.
template <class G>
void kernel_step_gaussian(KernelState& st, double threshold, const G& g, Rng& rng) {
    const std::size_t d = st.u.size();
    const double denom = std::sqrt(1.0 + st.sigma * st.sigma);
    std::vector<double> prop(d);
    for (std::size_t i = 0; i < d; i += 2) {
        double z1, z2;
        rng.normal_pair(z1, z2);
        prop[i] = (st.u[i] + st.sigma * z1) / denom;
        if (i + 1 < d) prop[i + 1] = (st.u[i + 1] + st.sigma * z2) / denom;
    }
    ++st.proposed;
    if (g(std::span<const double>(prop)) > threshold) {
        st.u = std::move(prop);
        ++st.accepted;
    }
}

/// One transition for the uniform-cube prior: symmetric Gaussian perturbation
/// rejected outright when any component leaves [-1/2, 1/2], else accepted iff
/// g(U*) > x. Support rejection keeps the uniform law exactly.
template <class G>
void kernel_step_cube(KernelState& st, double threshold, const G& g, Rng& rng) {
    const std::size_t d = st.u.size();
    std::vector<double> prop(d);
    bool inside = true;
    for (std::size_t i = 0; i < d; i += 2) {
        double z1, z2;
        rng.normal_pair(z1, z2);
        prop[i] = st.u[i] + st.sigma * z1;
        if (prop[i] < -0.5 || prop[i] > 0.5) inside = false;
        if (i + 1 < d) {
            prop[i + 1] = st.u[i + 1] + st.sigma * z2;
            if (prop[i + 1] < -0.5 || prop[i + 1] > 0.5) inside = false;
        }
    }
    ++st.proposed;
    if (inside && g(std::span<const double>(prop)) > threshold) {
        st.u = std::move(prop);
        ++st.accepted;
    }
}

template <class G>
void kernel_step(KernelState& st, double threshold, InputLaw law, const G& g, Rng& rng) {
    if (law == InputLaw::standard_gaussian)
        kernel_step_gaussian(st, threshold, g, rng);
    else
        kernel_step_cube(st, threshold, g, rng);
}

/// Conditional draw above a threshold from a population of points already
/// above it: seed the chain at a uniformly chosen member, run b transitions,
/// keep the last state. sigma adapts after the batch.
template <class G>
std::vector<double> conditional_sample_mcmc(std::span<const std::vector<double>> population,
                                            double threshold, int b, KernelState& st,
                                            InputLaw law, const G& g, Rng& rng) {
    if (population.empty()) throw DomainError("conditional_sample_mcmc: empty seed population");
    st.u = population[static_cast<std::size_t>(rng.below(population.size()))];
    st.reset_window();
    for (int k = 0; k < b; ++k) kernel_step(st, threshold, law, g, rng);
    if (b > 0) st.sigma = adapt_sigma(st.sigma, st.acceptance_rate());
    return st.u;
}

/// Conditional sampler over X = g(U) for the last-particle loop; the N walk
/// frontiers double as the seed population for the Markov kernel. Every
/// kernel transition counts as one call to the generator of X, so the cost
/// of a replica is exactly N + b T.
template <class G>
class McmcSampler {
public:
    McmcSampler(BlackBoxTarget<G> target, int n, int burn_in = 20, double sigma0 = 0.3)
        : target_(std::move(target)), n_(n) {
        if (n < 2) throw DomainError("invalid N: need at least 2 walks");
        if (burn_in < 0) throw DomainError("burn-in must be nonnegative");
        state_.burn_in = burn_in;
        state_.sigma = sigma0;
        state_.u.resize(static_cast<std::size_t>(target_.input_dimension));
        // N is also the seed-population size; below the input dimension the
        // chain starts poorly (see the run configuration warning).
        population_warning_ = n < target_.input_dimension;
    }

    int size() const { return n_; }
    std::uint64_t cost() const { return cost_; }
    bool population_warning() const { return population_warning_; }
    double sigma() const { return state_.sigma; }
    double long_run_acceptance() const {
        return total_proposed_ == 0
                   ? 0.0
                   : static_cast<double>(total_accepted_) / static_cast<double>(total_proposed_);
    }
    double level(int j) const { return values_[static_cast<std::size_t>(j)]; }
    const std::vector<double>& point(int j) const { return points_[static_cast<std::size_t>(j)]; }

    void init(Rng& rng) {
        const auto d = static_cast<std::size_t>(target_.input_dimension);
        points_.assign(static_cast<std::size_t>(n_), std::vector<double>(d));
        values_.assign(static_cast<std::size_t>(n_), 0.0);
        for (auto& p : points_) {
            if (target_.input_law == InputLaw::uniform_cube) {
                for (double& c : p) c = rng.uniform01() - 0.5;
            } else {
                for (std::size_t i = 0; i < d; i += 2) {
                    double z1, z2;
                    rng.normal_pair(z1, z2);
                    p[i] = z1;
                    if (i + 1 < d) p[i + 1] = z2;
                }
            }
        }
        for (std::size_t j = 0; j < points_.size(); ++j)
            values_[j] = target_.integrand(std::span<const double>(points_[j]));
        cost_ += static_cast<std::uint64_t>(n_);
    }

    bool extend(int j, Rng& rng) {
        const double threshold = values_[static_cast<std::size_t>(j)];
        // seed from one of the other walks; all of them lie strictly above
        std::size_t k = static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(n_ - 1)));
        if (k >= static_cast<std::size_t>(j)) ++k;
        cur_ = points_[k];
        double cur_val = values_[k];
        const std::size_t d = cur_.size();
        prop_.resize(d);
        const bool cube = target_.input_law == InputLaw::uniform_cube;
        const double denom = std::sqrt(1.0 + state_.sigma * state_.sigma);
        std::uint64_t accepted = 0;
        for (int s = 0; s < state_.burn_in; ++s) {
            bool inside = true;
            for (std::size_t i = 0; i < d; i += 2) {
                double z1, z2;
                rng.normal_pair(z1, z2);
                if (cube) {
                    prop_[i] = cur_[i] + state_.sigma * z1;
                    if (i + 1 < d) prop_[i + 1] = cur_[i + 1] + state_.sigma * z2;
                } else {
                    prop_[i] = (cur_[i] + state_.sigma * z1) / denom;
                    if (i + 1 < d) prop_[i + 1] = (cur_[i + 1] + state_.sigma * z2) / denom;
                }
            }
            if (cube)
                for (double c : prop_)
                    if (c < -0.5 || c > 0.5) { inside = false; break; }
            if (inside) {
                const double v = target_.integrand(std::span<const double>(prop_));
                if (v > threshold) {
                    cur_.swap(prop_);
                    cur_val = v;
                    ++accepted;
                }
            }
        }
        // a support-rejected proposal still counts as one generator use
        cost_ += static_cast<std::uint64_t>(state_.burn_in);
        total_proposed_ += static_cast<std::uint64_t>(state_.burn_in);
        total_accepted_ += accepted;
        if (state_.burn_in > 0) {
            const double rate = static_cast<double>(accepted) / static_cast<double>(state_.burn_in);
            state_.sigma = adapt_sigma(state_.sigma, rate);
        }
        assert(cur_val > threshold);
        points_[static_cast<std::size_t>(j)] = cur_;
        values_[static_cast<std::size_t>(j)] = cur_val;
        return true;
    }

private:
    BlackBoxTarget<G> target_;
    int n_;
    KernelState state_;
    std::vector<std::vector<double>> points_;
    std::vector<double> values_;
    std::vector<double> cur_, prop_;
    std::uint64_t cost_ = 0;
    std::uint64_t total_accepted_ = 0;
    std::uint64_t total_proposed_ = 0;
    bool population_warning_ = false;
};

} // namespace ppmc
