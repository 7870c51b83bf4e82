#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "distributions.hpp"
#include "rng.hpp"

namespace ppmc {

struct InsufficientDepth : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class WalkStatus { ok, support_exhausted };

/// One increasing random walk: each level is drawn conditionally above its
/// predecessor. Levels only; times are always a derived view.
struct Walk {
    std::string source;
    std::vector<double> levels;
    std::uint64_t seed = 0;
    std::uint64_t draws = 0;
};

/// Appends `steps` conditionally increasing levels to the walk. An empty walk
/// starts from the unconditional law (X0 = 0 for a nonnegative variable).
/// Returns support_exhausted when the survival underflows (bounded support)
/// or a level is no longer representable; the walk keeps what it has.
template <class D>
WalkStatus extend_walk(Walk& walk, const D& dist, std::uint64_t steps, Rng& rng) {
    double logp = walk.levels.empty() ? 0.0 : dist.log_survival(walk.levels.back());
    for (std::uint64_t s = 0; s < steps; ++s) {
        if (logp == -kInf || dist.exhausted_at(logp)) return WalkStatus::support_exhausted;
        logp += std::log(rng.uniform01());
        ++walk.draws;
        const double x = dist.inverse_survival_log(logp);
        if (!std::isfinite(x) || dist.exhausted_at(logp)) return WalkStatus::support_exhausted;
        if (D::bounded_support && !walk.levels.empty() && x <= walk.levels.back())
            return WalkStatus::support_exhausted;
        walk.levels.push_back(x);
    }
    return WalkStatus::ok;
}

template <class D>
Walk make_walk(const D& dist, std::uint64_t steps, Rng& rng) {
    Walk w;
    w.source = dist.spec();
    extend_walk(w, dist, steps, rng);
    return w;
}

/// The states of N walks merged in increasing order: a realisation of the
/// marked Poisson process with parameter N.
struct MergedProcess {
    int n_walks = 0;
    std::vector<double> levels;
    std::vector<std::uint32_t> per_walk_index;

    std::size_t size() const { return levels.size(); }
};

inline MergedProcess merge_walks(std::span<const Walk> walks) {
    if (walks.size() < 2) throw DomainError("merge_walks: need at least 2 walks");
    MergedProcess m;
    m.n_walks = static_cast<int>(walks.size());
    std::size_t total = 0;
    for (const Walk& w : walks) total += w.levels.size();
    std::vector<std::pair<double, std::uint32_t>> events;
    events.reserve(total);
    for (std::uint32_t j = 0; j < walks.size(); ++j)
        for (double x : walks[j].levels) events.emplace_back(x, j);
    std::sort(events.begin(), events.end()); // ties broken by walk index
    m.levels.reserve(total);
    m.per_walk_index.reserve(total);
    for (auto& [x, j] : events) {
        m.levels.push_back(x);
        m.per_walk_index.push_back(j);
    }
    return m;
}

struct CountResult {
    std::uint64_t count = 0;
    /// x lies at or above the deepest simulated level: the count is only a
    /// lower bound for M_x.
    bool saturated = false;
};

inline CountResult count_before(const MergedProcess& m, double x) {
    if (x < 0.0) throw DomainError("count_before: level must be nonnegative");
    const auto it = std::upper_bound(m.levels.begin(), m.levels.end(), x);
    return {static_cast<std::uint64_t>(it - m.levels.begin()), it == m.levels.end()};
}

/// M_x as a function: nondecreasing, integer, constant on [X_i, X_{i+1}).
struct CountingView {
    const MergedProcess* merged;
    std::uint64_t operator()(double x) const { return count_before(*merged, x).count; }
};

/// T_n = -log p_{X_n} for each merged level: the arrival times of a Poisson
/// process with parameter N.
template <class D>
std::vector<double> poisson_times(const MergedProcess& m, const D& dist) {
    std::vector<double> t;
    t.reserve(m.levels.size());
    for (double x : m.levels) {
        const double logp = dist.log_survival(x);
        if (logp == -kInf) throw DomainError("poisson_times: survival is zero at a merged level");
        t.push_back(-logp);
    }
    return t;
}

/// Conditional sampler backed by a closed-form inverse survival. Walk
/// frontiers are tracked in the log-survival domain so that arbitrarily deep
/// tails never underflow.
template <class D>
class InverseSampler {
public:
    InverseSampler(D dist, int n) : dist_(std::move(dist)), n_(n) {
        if (n < 2) throw DomainError("invalid N: need at least 2 walks");
    }

    int size() const { return n_; }
    const D& dist() const { return dist_; }
    std::uint64_t cost() const { return cost_; }

    void init(Rng& rng) {
        frontiers_.clear();
        frontiers_.reserve(n_);
        for (int j = 0; j < n_; ++j) {
            const double logp = std::log(rng.uniform01());
            frontiers_.push_back({dist_.inverse_survival_log(logp), logp});
        }
        cost_ += static_cast<std::uint64_t>(n_);
    }

    double level(int j) const { return frontiers_[j].level; }
    double log_survival_at(int j) const { return frontiers_[j].logp; }

    bool extend(int j, Rng& rng) {
        Frontier& f = frontiers_[j];
        const double logp = f.logp + std::log(rng.uniform01());
        ++cost_;
        const double x = dist_.inverse_survival_log(logp);
        if (!std::isfinite(x) || dist_.exhausted_at(logp)) return false;
        if (D::bounded_support && x <= f.level) return false;
        f = {x, logp};
        return true;
    }

private:
    struct Frontier {
        double level;
        double logp;
    };
    D dist_;
    int n_;
    std::vector<Frontier> frontiers_;
    std::uint64_t cost_ = 0;
};

/// Lazy merged-process generator: always extends the walk holding the current
/// minimum frontier, so events are produced one at a time in increasing
/// order. Consuming an event costs exactly one conditional draw.
template <class Sampler>
class LastParticleStream {
public:
    LastParticleStream(Sampler sampler, Rng& rng) : sampler_(std::move(sampler)) {
        sampler_.init(rng);
        heap_.reserve(static_cast<std::size_t>(sampler_.size()));
        for (int j = 0; j < sampler_.size(); ++j)
            heap_.emplace_back(sampler_.level(j), j);
        std::make_heap(heap_.begin(), heap_.end(), cmp_);
    }

    bool alive() const { return !heap_.empty(); }
    double peek() const { return heap_.front().first; }
    int peek_walk() const { return heap_.front().second; }

    /// Consume the current minimum event and extend its walk. Dead walks
    /// (bounded support) stop contributing; the stream ends when none remain.
    void advance(Rng& rng) {
        std::pop_heap(heap_.begin(), heap_.end(), cmp_);
        const int j = heap_.back().second;
        heap_.pop_back();
        ++consumed_;
        if (sampler_.extend(j, rng)) {
            heap_.emplace_back(sampler_.level(j), j);
            std::push_heap(heap_.begin(), heap_.end(), cmp_);
        }
    }

    std::uint64_t consumed() const { return consumed_; }
    std::uint64_t cost() const { return sampler_.cost(); }
    const Sampler& sampler() const { return sampler_; }
    Sampler& sampler() { return sampler_; }

private:
    // min-heap on (level, walk index); ties broken by walk index
    static constexpr std::greater<std::pair<double, int>> cmp_{};

    Sampler sampler_;
    std::vector<std::pair<double, int>> heap_;
    std::uint64_t consumed_ = 0;
};

/// Materialise the first `events` merged events (with provenance) from a
/// sampler; stops early on support exhaustion.
template <class Sampler>
MergedProcess generate_merged(Sampler sampler, std::uint64_t events, Rng& rng) {
    MergedProcess m;
    m.n_walks = sampler.size();
    LastParticleStream<Sampler> stream(std::move(sampler), rng);
    m.levels.reserve(events);
    m.per_walk_index.reserve(events);
    for (std::uint64_t i = 0; i < events && stream.alive(); ++i) {
        m.levels.push_back(stream.peek());
        m.per_walk_index.push_back(static_cast<std::uint32_t>(stream.peek_walk()));
        stream.advance(rng);
    }
    return m;
}

/// Debug dump: replica, walk_index, event_index, level, log_survival.
/// Pass a null dist pointer to omit the analytic log-survival column.
template <class D>
void dump_merged_csv(std::ostream& os, std::uint64_t replica, const MergedProcess& m,
                     const D* dist, bool header = true) {
    if (header) os << "replica,walk_index,event_index,level,log_survival\n";
    os.precision(17);
    for (std::size_t i = 0; i < m.levels.size(); ++i) {
        os << replica << ',' << m.per_walk_index[i] << ',' << i << ',' << m.levels[i];
        if (dist) os << ',' << dist->log_survival(m.levels[i]);
        os << '\n';
    }
}

} // namespace ppmc
