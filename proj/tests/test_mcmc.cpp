#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include <ppmc/blackbox.hpp>
#include <ppmc/estimators.hpp>
#include <ppmc/math.hpp>
#include <ppmc/mcmc.hpp>

using namespace ppmc;
using Catch::Approx;

namespace {
struct Identity1D {
    double operator()(std::span<const double> u) const { return u[0]; }
};
constexpr double kNoThreshold = -1e300;
} // namespace

TEST_CASE("sigma adaptation rule") {
    CHECK(adapt_sigma(0.3, 0.5) == Approx(0.3));
    CHECK(adapt_sigma(0.3, 1.0) == Approx(0.3 * std::exp(0.25)));
    CHECK(adapt_sigma(0.3, 0.0) == Approx(0.3 * std::exp(-0.25)));
    CHECK(adapt_sigma(1e-3, 0.0) == Approx(1e-3)); // clamp
    CHECK(adapt_sigma(10.0, 1.0) == Approx(10.0)); // clamp
    CHECK_THROWS_AS(adapt_sigma(0.0, 0.5), DomainError);
    CHECK_THROWS_AS(adapt_sigma(0.3, 1.5), DomainError);
}

TEST_CASE("vanishing step size degenerates to no movement") {
    KernelState st;
    st.u = {0.7};
    st.sigma = 1e-9;
    Rng rng(211);
    kernel_step_gaussian(st, kNoThreshold, Identity1D{}, rng);
    CHECK(st.accepted == 1);
    CHECK(st.u[0] == Approx(0.7).margin(1e-7));
}

TEST_CASE("gaussian kernel preserves the standard normal") {
    KernelState st;
    st.u = {0.0};
    st.sigma = 0.7;
    Rng rng(223);
    Identity1D g;
    std::vector<double> thinned;
    for (int i = 0; i < 100000; ++i) {
        kernel_step_gaussian(st, kNoThreshold, g, rng);
        if (i % 10 == 9) thinned.push_back(st.u[0]);
    }
    auto phi = [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); };
    CHECK(ks_test_pvalue(thinned, phi) > 0.01);
}

TEST_CASE("lag-1 pairs are exchangeable") {
    // reversibility witness: E[f(u_t) g(u_{t+1})] = E[g(u_t) f(u_{t+1})]
    KernelState st;
    st.u = {0.0};
    st.sigma = 0.7;
    Rng rng(227);
    Identity1D g;
    double asym = 0.0, asym2 = 0.0;
    const int n = 100000;
    double prev = st.u[0];
    std::vector<double> terms;
    terms.reserve(n);
    for (int i = 0; i < n; ++i) {
        kernel_step_gaussian(st, kNoThreshold, g, rng);
        const double cur = st.u[0];
        terms.push_back(prev * cur * cur - prev * prev * cur);
        prev = cur;
    }
    const auto st2 = sample_stats(terms);
    asym = st2.mean;
    asym2 = st2.stderr_mean;
    CHECK(std::abs(asym) < 4.0 * asym2 + 1e-12);
}

TEST_CASE("cube kernel respects the support") {
    SpikePlateau g;
    KernelState st;
    st.u.assign(20, 0.49);
    st.sigma = 5.0; // nearly every proposal leaves the cube
    Rng rng(229);
    for (int i = 0; i < 1000; ++i) {
        kernel_step_cube(st, kNoThreshold, g, rng);
        for (double c : st.u) {
            CHECK(c >= -0.5);
            CHECK(c <= 0.5);
        }
    }
    CHECK(st.accepted < st.proposed / 2);
}

TEST_CASE("cube kernel preserves the uniform law") {
    SpikePlateau g;
    g.dim = 3;
    KernelState st;
    st.u.assign(3, 0.0);
    st.sigma = 0.25;
    Rng rng(233);
    std::vector<double> coord;
    for (int i = 0; i < 100000; ++i) {
        kernel_step_cube(st, kNoThreshold, g, rng);
        if (i % 10 == 9) coord.push_back(st.u[0]);
    }
    CHECK(ks_test_pvalue(coord, [](double x) { return x + 0.5; }) > 0.01);
}

TEST_CASE("conditional_sample_mcmc") {
    SpikePlateau g;
    Rng rng(239);
    // build a population above a plateau-scale threshold
    const double threshold = 1.0;
    std::vector<std::vector<double>> population;
    while (population.size() < 50) {
        std::vector<double> u(20);
        for (double& c : u) c = rng.uniform01() - 0.5;
        if (g(std::span<const double>(u)) > threshold) population.push_back(u);
    }
    KernelState st;
    st.u.assign(20, 0.0);

    SECTION("returns a point above the threshold") {
        for (int rep = 0; rep < 200; ++rep) {
            const auto u =
                conditional_sample_mcmc(population, threshold, 10, st, InputLaw::uniform_cube, g, rng);
            CHECK(g(std::span<const double>(u)) > threshold);
        }
    }
    SECTION("zero burn-in returns a population member") {
        const auto u =
            conditional_sample_mcmc(population, threshold, 0, st, InputLaw::uniform_cube, g, rng);
        bool found = false;
        for (const auto& p : population) found = found || (p == u);
        CHECK(found);
    }
    SECTION("empty population is an error") {
        std::vector<std::vector<double>> empty;
        CHECK_THROWS_AS(
            conditional_sample_mcmc(empty, threshold, 10, st, InputLaw::uniform_cube, g, rng),
            DomainError);
    }
}

TEST_CASE("acceptance decreases with the step size on the spike") {
    SpikePlateau g;
    Rng rng(241);
    // fixed threshold on the plateau; fixed-sigma chains
    const double threshold = 1.0;
    std::vector<double> seed(20, 0.0);
    auto acceptance_at = [&](double sigma) {
        KernelState st;
        st.u = seed;
        st.sigma = sigma;
        for (int i = 0; i < 10000; ++i) kernel_step_cube(st, threshold, g, rng);
        return st.acceptance_rate();
    };
    const double a1 = acceptance_at(0.1);
    const double a2 = acceptance_at(0.3);
    const double a3 = acceptance_at(1.0);
    CHECK(a1 >= a2 - 0.03);
    CHECK(a2 >= a3 - 0.03);
}

TEST_CASE("walk levels over a black box are strictly increasing") {
    auto target = make_spike_target();
    McmcSampler<SpikePlateau> sampler(target, 20, 10);
    Rng rng(251);
    LastParticleStream stream(std::move(sampler), rng);
    double prev = -kInf;
    for (int i = 0; i < 400; ++i) {
        const double x = stream.peek();
        CHECK(x > prev);
        prev = x;
        stream.advance(rng);
    }
}

TEST_CASE("long-run acceptance stays near one half on the spike") {
    auto target = make_spike_target();
    McmcSampler<SpikePlateau> sampler(target, 100, 20);
    Rng rng(257);
    LastParticleStream stream(std::move(sampler), rng);
    for (int i = 0; i < 4000; ++i) stream.advance(rng);
    const double rate = stream.sampler().long_run_acceptance();
    CHECK(rate > 0.4);
    CHECK(rate < 0.6);
}

TEST_CASE("cost accounting is exactly N + b T") {
    auto target = make_spike_target();
    const int N = 20, b = 7;
    Rng rng(263);
    LastParticleStream stream(McmcSampler<SpikePlateau>(target, N, b), rng);
    CHECK(stream.cost() == static_cast<std::uint64_t>(N));
    for (int k = 1; k <= 50; ++k) {
        stream.advance(rng);
        CHECK(stream.cost() == static_cast<std::uint64_t>(N + b * k));
    }
    Rng rng2(269);
    auto z = randomized_Z(McmcSampler<SpikePlateau>(target, N, b), Scheme::geometric_app(N), rng2);
    CHECK(z.cost == static_cast<std::uint64_t>(N) + static_cast<std::uint64_t>(b) * z.T);
}

TEST_CASE("population below the dimension raises the warning flag") {
    auto target = make_spike_target();
    CHECK(McmcSampler<SpikePlateau>(target, 10, 5).population_warning());
    CHECK_FALSE(McmcSampler<SpikePlateau>(target, 20, 5).population_warning());
}
