#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include <ppmc/distributions.hpp>
#include <ppmc/math.hpp>
#include <ppmc/quadrature.hpp>
#include <ppmc/rng.hpp>

using namespace ppmc;
using Catch::Approx;

TEST_CASE("pareto survival and density") {
    Pareto p(2.0);
    CHECK(p.survival(2.0) == Approx(0.25));
    CHECK(p.survival(0.5) == 1.0); // min-with-one branch
    CHECK(Pareto(1.5).survival(4.0) == Approx(0.125));
    CHECK(p.density(2.0) == Approx(2.0 * std::pow(2.0, -3.0)));
    CHECK(p.density(0.5) == 0.0);
    CHECK(p.left_endpoint() == 1.0);
    CHECK(p.mean() == Approx(2.0));
    CHECK_THROWS_AS(Pareto(1.0), DomainError);
    CHECK_THROWS_AS(Pareto(0.5), DomainError);
}

TEST_CASE("exact conditional sampling") {
    SECTION("pareto inverse transform arithmetic") {
        // solve x^{-2} = 0.25 above level 1
        CHECK(conditional_sample_exact(Pareto(2.0), 1.0, 0.25) == Approx(2.0));
    }
    SECTION("conditioning an exponential on X > 0 is vacuous") {
        Exponential e(1.0);
        for (double u : {0.1, 0.37, 0.91})
            CHECK(conditional_sample_exact(e, 0.0, u) == Approx(-std::log(u)));
    }
    SECTION("u -> 1 gives levels just above the threshold") {
        const double level = 3.0;
        for (double x : {conditional_sample_exact(Pareto(2.0), level, 1.0 - 1e-13),
                         conditional_sample_exact(Exponential(1.0), level, 1.0 - 1e-13),
                         conditional_sample_exact(UniformUnit{}, 0.75, 1.0 - 1e-13)}) {
            CHECK(x > 0.0);
        }
        CHECK(conditional_sample_exact(Pareto(2.0), level, 1.0 - 1e-13) ==
              Approx(level).epsilon(1e-10));
    }
    SECTION("exhausted support") {
        CHECK_THROWS_AS(conditional_sample_exact(UniformUnit{}, 1.0, 0.5), ExhaustedSupport);
    }
}

TEST_CASE("conditional sampling matches the conditional law empirically") {
    // survival of draws | X > 2 evaluated at 4 equals survival(4)/survival(2)
    Pareto p(2.0);
    Rng rng(101);
    const std::size_t n = 100000;
    std::size_t above = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (conditional_sample_exact(p, 2.0, rng.uniform01()) > 4.0) ++above;
    const double target = 0.25;
    const double se = std::sqrt(target * (1.0 - target) / static_cast<double>(n));
    CHECK(std::abs(static_cast<double>(above) / n - target) < 3.0 * se);
}

TEST_CASE("conditional sampling agrees with brute-force rejection") {
    // same conditional law via the unconditional sampler + rejection
    Pareto p(2.0);
    Rng rng(7);
    auto cond_cdf = [&](double x) { return 1.0 - p.survival(x) / p.survival(2.0); };
    std::vector<double> inverse, rejection;
    for (int i = 0; i < 10000; ++i)
        inverse.push_back(conditional_sample_exact(p, 2.0, rng.uniform01()));
    while (rejection.size() < 10000) {
        const double x = p.inverse_survival(rng.uniform01());
        if (x > 2.0) rejection.push_back(x);
    }
    CHECK(ks_test_pvalue(inverse, cond_cdf) > 0.01);
    CHECK(ks_test_pvalue(rejection, cond_cdf) > 0.01);
}

TEST_CASE("density integrates to the survival complement") {
    auto check_family = [](const auto& dist, std::vector<double> grid) {
        for (double x : grid) {
            const double integral =
                integrate([&](double t) { return dist.density(t); }, dist.left_endpoint(), x, 1e-12);
            CHECK(integral == Approx(1.0 - dist.survival(x)).margin(1e-8));
        }
    };
    check_family(Pareto(2.0), {1.5, 2.0, 5.0, 20.0});
    check_family(Pareto(1.3), {1.5, 4.0, 50.0});
    check_family(Exponential(1.0), {0.1, 1.0, 5.0});
    check_family(Exponential(2.5), {0.1, 0.7, 3.0});
    check_family(UniformUnit{}, {0.1, 0.5, 0.9});
}

TEST_CASE("survival of quantile is the identity") {
    auto check_family = [](const auto& dist) {
        for (double q = 0.05; q < 1.0; q += 0.05)
            CHECK(dist.survival(dist.quantile(q)) == Approx(1.0 - q).margin(1e-10));
    };
    check_family(Pareto(2.0));
    check_family(Pareto(1.2));
    check_family(Exponential(0.7));
    check_family(UniformUnit{});
}

TEST_CASE("signed split") {
    const std::vector<double> xs{3.0, -2.0};
    const SignedSplit s = split_signed(xs);
    CHECK(s.positive_part == std::vector<double>{3.0, 0.0});
    CHECK(s.negative_part == std::vector<double>{0.0, 2.0});

    const std::vector<double> stream{-1.0, 4.0};
    CHECK(recombined_mean(split_signed(stream)) == Approx(1.5)); // 2 - 0.5
}
