#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include <ppmc/distributions.hpp>
#include <ppmc/pareto_oracle.hpp>
#include <ppmc/randomize.hpp>
#include <ppmc/rng.hpp>

using namespace ppmc;
using Catch::Approx;

TEST_CASE("beta_app values and identity") {
    CHECK(beta_app(2) == Approx(std::log(4.0 / 3.0)).epsilon(1e-14));
    CHECK(beta_app(10) == Approx(std::log(100.0 / 99.0)).epsilon(1e-14));
    CHECK_THROWS_AS(beta_app(1), DomainError);
    for (int n = 2; n <= 100; ++n)
        CHECK(gamma_factor(beta_app(n), n) == Approx(0.5 * (n + 1)).epsilon(1e-12));
}

TEST_CASE("gamma factor") {
    CHECK(gamma_factor(1e-12, 10) == Approx(10.0).epsilon(1e-9)); // no-truncation limit
    CHECK(gamma_factor(std::log(2.0), 2) == Approx(1.0));
    CHECK(gamma_factor(beta_app(5), 5) == Approx(3.0));
    CHECK_THROWS_AS(gamma_factor(0.0, 10), DomainError);
    CHECK_THROWS_AS(gamma_factor(-0.1, 10), DomainError);
}

TEST_CASE("scheme construction and validity") {
    CHECK_THROWS_AS(Scheme::geometric(0.0), DomainError);
    CHECK_THROWS_AS(Scheme::explicit_table({0.5, 0.4}, 0.5), DomainError); // beta_0 != 1
    CHECK_THROWS_AS(Scheme::explicit_table({1.0, 0.4, 0.5}, 0.5), DomainError); // increasing
    CHECK_THROWS_AS(Scheme::explicit_table({1.0, 0.5}, 1.5), DomainError); // bad tail

    const auto s = Scheme::explicit_table({1.0, 1.0, 0.5}, 0.5);
    CHECK(s.survival(0) == 1.0);
    CHECK(s.survival(2) == Approx(0.5));
    CHECK(s.survival(4) == Approx(0.125)); // geometric tail
    CHECK(s.expected_T() == Approx(1.0 + 0.5 + 0.5)); // 1 + 0.5 + 0.25 + ...
}

TEST_CASE("scheme sampling reproduces its survival sequence") {
    auto empirical_check = [](const Scheme& s, std::uint64_t imax) {
        const std::uint64_t draws = 1000000;
        Rng rng(137);
        std::vector<std::uint64_t> counts(imax + 2, 0);
        for (std::uint64_t d = 0; d < draws; ++d) {
            const std::uint64_t t = std::min<std::uint64_t>(s.sample_T(rng), imax + 1);
            ++counts[t];
        }
        // empirical P(T >= i) via the tail of the histogram
        std::uint64_t tail = draws;
        for (std::uint64_t i = 0; i <= imax; ++i) {
            const double beta = s.survival(i);
            const double emp = static_cast<double>(tail) / static_cast<double>(draws);
            const double se = std::sqrt(beta * (1.0 - beta) / static_cast<double>(draws));
            INFO("i=" << i << " beta=" << beta << " emp=" << emp);
            CHECK(std::abs(emp - beta) <= 4.0 * se + 1e-12);
            tail -= counts[i];
        }
    };
    // geometric: up to the 0.999 quantile
    const auto geo = Scheme::geometric_app(10);
    const std::uint64_t q999 =
        static_cast<std::uint64_t>(-std::log(0.001) / beta_app(10));
    empirical_check(geo, std::min<std::uint64_t>(q999, 800));
    // explicit optimal scheme at a=2, N=2 (covers the table and the tail)
    const auto opt = optimal_scheme(pareto_oracle::q_sequence_closed(2.0, 2, 24), 2.0, 2);
    empirical_check(opt.scheme, 22);
}

TEST_CASE("numeric q-sequence matches the pareto closed form") {
    Pareto p(2.0);
    const QSequence q = q_sequence_numeric(p, 2, 6, 1e-8);
    CHECK(q.provenance == QProvenance::numerical_quadrature);
    CHECK(q.values[0] == Approx(4.0).epsilon(1e-6));
    CHECK(q.values[1] == Approx(0.5).epsilon(1e-6));
    CHECK(q.values[2] == Approx(0.25).epsilon(1e-6));
    CHECK(q.sum_minus_m2(2.0) == Approx(1.0).epsilon(1e-6)); // var m_hat via Prop-8 = 1

    // a second family/parameter pair against the closed form
    const QSequence q34 = q_sequence_numeric(Pareto(3.0), 4, 5, 1e-8);
    for (std::uint64_t i = 0; i <= 5; ++i)
        CHECK(q34.values[i] == Approx(pareto_oracle::q_closed(3.0, 4, i)).epsilon(1e-6));
}

TEST_CASE("numeric q-sequence for the exponential is positive and decreasing") {
    const QSequence q = q_sequence_numeric(Exponential(1.0), 5, 10, 1e-8);
    for (double v : q.values) CHECK(v > 0.0);
    for (std::size_t i = 2; i < q.values.size(); ++i) CHECK(q.values[i] < q.values[i - 1]);
    // optimal scheme machinery accepts it
    CHECK_NOTHROW(optimal_scheme(q, 1.0, 5));
}

TEST_CASE("lemma envelope for the numeric q-sequence") {
    // pareto a=2, N=5: closed-form ratio above, density-bound rate below
    const double a = 2.0;
    const int N = 5;
    const QSequence q = q_sequence_numeric(Pareto(a), N, 12, 1e-8);
    const double upper = pareto_oracle::q_ratio(a, N); // 0.8
    const double lower = (static_cast<double>(N) / (N + 2.0)) *
                         (1.0 - 1.0 / N) * (1.0 - 1.0 / N); // 16/35
    for (std::size_t i = 2; i < q.values.size(); ++i) {
        const double r = q.values[i] / q.values[i - 1];
        CHECK(r <= upper * (1.0 + 1e-9));
        CHECK(r >= lower * (1.0 - 1e-9));
    }
}

TEST_CASE("optimal scheme at a=2, N=2") {
    const double m = 2.0;
    const QSequence q = pareto_oracle::q_sequence_closed(2.0, 2, 24);
    const auto os = optimal_scheme(q, m, 2);
    CHECK(os.i0 == 2);
    CHECK(os.S0 == Approx(0.75));
    CHECK(os.scheme.survival(2) == 1.0);
    CHECK(os.scheme.survival(3) == Approx(std::sqrt(4.0 / 0.75) * std::sqrt(0.125)).epsilon(1e-12));
    CHECK(os.scheme.survival(3) == Approx(0.816497).epsilon(1e-5));

    // corollary bounds sqrt(q_i/q_{i0+1}) > beta_i >= sqrt(q_i/q_{i0})
    for (std::uint64_t i = 3; i <= 20; ++i) {
        const double qi = q.values[i];
        const double b = os.scheme.survival(i);
        CHECK(b < std::sqrt(qi / q.values[os.i0 + 1]));
        CHECK(b >= std::sqrt(qi / q.values[os.i0]) * (1.0 - 1e-12));
    }
    // survival valid and nonincreasing across the boundary
    for (std::uint64_t i = 1; i <= 24; ++i) {
        CHECK(os.scheme.survival(i) <= 1.0);
        CHECK(os.scheme.survival(i) <= os.scheme.survival(i - 1) + 1e-15);
    }
}

TEST_CASE("optimal scheme rejects unusable q-sequences") {
    QSequence bumpy;
    bumpy.N = 2;
    bumpy.values = {4.0, 0.5, 0.6, 0.3, 0.1};
    CHECK_THROWS_AS(optimal_scheme(bumpy, 2.0, 2), UnsupportedCase);

    QSequence shallow;
    shallow.N = 2;
    shallow.values = {4.0, 0.5, 0.25}; // i0 = 2 not confirmable with 3 values
    CHECK_THROWS_AS(optimal_scheme(shallow, 2.0, 2), ExtendQSequence);
}

TEST_CASE("work-variance product") {
    const double m = 2.0;
    SECTION("no-truncation limit diverges through E[T]") {
        const QSequence q = pareto_oracle::q_sequence_closed(2.0, 2, 40);
        const double wv = work_variance(Scheme::geometric(1e-12), q, m, 2);
        CHECK(wv > 1e10);
        // the variance factor collapses to var m_hat = 1
        CHECK(wv / expected_cost(Scheme::geometric(1e-12), 2) == Approx(1.0).epsilon(1e-4));
    }
    SECTION("closed-form value at N=100 with beta_app") {
        const QSequence q = pareto_oracle::q_sequence_closed(2.0, 100, 80);
        const double wv = work_variance(Scheme::geometric_app(100), q, m, 100);
        CHECK(wv == Approx(10099.0 * 2.0 / 99.0).epsilon(1e-9));
    }
    SECTION("series route equals the gamma closed form") {
        for (double a : {2.0, 3.0}) {
            const double mm = pareto_oracle::mean(a);
            for (double beta : {0.001, 0.05}) {
                for (int N : {5, 40}) {
                    const QSequence q = pareto_oracle::q_sequence_closed(a, N, 200);
                    const double series = work_variance(Scheme::geometric(beta), q, mm, N);
                    const double closed = (N + 1.0 / std::expm1(beta)) *
                                          pareto_oracle::var_Z_geometric(a, beta, N);
                    if (std::isinf(closed)) {
                        CHECK(std::isinf(series));
                    } else {
                        CHECK(series == Approx(closed).epsilon(1e-9));
                    }
                }
            }
        }
    }
    SECTION("a light scheme tail signals infinite variance") {
        const QSequence q = pareto_oracle::q_sequence_closed(2.0, 2, 40);
        // q ratio is 0.5; beta = log(2.5) decays faster than the q tail
        CHECK(std::isinf(work_variance(Scheme::geometric(std::log(2.5)), q, m, 2)));
    }
    SECTION("mismatched N is rejected") {
        const QSequence q = pareto_oracle::q_sequence_closed(2.0, 2, 10);
        CHECK_THROWS_AS(work_variance(Scheme::geometric(0.1), q, m, 3), DomainError);
    }
}

TEST_CASE("variance_from_q2 reproduces var m_hat at real parameters") {
    const QSequence q2 = pareto_oracle::q_sequence_closed(2.0, 2, 60);
    for (double g : {2.0, 3.5, 10.0, 50.5}) {
        const double expect = 2.0 * 1.0 / (2.0 * g - 2.0); // m(m-1)^2/(2g - m)
        CHECK(variance_from_q2(q2, g) == Approx(expect).epsilon(1e-9));
    }
    CHECK(std::isinf(variance_from_q2(q2, 0.9))); // below the pole at g = m/2
}

namespace {
double pareto_var_of_gamma(double m, double g) {
    return 2.0 * g > m ? m * (m - 1.0) * (m - 1.0) / (2.0 * g - m) : kInf;
}
} // namespace

TEST_CASE("geometric optimization satisfies the stationarity relation") {
    const double m = 2.0;
    auto var_fn = [&](double g) { return pareto_var_of_gamma(m, g); };
    const auto go = optimize_geometric(var_fn, 2, 50);
    CHECK(go.residual_eq17 < 1e-6);
    CHECK(go.N_opt_int == 2);
    CHECK(go.value <= go.value_int + 1e-12);
    // the continuous optimum also satisfies the per-N quadratic root
    CHECK(go.beta_opt == Approx(beta_opt_relation(go.N_opt)).epsilon(1e-6));
}

TEST_CASE("optimal N decreases with the tail parameter") {
    double prev = kInf;
    for (double a : {1.2, 1.5, 2.0, 2.5, 3.0}) {
        const double m = pareto_oracle::mean(a);
        auto var_fn = [&](double g) { return pareto_var_of_gamma(m, g); };
        const auto go = optimize_geometric(var_fn, 2, 400);
        CHECK(go.N_opt < prev);
        prev = go.N_opt;
    }
}

TEST_CASE("approximate pair is within 5% of the optimized geometric product") {
    for (double a : {1.5, 2.0, 2.5, 3.0}) {
        const double m = pareto_oracle::mean(a);
        auto var_fn = [&](double g) { return pareto_var_of_gamma(m, g); };
        const auto go = optimize_geometric(var_fn, 2, 400);
        const double n = pareto_oracle::n_app(m);
        // beta_app(n) gives gamma = (n+1)/2 and E[tau] = n + n^2 - 1
        const double wv_app = (n * n + n - 1.0) * pareto_var_of_gamma(m, 0.5 * (n + 1.0));
        CHECK(wv_app >= go.value * (1.0 - 1e-9));
        CHECK(wv_app <= go.value * 1.05);
    }
}

TEST_CASE("infeasible N values are skipped") {
    // variance infinite unless gamma > 6: N <= 6 infeasible
    auto var_fn = [](double g) { return g > 6.0 ? 1.0 / (g - 6.0) : kInf; };
    const auto go = optimize_geometric(var_fn, 2, 30);
    CHECK(go.N_opt_int > 6);

    auto never = [](double) { return kInf; };
    CHECK_THROWS_AS(optimize_geometric(never, 2, 6), UnsupportedCase);
}
