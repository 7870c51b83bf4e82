// ppmc - point-process Monte Carlo estimation of tail probabilities and means.
//
// Subcommands: estimate, experiment, oracle, optimize, selftest.

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <ppmc/blackbox.hpp>
#include <ppmc/distributions.hpp>
#include <ppmc/drivers.hpp>
#include <ppmc/estimators.hpp>
#include <ppmc/mcmc.hpp>
#include <ppmc/pareto_oracle.hpp>
#include <ppmc/randomize.hpp>
#include <ppmc/report.hpp>
#include <ppmc/walk.hpp>

namespace {

using nlohmann::ordered_json;
using namespace ppmc;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// distribution / scheme specification strings

enum class DistKind { pareto, exponential, uniform, spike, heavytail };

struct DistSpec {
    DistKind kind = DistKind::pareto;
    double param = 2.0;
    std::string text;

    bool analytic() const {
        return kind == DistKind::pareto || kind == DistKind::exponential ||
               kind == DistKind::uniform;
    }
    AnalyticDist make_analytic() const {
        switch (kind) {
            case DistKind::pareto: return Pareto(param);
            case DistKind::exponential: return Exponential(param);
            case DistKind::uniform: return UniformUnit{};
            default: throw UsageError("not an analytic distribution: " + text);
        }
    }
};

DistSpec parse_distribution(const std::string& text) {
    DistSpec d;
    d.text = text;
    if (text == "uniform") { d.kind = DistKind::uniform; return d; }
    if (text == "spike") { d.kind = DistKind::spike; return d; }
    if (text == "heavytail") { d.kind = DistKind::heavytail; return d; }
    if (text.rfind("pareto:a=", 0) == 0) {
        d.kind = DistKind::pareto;
        d.param = std::stod(text.substr(9));
        return d;
    }
    if (text.rfind("exp:rate=", 0) == 0) {
        d.kind = DistKind::exponential;
        d.param = std::stod(text.substr(9));
        return d;
    }
    throw UsageError("unknown distribution spec: " + text +
                     " (expected pareto:a=<v>, exp:rate=<v>, uniform, spike, heavytail)");
}

struct RunConfig {
    DistSpec dist;
    std::string estimator = "Z";
    int N = 100;
    std::string scheme_spec = "geom:app";
    std::uint64_t budget = 0;
    std::uint64_t replicas = 1000;
    int burn_in = 20;
    double sigma0 = 0.3;
    std::string kernel = "auto";
    double eps = 1e-8;
    std::uint64_t iters = 0; // 0: default 100 N
    double k_info = 2.0;
    std::uint64_t seed = 1;
    int threads = 0;
    int charge_burn_in = 0; // 0: same as burn_in (analytic targets use 1)
    std::string dump_walks;
    std::uint64_t dump_depth = 1000;
};

template <class D>
QSequence q_for_scheme(const D& dist, int N) {
    if constexpr (std::is_same_v<D, Pareto>) {
        // closed form; extend until i0 is bracketed with margin
        const double a = dist.tail_index();
        const auto i0 = pareto_oracle::i0(a, N);
        return pareto_oracle::q_sequence_closed(a, N, i0.exact + 16);
    } else {
        for (std::uint64_t imax = 64;; imax *= 2) {
            QSequence q = q_sequence_numeric(dist, N, imax, 1e-8);
            try {
                (void)optimal_scheme(q, dist.mean(), N);
                return q;
            } catch (const ExtendQSequence&) {
                if (imax > 4096) throw;
            }
        }
    }
}

template <class D>
Scheme resolve_scheme(const std::string& spec, int N, const D* dist) {
    if (spec == "geom:app") return Scheme::geometric_app(N);
    if (spec.rfind("geom:beta=", 0) == 0) return Scheme::geometric(std::stod(spec.substr(10)));
    if (spec == "optimal") {
        if (!dist) throw UsageError("scheme 'optimal' needs an analytic or quadrature-capable distribution");
        return optimal_scheme(q_for_scheme(*dist, N), dist->mean(), N).scheme;
    }
    if (spec.rfind("explicit-file=", 0) == 0) {
        const std::string path = spec.substr(14);
        std::ifstream in(path);
        if (!in) throw UsageError("cannot open scheme file: " + path);
        std::vector<double> betas;
        double v;
        while (in >> v) betas.push_back(v);
        if (betas.size() < 2) throw UsageError("scheme file needs at least two survival values");
        const double ratio = betas.back() / betas[betas.size() - 2];
        return Scheme::explicit_table(std::move(betas), ratio, "explicit-file=" + path);
    }
    throw UsageError("unknown scheme spec: " + spec);
}

// ---------------------------------------------------------------------------
// estimate

template <class D>
EstimateReport estimate_analytic(const D& dist, const RunConfig& cfg) {
    const auto factory = [&] { return InverseSampler<D>(dist, cfg.N); };
    RunOptions opt{cfg.replicas, cfg.seed, cfg.threads};
    RunMeta meta{cfg.dist.text, cfg.N, 1};
    const std::uint64_t J = cfg.iters ? cfg.iters : 100ull * static_cast<std::uint64_t>(cfg.N);

    if (!cfg.dump_walks.empty()) {
        Rng rng = Rng::substream(cfg.seed, 0);
        MergedProcess m = generate_merged(factory(), cfg.dump_depth, rng);
        std::ofstream os(cfg.dump_walks);
        dump_merged_csv(os, 0, m, &dist);
    }

    if (cfg.estimator == "Z")
        return run_Z(factory, resolve_scheme(cfg.scheme_spec, cfg.N, &dist), opt, meta);
    if (cfg.estimator == "alpha") {
        if (cfg.budget == 0) throw UsageError("estimator 'alpha' needs --budget");
        const int charge = cfg.charge_burn_in ? cfg.charge_burn_in : 1;
        return alpha_budget(factory, resolve_scheme(cfg.scheme_spec, cfg.N, &dist), cfg.budget,
                            charge, opt, meta);
    }
    if (cfg.estimator == "ns-fixed")
        return run_ns(factory, StoppingRule::fixed(J), NsWeighting::original, opt, meta);
    if (cfg.estimator == "ideal-deep")
        return run_ns(factory, StoppingRule::fixed(J), NsWeighting::ideal, opt, meta);
    if (cfg.estimator == "ns-increment")
        return run_ns(factory, StoppingRule::increment(cfg.eps), NsWeighting::original, opt, meta);
    if (cfg.estimator == "ns-information")
        return run_ns(factory, StoppingRule::information(cfg.k_info), NsWeighting::original, opt,
                      meta);
    throw UsageError("unknown estimator: " + cfg.estimator);
}

template <class G>
EstimateReport estimate_blackbox(const BlackBoxTarget<G>& target, const RunConfig& cfg) {
    if (cfg.kernel == "gaussian")
        throw UsageError("cube-prior targets require --kernel cube");
    if (cfg.N < target.input_dimension)
        std::cerr << "warning: N = " << cfg.N << " is below the input dimension "
                  << target.input_dimension << "; conditional seeding may mix poorly\n";
    const auto factory = [&] { return McmcSampler<G>(target, cfg.N, cfg.burn_in, cfg.sigma0); };
    RunOptions opt{cfg.replicas, cfg.seed, cfg.threads};
    RunMeta meta{cfg.dist.text, cfg.N, cfg.burn_in};
    const std::uint64_t J = cfg.iters ? cfg.iters : 100ull * static_cast<std::uint64_t>(cfg.N);

    if (cfg.estimator == "Z")
        return run_Z(factory, resolve_scheme<Pareto>(cfg.scheme_spec, cfg.N, nullptr), opt, meta);
    if (cfg.estimator == "alpha") {
        if (cfg.budget == 0) throw UsageError("estimator 'alpha' needs --budget");
        const int charge = cfg.charge_burn_in ? cfg.charge_burn_in : cfg.burn_in;
        return alpha_budget(factory, resolve_scheme<Pareto>(cfg.scheme_spec, cfg.N, nullptr),
                            cfg.budget, charge, opt, meta);
    }
    if (cfg.estimator == "ns-fixed")
        return run_ns(factory, StoppingRule::fixed(J), NsWeighting::original, opt, meta);
    if (cfg.estimator == "ideal-deep")
        return run_ns(factory, StoppingRule::fixed(J), NsWeighting::ideal, opt, meta);
    if (cfg.estimator == "ns-increment")
        return run_ns(factory, StoppingRule::increment(cfg.eps), NsWeighting::original, opt, meta);
    if (cfg.estimator == "ns-information")
        return run_ns(factory, StoppingRule::information(cfg.k_info), NsWeighting::original, opt,
                      meta);
    throw UsageError("unknown estimator: " + cfg.estimator);
}

EstimateReport run_estimate(const RunConfig& cfg) {
    switch (cfg.dist.kind) {
        case DistKind::pareto: return estimate_analytic(Pareto(cfg.dist.param), cfg);
        case DistKind::exponential: return estimate_analytic(Exponential(cfg.dist.param), cfg);
        case DistKind::uniform: return estimate_analytic(UniformUnit{}, cfg);
        case DistKind::spike: return estimate_blackbox(make_spike_target(), cfg);
        case DistKind::heavytail: return estimate_blackbox(make_heavytail_target(), cfg);
    }
    throw UsageError("unreachable distribution kind");
}

// ---------------------------------------------------------------------------
// oracle / optimize

ordered_json oracle_json(double a, int N, const std::string& beta_spec,
                         std::optional<double> is_b) {
    namespace po = pareto_oracle;
    const double m = po::mean(a);
    ordered_json j;
    j["schema"] = kSchemaVersion;
    j["a"] = a;
    j["N"] = N;
    j["m"] = m;
    const auto v = po::variances(a, N, is_b);
    j["var_mc"] = json_number(v.mc);
    j["var_ideal"] = json_number(v.ideal);
    if (is_b) {
        j["is_b"] = *is_b;
        j["var_is"] = json_number(v.is);
    }
    double beta = 0.0;
    if (beta_spec == "app") beta = beta_app(N);
    else if (beta_spec == "opt") beta = po::beta_opt(a, N);
    else beta = std::stod(beta_spec);
    j["beta"] = beta;
    j["beta_app"] = beta_app(N);
    j["beta_opt"] = po::beta_opt(a, N);
    j["gamma"] = gamma_factor(beta, N);
    j["var_Z_geometric"] = json_number(po::var_Z_geometric(a, beta, N));
    j["q_ratio"] = po::q_ratio(a, N);
    j["q0"] = json_number(po::q_closed(a, N, 0));
    if (a * (1.0 - 0.5 / N) > 1.0) {
        const auto i0 = po::i0(a, N);
        j["i0_exact"] = i0.exact;
        j["i0_asymptotic"] = i0.asymptotic;
    }
    j["n_app"] = po::n_app(m);
    j["work_variance_asymptote"] = po::work_variance_asymptote(a, static_cast<double>(N));
    const double et = static_cast<double>(N) + 1.0 / std::expm1(beta);
    j["work_variance_geometric"] = json_number(et * po::var_Z_geometric(a, beta, N));
    return j;
}

template <class D>
ordered_json optimize_general_json(const D& dist, const std::string& dist_text, int n_max) {
    // optimal-scheme work-variance minimised over N (geometric N grid,
    // then unit refinement around the best point)
    const double m = dist.mean();
    std::vector<int> grid;
    for (int n = 2; n <= n_max; n = std::max(n + 1, static_cast<int>(n * 1.4)))
        grid.push_back(n);
    double best = kInf;
    int best_n = 0;
    std::uint64_t best_i0 = 0;
    auto eval = [&](int n) {
        QSequence q = q_for_scheme(dist, n);
        auto os = optimal_scheme(q, m, n);
        const double wv = work_variance(os.scheme, q, m, n);
        if (wv < best) { best = wv; best_n = n; best_i0 = os.i0; }
    };
    for (int n : grid) eval(n);
    for (int n = std::max(2, best_n - 3); n <= best_n + 3; ++n) eval(n);
    ordered_json j;
    j["schema"] = kSchemaVersion;
    j["dist"] = dist_text;
    j["mode"] = "general";
    j["N_opt"] = best_n;
    j["i0"] = best_i0;
    j["work_variance"] = json_number(best);
    return j;
}

ordered_json optimize_json(const DistSpec& spec, const std::string& mode, int N, int n_max) {
    if (!spec.analytic())
        throw UsageError("optimize needs an analytic or quadrature-capable distribution");
    ordered_json j;
    j["schema"] = kSchemaVersion;
    j["dist"] = spec.text;
    j["mode"] = mode;

    if (mode == "optimal-scheme") {
        return std::visit(
            [&](const auto& dist) {
                QSequence q = q_for_scheme(dist, N);
                auto os = optimal_scheme(q, dist.mean(), N);
                j["N"] = N;
                j["i0"] = os.i0;
                j["S0"] = os.S0;
                j["work_variance"] = json_number(work_variance(os.scheme, q, dist.mean(), N));
                std::vector<double> head;
                for (std::uint64_t i = 0; i <= std::min<std::uint64_t>(os.i0 + 8, 32); ++i)
                    head.push_back(os.scheme.survival(i));
                j["beta_head"] = head;
                return j;
            },
            spec.make_analytic());
    }
    if (mode == "general") {
        return std::visit(
            [&](const auto& dist) { return optimize_general_json(dist, spec.text, n_max); },
            spec.make_analytic());
    }
    if (mode != "geometric") throw UsageError("unknown optimize mode: " + mode);

    if (spec.kind == DistKind::pareto) {
        const double a = spec.param;
        const double m = pareto_oracle::mean(a);
        auto var_fn = [&](double g) {
            if (!(2.0 * g > m)) return kInf;
            return m * (m - 1.0) * (m - 1.0) / (2.0 * g - m);
        };
        auto go = optimize_geometric(var_fn, 2, n_max);
        j["N_opt"] = go.N_opt;
        j["beta_opt"] = go.beta_opt;
        j["N_opt_int"] = go.N_opt_int;
        j["beta_opt_int"] = go.beta_opt_int;
        j["work_variance"] = json_number(go.value);
        j["work_variance_int"] = json_number(go.value_int);
        j["residual_eq17"] = go.residual_eq17;
        j["n_app"] = pareto_oracle::n_app(m);
        return j;
    }
    return std::visit(
        [&](const auto& dist) {
            QSequence q2 = q_sequence_numeric(dist, 2, 48, 1e-8);
            auto var_fn = [&](double g) { return variance_from_q2(q2, g); };
            auto go = optimize_geometric(var_fn, 2, n_max);
            j["N_opt"] = go.N_opt;
            j["beta_opt"] = go.beta_opt;
            j["N_opt_int"] = go.N_opt_int;
            j["beta_opt_int"] = go.beta_opt_int;
            j["work_variance"] = json_number(go.value);
            j["residual_eq17"] = go.residual_eq17;
            return j;
        },
        spec.make_analytic());
}

// ---------------------------------------------------------------------------
// experiments (spike / heavytail reproductions)

struct ExperimentRow {
    int N;
    std::string estimator;
    std::uint64_t run;
    double value;
    std::uint64_t iterations;
    std::uint64_t cost;
};

void write_rows_csv(const std::string& path, const std::vector<ExperimentRow>& rows) {
    std::ofstream os(path);
    os << "N,estimator,run,value,iterations,cost\n";
    os.precision(17);
    for (const auto& r : rows)
        os << r.N << ',' << r.estimator << ',' << r.run << ',' << r.value << ','
           << r.iterations << ',' << r.cost << '\n';
}

struct WallClock {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double limit_seconds = 0.0; // 0: no limit
    bool exceeded() const {
        if (limit_seconds <= 0.0) return false;
        const auto dt = std::chrono::steady_clock::now() - start;
        return std::chrono::duration<double>(dt).count() > limit_seconds;
    }
};

ordered_json experiment_table1(const std::vector<int>& n_list, std::uint64_t runs, int burn_in,
                               std::uint64_t seed, int threads, const std::string& out_prefix,
                               WallClock& clock) {
    auto target = make_spike_target();
    std::vector<ExperimentRow> rows;
    ordered_json summary;
    summary["schema"] = kSchemaVersion;
    summary["experiment"] = "table1";
    summary["reference_mean"] = target.integrand.reference_mean();
    summary["runs"] = runs;
    ordered_json per_n = ordered_json::array();
    bool truncated = false;
    for (int N : n_list) {
        if (clock.exceeded()) { truncated = true; break; }
        const auto factory = [&] {
            return McmcSampler<SpikePlateau>(target, N, burn_in, 0.3);
        };
        RunOptions opt{runs, seed + static_cast<std::uint64_t>(N), threads};
        RunMeta meta{"spike", N, burn_in};
        const std::uint64_t J = 100ull * static_cast<std::uint64_t>(N);
        auto both = run_ns_both(factory, J, opt);
        auto z_rep = run_Z(factory, Scheme::geometric_app(N), opt, meta);
        const auto ideal_st = sample_stats(both.ideal);
        const auto ns_st = sample_stats(both.ns);
        for (std::uint64_t r = 0; r < runs; ++r) {
            rows.push_back({N, "NS", r, both.ns[r], J, both.costs[r]});
            rows.push_back({N, "m_hat", r, both.ideal[r], J, both.costs[r]});
            rows.push_back({N, "Z", r, z_rep.replica_values[r], 0, z_rep.replica_costs[r]});
        }
        ordered_json e;
        e["N"] = N;
        e["mean_NS"] = ns_st.mean;
        e["mean_m_hat"] = ideal_st.mean;
        e["mean_Z"] = z_rep.mean;
        e["var_NS"] = ns_st.variance;
        e["var_m_hat"] = ideal_st.variance;
        e["var_Z"] = z_rep.variance;
        e["var_Z_over_var_m_hat"] = z_rep.variance / ideal_st.variance;
        e["var_NS_over_var_m_hat"] = ns_st.variance / ideal_st.variance;
        per_n.push_back(e);
    }
    summary["per_N"] = per_n;
    summary["truncated"] = truncated;
    write_rows_csv(out_prefix + "_runs.csv", rows);
    return summary;
}

ordered_json experiment_adaptive(int N, std::uint64_t runs, int burn_in, double eps, double k,
                                 std::uint64_t seed, int threads, const std::string& out_prefix,
                                 WallClock& clock) {
    auto target = make_spike_target();
    const auto factory = [&] { return McmcSampler<SpikePlateau>(target, N, burn_in, 0.3); };
    RunOptions opt{runs, seed, threads};
    RunMeta meta{"spike", N, burn_in};
    std::vector<ExperimentRow> rows;
    ordered_json summary;
    summary["schema"] = kSchemaVersion;
    summary["experiment"] = "adaptive";
    summary["reference_mean"] = target.integrand.reference_mean();
    summary["N"] = N;
    summary["runs"] = runs;

    auto inc = run_ns(factory, StoppingRule::increment(eps), NsWeighting::original, opt, meta);
    auto info = run_ns(factory, StoppingRule::information(k), NsWeighting::original, opt, meta);
    auto deep = run_ns_both(factory, 100ull * static_cast<std::uint64_t>(N), opt);
    auto z = run_Z(factory, Scheme::geometric_app(N), opt, meta);
    for (std::uint64_t r = 0; r < runs; ++r) {
        rows.push_back({N, "NS-inc", r, inc.replica_values[r], 0, inc.replica_costs[r]});
        rows.push_back({N, "NS-H", r, info.replica_values[r], 0, info.replica_costs[r]});
        rows.push_back({N, "m_hat", r, deep.ideal[r], 0, deep.costs[r]});
        rows.push_back({N, "Z", r, z.replica_values[r], 0, z.replica_costs[r]});
    }
    summary["median_NS_inc"] = median(inc.replica_values);
    summary["median_NS_H"] = median(info.replica_values);
    summary["median_m_hat"] = median(deep.ideal);
    summary["median_Z"] = median(z.replica_values);
    summary["mean_iterations_NS_inc"] = inc.params["mean_iterations"];
    summary["mean_iterations_NS_H"] = info.params["mean_iterations"];
    summary["truncated"] = clock.exceeded();
    write_rows_csv(out_prefix + "_runs.csv", rows);
    return summary;
}

ordered_json experiment_budget(const std::vector<std::uint64_t>& budgets, std::uint64_t runs,
                               int burn_in, std::uint64_t seed, int threads,
                               const std::string& out_prefix, WallClock& clock) {
    // heavy-tailed example: NS stopped at 100 N iterations (nominal budget
    // c = 100 N iterations) versus alpha(c) with N = 20. Budgets count
    // iterations, matching the common burn-in factor on both sides.
    auto target = make_heavytail_target();
    std::vector<ExperimentRow> rows;
    ordered_json summary;
    summary["schema"] = kSchemaVersion;
    summary["experiment"] = "budget";
    summary["reference_mean"] = 1.08e42;
    summary["runs"] = runs;
    ordered_json per_budget = ordered_json::array();
    bool truncated = false;
    for (std::uint64_t c : budgets) {
        if (clock.exceeded()) { truncated = true; break; }
        const int n_ns = static_cast<int>(std::max<std::uint64_t>(c / 100, 4));
        const std::uint64_t J = 100ull * static_cast<std::uint64_t>(n_ns);
        const auto ns_factory = [&] {
            return McmcSampler<HeavyTailSpike>(target, n_ns, burn_in, 0.3);
        };
        RunOptions opt{runs, seed + c, threads};
        auto ns = run_ns(ns_factory, StoppingRule::fixed(J), NsWeighting::original, opt,
                         {"heavytail", n_ns, burn_in});
        const int n_alpha = 20;
        const auto a_factory = [&] {
            return McmcSampler<HeavyTailSpike>(target, n_alpha, burn_in, 0.3);
        };
        std::vector<double> alpha_values(runs);
        std::vector<double> alpha_replicas;
        for (std::uint64_t r = 0; r < runs && !clock.exceeded(); ++r) {
            auto rep = alpha_budget(a_factory, Scheme::geometric_app(n_alpha), c, 1,
                                    {1, seed + c + 7919 * (r + 1), threads},
                                    {"heavytail", n_alpha, burn_in});
            alpha_values[r] = rep.value;
            for (double v : rep.replica_values) alpha_replicas.push_back(v);
            rows.push_back({n_alpha, "alpha", r, rep.value, 0, rep.total_cost});
        }
        for (std::uint64_t r = 0; r < runs; ++r)
            rows.push_back({n_ns, "NS", r, ns.replica_values[r], J, ns.replica_costs[r]});
        ordered_json e;
        e["budget"] = c;
        e["N_ns"] = n_ns;
        e["median_NS"] = median(ns.replica_values);
        e["median_alpha"] = median(alpha_values);
        e["mean_alpha"] = sample_stats(alpha_values).mean;
        double best_log10 = -kInf;
        for (double v : alpha_replicas)
            if (v > 0.0) best_log10 = std::max(best_log10, std::log10(v));
        e["max_replica_log10"] = json_number(best_log10);
        per_budget.push_back(e);
    }
    summary["per_budget"] = per_budget;
    summary["truncated"] = truncated || clock.exceeded();
    write_rows_csv(out_prefix + "_runs.csv", rows);
    return summary;
}

// ---------------------------------------------------------------------------
// selftest

int run_selftest(std::uint64_t seed, int threads) {
    int failures = 0;
    auto check = [&](bool ok, const std::string& name) {
        std::cout << (ok ? "[PASS] " : "[FAIL] ") << name << "\n";
        if (!ok) ++failures;
    };

    Pareto p2(2.0);
    QSequence q = q_sequence_numeric(p2, 2, 8, 1e-8);
    bool qok = true;
    for (std::uint64_t i = 0; i <= 8; ++i)
        qok = qok && std::abs(q.values[i] / pareto_oracle::q_closed(2.0, 2, i) - 1.0) < 1e-6;
    check(qok, "q-sequence quadrature matches the closed form (pareto a=2, N=2)");

    bool gok = true;
    for (int n = 2; n <= 100; ++n)
        gok = gok && std::abs(gamma_factor(beta_app(n), n) - 0.5 * (n + 1)) < 1e-9;
    check(gok, "gamma(beta_app(N), N) = (N+1)/2");

    auto os = optimal_scheme(pareto_oracle::q_sequence_closed(2.0, 2, 24), 2.0, 2);
    check(os.i0 == 2 && std::abs(os.scheme.survival(3) - 0.816497) < 1e-5,
          "optimal scheme structure at a=2, N=2");

    const double m = 2.0;
    auto var_fn = [&](double g) {
        return 2.0 * g > m ? m * (m - 1.0) * (m - 1.0) / (2.0 * g - m) : kInf;
    };
    auto go = optimize_geometric(var_fn, 2, 40);
    check(go.residual_eq17 < 1e-6, "stationarity relation residual < 1e-6 (pareto a=2)");

    auto factory = [&] { return InverseSampler<Pareto>(p2, 10); };
    auto rep = run_Z(factory, Scheme::geometric_app(10), {20000, seed, threads},
                     {"pareto:a=2", 10, 1});
    check(std::abs(rep.mean - 2.0) < 3.0 * rep.stderr_mean,
          "Z unbiasedness within 3 stderr (pareto a=2, N=10)");

    std::cout << (failures == 0 ? "selftest passed" : "selftest FAILED") << "\n";
    return failures == 0 ? 0 : 1;
}

void emit(const ordered_json& j, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << j.dump(2) << "\n";
        return;
    }
    std::ofstream os(out_path);
    os << j.dump(2) << "\n";
}

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stoi(tok));
    return out;
}

std::vector<std::uint64_t> parse_u64_list(const std::string& text) {
    std::vector<std::uint64_t> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stoull(std::string(tok)));
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"point-process Monte Carlo estimation"};
    app.require_subcommand(1);

    std::uint64_t seed = 1;
    int threads = 0;
    std::string out_path;
    std::string format = "json";
    app.add_option("--seed", seed, "master seed");
    app.add_option("--threads", threads, "worker threads (default: PPMC_THREADS or hardware)");
    app.add_option("--out", out_path, "output path (default stdout)");
    app.add_option("--format", format, "json|csv")->check(CLI::IsMember({"json", "csv"}));

    RunConfig cfg;
    std::string dist_text = "pareto:a=2";
    auto* est = app.add_subcommand("estimate", "run an estimator");
    est->add_option("--dist", dist_text, "distribution spec");
    est->add_option("--estimator", cfg.estimator,
                    "Z|alpha|ns-fixed|ns-increment|ns-information|ideal-deep");
    est->add_option("--N", cfg.N, "number of walks");
    est->add_option("--scheme", cfg.scheme_spec, "geom:beta=<v>|geom:app|optimal|explicit-file=<path>");
    est->add_option("--budget", cfg.budget, "computational budget for alpha");
    est->add_option("--replicas", cfg.replicas, "replica count");
    est->add_option("--burnin", cfg.burn_in, "MCMC burn-in b");
    est->add_option("--sigma0", cfg.sigma0, "initial kernel step size");
    est->add_option("--kernel", cfg.kernel, "gaussian|cube|auto");
    est->add_option("--eps", cfg.eps, "increment-rule fraction");
    est->add_option("--iters", cfg.iters, "fixed iteration count (default 100 N)");
    est->add_option("--k-info", cfg.k_info, "information-rule factor");
    est->add_option("--charge-burnin", cfg.charge_burn_in,
                    "burn-in charged per iteration in alpha's budget (default: actual burn-in)");
    est->add_option("--dump-walks", cfg.dump_walks, "write a merged-walk debug CSV here");
    est->add_option("--dump-depth", cfg.dump_depth, "events in the debug dump");

    std::string exp_name = "spike";
    std::string exp_which = "table1";
    std::string n_list_text = "100,200,300,400,500";
    std::string budget_list_text = "10000";
    std::uint64_t exp_runs = 100;
    int exp_N = 500;
    double exp_eps = 1e-8, exp_k = 2.0;
    int exp_burnin = 20;
    double max_seconds = 0.0;
    auto* exp = app.add_subcommand("experiment", "reproduction experiments");
    exp->add_option("--name", exp_name, "spike|heavytail");
    exp->add_option("--which", exp_which, "table1|adaptive|budget");
    exp->add_option("--N-list", n_list_text, "N grid for table1");
    exp->add_option("--N", exp_N, "N for the adaptive experiment");
    exp->add_option("--runs", exp_runs, "runs per cell");
    exp->add_option("--budget-list", budget_list_text, "budgets for the budget experiment");
    exp->add_option("--eps", exp_eps, "increment-rule fraction");
    exp->add_option("--k-info", exp_k, "information-rule factor");
    exp->add_option("--burnin", exp_burnin, "MCMC burn-in b");
    exp->add_option("--max-seconds", max_seconds, "wall-clock guard (0 = off)");

    double oracle_a = 2.0;
    int oracle_N = 100;
    std::string oracle_beta = "app";
    double oracle_b = 0.0;
    auto* orc = app.add_subcommand("oracle", "pareto closed forms");
    orc->add_option("--a", oracle_a, "tail parameter");
    orc->add_option("--N", oracle_N, "number of walks");
    orc->add_option("--beta", oracle_beta, "app|opt|<value>");
    orc->add_option("--b", oracle_b, "importance-sampling parameter");

    std::string opt_dist_text = "pareto:a=2";
    std::string opt_mode = "geometric";
    int opt_N = 2;
    int opt_nmax = 2000;
    std::string sweep_text;
    auto* opt = app.add_subcommand("optimize", "randomisation-scheme optimisation");
    opt->add_option("--dist", opt_dist_text, "distribution spec");
    opt->add_option("--mode", opt_mode, "geometric|optimal-scheme|general");
    opt->add_option("--N", opt_N, "N for optimal-scheme mode");
    opt->add_option("--N-max", opt_nmax, "upper bound of the N scan");
    opt->add_option("--sweep", sweep_text, "a=<lo>:<hi>:<step> sweep (pareto)");

    auto* self = app.add_subcommand("selftest", "fast internal consistency checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        app.exit(e);
        return 2;
    }

    if (threads == 0) {
        if (const char* env = std::getenv("PPMC_THREADS")) threads = std::atoi(env);
    }

    try {
        if (est->parsed()) {
            cfg.dist = parse_distribution(dist_text);
            cfg.seed = seed;
            cfg.threads = threads;
            EstimateReport rep = run_estimate(cfg);
            if (format == "csv") {
                if (out_path.empty()) to_csv(rep, std::cout);
                else { std::ofstream os(out_path); to_csv(rep, os); }
            } else {
                emit(to_json(rep), out_path);
            }
            return 0;
        }
        if (exp->parsed()) {
            WallClock clock;
            clock.limit_seconds = max_seconds;
            const std::string prefix = out_path.empty() ? "ppmc_experiment" : out_path;
            ordered_json summary;
            if (exp_which == "table1")
                summary = experiment_table1(parse_int_list(n_list_text), exp_runs, exp_burnin,
                                            seed, threads, prefix, clock);
            else if (exp_which == "adaptive")
                summary = experiment_adaptive(exp_N, exp_runs, exp_burnin, exp_eps, exp_k, seed,
                                              threads, prefix, clock);
            else if (exp_which == "budget")
                summary = experiment_budget(parse_u64_list(budget_list_text), exp_runs, exp_burnin,
                                            seed, threads, prefix, clock);
            else
                throw UsageError("unknown experiment: " + exp_which);
            std::ofstream os(prefix + "_summary.json");
            os << summary.dump(2) << "\n";
            std::cout << summary.dump(2) << "\n";
            return 0;
        }
        if (orc->parsed()) {
            std::optional<double> b;
            if (oracle_b > 0.0) b = oracle_b;
            emit(oracle_json(oracle_a, oracle_N, oracle_beta, b), out_path);
            return 0;
        }
        if (opt->parsed()) {
            if (!sweep_text.empty()) {
                if (sweep_text.rfind("a=", 0) != 0)
                    throw UsageError("sweep spec must look like a=1.1:3:0.1");
                double lo, hi, step;
                if (std::sscanf(sweep_text.c_str() + 2, "%lf:%lf:%lf", &lo, &hi, &step) != 3)
                    throw UsageError("sweep spec must look like a=1.1:3:0.1");
                ordered_json arr = ordered_json::array();
                for (double a = lo; a <= hi + 1e-12; a += step) {
                    DistSpec ds;
                    ds.kind = DistKind::pareto;
                    ds.param = a;
                    ds.text = "pareto:a=" + std::to_string(a);
                    arr.push_back(optimize_json(ds, "geometric", opt_N, opt_nmax));
                }
                ordered_json j;
                j["schema"] = kSchemaVersion;
                j["sweep"] = sweep_text;
                j["results"] = arr;
                emit(j, out_path);
                return 0;
            }
            emit(optimize_json(parse_distribution(opt_dist_text), opt_mode, opt_N, opt_nmax),
                 out_path);
            return 0;
        }
        if (self->parsed()) return run_selftest(seed, threads);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const DomainError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const BudgetError& e) {
        std::cerr << "runtime signal: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
