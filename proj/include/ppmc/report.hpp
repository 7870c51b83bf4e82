#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "math.hpp"
#include "runner.hpp"

namespace ppmc {

inline constexpr const char* kSchemaVersion = "ppmc/v1";

/// Aggregated result of a replicated estimator run.
struct EstimateReport {
    std::string estimator;
    std::string distribution;
    std::string scheme;
    int N = 0;
    int burn_in = 1;
    double value = 0.0; // the estimate (mean of replicas unless stated)
    std::vector<double> replica_values;
    std::vector<std::uint64_t> replica_costs;
    std::uint64_t replicas = 0;
    double mean = 0.0;
    double variance = 0.0;
    double stderr_mean = 0.0;
    std::uint64_t total_cost = 0;
    std::uint64_t seed = 0;
    nlohmann::ordered_json params; // echo of the run configuration
};

inline EstimateReport make_report(std::string estimator, std::string distribution,
                                  std::string scheme, int N, int burn_in, std::uint64_t seed,
                                  std::span<const ReplicaOutcome> outcomes) {
    EstimateReport r;
    r.estimator = std::move(estimator);
    r.distribution = std::move(distribution);
    r.scheme = std::move(scheme);
    r.N = N;
    r.burn_in = burn_in;
    r.seed = seed;
    r.replicas = outcomes.size();
    r.replica_values.reserve(outcomes.size());
    r.replica_costs.reserve(outcomes.size());
    for (const auto& o : outcomes) {
        r.replica_values.push_back(o.value);
        r.replica_costs.push_back(o.cost);
        r.total_cost += o.cost;
    }
    const SampleStats st = sample_stats(r.replica_values);
    r.mean = st.mean;
    r.variance = st.variance;
    r.stderr_mean = st.stderr_mean;
    r.value = r.mean;
    return r;
}

/// Infinity-aware number: JSON has no inf literal, so infinite values are
/// emitted as the strings "inf"/"-inf".
inline nlohmann::ordered_json json_number(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

inline nlohmann::ordered_json to_json(const EstimateReport& r) {
    nlohmann::ordered_json j;
    j["schema"] = kSchemaVersion;
    j["estimator"] = r.estimator;
    j["distribution"] = r.distribution;
    j["N"] = r.N;
    j["scheme"] = r.scheme;
    j["burn_in"] = r.burn_in;
    j["replicas"] = r.replicas;
    j["value"] = json_number(r.value);
    j["mean"] = json_number(r.mean);
    j["variance"] = json_number(r.variance);
    j["stderr"] = json_number(r.stderr_mean);
    j["total_cost"] = r.total_cost;
    j["seed"] = r.seed;
    if (!r.params.is_null()) j["params"] = r.params;
    return j;
}

/// CSV serialisation, one replica per row.
inline void to_csv(const EstimateReport& r, std::ostream& os) {
    os << "replica,value,cost,estimator,distribution,N,scheme,seed\n";
    os.precision(17);
    for (std::size_t i = 0; i < r.replica_values.size(); ++i) {
        os << i << ',' << r.replica_values[i] << ',' << r.replica_costs[i] << ','
           << r.estimator << ',' << r.distribution << ',' << r.N << ',' << r.scheme << ','
           << r.seed << '\n';
    }
}

} // namespace ppmc
