#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "scc/codec.hpp"
#include "scc/errors.hpp"
#include "scc/model.hpp"
#include "scc/rates.hpp"

namespace scc {

// counts[t][k-1]: packets of plan message t that reached receiver k.
struct ChannelRealization {
    std::uint64_t seed = 0;
    std::vector<std::vector<std::int64_t>> counts;
};

namespace detail {

// Raw engine words mapped to [0,1); keeps the draw sequence pinned to the
// engine algorithm rather than a library distribution.
inline double uniform01(std::mt19937_64& eng) {
    return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

} // namespace detail

inline ChannelRealization realize(const SystemConfig& cfg, const DeliveryPlan& plan,
                                  std::uint64_t seed) {
    const int K = cfg.total_receivers();
    ChannelRealization real;
    real.seed = seed;
    std::mt19937_64 eng(seed);
    for (const CodedMessage& msg : plan.messages) {
        std::vector<std::int64_t> row(static_cast<std::size_t>(K), 0);
        for (int k = 1; k <= K; ++k) {
            const double delta = cfg.erasure(k);
            std::int64_t got = 0;
            for (std::int64_t u = 0; u < msg.packets; ++u)
                if (!(detail::uniform01(eng) < delta)) ++got;
            row[static_cast<std::size_t>(k - 1)] = got;
        }
        real.counts.push_back(std::move(row));
    }
    return real;
}

// Idealized capacity-achieving code: b bits over a period are decodable at a
// receiver iff it caught count packets with count*F >= b; a strong receiver in
// a joint-encoding period must cover both layers, b_w + b_s.
inline ReceivedFlags decode_flags(const SystemConfig& cfg, const DeliveryPlan& plan,
                                  const ChannelRealization& real) {
    const int K = cfg.total_receivers();
    const std::int64_t F = cfg.packet_bits;
    ReceivedFlags flags(static_cast<std::size_t>(K),
                        std::vector<bool>(plan.messages.size(), false));
    for (std::size_t t = 0; t < plan.messages.size(); ++t) {
        const CodedMessage& msg = plan.messages[t];
        const auto bits_of = [&](int k) { return real.counts[t][static_cast<std::size_t>(k - 1)] * F; };
        for (int k : msg.weak_targets)
            flags[static_cast<std::size_t>(k - 1)][t] = bits_of(k) >= msg.weak_bits;
        if (msg.kind == CodedMessage::Kind::JointBlock)
            flags[static_cast<std::size_t>(msg.strong_target - 1)][t] =
                bits_of(msg.strong_target) >= msg.weak_bits + msg.strong_bits;
        else if (msg.kind == CodedMessage::Kind::StrongUnicast)
            flags[static_cast<std::size_t>(msg.strong_target - 1)][t] =
                bits_of(msg.strong_target) >= msg.strong_bits;
    }
    return flags;
}

enum class DemandPolicy { WorstCaseScan, UniformRandom };

inline const char* demand_policy_name(DemandPolicy p) {
    return p == DemandPolicy::WorstCaseScan ? "worst_case_scan" : "uniform_random";
}

inline DemandPolicy demand_policy_from_name(const std::string& name) {
    if (name == "worst_case_scan") return DemandPolicy::WorstCaseScan;
    if (name == "uniform_random") return DemandPolicy::UniformRandom;
    throw std::invalid_argument("unknown demand policy: " + name);
}

struct SimulationReport {
    SystemConfig config;
    SchemeIndex idx;
    double rate = 0.0;
    std::int64_t n = 0;
    int trials = 0;
    DemandPolicy policy = DemandPolicy::WorstCaseScan;
    std::vector<std::int64_t> per_receiver_failures;
    double p_e = 0.0;
    bool p_e_defined = false; // false when trials = 0
    std::uint64_t seed = 0;
};

// One full pass per trial: place -> build_plan -> realize -> decode_flags ->
// decode. worst_case_scan alternates the all-distinct and all-equal demand
// patterns and reports the worse pattern's failure fraction; uniform_random
// pools all trials.
inline SimulationReport run_trials(const SystemConfig& cfg, SchemeIndex idx, double R,
                                   std::int64_t n, int trials, DemandPolicy policy,
                                   std::uint64_t seed) {
    validate_config(cfg);
    validate_index(cfg, idx);
    const int K = cfg.total_receivers();

    SimulationReport rep;
    rep.config = cfg;
    rep.idx = idx;
    rep.rate = R;
    rep.n = n;
    rep.trials = trials;
    rep.policy = policy;
    rep.seed = seed;
    rep.per_receiver_failures.assign(static_cast<std::size_t>(K), 0);
    if (trials < 1) return rep;

    std::mt19937_64 master(seed);
    std::map<int, std::pair<std::int64_t, std::int64_t>> groups; // id -> (trials, failed)
    for (int t = 0; t < trials; ++t) {
        const std::uint64_t lib_seed = master();
        const std::uint64_t chan_seed = master();
        const std::uint64_t demand_seed = master();

        int group_id = 0;
        DemandVector demands;
        if (policy == DemandPolicy::WorstCaseScan) {
            group_id = t % 2;
            demands = group_id == 0 ? all_distinct_demands(cfg) : all_equal_demands(cfg);
        } else {
            std::mt19937_64 deng(demand_seed);
            for (int k = 0; k < K; ++k)
                demands.demands.push_back(
                    1 + static_cast<int>(deng() % static_cast<std::uint64_t>(cfg.num_files)));
        }

        const auto [lib, caches] = place(cfg, idx, lib_seed, n, R);
        const DeliveryPlan plan = build_plan(cfg, idx, demands, lib, n);
        const ChannelRealization real = realize(cfg, plan, chan_seed);
        const ReceivedFlags flags = decode_flags(cfg, plan, real);
        const DecodingResult res = decode(cfg, plan, flags, caches, demands);

        bool any_failed = false;
        for (int k = 0; k < K; ++k) {
            if (!res.success[static_cast<std::size_t>(k)]) {
                rep.per_receiver_failures[static_cast<std::size_t>(k)] += 1;
                any_failed = true;
            }
        }
        auto& g = groups[group_id];
        g.first += 1;
        if (any_failed) g.second += 1;
    }

    double worst = 0.0;
    for (const auto& [id, g] : groups)
        worst = std::max(worst, static_cast<double>(g.second) / static_cast<double>(g.first));
    rep.p_e = worst;
    rep.p_e_defined = true;
    return rep;
}

inline nlohmann::json report_to_json(const SimulationReport& rep) {
    nlohmann::json j{{"config", to_json(rep.config)},
                     {"idx", {{"p", rep.idx.p}, {"q", rep.idx.q}}},
                     {"R", rep.rate},
                     {"n", rep.n},
                     {"trials", rep.trials},
                     {"demand_policy", demand_policy_name(rep.policy)},
                     {"per_receiver_failures", rep.per_receiver_failures},
                     {"seed", rep.seed},
                     {"generator_id", "mt19937_64"}};
    if (rep.p_e_defined)
        j["p_e"] = rep.p_e;
    else
        j["p_e"] = nullptr;
    return j;
}

} // namespace scc
