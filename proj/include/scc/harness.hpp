#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "scc/channel.hpp"
#include "scc/codec.hpp"
#include "scc/errors.hpp"
#include "scc/model.hpp"
#include "scc/rates.hpp"

namespace scc {

inline std::string fmt_g(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

// "start:stop:count" -> evenly spaced values, endpoints included.
inline std::vector<double> parse_grid(const std::string& text) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : text) {
        if (c == ':') {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    parts.push_back(cur);
    if (parts.size() != 3)
        throw std::invalid_argument("grid: expected start:stop:count, got \"" + text + "\"");
    const double start = std::stod(parts[0]);
    const double stop = std::stod(parts[1]);
    const long count = std::stol(parts[2]);
    if (count < 1) throw std::invalid_argument("grid: count must be >= 1");
    if (start < 0.0 || stop < start)
        throw std::invalid_argument("grid: need 0 <= start <= stop");
    std::vector<double> grid;
    if (count == 1) {
        grid.push_back(start);
        return grid;
    }
    for (long t = 0; t < count; ++t)
        grid.push_back(start + (stop - start) * static_cast<double>(t) /
                                   static_cast<double>(count - 1));
    return grid;
}

inline std::vector<double> default_grid(double max_memory, int count = 200) {
    std::vector<double> grid;
    for (int t = 0; t < count; ++t)
        grid.push_back(max_memory * static_cast<double>(t) / static_cast<double>(count - 1));
    return grid;
}

inline SchemeIndex parse_index(const std::string& text) {
    const auto comma = text.find(',');
    if (comma == std::string::npos)
        throw std::invalid_argument("idx: expected p,q, got \"" + text + "\"");
    SchemeIndex idx;
    idx.p = std::stoi(text.substr(0, comma));
    idx.q = std::stoi(text.substr(comma + 1));
    return idx;
}

inline nlohmann::json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    nlohmann::json j;
    in >> j;
    return j;
}

// A preset file is a config object plus optional experiment fields:
//   "grid": "start:stop:count" or explicit array of M values
//   "weak_counts", "budgets": allocation-study splits and B values
struct LoadedSpec {
    nlohmann::json raw;
    SystemConfig cfg;
    std::optional<std::vector<double>> grid;
};

inline std::optional<std::vector<double>> embedded_grid(const nlohmann::json& j) {
    if (!j.contains("grid")) return std::nullopt;
    std::vector<double> grid;
    if (j.at("grid").is_string()) {
        grid = parse_grid(j.at("grid").get<std::string>());
    } else {
        grid = j.at("grid").get<std::vector<double>>();
        for (std::size_t t = 0; t < grid.size(); ++t)
            if (grid[t] < 0.0 || (t > 0 && grid[t] < grid[t - 1]))
                throw std::invalid_argument("grid: values must be non-negative ascending");
    }
    return grid;
}

inline LoadedSpec load_spec(const std::string& path) {
    LoadedSpec spec;
    spec.raw = load_json(path);
    spec.cfg = config_from_json(spec.raw);
    spec.grid = embedded_grid(spec.raw);
    return spec;
}

inline std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    return out;
}

// CSV columns: M, R_scc_envelope, R_stw_envelope, R_upper_bound, best_p, best_q.
// The STW column is only populated for structurally homogeneous configs, the
// bound column only when the exhaustive subset scan is tractable (K <= 24).
inline void cmd_tradeoff(const LoadedSpec& spec, const std::string& out_path) {
    const SystemConfig& cfg = spec.cfg;
    const TradeoffCurve curve = tradeoff_curve(cfg);

    std::optional<TradeoffCurve> stw;
    if (is_homogeneous(cfg)) stw = curve_from_points(stw_indexed_pairs(cfg));
    std::optional<UpperBoundProfile> bound;
    if (cfg.total_receivers() <= 24) bound = upper_bound_profile(cfg);

    const std::vector<double> grid =
        spec.grid ? *spec.grid : default_grid(curve.max_memory());

    auto out = open_out(out_path);
    out << "M,R_scc_envelope,R_stw_envelope,R_upper_bound,best_p,best_q\n";
    for (double M : grid) {
        const SchemeIndex best = curve.best_at(M);
        out << fmt_g(M) << ',' << fmt_g(curve.envelope(M)) << ',';
        if (stw) out << fmt_g(stw->envelope(M));
        out << ',';
        if (bound) out << fmt_g(bound->at(M));
        out << ',' << best.p << ',' << best.q << '\n';
    }
}

inline void cmd_bound(const LoadedSpec& spec, const std::string& out_path) {
    const SystemConfig& cfg = spec.cfg;
    const UpperBoundProfile bound = upper_bound_profile(cfg); // IntractableSize if K > 24
    const TradeoffCurve curve = tradeoff_curve(cfg);
    const std::vector<double> grid =
        spec.grid ? *spec.grid : default_grid(curve.max_memory());
    auto out = open_out(out_path);
    out << "M,R_upper_bound\n";
    for (double M : grid)
        out << fmt_g(M) << ',' << fmt_g(bound.at(M)) << '\n';
}

// Fig.-5-style study: keep the receiver pool and its erasures fixed, cache the
// first w receivers for each w in weak_counts, and tabulate the SCC envelope
// rate against the total cache budget B = w * M.
inline void cmd_cache_allocation_study(const LoadedSpec& spec, const std::string& out_path) {
    const nlohmann::json& j = spec.raw;
    if (!j.contains("weak_counts"))
        throw std::invalid_argument("allocation study: preset needs \"weak_counts\"");
    const auto weak_counts = j.at("weak_counts").get<std::vector<int>>();
    if (weak_counts.empty())
        throw std::invalid_argument("allocation study: weak_counts is empty");
    const auto erasures = j.at("erasures").get<std::vector<double>>();
    const int K = static_cast<int>(erasures.size());

    std::vector<TradeoffCurve> curves;
    std::vector<SystemConfig> cfgs;
    for (int w : weak_counts) {
        if (w < 1 || w > K)
            throw std::invalid_argument("allocation study: weak count " +
                                        std::to_string(w) + " outside [1, K]");
        SystemConfig cfg;
        cfg.num_weak = w;
        cfg.num_strong = K - w;
        cfg.num_files = j.at("num_files").get<int>();
        cfg.packet_bits = j.at("packet_bits").get<int>();
        cfg.erasures = erasures;
        validate_config(cfg);
        curves.push_back(tradeoff_curve(cfg));
        cfgs.push_back(std::move(cfg));
    }

    std::vector<double> budgets;
    if (j.contains("budgets")) {
        if (j.at("budgets").is_string())
            budgets = parse_grid(j.at("budgets").get<std::string>());
        else
            budgets = j.at("budgets").get<std::vector<double>>();
    } else {
        double max_budget = 0.0;
        for (std::size_t t = 0; t < curves.size(); ++t)
            max_budget = std::max(max_budget, static_cast<double>(weak_counts[t]) *
                                                  curves[t].max_memory());
        budgets = default_grid(max_budget);
    }

    auto out = open_out(out_path);
    out << "B";
    for (int w : weak_counts) out << ",R_Kw" << w;
    out << "\n";
    for (double B : budgets) {
        out << fmt_g(B);
        for (std::size_t t = 0; t < curves.size(); ++t)
            out << ',' << fmt_g(curves[t].envelope(B / static_cast<double>(weak_counts[t])));
        out << '\n';
    }
}

inline SimulationReport cmd_simulate(const LoadedSpec& spec, SchemeIndex idx,
                                     double rate_fraction, std::int64_t n, int trials,
                                     DemandPolicy policy, std::uint64_t seed,
                                     const std::string& out_path,
                                     const std::string& plan_out_path = "") {
    const SystemConfig& cfg = spec.cfg;
    const MemoryRatePair pair = achievable_pair(cfg, idx);
    const double R = rate_fraction * pair.rate;
    const SimulationReport rep = run_trials(cfg, idx, R, n, trials, policy, seed);
    if (!out_path.empty()) {
        auto out = open_out(out_path);
        out << report_to_json(rep).dump(2) << "\n";
    }
    if (!plan_out_path.empty()) {
        const auto [lib, caches] = place(cfg, idx, seed, n, R);
        const DeliveryPlan plan = build_plan(cfg, idx, all_distinct_demands(cfg), lib, n);
        auto out = open_out(plan_out_path);
        dump_plan_jsonl(plan, out);
    }
    return rep;
}

} // namespace scc
