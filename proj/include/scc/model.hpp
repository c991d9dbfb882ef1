#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "scc/errors.hpp"

namespace scc {

inline constexpr double kTol = 1e-9;

inline bool approx_equal(double a, double b, double tol = kTol) {
    return std::fabs(a - b) <= tol;
}

// Receivers are enumerated by channel quality: delta_1 >= ... >= delta_K.
// The first num_weak receivers ("weak") hold caches; the rest ("strong") do not.
struct SystemConfig {
    int num_weak = 0;    // K_w
    int num_strong = 0;  // K_s
    int num_files = 0;   // N
    int packet_bits = 0; // F
    std::vector<double> erasures; // delta_1..delta_K

    int total_receivers() const { return num_weak + num_strong; }
    double erasure(int k) const { // 1-based receiver index
        return erasures[static_cast<std::size_t>(k - 1)];
    }
    // sum over strong receivers of 1/(1 - delta_l)
    double strong_harmonic() const {
        double s = 0.0;
        for (int l = num_weak + 1; l <= total_receivers(); ++l)
            s += 1.0 / (1.0 - erasure(l));
        return s;
    }
};

inline SystemConfig validate_config(SystemConfig cfg) {
    if (cfg.num_weak < 1)
        throw std::invalid_argument("config: num_weak must be positive");
    if (cfg.num_strong < 0)
        throw std::invalid_argument("config: num_strong must be non-negative");
    if (cfg.num_files < 1)
        throw std::invalid_argument("config: num_files must be positive");
    if (cfg.packet_bits < 1)
        throw std::invalid_argument("config: packet_bits must be positive");
    if (static_cast<int>(cfg.erasures.size()) != cfg.total_receivers())
        throw std::invalid_argument("config: erasures must list K_w + K_s probabilities");
    for (double d : cfg.erasures) {
        if (!(d >= 0.0) || d >= 1.0)
            throw DegenerateErasure("config: erasure probability " + std::to_string(d) +
                                    " outside [0, 1)");
    }
    for (std::size_t k = 1; k < cfg.erasures.size(); ++k) {
        if (cfg.erasures[k] > cfg.erasures[k - 1])
            throw NonMonotoneErasures("config: erasures must be non-increasing (position " +
                                      std::to_string(k + 1) + ")");
    }
    if (cfg.num_files < cfg.total_receivers())
        throw TooFewFiles("config: need at least as many files as receivers (N=" +
                          std::to_string(cfg.num_files) + ", K=" +
                          std::to_string(cfg.total_receivers()) + ")");
    return cfg;
}

struct HomogeneousConfig {
    int num_weak = 0;
    int num_strong = 0;
    int num_files = 0;
    int packet_bits = 0;
    double delta_weak = 0.0;  // delta_w
    double delta_strong = 0.0; // delta_s, strictly < delta_w

    SystemConfig expand() const {
        if (!(delta_strong < delta_weak))
            throw NonMonotoneErasures(
                "homogeneous config: requires delta_strong < delta_weak strictly");
        SystemConfig cfg;
        cfg.num_weak = num_weak;
        cfg.num_strong = num_strong;
        cfg.num_files = num_files;
        cfg.packet_bits = packet_bits;
        cfg.erasures.assign(static_cast<std::size_t>(num_weak), delta_weak);
        cfg.erasures.insert(cfg.erasures.end(), static_cast<std::size_t>(num_strong),
                            delta_strong);
        return validate_config(cfg);
    }
};

// Detects the homogeneous structure from an erasure list (used e.g. to decide
// whether the STW baseline is defined for a config).
inline bool is_homogeneous(const SystemConfig& cfg) {
    if (cfg.num_weak < 1 || cfg.num_strong < 1) return false;
    const double dw = cfg.erasure(1);
    const double ds = cfg.erasure(cfg.num_weak + 1);
    if (!(ds < dw)) return false;
    for (int k = 2; k <= cfg.num_weak; ++k)
        if (cfg.erasure(k) != dw) return false;
    for (int l = cfg.num_weak + 2; l <= cfg.total_receivers(); ++l)
        if (cfg.erasure(l) != ds) return false;
    return true;
}

struct SchemeIndex {
    int p = 0;
    int q = 0;
};

inline bool operator==(const SchemeIndex& a, const SchemeIndex& b) {
    return a.p == b.p && a.q == b.q;
}

// p in [0, K_w], q in [p, K_w]; with K_s = 0 only p = q < K_w is meaningful
// (the rate is unbounded at (K_w, K_w) without strong receivers).
inline SchemeIndex validate_index(const SystemConfig& cfg, SchemeIndex idx) {
    if (idx.p < 0 || idx.p > idx.q || idx.q > cfg.num_weak)
        throw InvalidIndex("index: need 0 <= p <= q <= K_w, got p=" +
                           std::to_string(idx.p) + " q=" + std::to_string(idx.q));
    if (cfg.num_strong == 0) {
        if (idx.p != idx.q)
            throw InvalidIndex("index: p < q undefined without strong receivers");
        if (idx.p == cfg.num_weak)
            throw InvalidIndex("index: (K_w, K_w) undefined without strong receivers");
    }
    return idx;
}

struct MemoryRatePair {
    double memory = 0.0; // M
    double rate = 0.0;   // R
};

struct DemandVector {
    std::vector<int> demands; // d_1..d_K, each in [1, N]
};

inline DemandVector validate_demands(const SystemConfig& cfg, DemandVector d) {
    if (static_cast<int>(d.demands.size()) != cfg.total_receivers())
        throw std::invalid_argument("demands: need one entry per receiver");
    for (int f : d.demands)
        if (f < 1 || f > cfg.num_files)
            throw std::invalid_argument("demands: file index " + std::to_string(f) +
                                        " outside [1, N]");
    return d;
}

inline DemandVector all_distinct_demands(const SystemConfig& cfg) {
    DemandVector d;
    for (int k = 1; k <= cfg.total_receivers(); ++k)
        d.demands.push_back((k - 1) % cfg.num_files + 1);
    return d;
}

inline DemandVector all_equal_demands(const SystemConfig& cfg) {
    DemandVector d;
    d.demands.assign(static_cast<std::size_t>(cfg.total_receivers()), 1);
    return d;
}

// --- JSON ---

inline nlohmann::json to_json(const SystemConfig& cfg) {
    return nlohmann::json{{"num_weak", cfg.num_weak},
                          {"num_strong", cfg.num_strong},
                          {"num_files", cfg.num_files},
                          {"packet_bits", cfg.packet_bits},
                          {"erasures", cfg.erasures}};
}

// Accepts either an explicit "erasures" array or the homogeneous shorthand
// {delta_weak, delta_strong}.
inline SystemConfig config_from_json(const nlohmann::json& j) {
    SystemConfig cfg;
    cfg.num_weak = j.at("num_weak").get<int>();
    cfg.num_strong = j.at("num_strong").get<int>();
    cfg.num_files = j.at("num_files").get<int>();
    cfg.packet_bits = j.at("packet_bits").get<int>();
    if (j.contains("erasures")) {
        cfg.erasures = j.at("erasures").get<std::vector<double>>();
        return validate_config(cfg);
    }
    if (j.contains("delta_weak") && j.contains("delta_strong")) {
        HomogeneousConfig h;
        h.num_weak = cfg.num_weak;
        h.num_strong = cfg.num_strong;
        h.num_files = cfg.num_files;
        h.packet_bits = cfg.packet_bits;
        h.delta_weak = j.at("delta_weak").get<double>();
        h.delta_strong = j.at("delta_strong").get<double>();
        return h.expand();
    }
    throw std::invalid_argument(
        "config: need either \"erasures\" or {\"delta_weak\", \"delta_strong\"}");
}

} // namespace scc
