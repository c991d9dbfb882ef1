#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "scc/combinatorics.hpp"
#include "scc/errors.hpp"
#include "scc/model.hpp"

namespace scc {

namespace detail {
inline double int_pow(double base, int exp) {
    double v = 1.0;
    for (int t = 0; t < exp; ++t) v *= base;
    return v;
}
} // namespace detail

// gamma(p, delta, i): the level-i proportioning coefficient,
//   binom(K_w,i) / (binom(K_w,p) K_s^{i-p})
//     * prod_{j=p}^{i-1} ( K_s / ((1-delta_{K_w-j}) sum_strong 1/(1-delta_l)) - 1 ).
// The empty product at i = p makes gamma(p, p) = 1 even when K_s = 0.
inline double gamma(const SystemConfig& cfg, int p, int i) {
    const int Kw = cfg.num_weak;
    if (p < 0 || i < p || i > Kw)
        throw InvalidIndex("gamma: need 0 <= p <= i <= K_w");
    if (i == p) return 1.0;
    if (cfg.num_strong == 0)
        throw InvalidIndex("gamma: i > p undefined without strong receivers");
    const double Ds = cfg.strong_harmonic();
    double value = static_cast<double>(binom(Kw, i)) /
                   (static_cast<double>(binom(Kw, p)) *
                    detail::int_pow(static_cast<double>(cfg.num_strong), i - p));
    for (int j = p; j < i; ++j) {
        const double factor =
            cfg.num_strong / ((1.0 - cfg.erasure(Kw - j)) * Ds) - 1.0;
        if (factor <= 0.0)
            throw NegativeFactor("gamma: non-positive product factor at j=" +
                                 std::to_string(j) +
                                 " (strong receivers not strictly better)");
        value *= factor;
    }
    return value;
}

struct GammaCoefficients {
    int p = 0;
    int q = 0;
    std::vector<double> values; // values[i - p] = gamma(p, delta, i)

    double sum() const {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }
    double weighted_sum() const { // sum_i i * gamma_i
        double s = 0.0;
        for (std::size_t t = 0; t < values.size(); ++t)
            s += static_cast<double>(p + static_cast<int>(t)) * values[t];
        return s;
    }
};

inline GammaCoefficients gamma_range(const SystemConfig& cfg, SchemeIndex idx) {
    validate_index(cfg, idx);
    GammaCoefficients g;
    g.p = idx.p;
    g.q = idx.q;
    for (int i = idx.p; i <= idx.q; ++i) g.values.push_back(gamma(cfg, idx.p, i));
    return g;
}

// (M, R)_(p,q): R = F sum(gamma) / (weak-side sum + strong harmonic),
// M = N sum(i gamma) / (K_w sum(gamma)) * R.
inline MemoryRatePair achievable_pair(const SystemConfig& cfg, SchemeIndex idx) {
    const GammaCoefficients g = gamma_range(cfg, idx);
    const int Kw = cfg.num_weak;
    double denom = cfg.strong_harmonic();
    for (int i = idx.p; i <= idx.q; ++i) {
        double inner = 0.0;
        for (int j = 1; j <= Kw - i; ++j)
            inner += static_cast<double>(binom(Kw - j, i)) / (1.0 - cfg.erasure(j));
        denom += g.values[static_cast<std::size_t>(i - idx.p)] /
                 static_cast<double>(binom(Kw, i)) * inner;
    }
    if (denom <= 0.0)
        throw InvalidIndex("achievable_pair: unbounded rate (empty constraint set)");
    MemoryRatePair mr;
    mr.rate = cfg.packet_bits * g.sum() / denom;
    mr.memory = cfg.num_files * g.weighted_sum() / (Kw * g.sum()) * mr.rate;
    return mr;
}

struct RateSplit {
    double total_rate = 0.0;
    int p = 0;
    std::vector<double> subfile_rates; // R^(p)..R^(q); sums to total_rate exactly

    double level(int i) const { return subfile_rates[static_cast<std::size_t>(i - p)]; }
};

// R^(i) = gamma_i / sum(gamma) * R, last entry by subtraction so the split is exact.
inline RateSplit rate_split(const SystemConfig& cfg, SchemeIndex idx, double R) {
    const GammaCoefficients g = gamma_range(cfg, idx);
    RateSplit rs;
    rs.total_rate = R;
    rs.p = idx.p;
    const double sum = g.sum();
    double acc = 0.0;
    for (std::size_t t = 0; t + 1 < g.values.size(); ++t) {
        const double r = g.values[t] / sum * R;
        rs.subfile_rates.push_back(r);
        acc += r;
    }
    rs.subfile_rates.push_back(R - acc);
    return rs;
}

// beta fractions of the blocklength, one entry per transmission period:
//   message 1 (present iff q < K_w): one period per sub-message j,
//   messages t = 2..q-p+1: K_s periods per sub-message,
//   message q-p+2: one period per strong receiver.
// Every beta is its decodability constraint taken with equality; total() <= 1
// signals feasibility (greater than 1 is reported, not an error).
struct TimeAllocation {
    SchemeIndex idx;
    // periods[t][j][m]: message t (0-based slot; slot 0 is message 1 and is empty
    // when q = K_w), sub-message j, period m. Single-period messages use m-size 1.
    std::vector<std::vector<std::vector<double>>> periods;

    double submessage_total(std::size_t t, std::size_t j) const {
        double s = 0.0;
        for (double b : periods[t][j]) s += b;
        return s;
    }
    double message_total(std::size_t t) const {
        double s = 0.0;
        for (const auto& sub : periods[t])
            for (double b : sub) s += b;
        return s;
    }
    double total() const {
        double s = 0.0;
        for (std::size_t t = 0; t < periods.size(); ++t) s += message_total(t);
        return s;
    }
};

inline TimeAllocation time_allocation(const SystemConfig& cfg, SchemeIndex idx,
                                      double R) {
    validate_index(cfg, idx);
    const int Kw = cfg.num_weak;
    const int Ks = cfg.num_strong;
    const double F = cfg.packet_bits;
    const RateSplit rs = rate_split(cfg, idx, R);

    TimeAllocation ta;
    ta.idx = idx;

    // message 1: V_j^(q) to the weak receivers in each (q+1)-subset; the rate is
    // pinned by the weakest receiver of the subset (its smallest index).
    std::vector<std::vector<double>> msg1;
    if (idx.q < Kw) {
        const SubsetIndexer sub(Kw, idx.q + 1);
        const double piece_rate = rs.level(idx.q) / static_cast<double>(binom(Kw, idx.q));
        for (std::int64_t j = 1; j <= sub.count; ++j) {
            const int weakest = sub.subset(j).front();
            msg1.push_back({piece_rate / ((1.0 - cfg.erasure(weakest)) * F)});
        }
    }
    ta.periods.push_back(std::move(msg1));

    // messages 2..q-p+1: per (sub-message, period) the max of the weak-side and
    // strong-side joint-encoding constraints.
    for (int i = idx.q - 1; i >= idx.p; --i) {
        const SubsetIndexer sub(Kw, i + 1);
        std::vector<std::vector<double>> msg;
        const double slice_rate =
            rs.level(i) / (static_cast<double>(Ks) * static_cast<double>(binom(Kw, i)));
        const double strong_rate =
            rs.level(i + 1) / static_cast<double>(binom(Kw, i + 1));
        for (std::int64_t j = 1; j <= sub.count; ++j) {
            const int weakest = sub.subset(j).front();
            const double weak_term = slice_rate / ((1.0 - cfg.erasure(weakest)) * F);
            std::vector<double> per_m;
            for (int m = 1; m <= Ks; ++m) {
                const double strong_term =
                    (slice_rate + strong_rate) / ((1.0 - cfg.erasure(Kw + m)) * F);
                per_m.push_back(std::max(weak_term, strong_term));
            }
            msg.push_back(std::move(per_m));
        }
        ta.periods.push_back(std::move(msg));
    }

    // last message: one unicast slot per strong receiver for the whole W^(p).
    std::vector<std::vector<double>> last;
    for (int l = Kw + 1; l <= cfg.total_receivers(); ++l)
        last.push_back({rs.level(idx.p) / ((1.0 - cfg.erasure(l)) * F)});
    ta.periods.push_back(std::move(last));
    return ta;
}

// STW baseline: the q = p + 1 restriction plus the two corner indices.
inline std::vector<std::pair<MemoryRatePair, SchemeIndex>>
stw_indexed_pairs(const SystemConfig& cfg) {
    std::vector<std::pair<MemoryRatePair, SchemeIndex>> out;
    for (int p = 0; p + 1 <= cfg.num_weak; ++p) {
        SchemeIndex idx{p, p + 1};
        out.emplace_back(achievable_pair(cfg, idx), idx);
    }
    out.emplace_back(achievable_pair(cfg, {0, 0}), SchemeIndex{0, 0});
    if (cfg.num_strong > 0)
        out.emplace_back(achievable_pair(cfg, {cfg.num_weak, cfg.num_weak}),
                         SchemeIndex{cfg.num_weak, cfg.num_weak});
    return out;
}

inline std::vector<MemoryRatePair> stw_pairs(const SystemConfig& cfg) {
    std::vector<MemoryRatePair> out;
    for (const auto& [mr, idx] : stw_indexed_pairs(cfg)) out.push_back(mr);
    return out;
}

// Memory-sharing envelope: upper concave hull over (M, R), cut at the peak-rate
// vertex and extended flat to the right (extra memory is never harmful).
struct TradeoffCurve {
    std::vector<std::pair<MemoryRatePair, SchemeIndex>> points;
    std::vector<MemoryRatePair> hull; // vertices, ascending memory, ends at peak rate

    double envelope(double M) const {
        if (hull.empty()) return 0.0;
        if (M <= hull.front().memory) return hull.front().rate;
        for (std::size_t t = 1; t < hull.size(); ++t) {
            if (M <= hull[t].memory) {
                const auto& a = hull[t - 1];
                const auto& b = hull[t];
                const double w = (M - a.memory) / (b.memory - a.memory);
                return a.rate + w * (b.rate - a.rate);
            }
        }
        return hull.back().rate;
    }

    double max_memory() const { return hull.empty() ? 0.0 : hull.back().memory; }

    // Best single (non-memory-shared) point with M_(p,q) <= M: max rate,
    // ties broken to the lexicographically smallest (p, q).
    SchemeIndex best_at(double M) const {
        SchemeIndex best{0, 0};
        double best_rate = -1.0;
        for (const auto& [mr, idx] : points) {
            if (mr.memory > M + kTol) continue;
            if (mr.rate > best_rate + kTol ||
                (approx_equal(mr.rate, best_rate) &&
                 (idx.p < best.p || (idx.p == best.p && idx.q < best.q)))) {
                best_rate = mr.rate;
                best = idx;
            }
        }
        return best;
    }
};

inline std::vector<MemoryRatePair>
concave_envelope(std::vector<MemoryRatePair> pts) {
    std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
        return a.memory < b.memory || (a.memory == b.memory && a.rate < b.rate);
    });
    // keep only the best rate at (numerically) equal memory
    std::vector<MemoryRatePair> uniq;
    for (const auto& pt : pts) {
        if (!uniq.empty() && approx_equal(uniq.back().memory, pt.memory))
            uniq.back() = pt;
        else
            uniq.push_back(pt);
    }
    std::vector<MemoryRatePair> hull;
    for (const auto& pt : uniq) {
        while (hull.size() >= 2) {
            const auto& a = hull[hull.size() - 2];
            const auto& b = hull.back();
            // drop b if it lies on or below segment a->pt
            if ((b.rate - a.rate) * (pt.memory - a.memory) <=
                (pt.rate - a.rate) * (b.memory - a.memory))
                hull.pop_back();
            else
                break;
        }
        hull.push_back(pt);
    }
    // truncate at the first peak-rate vertex; the envelope is flat afterwards
    std::size_t peak = 0;
    for (std::size_t t = 1; t < hull.size(); ++t)
        if (hull[t].rate > hull[peak].rate) peak = t;
    hull.resize(peak + 1);
    return hull;
}

inline TradeoffCurve
curve_from_points(std::vector<std::pair<MemoryRatePair, SchemeIndex>> pts) {
    TradeoffCurve curve;
    curve.points = std::move(pts);
    std::vector<MemoryRatePair> raw;
    for (const auto& [mr, idx] : curve.points) raw.push_back(mr);
    curve.hull = concave_envelope(std::move(raw));
    return curve;
}

// All (K_w+1)(K_w+2)/2 scheme indices (K_s = 0 keeps only its defined subset).
inline TradeoffCurve tradeoff_curve(const SystemConfig& cfg) {
    std::vector<std::pair<MemoryRatePair, SchemeIndex>> pts;
    for (int p = 0; p <= cfg.num_weak; ++p) {
        for (int q = p; q <= cfg.num_weak; ++q) {
            if (cfg.num_strong == 0 && (p != q || p == cfg.num_weak)) continue;
            SchemeIndex idx{p, q};
            pts.emplace_back(achievable_pair(cfg, idx), idx);
        }
    }
    return curve_from_points(std::move(pts));
}

// Converse: min over non-empty S of F (sum_{k in S} 1/(1-delta_k))^{-1}
// + (M/N) |S ∩ weak|. The exhaustive scan is folded into a per-weak-count
// profile (max harmonic sum per count) so memory sweeps stay cheap.
struct UpperBoundProfile {
    double F = 0.0;
    int num_files = 0;
    std::vector<double> best_harmonic; // index w = |S ∩ weak|; 0 if unattainable

    double at(double M) const {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t w = 0; w < best_harmonic.size(); ++w) {
            if (best_harmonic[w] <= 0.0) continue;
            best = std::min(best, F / best_harmonic[w] +
                                      M / num_files * static_cast<double>(w));
        }
        return best;
    }
};

inline UpperBoundProfile upper_bound_profile(const SystemConfig& cfg) {
    const int K = cfg.total_receivers();
    if (K > 24)
        throw IntractableSize("upper_bound: exhaustive subset search limited to K <= 24");
    UpperBoundProfile prof;
    prof.F = cfg.packet_bits;
    prof.num_files = cfg.num_files;
    prof.best_harmonic.assign(static_cast<std::size_t>(cfg.num_weak) + 1, 0.0);
    std::vector<double> inv(static_cast<std::size_t>(K));
    for (int k = 1; k <= K; ++k)
        inv[static_cast<std::size_t>(k - 1)] = 1.0 / (1.0 - cfg.erasure(k));
    // depth-first walk over all 2^K subsets, tracking the harmonic sum and the
    // weak-member count; empty subset excluded at the leaf.
    struct Walker {
        const std::vector<double>& inv;
        int K, Kw;
        std::vector<double>& best;
        void walk(int k, double h, int w) {
            if (k == K) {
                if (h > 0.0 && h > best[static_cast<std::size_t>(w)])
                    best[static_cast<std::size_t>(w)] = h;
                return;
            }
            walk(k + 1, h, w);
            walk(k + 1, h + inv[static_cast<std::size_t>(k)], w + (k < Kw ? 1 : 0));
        }
    } walker{inv, K, cfg.num_weak, prof.best_harmonic};
    walker.walk(0, 0.0, 0);
    return prof;
}

inline double upper_bound(const SystemConfig& cfg, double M) {
    return upper_bound_profile(cfg).at(M);
}

// closed form for the homogeneous scenario:
// R = F sum(gamma) / ( sum (K_w-i)/(i+1) gamma_i / (1-delta_w) + K_s/(1-delta_s) ).
inline MemoryRatePair homogeneous_pair(const HomogeneousConfig& hcfg, SchemeIndex idx) {
    if (hcfg.num_strong < 1)
        throw InvalidIndex("homogeneous_pair: needs at least one strong receiver");
    if (idx.p < 0 || idx.p > idx.q || idx.q > hcfg.num_weak)
        throw InvalidIndex("homogeneous_pair: need 0 <= p <= q <= K_w");
    if (!(hcfg.delta_strong < hcfg.delta_weak))
        throw NonMonotoneErasures(
            "homogeneous_pair: requires delta_strong < delta_weak strictly");
    const int Kw = hcfg.num_weak;
    const double x = (1.0 - hcfg.delta_strong) / (1.0 - hcfg.delta_weak) - 1.0;
    std::vector<double> g;
    for (int i = idx.p; i <= idx.q; ++i)
        g.push_back(static_cast<double>(binom(Kw, i)) /
                    (static_cast<double>(binom(Kw, idx.p)) *
                     detail::int_pow(static_cast<double>(hcfg.num_strong), i - idx.p)) *
                    detail::int_pow(x, i - idx.p));
    double sum = 0.0, weighted = 0.0, weak_side = 0.0;
    for (int i = idx.p; i <= idx.q; ++i) {
        const double gi = g[static_cast<std::size_t>(i - idx.p)];
        sum += gi;
        weighted += i * gi;
        weak_side += static_cast<double>(Kw - i) / (i + 1) * gi;
    }
    const double denom = weak_side / (1.0 - hcfg.delta_weak) +
                         hcfg.num_strong / (1.0 - hcfg.delta_strong);
    MemoryRatePair mr;
    mr.rate = hcfg.packet_bits * sum / denom;
    mr.memory = hcfg.num_files * weighted / (Kw * sum) * mr.rate;
    return mr;
}

} // namespace scc
