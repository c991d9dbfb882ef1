#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <ostream>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "scc/bitvec.hpp"
#include "scc/combinatorics.hpp"
#include "scc/errors.hpp"
#include "scc/model.hpp"
#include "scc/rates.hpp"

namespace scc {

// Identifies one piece W_{file, S}^(level); subset_index is the 1-based
// lexicographic rank of S among the binom(K_w, level) subsets of that level.
struct PieceRef {
    int file = 0;
    int level = 0;
    std::int64_t subset_index = 0;
};

inline bool operator==(const PieceRef& a, const PieceRef& b) {
    return a.file == b.file && a.level == b.level && a.subset_index == b.subset_index;
}
inline bool operator<(const PieceRef& a, const PieceRef& b) {
    if (a.file != b.file) return a.file < b.file;
    if (a.level != b.level) return a.level < b.level;
    return a.subset_index < b.subset_index;
}

// N files of file_bits = round(n R) bits each. Subfile i spans len(i) bits
// (floor of the gamma share, remainder appended to the last level) and splits
// into binom(K_w, i) pieces of nominal length ceil(len / count); trailing
// pieces may be physically shorter and are zero-padded on extraction.
struct Library {
    int num_files = 0;
    int num_weak = 0;
    SchemeIndex idx;
    std::int64_t file_bits = 0;
    std::vector<std::int64_t> level_len;     // index i - p
    std::vector<std::int64_t> level_offset;  // within a file
    std::vector<std::int64_t> piece_nominal; // P_i
    std::vector<BitVector> files;

    std::int64_t len(int level) const {
        return level_len[static_cast<std::size_t>(level - idx.p)];
    }
    std::int64_t offset(int level) const {
        return level_offset[static_cast<std::size_t>(level - idx.p)];
    }
    std::int64_t nominal(int level) const {
        return piece_nominal[static_cast<std::size_t>(level - idx.p)];
    }
    std::int64_t piece_physical(int level, std::int64_t j) const {
        const std::int64_t start = (j - 1) * nominal(level);
        return std::clamp<std::int64_t>(len(level) - start, 0, nominal(level));
    }
    // Nominal-length extraction, zero-padded beyond the physical bits.
    BitVector piece(const PieceRef& ref) const {
        const std::int64_t phys = piece_physical(ref.level, ref.subset_index);
        BitVector out = files[static_cast<std::size_t>(ref.file - 1)].slice(
            offset(ref.level) + (ref.subset_index - 1) * nominal(ref.level), phys);
        out.resize(nominal(ref.level));
        return out;
    }
    BitVector subfile(int file, int level) const {
        return files[static_cast<std::size_t>(file - 1)].slice(offset(level), len(level));
    }
};

// Z_k as piece references; the bits live in the Library.
struct CacheContents {
    int receiver = 0;
    std::vector<PieceRef> pieces;
    std::int64_t total_bits = 0; // physical cached bits
};

inline std::pair<Library, std::vector<CacheContents>>
place(const SystemConfig& cfg, SchemeIndex idx, std::uint64_t library_seed,
      std::int64_t n, double R) {
    validate_index(cfg, idx);
    if (n < 1) throw std::invalid_argument("place: n must be positive");
    if (R < 0.0) throw std::invalid_argument("place: R must be non-negative");

    Library lib;
    lib.num_files = cfg.num_files;
    lib.num_weak = cfg.num_weak;
    lib.idx = idx;
    lib.file_bits = std::llround(static_cast<double>(n) * R);

    const GammaCoefficients g = gamma_range(cfg, idx);
    const double sum = g.sum();
    std::int64_t assigned = 0;
    for (int i = idx.p; i <= idx.q; ++i) {
        const double share = g.values[static_cast<std::size_t>(i - idx.p)] / sum;
        const std::int64_t len = static_cast<std::int64_t>(
            std::floor(static_cast<double>(lib.file_bits) * share));
        lib.level_len.push_back(len);
        assigned += len;
    }
    lib.level_len.back() += lib.file_bits - assigned; // remainder to the last level
    std::int64_t off = 0;
    for (std::size_t t = 0; t < lib.level_len.size(); ++t) {
        lib.level_offset.push_back(off);
        off += lib.level_len[t];
        const std::int64_t count = binom(cfg.num_weak, idx.p + static_cast<int>(t));
        if (lib.file_bits > 0 && lib.level_len[t] < 1)
            throw PieceTooSmall("place: subfile level " +
                                std::to_string(idx.p + static_cast<int>(t)) +
                                " has no bits at n=" + std::to_string(n));
        lib.piece_nominal.push_back(count == 0 ? 0 : (lib.level_len[t] + count - 1) / count);
    }

    std::mt19937_64 eng(library_seed);
    for (int f = 1; f <= cfg.num_files; ++f)
        lib.files.push_back(BitVector::random(lib.file_bits, eng));

    std::vector<CacheContents> caches;
    for (int k = 1; k <= cfg.num_weak; ++k) {
        CacheContents z;
        z.receiver = k;
        for (int f = 1; f <= cfg.num_files; ++f) {
            for (int i = idx.p; i <= idx.q; ++i) {
                const SubsetIndexer sub(cfg.num_weak, i);
                for (std::int64_t j = 1; j <= sub.count; ++j) {
                    const auto s = sub.subset(j);
                    if (std::find(s.begin(), s.end(), k) == s.end()) continue;
                    z.pieces.push_back({f, i, j});
                    z.total_bits += lib.piece_physical(i, j);
                }
            }
        }
        caches.push_back(std::move(z));
    }
    return {std::move(lib), std::move(caches)};
}

struct CodedMessage {
    enum class Kind { WeakMulticast, JointBlock, StrongUnicast };

    Kind kind = Kind::WeakMulticast;
    int message_index = 0;           // 1..q-p+2
    std::int64_t submessage_index = 0;
    int period = 0;                  // m for JointBlock, 0 otherwise
    int level = 0;                   // weak level i (WeakMulticast: q; StrongUnicast: p)
    std::vector<int> weak_targets;   // S_j, empty for StrongUnicast
    int strong_target = 0;           // K_w + m (JointBlock) or l (StrongUnicast)

    // weak payload: for WeakMulticast the full XOR V_j; for JointBlock the slice
    // V_{j,m} = V_j[slice_offset, slice_offset + weak_bits)
    std::vector<std::pair<int, PieceRef>> weak_xor_operands; // (receiver, piece)
    std::int64_t slice_offset = 0;
    std::int64_t weak_bits = 0;
    BitVector weak_payload;

    PieceRef strong_piece;           // JointBlock only
    std::int64_t strong_bits = 0;    // JointBlock: nominal piece; StrongUnicast: len(p)
    BitVector strong_payload;

    std::int64_t packets = 0;        // period length in channel uses
};

struct DeliveryPlan {
    SchemeIndex idx;
    std::int64_t n = 0;
    DemandVector demands;
    TimeAllocation allocation;
    std::vector<CodedMessage> messages;
    const Library* library = nullptr;
};

namespace detail {

// ceil(beta n) per period is the feasibility gate; the leftover channel uses
// are then spread proportionally to beta (largest remainder, ties to the
// earlier period) so the whole blocklength is used.
inline std::vector<std::int64_t> period_packets(const std::vector<double>& betas,
                                                std::int64_t n) {
    std::vector<std::int64_t> packets(betas.size(), 0);
    double beta_sum = 0.0;
    std::int64_t used = 0;
    for (std::size_t t = 0; t < betas.size(); ++t) {
        packets[t] = static_cast<std::int64_t>(
            std::ceil(betas[t] * static_cast<double>(n) - 1e-12));
        if (betas[t] > 0.0 && packets[t] < 1) packets[t] = 1;
        used += packets[t];
        beta_sum += betas[t];
    }
    if (used > n)
        throw AllocationOverflow("build_plan: allocation needs " + std::to_string(used) +
                                 " packets, blocklength is " + std::to_string(n));
    if (beta_sum <= 0.0) return packets;
    std::int64_t leftover = n - used;
    std::vector<double> frac(betas.size(), 0.0);
    for (std::size_t t = 0; t < betas.size(); ++t) {
        const double share = static_cast<double>(leftover) * betas[t] / beta_sum;
        const std::int64_t whole = static_cast<std::int64_t>(std::floor(share));
        packets[t] += whole;
        frac[t] = share - static_cast<double>(whole);
    }
    std::int64_t spent = 0;
    for (std::size_t t = 0; t < betas.size(); ++t)
        spent += packets[t];
    std::vector<std::size_t> order(betas.size());
    for (std::size_t t = 0; t < order.size(); ++t) order[t] = t;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
    for (std::size_t t = 0; spent < n && t < order.size(); ++t, ++spent)
        packets[order[t]] += 1;
    return packets;
}

} // namespace detail

inline DeliveryPlan build_plan(const SystemConfig& cfg, SchemeIndex idx,
                               const DemandVector& demands, const Library& lib,
                               std::int64_t n) {
    validate_index(cfg, idx);
    validate_demands(cfg, demands);
    if (!(lib.idx == idx) || lib.num_weak != cfg.num_weak ||
        lib.num_files != cfg.num_files)
        throw std::invalid_argument("build_plan: library built for a different scheme");

    const int Kw = cfg.num_weak;
    const int Ks = cfg.num_strong;
    const auto d = [&](int k) { return demands.demands[static_cast<std::size_t>(k - 1)]; };

    DeliveryPlan plan;
    plan.idx = idx;
    plan.n = n;
    plan.demands = demands;
    plan.library = &lib;
    plan.allocation = time_allocation(
        cfg, idx, static_cast<double>(lib.file_bits) / static_cast<double>(n));

    std::vector<double> betas_flat;

    // message 1: XOR multicasts V_j^(q), absent when q = K_w
    if (idx.q < Kw) {
        const SubsetIndexer sub(Kw, idx.q + 1);
        for (std::int64_t j = 1; j <= sub.count; ++j) {
            const auto s = sub.subset(j);
            CodedMessage msg;
            msg.kind = CodedMessage::Kind::WeakMulticast;
            msg.message_index = 1;
            msg.submessage_index = j;
            msg.level = idx.q;
            msg.weak_targets = s;
            msg.weak_bits = lib.nominal(idx.q);
            msg.weak_payload = BitVector(msg.weak_bits);
            for (int k : s) {
                std::vector<int> rest;
                for (int r : s)
                    if (r != k) rest.push_back(r);
                PieceRef ref{d(k), idx.q, index_of_subset(Kw, rest)};
                msg.weak_payload.xor_with(lib.piece(ref));
                msg.weak_xor_operands.emplace_back(k, ref);
            }
            betas_flat.push_back(plan.allocation.periods[0][static_cast<std::size_t>(j - 1)][0]);
            plan.messages.push_back(std::move(msg));
        }
    }

    // messages 2..q-p+1: joint-encoding periods
    for (int i = idx.q - 1; i >= idx.p; --i) {
        const int t = idx.q - i; // slot in allocation.periods
        const SubsetIndexer sub(Kw, i + 1);
        for (std::int64_t j = 1; j <= sub.count; ++j) {
            const auto s = sub.subset(j);
            BitVector v(lib.nominal(i));
            std::vector<std::pair<int, PieceRef>> operands;
            for (int k : s) {
                std::vector<int> rest;
                for (int r : s)
                    if (r != k) rest.push_back(r);
                PieceRef ref{d(k), i, index_of_subset(Kw, rest)};
                v.xor_with(lib.piece(ref));
                operands.emplace_back(k, ref);
            }
            const std::int64_t slice_nominal = (lib.nominal(i) + Ks - 1) / Ks;
            for (int m = 1; m <= Ks; ++m) {
                CodedMessage msg;
                msg.kind = CodedMessage::Kind::JointBlock;
                msg.message_index = t + 1;
                msg.submessage_index = j;
                msg.period = m;
                msg.level = i;
                msg.weak_targets = s;
                msg.strong_target = Kw + m;
                msg.weak_xor_operands = operands;
                msg.slice_offset = std::min<std::int64_t>((m - 1) * slice_nominal,
                                                          lib.nominal(i));
                const std::int64_t end =
                    std::min<std::int64_t>(m * slice_nominal, lib.nominal(i));
                msg.weak_bits = end - msg.slice_offset;
                msg.weak_payload = v.slice(msg.slice_offset, msg.weak_bits);
                msg.strong_piece = PieceRef{d(Kw + m), i + 1, j};
                msg.strong_bits = lib.nominal(i + 1);
                msg.strong_payload = lib.piece(msg.strong_piece);
                betas_flat.push_back(
                    plan.allocation.periods[static_cast<std::size_t>(t)]
                                           [static_cast<std::size_t>(j - 1)]
                                           [static_cast<std::size_t>(m - 1)]);
                plan.messages.push_back(std::move(msg));
            }
        }
    }

    // last message: whole-subfile unicasts to the strong receivers
    for (int m = 1; m <= Ks; ++m) {
        const int l = Kw + m;
        CodedMessage msg;
        msg.kind = CodedMessage::Kind::StrongUnicast;
        msg.message_index = idx.q - idx.p + 2;
        msg.submessage_index = m;
        msg.level = idx.p;
        msg.strong_target = l;
        msg.strong_bits = lib.len(idx.p);
        msg.strong_payload = lib.subfile(d(l), idx.p);
        betas_flat.push_back(
            plan.allocation.periods.back()[static_cast<std::size_t>(m - 1)][0]);
        plan.messages.push_back(std::move(msg));
    }

    const auto packets = detail::period_packets(betas_flat, n);
    for (std::size_t t = 0; t < plan.messages.size(); ++t)
        plan.messages[t].packets = packets[t];
    return plan;
}

struct DecodingResult {
    std::vector<bool> success;            // per receiver
    std::vector<BitVector> reconstructed; // per receiver (zeros where undecodable)
};

// received[k-1][t]: did receiver k decode its payload of plan.messages[t]?
using ReceivedFlags = std::vector<std::vector<bool>>;

inline DecodingResult decode(const SystemConfig& cfg, const DeliveryPlan& plan,
                             const ReceivedFlags& received,
                             const std::vector<CacheContents>& caches,
                             const DemandVector& demands) {
    const Library& lib = *plan.library;
    const int Kw = cfg.num_weak;
    const int K = cfg.total_receivers();
    const SchemeIndex idx = plan.idx;
    const auto d = [&](int k) { return demands.demands[static_cast<std::size_t>(k - 1)]; };

    DecodingResult out;
    out.success.assign(static_cast<std::size_t>(K), false);
    out.reconstructed.assign(static_cast<std::size_t>(K), BitVector(lib.file_bits));

    std::vector<std::set<PieceRef>> cached(static_cast<std::size_t>(K));
    for (const CacheContents& z : caches)
        for (const PieceRef& ref : z.pieces)
            cached[static_cast<std::size_t>(z.receiver - 1)].insert(ref);

    // weak receivers: cached pieces plus pieces stripped out of delivered XORs
    for (int k = 1; k <= Kw; ++k) {
        const auto& side_info = cached[static_cast<std::size_t>(k - 1)];
        bool complete = true;
        std::map<std::pair<int, std::int64_t>, BitVector> recovered; // (level, j) -> bits
        // joint-encoding slices must be present for all K_s periods of a sub-message
        std::map<std::pair<int, std::int64_t>, std::pair<int, BitVector>> slices;
        for (std::size_t t = 0; t < plan.messages.size(); ++t) {
            const CodedMessage& msg = plan.messages[t];
            const bool targeted =
                std::find(msg.weak_targets.begin(), msg.weak_targets.end(), k) !=
                msg.weak_targets.end();
            if (!targeted) continue;
            if (!received[static_cast<std::size_t>(k - 1)][t]) {
                complete = false;
                continue;
            }
            if (msg.kind == CodedMessage::Kind::WeakMulticast) {
                BitVector piece = msg.weak_payload;
                PieceRef mine;
                bool stripped = true;
                for (const auto& [r, ref] : msg.weak_xor_operands) {
                    if (r == k) {
                        mine = ref;
                    } else if (side_info.count(ref)) {
                        piece.xor_with(lib.piece(ref));
                    } else {
                        stripped = false;
                    }
                }
                if (stripped)
                    recovered[{mine.level, mine.subset_index}] = std::move(piece);
                else
                    complete = false;
            } else if (msg.kind == CodedMessage::Kind::JointBlock) {
                auto& entry = slices[{msg.level, msg.submessage_index}];
                entry.first += 1;
                // periods arrive in order m = 1..K_s within a sub-message
                entry.second.append(msg.weak_payload);
                if (entry.first == cfg.num_strong) {
                    BitVector piece = entry.second;
                    PieceRef mine;
                    bool stripped = true;
                    for (const auto& [r, ref] : msg.weak_xor_operands) {
                        if (r == k) {
                            mine = ref;
                        } else if (side_info.count(ref)) {
                            piece.xor_with(lib.piece(ref));
                        } else {
                            stripped = false;
                        }
                    }
                    if (stripped)
                        recovered[{mine.level, mine.subset_index}] = std::move(piece);
                    else
                        complete = false;
                }
            }
        }
        // assemble the demanded file level by level
        BitVector file(0);
        for (int i = idx.p; i <= idx.q; ++i) {
            const SubsetIndexer sub(Kw, i);
            BitVector level(0);
            for (std::int64_t j = 1; j <= sub.count; ++j) {
                if (side_info.count({d(k), i, j})) {
                    level.append(lib.piece({d(k), i, j}));
                } else if (auto it = recovered.find({i, j}); it != recovered.end()) {
                    level.append(it->second);
                } else {
                    complete = false;
                    level.append(BitVector(lib.nominal(i)));
                }
            }
            level.resize(lib.len(i)); // drop nominal padding
            file.append(level);
        }
        out.reconstructed[static_cast<std::size_t>(k - 1)] = file;
        out.success[static_cast<std::size_t>(k - 1)] =
            complete && file == lib.files[static_cast<std::size_t>(d(k) - 1)];
    }

    // strong receivers: level p from the unicast, levels p+1..q from their own
    // period of every joint-encoding sub-message
    for (int l = Kw + 1; l <= K; ++l) {
        bool complete = true;
        std::map<std::pair<int, std::int64_t>, BitVector> got; // (level, j) -> piece
        BitVector base(0);
        bool have_base = false;
        for (std::size_t t = 0; t < plan.messages.size(); ++t) {
            const CodedMessage& msg = plan.messages[t];
            if (msg.strong_target != l) continue;
            if (!received[static_cast<std::size_t>(l - 1)][t]) {
                complete = false;
                continue;
            }
            if (msg.kind == CodedMessage::Kind::JointBlock)
                got[{msg.strong_piece.level, msg.strong_piece.subset_index}] =
                    msg.strong_payload;
            else if (msg.kind == CodedMessage::Kind::StrongUnicast) {
                base = msg.strong_payload;
                have_base = true;
            }
        }
        BitVector file(0);
        if (have_base)
            file.append(base);
        else {
            complete = false;
            file.append(BitVector(lib.len(idx.p)));
        }
        for (int i = idx.p + 1; i <= idx.q; ++i) {
            BitVector level(0);
            const std::int64_t count = binom(Kw, i);
            for (std::int64_t j = 1; j <= count; ++j) {
                if (auto it = got.find({i, j}); it != got.end()) {
                    level.append(it->second);
                } else {
                    complete = false;
                    level.append(BitVector(lib.nominal(i)));
                }
            }
            level.resize(lib.len(i));
            file.append(level);
        }
        out.reconstructed[static_cast<std::size_t>(l - 1)] = file;
        out.success[static_cast<std::size_t>(l - 1)] =
            complete && file == lib.files[static_cast<std::size_t>(d(l) - 1)];
    }
    return out;
}

inline const char* kind_name(CodedMessage::Kind k) {
    switch (k) {
        case CodedMessage::Kind::WeakMulticast: return "WeakMulticast";
        case CodedMessage::Kind::JointBlock: return "JointBlock";
        case CodedMessage::Kind::StrongUnicast: return "StrongUnicast";
    }
    return "?";
}

// JSON-lines dump, one CodedMessage per line.
inline void dump_plan_jsonl(const DeliveryPlan& plan, std::ostream& os) {
    for (const CodedMessage& msg : plan.messages) {
        nlohmann::json line{{"kind", kind_name(msg.kind)},
                            {"message", msg.message_index},
                            {"submessage", msg.submessage_index},
                            {"level", msg.level},
                            {"subset", msg.weak_targets},
                            {"period", msg.period},
                            {"payload_bits", msg.weak_bits + msg.strong_bits},
                            {"packets", msg.packets}};
        if (msg.kind == CodedMessage::Kind::JointBlock) {
            line["weak_bits"] = msg.weak_bits;
            line["strong_bits"] = msg.strong_bits;
            line["strong_target"] = msg.strong_target;
        }
        if (msg.kind == CodedMessage::Kind::StrongUnicast)
            line["strong_target"] = msg.strong_target;
        os << line.dump() << "\n";
    }
}

} // namespace scc
