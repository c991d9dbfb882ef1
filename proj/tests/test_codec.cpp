#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "scc/channel.hpp"
#include "scc/codec.hpp"
#include "support/symbolic.hpp"

using namespace scc;

namespace {

SystemConfig example1(int files = 20) {
    return HomogeneousConfig{3, 2, files, 10, 0.8, 0.2}.expand();
}

ReceivedFlags full_reception(const SystemConfig& cfg, const DeliveryPlan& plan) {
    return ReceivedFlags(static_cast<std::size_t>(cfg.total_receivers()),
                         std::vector<bool>(plan.messages.size(), true));
}

// blocklength giving every subfile level a healthy bit count at 0.9 R_(p,q)
std::int64_t pick_n(const SystemConfig& cfg, SchemeIndex idx, double R) {
    const auto g = gamma_range(cfg, idx);
    double min_share = 1.0;
    for (double v : g.values) min_share = std::min(min_share, v / g.sum());
    const double n = 64.0 / (R * min_share);
    return std::max<std::int64_t>(2000, static_cast<std::int64_t>(std::ceil(n)));
}

} // namespace

TEST_CASE("placement splits files by the gamma proportions") {
    const auto cfg = example1();
    const SchemeIndex idx{0, 2};
    const double R = achievable_pair(cfg, idx).rate;
    const std::int64_t n = 10000;
    const auto [lib, caches] = place(cfg, idx, 1, n, R);

    CHECK(lib.file_bits == std::llround(n * R));
    REQUIRE(lib.level_len.size() == 3);
    CHECK(lib.level_len[0] + lib.level_len[1] + lib.level_len[2] == lib.file_bits);
    CHECK(lib.level_offset[0] == 0);
    CHECK(lib.level_offset[1] == lib.level_len[0]);
    CHECK(lib.level_offset[2] == lib.level_len[0] + lib.level_len[1]);

    const auto g = gamma_range(cfg, idx);
    for (int i = 0; i < 2; ++i) { // last level absorbs the remainder
        const double share = g.values[static_cast<std::size_t>(i)] / g.sum();
        CHECK(lib.level_len[static_cast<std::size_t>(i)] ==
              static_cast<std::int64_t>(std::floor(lib.file_bits * share)));
    }
    for (int i = 0; i <= 2; ++i)
        CHECK(lib.nominal(i) ==
              (lib.len(i) + binom(3, i) - 1) / binom(3, i));
    REQUIRE(lib.files.size() == 20);
    for (const auto& f : lib.files) CHECK(f.size() == lib.file_bits);
}

TEST_CASE("caches hold exactly the pieces indexed by the receiver") {
    const auto cfg = example1();
    const SchemeIndex idx{0, 2};
    const std::int64_t n = 10000;
    const auto pair = achievable_pair(cfg, idx);
    const auto [lib, caches] = place(cfg, idx, 1, n, pair.rate);

    REQUIRE(caches.size() == 3); // weak receivers only
    for (const auto& z : caches) {
        for (const auto& ref : z.pieces) {
            const auto s = subset_by_index(3, ref.level, ref.subset_index);
            CHECK(std::find(s.begin(), s.end(), z.receiver) != s.end());
        }
        // every piece indexed by k is present: count them
        std::int64_t expect = 0;
        for (int i = idx.p; i <= idx.q; ++i)
            expect += binom(2, i - 1); // subsets of size i containing k
        CHECK(static_cast<std::int64_t>(z.pieces.size()) == 20 * expect);
        // physical cached bits track n * M_(p,q)
        CHECK(std::fabs(static_cast<double>(z.total_bits) - n * pair.memory) <
              200.0); // level rounding slack
    }
}

TEST_CASE("piece extraction is a zero-padded window of the file") {
    const auto cfg = example1(5);
    const SchemeIndex idx{1, 2};
    const auto [lib, caches] = place(cfg, idx, 9, 5000,
                                     0.8 * achievable_pair(cfg, idx).rate);
    for (int i = 1; i <= 2; ++i) {
        for (std::int64_t j = 1; j <= binom(3, i); ++j) {
            const BitVector piece = lib.piece({2, i, j});
            REQUIRE(piece.size() == lib.nominal(i));
            const std::int64_t phys = lib.piece_physical(i, j);
            const BitVector window = lib.files[1].slice(
                lib.offset(i) + (j - 1) * lib.nominal(i), phys);
            for (std::int64_t b = 0; b < phys; ++b)
                REQUIRE(piece.get(b) == window.get(b));
            for (std::int64_t b = phys; b < piece.size(); ++b)
                REQUIRE(piece.get(b) == false);
        }
    }
}

TEST_CASE("placement refuses blocklengths too small to split") {
    const auto cfg = HomogeneousConfig{2, 2, 20, 10, 0.8, 0.2}.expand();
    CHECK_THROWS_AS(place(cfg, {0, 2}, 1, 10, 0.3), PieceTooSmall);
    // zero-rate placement is fine: empty files, no pieces
    const auto [lib, caches] = place(cfg, {0, 2}, 1, 10, 0.0);
    CHECK(lib.file_bits == 0);
}

TEST_CASE("plan structure for the 3+2 worked example") {
    const auto cfg = example1();
    const SchemeIndex idx{0, 2};
    const double R = 0.9 * achievable_pair(cfg, idx).rate;
    const std::int64_t n = pick_n(cfg, idx, R);
    const auto [lib, caches] = place(cfg, idx, 3, n, R);
    const auto plan = build_plan(cfg, idx, all_distinct_demands(cfg), lib, n);

    // 1 multicast + 3x2 + 3x2 joint blocks + 2 unicasts
    REQUIRE(plan.messages.size() == 15);
    int counts[3] = {0, 0, 0};
    std::int64_t packets = 0;
    for (const auto& m : plan.messages) {
        counts[static_cast<int>(m.kind)] += 1;
        packets += m.packets;
    }
    CHECK(counts[0] == 1);
    CHECK(counts[1] == 12);
    CHECK(counts[2] == 2);
    CHECK(packets == n);
}

TEST_CASE("joint-encoding slices partition each sub-message XOR") {
    const auto cfg = example1();
    const SchemeIndex idx{0, 2};
    const double R = 0.9 * achievable_pair(cfg, idx).rate;
    const std::int64_t n = pick_n(cfg, idx, R);
    const auto [lib, caches] = place(cfg, idx, 3, n, R);
    const auto plan = build_plan(cfg, idx, all_distinct_demands(cfg), lib, n);

    std::map<std::pair<int, std::int64_t>, std::pair<std::int64_t, BitVector>> joined;
    for (const auto& m : plan.messages) {
        if (m.kind != CodedMessage::Kind::JointBlock) continue;
        auto& [bits, acc] = joined[{m.level, m.submessage_index}];
        CHECK(m.slice_offset == bits); // contiguous, in period order
        bits += m.weak_bits;
        acc.append(m.weak_payload);
    }
    for (const auto& [key, val] : joined) {
        const auto& [level, j] = key;
        REQUIRE(val.first == lib.nominal(level));
        // the joined slices equal the XOR of the operand pieces
        BitVector expect(lib.nominal(level));
        const auto s = subset_by_index(3, level + 1, j);
        for (int k : s) {
            std::vector<int> rest;
            for (int r : s)
                if (r != k) rest.push_back(r);
            expect.xor_with(lib.piece({k, level, index_of_subset(3, rest)}));
        }
        REQUIRE(val.second == expect);
    }
}

TEST_CASE("per-level weak payload accounting") {
    const auto cfg = example1();
    const SchemeIndex idx{0, 2};
    const double R = 0.9 * achievable_pair(cfg, idx).rate;
    const std::int64_t n = pick_n(cfg, idx, R);
    const auto [lib, caches] = place(cfg, idx, 3, n, R);
    const auto plan = build_plan(cfg, idx, all_distinct_demands(cfg), lib, n);

    std::map<int, std::int64_t> weak_bits_by_level;
    for (const auto& m : plan.messages)
        if (m.kind != CodedMessage::Kind::StrongUnicast)
            weak_bits_by_level[m.level] += m.weak_bits;
    for (int i = idx.p; i <= idx.q; ++i)
        CHECK(weak_bits_by_level[i] == binom(3, i + 1) * lib.nominal(i));
}

TEST_CASE("plan matches the worked 3+2 example row by row") {
    const auto cfg = example1();
    const auto d = all_distinct_demands(cfg); // d_k = k
    const SchemeIndex idx{0, 2};
    const double R = 0.9 * achievable_pair(cfg, idx).rate;
    const std::int64_t n = pick_n(cfg, idx, R);
    const auto [lib, caches] = place(cfg, idx, 3, n, R);
    const auto plan = build_plan(cfg, idx, d, lib, n);

    const auto ref = [&](int file, int level, std::vector<int> subset) {
        return PieceRef{file, level, index_of_subset(3, std::move(subset))};
    };

    // message 1: W_{1,{2,3}} ^ W_{2,{1,3}} ^ W_{3,{1,2}}, all level 2, to 1,2,3
    const auto& m1 = plan.messages[0];
    CHECK(m1.kind == CodedMessage::Kind::WeakMulticast);
    CHECK(m1.weak_targets == std::vector<int>{1, 2, 3});
    REQUIRE(m1.weak_xor_operands.size() == 3);
    CHECK(m1.weak_xor_operands[0] == std::pair<int, PieceRef>{1, ref(1, 2, {2, 3})});
    CHECK(m1.weak_xor_operands[1] == std::pair<int, PieceRef>{2, ref(2, 2, {1, 3})});
    CHECK(m1.weak_xor_operands[2] == std::pair<int, PieceRef>{3, ref(3, 2, {1, 2})});

    // message 2, sub-messages over {1,2},{1,3},{2,3}; strong pieces level 2
    const struct {
        std::vector<int> s;
        std::vector<std::pair<int, std::vector<int>>> ops; // receiver, side subset
    } rows[] = {
        {{1, 2}, {{1, {2}}, {2, {1}}}},
        {{1, 3}, {{1, {3}}, {3, {1}}}},
        {{2, 3}, {{2, {3}}, {3, {2}}}},
    };
    for (int j = 0; j < 3; ++j) {
        for (int m = 0; m < 2; ++m) {
            const auto& msg = plan.messages[1 + static_cast<std::size_t>(2 * j + m)];
            CHECK(msg.kind == CodedMessage::Kind::JointBlock);
            CHECK(msg.level == 1);
            CHECK(msg.weak_targets == rows[j].s);
            CHECK(msg.period == m + 1);
            CHECK(msg.strong_target == 4 + m);
            CHECK(msg.strong_piece == ref(4 + m, 2, rows[j].s));
            REQUIRE(msg.weak_xor_operands.size() == 2);
            for (int t = 0; t < 2; ++t) {
                const auto& [r, side] = rows[j].ops[static_cast<std::size_t>(t)];
                CHECK(msg.weak_xor_operands[static_cast<std::size_t>(t)] ==
                      std::pair<int, PieceRef>{r, ref(r, 1, side)});
            }
        }
    }

    // message 3, sub-messages over {1},{2},{3}; weak payload W_{j,empty}^{(0)}
    for (int j = 0; j < 3; ++j) {
        for (int m = 0; m < 2; ++m) {
            const auto& msg = plan.messages[7 + static_cast<std::size_t>(2 * j + m)];
            CHECK(msg.kind == CodedMessage::Kind::JointBlock);
            CHECK(msg.level == 0);
            CHECK(msg.weak_targets == std::vector<int>{j + 1});
            CHECK(msg.strong_target == 4 + m);
            CHECK(msg.strong_piece == ref(4 + m, 1, {j + 1}));
            REQUIRE(msg.weak_xor_operands.size() == 1);
            CHECK(msg.weak_xor_operands[0] ==
                  std::pair<int, PieceRef>{j + 1, ref(j + 1, 0, {})});
        }
    }

    // message 4: whole level-0 subfiles to receivers 4 and 5
    for (int m = 0; m < 2; ++m) {
        const auto& msg = plan.messages[13 + static_cast<std::size_t>(m)];
        CHECK(msg.kind == CodedMessage::Kind::StrongUnicast);
        CHECK(msg.strong_target == 4 + m);
        CHECK(msg.strong_bits == lib.len(0));
        CHECK(msg.strong_payload == lib.subfile(4 + m, 0));
    }
}

TEST_CASE("erasure-free decoding is bit-exact for every receiver") {
    const auto cfg = example1(5);
    for (const SchemeIndex idx : {SchemeIndex{0, 2}, SchemeIndex{1, 3}, SchemeIndex{2, 2}}) {
        const double R = 0.9 * achievable_pair(cfg, idx).rate;
        const std::int64_t n = pick_n(cfg, idx, R);
        const auto [lib, caches] = place(cfg, idx, 11, n, R);
        for (const auto& d : {all_distinct_demands(cfg), all_equal_demands(cfg)}) {
            const auto plan = build_plan(cfg, idx, d, lib, n);
            const auto res = decode(cfg, plan, full_reception(cfg, plan), caches, d);
            for (int k = 1; k <= 5; ++k) {
                REQUIRE(res.success[static_cast<std::size_t>(k - 1)]);
                REQUIRE(res.reconstructed[static_cast<std::size_t>(k - 1)] ==
                        lib.files[static_cast<std::size_t>(
                            d.demands[static_cast<std::size_t>(k - 1)] - 1)]);
            }
            CHECK(scc_test::all_symbolically_decodable(cfg, plan, caches, d));
        }
    }
}

TEST_CASE("a lost payload fails exactly its targets") {
    const auto cfg = example1(5);
    const SchemeIndex idx{0, 2};
    const double R = 0.9 * achievable_pair(cfg, idx).rate;
    const std::int64_t n = pick_n(cfg, idx, R);
    const auto [lib, caches] = place(cfg, idx, 5, n, R);
    const auto d = all_distinct_demands(cfg);
    const auto plan = build_plan(cfg, idx, d, lib, n);

    // drop message 1 for receiver 1 only: receiver 1 misses one level-2 piece
    auto flags = full_reception(cfg, plan);
    flags[0][0] = false;
    auto res = decode(cfg, plan, flags, caches, d);
    CHECK_FALSE(res.success[0]);
    for (int k = 2; k <= 5; ++k) CHECK(res.success[static_cast<std::size_t>(k - 1)]);

    // drop one joint-encoding period for its strong target
    std::size_t je = 0;
    while (plan.messages[je].kind != CodedMessage::Kind::JointBlock) ++je;
    const int strong = plan.messages[je].strong_target;
    flags = full_reception(cfg, plan);
    flags[static_cast<std::size_t>(strong - 1)][je] = false;
    res = decode(cfg, plan, flags, caches, d);
    for (int k = 1; k <= 5; ++k)
        CHECK(res.success[static_cast<std::size_t>(k - 1)] == (k != strong));

    // a weak receiver losing one period of a sub-message loses the whole XOR
    const auto& je_msg = plan.messages[je];
    const int weak = je_msg.weak_targets.front();
    flags = full_reception(cfg, plan);
    flags[static_cast<std::size_t>(weak - 1)][je] = false;
    res = decode(cfg, plan, flags, caches, d);
    CHECK_FALSE(res.success[static_cast<std::size_t>(weak - 1)]);
}

TEST_CASE("plans without strong receivers reduce to pure multicasting") {
    SystemConfig cfg;
    cfg.num_weak = 3;
    cfg.num_strong = 0;
    cfg.num_files = 3;
    cfg.packet_bits = 10;
    cfg.erasures = {0.5, 0.5, 0.5};
    validate_config(cfg);
    const SchemeIndex idx{1, 1};
    const double R = 0.9 * achievable_pair(cfg, idx).rate;
    const std::int64_t n = pick_n(cfg, idx, R);
    const auto [lib, caches] = place(cfg, idx, 21, n, R);
    const auto d = all_distinct_demands(cfg);
    const auto plan = build_plan(cfg, idx, d, lib, n);

    REQUIRE(plan.messages.size() == 3); // C(3,2) multicasts, nothing else
    for (const auto& m : plan.messages)
        CHECK(m.kind == CodedMessage::Kind::WeakMulticast);
    const auto res = decode(cfg, plan, full_reception(cfg, plan), caches, d);
    for (int k = 1; k <= 3; ++k) REQUIRE(res.success[static_cast<std::size_t>(k - 1)]);
    CHECK(scc_test::all_symbolically_decodable(cfg, plan, caches, d));
}

TEST_CASE("infeasible rates overflow the block") {
    const auto cfg = HomogeneousConfig{2, 2, 20, 10, 0.8, 0.2}.expand();
    const SchemeIndex idx{0, 2};
    const double R = 1.1 * achievable_pair(cfg, idx).rate;
    const std::int64_t n = 100000;
    const auto [lib, caches] = place(cfg, idx, 1, n, R);
    CHECK_THROWS_AS(build_plan(cfg, idx, all_distinct_demands(cfg), lib, n),
                    AllocationOverflow);
}

TEST_CASE("period packet assignment uses the whole block") {
    const std::vector<double> betas = {0.305, 0.305, 0.29};
    const auto packets = detail::period_packets(betas, 100);
    REQUIRE(packets.size() == 3);
    CHECK(packets[0] + packets[1] + packets[2] == 100);
    for (std::size_t t = 0; t < 3; ++t)
        CHECK(packets[t] >= static_cast<std::int64_t>(std::ceil(betas[t] * 100 - 1e-12)));
    CHECK(detail::period_packets({0.0, 0.0}, 50) == std::vector<std::int64_t>{0, 0});
    CHECK_THROWS_AS(detail::period_packets({0.6, 0.6}, 100), AllocationOverflow);
}

TEST_CASE("plan dump is valid JSON lines") {
    const auto cfg = example1(5);
    const SchemeIndex idx{0, 2};
    const double R = 0.9 * achievable_pair(cfg, idx).rate;
    const std::int64_t n = pick_n(cfg, idx, R);
    const auto [lib, caches] = place(cfg, idx, 2, n, R);
    const auto plan = build_plan(cfg, idx, all_distinct_demands(cfg), lib, n);

    std::ostringstream os;
    dump_plan_jsonl(plan, os);
    std::istringstream is(os.str());
    std::string line;
    std::size_t rows = 0;
    std::int64_t packets = 0;
    while (std::getline(is, line)) {
        const auto j = nlohmann::json::parse(line);
        REQUIRE(j.contains("kind"));
        REQUIRE(j.contains("message"));
        REQUIRE(j.contains("submessage"));
        REQUIRE(j.contains("level"));
        REQUIRE(j.contains("subset"));
        REQUIRE(j.contains("period"));
        REQUIRE(j.contains("payload_bits"));
        REQUIRE(j.contains("packets"));
        packets += j.at("packets").get<std::int64_t>();
        ++rows;
    }
    CHECK(rows == plan.messages.size());
    CHECK(packets == n);
}
