#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "scc/errors.hpp"

namespace scc {

// Exact binomial coefficients up to n = 64; every value fits in int64
// (C(64,32) < 2^63), so a Pascal table never overflows.
namespace detail {
constexpr int kBinomMaxN = 64;

inline const std::array<std::array<std::int64_t, kBinomMaxN + 1>, kBinomMaxN + 1>&
binom_table() {
    static const auto table = [] {
        std::array<std::array<std::int64_t, kBinomMaxN + 1>, kBinomMaxN + 1> t{};
        for (int n = 0; n <= kBinomMaxN; ++n) {
            t[n][0] = 1;
            for (int k = 1; k <= n; ++k)
                t[n][k] = t[n - 1][k - 1] + (k <= n - 1 ? t[n - 1][k] : 0);
        }
        return t;
    }();
    return table;
}
} // namespace detail

// k < 0 or k > n yield 0 by convention.
inline std::int64_t binom(int n, int k) {
    if (n < 0 || n > detail::kBinomMaxN)
        throw IndexOutOfRange("binom: n must be in [0, 64], got " + std::to_string(n));
    if (k < 0 || k > n) return 0;
    return detail::binom_table()[n][k];
}

// j-th (1-based) i-element subset of {1, ..., ground} in lexicographic order
// of sorted element lists.
inline std::vector<int> subset_by_index(int ground, int i, std::int64_t j) {
    if (ground < 0 || i < 0 || i > ground)
        throw IndexOutOfRange("subset_by_index: need 0 <= i <= ground, got i=" +
                              std::to_string(i) + " ground=" + std::to_string(ground));
    const std::int64_t count = binom(ground, i);
    if (j < 1 || j > count)
        throw IndexOutOfRange("subset_by_index: j=" + std::to_string(j) +
                              " outside [1, " + std::to_string(count) + "]");
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(i));
    std::int64_t rem = j - 1;
    int next = 1;
    for (int pos = 0; pos < i; ++pos) {
        for (int c = next;; ++c) {
            const std::int64_t block = binom(ground - c, i - pos - 1);
            if (rem < block) {
                out.push_back(c);
                next = c + 1;
                break;
            }
            rem -= block;
        }
    }
    return out;
}

// Inverse of subset_by_index. Elements may be given in any order.
inline std::int64_t index_of_subset(int ground, std::vector<int> subset) {
    std::sort(subset.begin(), subset.end());
    for (std::size_t t = 0; t < subset.size(); ++t) {
        if (subset[t] < 1 || subset[t] > ground)
            throw NotASubset("index_of_subset: element " + std::to_string(subset[t]) +
                             " outside [1, " + std::to_string(ground) + "]");
        if (t > 0 && subset[t] == subset[t - 1])
            throw NotASubset("index_of_subset: duplicate element " +
                             std::to_string(subset[t]));
    }
    const int i = static_cast<int>(subset.size());
    std::int64_t j = 1;
    int prev = 0;
    for (int pos = 0; pos < i; ++pos) {
        for (int c = prev + 1; c < subset[static_cast<std::size_t>(pos)]; ++c)
            j += binom(ground - c, i - pos - 1);
        prev = subset[static_cast<std::size_t>(pos)];
    }
    return j;
}

struct SubsetIndexer {
    int ground_size = 0;
    int subset_size = 0;
    std::int64_t count = 0;

    SubsetIndexer(int ground, int size)
        : ground_size(ground), subset_size(size), count(0) {
        if (ground < 0 || size < 0 || size > ground)
            throw IndexOutOfRange("SubsetIndexer: need 0 <= size <= ground");
        count = binom(ground, size);
    }

    std::vector<int> subset(std::int64_t j) const {
        return subset_by_index(ground_size, subset_size, j);
    }
    std::int64_t index(const std::vector<int>& s) const {
        if (static_cast<int>(s.size()) != subset_size)
            throw NotASubset("SubsetIndexer: wrong subset size");
        return index_of_subset(ground_size, s);
    }
};

} // namespace scc
