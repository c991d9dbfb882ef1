#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace scc {

// Packed bit container. All bits beyond size() in the last word stay zero, so
// word-wise comparison and XOR are exact.
class BitVector {
public:
    BitVector() = default;
    explicit BitVector(std::int64_t nbits)
        : words_(word_count(nbits), 0), bits_(nbits) {}

    // Fills from raw 64-bit engine draws, one per word (tail bits masked off),
    // so the content is pinned by the seed and the engine algorithm alone.
    static BitVector random(std::int64_t nbits, std::mt19937_64& eng) {
        BitVector v(nbits);
        for (auto& w : v.words_) w = eng();
        v.mask_tail();
        return v;
    }

    std::int64_t size() const { return bits_; }
    bool empty() const { return bits_ == 0; }

    bool get(std::int64_t pos) const {
        return (words_[static_cast<std::size_t>(pos >> 6)] >> (pos & 63)) & 1u;
    }
    void set(std::int64_t pos, bool value) {
        auto& w = words_[static_cast<std::size_t>(pos >> 6)];
        const std::uint64_t bit = std::uint64_t{1} << (pos & 63);
        w = value ? (w | bit) : (w & ~bit);
    }

    // XOR, zero-padding the shorter operand to the longer one.
    void xor_with(const BitVector& other) {
        if (other.bits_ > bits_) {
            bits_ = other.bits_;
            words_.resize(word_count(bits_), 0);
        }
        for (std::size_t t = 0; t < other.words_.size(); ++t) words_[t] ^= other.words_[t];
    }

    BitVector slice(std::int64_t offset, std::int64_t length) const {
        if (offset < 0 || length < 0 || offset + length > bits_)
            throw std::out_of_range("BitVector::slice out of range");
        BitVector out(length);
        const int shift = static_cast<int>(offset & 63);
        const std::size_t base = static_cast<std::size_t>(offset >> 6);
        for (std::size_t t = 0; t < out.words_.size(); ++t) {
            std::uint64_t w = words_[base + t] >> shift;
            if (shift != 0 && base + t + 1 < words_.size())
                w |= words_[base + t + 1] << (64 - shift);
            out.words_[t] = w;
        }
        out.mask_tail();
        return out;
    }

    void append(const BitVector& other) {
        const std::int64_t old_bits = bits_;
        bits_ += other.bits_;
        words_.resize(word_count(bits_), 0);
        const int shift = static_cast<int>(old_bits & 63);
        const std::size_t base = static_cast<std::size_t>(old_bits >> 6);
        for (std::size_t t = 0; t < other.words_.size(); ++t) {
            words_[base + t] |= other.words_[t] << shift;
            if (shift != 0 && base + t + 1 < words_.size())
                words_[base + t + 1] |= other.words_[t] >> (64 - shift);
        }
        mask_tail();
    }

    // Truncates or zero-extends.
    void resize(std::int64_t nbits) {
        words_.resize(word_count(nbits), 0);
        bits_ = nbits;
        mask_tail();
    }

    friend bool operator==(const BitVector& a, const BitVector& b) {
        return a.bits_ == b.bits_ && a.words_ == b.words_;
    }
    friend bool operator!=(const BitVector& a, const BitVector& b) { return !(a == b); }

    bool any() const {
        for (auto w : words_)
            if (w != 0) return true;
        return false;
    }

private:
    static std::size_t word_count(std::int64_t nbits) {
        return static_cast<std::size_t>((nbits + 63) >> 6);
    }
    void mask_tail() {
        const int rem = static_cast<int>(bits_ & 63);
        if (rem != 0 && !words_.empty())
            words_.back() &= (~std::uint64_t{0}) >> (64 - rem);
    }

    std::vector<std::uint64_t> words_;
    std::int64_t bits_ = 0;
};

} // namespace scc
