#pragma once

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "cvqkd/rng.hpp"

namespace cvqkd {

/// Packed bit string, LSB-first within each 64-bit word.
class BitString {
public:
    BitString() = default;
    explicit BitString(std::size_t nbits) : nbits_(nbits), words_((nbits + 63) / 64, 0) {}

    std::size_t size() const { return nbits_; }
    bool empty() const { return nbits_ == 0; }

    bool get(std::size_t i) const {
        return (words_[i / 64] >> (i % 64)) & 1ULL;
    }

    void set(std::size_t i, bool v) {
        const std::uint64_t mask = 1ULL << (i % 64);
        if (v) words_[i / 64] |= mask;
        else words_[i / 64] &= ~mask;
    }

    void push_back(bool v) {
        if (nbits_ % 64 == 0) words_.push_back(0);
        if (v) words_[nbits_ / 64] |= 1ULL << (nbits_ % 64);
        ++nbits_;
    }

    /// Appends the low `width` bits of `value`, most significant first.
    void append_symbol(std::uint32_t value, int width) {
        for (int b = width - 1; b >= 0; --b) push_back((value >> b) & 1U);
    }

    const std::vector<std::uint64_t>& words() const { return words_; }

    friend bool operator==(const BitString& lhs, const BitString& rhs) {
        return lhs.nbits_ == rhs.nbits_ && lhs.words_ == rhs.words_;
    }

private:
    std::size_t nbits_ = 0;
    std::vector<std::uint64_t> words_;
};

/// Seeded Toeplitz hash over GF(2).
///
/// The family {T_r} of l x m Toeplitz matrices with uniformly random first
/// row/column is universal_2: for any fixed nonzero input difference the
/// collision probability over the seed is exactly 2^-l.
class ToeplitzHasher {
public:
    ToeplitzHasher(std::uint64_t seed, std::size_t out_bits, std::size_t in_bits)
        : out_bits_(out_bits), in_bits_(in_bits) {
        const std::size_t diag_bits = out_bits + (in_bits > 0 ? in_bits - 1 : 0);
        CounterRng rng(seed);
        diag_.resize((diag_bits + 63) / 64 + 1, 0);
        for (auto& w : diag_) w = rng.next_u64();
    }

    BitString hash(const BitString& msg) const {
        if (msg.size() != in_bits_) {
            throw std::invalid_argument("ToeplitzHasher: input length mismatch");
        }
        BitString out(out_bits_);
        const auto& mw = msg.words();
        const std::size_t nwords = (in_bits_ + 63) / 64;
        for (std::size_t i = 0; i < out_bits_; ++i) {
            // Row i of the Toeplitz matrix is diag bits [i, i + m).
            std::uint64_t acc = 0;
            const std::size_t word_off = i / 64;
            const unsigned bit_off = i % 64;
            for (std::size_t w = 0; w < nwords; ++w) {
                std::uint64_t window = diag_[word_off + w] >> bit_off;
                if (bit_off != 0) window |= diag_[word_off + w + 1] << (64 - bit_off);
                acc ^= window & mw[w];
            }
            // Bits of msg beyond in_bits_ are zero by construction.
            out.set(i, std::popcount(acc) & 1U);
        }
        return out;
    }

private:
    std::size_t out_bits_;
    std::size_t in_bits_;
    std::vector<std::uint64_t> diag_;
};

} // namespace cvqkd
