#pragma once

#include <compare>
#include <string>
#include <string_view>

#include "densitree/int128.hpp"

namespace densitree {

inline constexpr unsigned kMaxDepth = 128;

// A finite 0/1 string of length <= 128 packed big-endian: position 0 is the
// most significant of the `len` low bits, so numeric order of equal-length
// strings is lexicographic order and t⌢b is 2v+b.
struct BitString {
    unsigned len = 0;
    u128 v = 0;

    BitString() = default;
    BitString(unsigned l, u128 val) : len(l), v(val) {
        if (l > kMaxDepth) throw PreconditionError("bit-string longer than " + std::to_string(kMaxDepth));
    }

    static BitString parse(std::string_view s) {
        if (s.size() > kMaxDepth) throw ParseError("bit-string longer than " + std::to_string(kMaxDepth));
        BitString b;
        for (char c : s) {
            if (c != '0' && c != '1') throw ParseError("bit-string may only contain 0 and 1: '" + std::string(s) + "'");
            b.v = (b.v << 1) | static_cast<u128>(c - '0');
            ++b.len;
        }
        return b;
    }

    std::string str() const {
        std::string s(len, '0');
        for (unsigned i = 0; i < len; ++i)
            if (at(i)) s[i] = '1';
        return s;
    }

    bool at(unsigned i) const { return ((v >> (len - 1 - i)) & 1) != 0; }

    BitString child(unsigned b) const { return BitString(len + 1, (v << 1) | static_cast<u128>(b & 1)); }
    BitString prefix(unsigned l) const { return BitString(l, l == 0 ? u128{0} : v >> (len - l)); }
    BitString parent() const { return prefix(len - 1); }

    bool is_prefix_of(const BitString& o) const { return len <= o.len && o.prefix(len).v == v; }

    BitString append(const BitString& o) const {
        if (len + o.len > kMaxDepth) throw PreconditionError("concatenation exceeds maximum depth");
        return BitString(len + o.len, o.len == 128 ? o.v : (v << o.len) | o.v);
    }
    BitString pad_zeros(unsigned total) const {
        if (total < len) throw PreconditionError("padding target shorter than string");
        return BitString(total, total - len >= 128 ? u128{0} : v << (total - len));
    }

    unsigned ones() const { return popcount128(v); }

    // mask with bit i set iff position i is 1, positions read left to right
    u128 position_mask() const {
        u128 m = 0;
        for (unsigned i = 0; i < len; ++i)
            if (at(i)) m |= u128{1} << i;
        return m;
    }

    friend bool operator==(const BitString&, const BitString&) = default;
    // shortlex: shorter first, then lexicographic
    friend std::strong_ordering operator<=>(const BitString& a, const BitString& b) {
        if (a.len != b.len) return a.len <=> b.len;
        return a.v == b.v ? std::strong_ordering::equal : (a.v < b.v ? std::strong_ordering::less : std::strong_ordering::greater);
    }
};

}  // namespace densitree
