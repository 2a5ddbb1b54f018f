#pragma once

#include <algorithm>
#include <charconv>
#include <concepts>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <type_traits>

#include "densitree/error.hpp"

namespace densitree {

using u128 = unsigned __int128;
using i128 = __int128;

template <class T>
concept Natural = std::same_as<T, std::uint64_t> || std::same_as<T, u128>;

template <class T>
concept Integer = std::same_as<T, std::int64_t> || std::same_as<T, i128>;

template <class T>
inline constexpr T max_of() {
    if constexpr (std::is_same_v<T, u128>) return ~u128{0};
    else if constexpr (std::is_same_v<T, i128>) return static_cast<i128>(~u128{0} >> 1);
    else return std::numeric_limits<T>::max();
}

template <class T>
std::string to_dec(T v) {
    if constexpr (std::is_same_v<T, u128> || std::is_same_v<T, i128>) {
        bool neg = false;
        u128 u;
        if constexpr (std::is_same_v<T, i128>) {
            neg = v < 0;
            u = neg ? u128(0) - static_cast<u128>(v) : static_cast<u128>(v);
        } else {
            u = v;
        }
        std::string s;
        do {
            s.push_back(static_cast<char>('0' + static_cast<int>(u % 10)));
            u /= 10;
        } while (u != 0);
        if (neg) s.push_back('-');
        std::reverse(s.begin(), s.end());
        return s;
    } else {
        return std::to_string(v);
    }
}

// Parses an unsigned decimal; rejects empty input, signs and overflow.
template <class T>
T parse_unsigned(std::string_view s) {
    if (s.empty()) throw ParseError("expected a natural number, got empty text");
    if constexpr (std::is_same_v<T, u128>) {
        u128 v = 0;
        for (char c : s) {
            if (c < '0' || c > '9') throw ParseError("bad digit in '" + std::string(s) + "'");
            u128 nv = v * 10 + static_cast<unsigned>(c - '0');
            if (v > (max_of<u128>() - 9) / 10 && nv / 10 != v)
                throw ParseError("natural number too large: " + std::string(s));
            v = nv;
        }
        return v;
    } else {
        T v{};
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || p != s.data() + s.size())
            throw ParseError("expected a natural number, got '" + std::string(s) + "'");
        return v;
    }
}

template <Integer I>
I parse_signed(std::string_view s) {
    bool neg = !s.empty() && s.front() == '-';
    if (neg) s.remove_prefix(1);
    u128 mag = parse_unsigned<u128>(s);
    u128 lim = static_cast<u128>(max_of<I>());
    if (mag > lim + (neg ? 1 : 0)) throw ParseError("integer out of range");
    I v = static_cast<I>(mag);
    return neg ? static_cast<I>(-v) : v;
}

// Checked arithmetic; the builtins handle both 64- and 128-bit operands.
template <class T>
T checked_add(T a, T b) {
    T r;
    if (__builtin_add_overflow(a, b, &r)) throw OverflowError("integer overflow in addition");
    return r;
}
template <class T>
T checked_sub(T a, T b) {
    T r;
    if (__builtin_sub_overflow(a, b, &r)) throw OverflowError("integer overflow in subtraction");
    return r;
}
template <class T>
T checked_mul(T a, T b) {
    T r;
    if (__builtin_mul_overflow(a, b, &r)) throw OverflowError("integer overflow in multiplication");
    return r;
}

template <class T>
T pow2(unsigned e) {
    if (e >= sizeof(T) * 8 - (std::is_signed_v<T> || std::is_same_v<T, i128> ? 1 : 0))
        throw OverflowError("2^" + std::to_string(e) + " does not fit");
    return T{1} << e;
}

inline unsigned popcount128(u128 v) {
    return static_cast<unsigned>(__builtin_popcountll(static_cast<std::uint64_t>(v)) +
                                 __builtin_popcountll(static_cast<std::uint64_t>(v >> 64)));
}

// Number of bits needed to write v (0 for v == 0).
template <Natural N>
unsigned bit_length(N v) {
    unsigned n = 0;
    while (v != 0) {
        ++n;
        v >>= 1;
    }
    return n;
}

}  // namespace densitree
