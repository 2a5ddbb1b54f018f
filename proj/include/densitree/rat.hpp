#pragma once

#include <compare>
#include <numeric>
#include <ostream>
#include <string>
#include <string_view>

#include "densitree/int128.hpp"

namespace densitree {

// Exact rational in lowest terms with a positive denominator. Every operation
// is overflow-checked; comparison never overflows (continued-fraction walk).
template <Integer I>
class BasicRat {
public:
    constexpr BasicRat() = default;
    BasicRat(I num) : num_(num), den_(1) {}  // NOLINT(google-explicit-constructor)
    BasicRat(I num, I den) : num_(num), den_(den) {
        if (den_ == 0) throw PreconditionError("rational with zero denominator");
        normalize();
    }

    I num() const { return num_; }
    I den() const { return den_; }

    static BasicRat parse(std::string_view s) {
        auto slash = s.find('/');
        if (slash == std::string_view::npos) return BasicRat(parse_signed<I>(s));
        I n = parse_signed<I>(s.substr(0, slash));
        I d = parse_signed<I>(s.substr(slash + 1));
        if (d == 0) throw ParseError("rational with zero denominator: " + std::string(s));
        return BasicRat(n, d);
    }

    std::string str() const { return to_dec(num_) + "/" + to_dec(den_); }

    friend BasicRat operator+(const BasicRat& a, const BasicRat& b) {
        I g = gcd(a.den_, b.den_);
        I l = checked_mul(a.den_ / g, b.den_);
        return BasicRat(checked_add(checked_mul(a.num_, l / a.den_), checked_mul(b.num_, l / b.den_)), l);
    }
    friend BasicRat operator-(const BasicRat& a) { return BasicRat(checked_sub(I{0}, a.num_), a.den_); }
    friend BasicRat operator-(const BasicRat& a, const BasicRat& b) { return a + (-b); }
    friend BasicRat operator*(const BasicRat& a, const BasicRat& b) {
        I g1 = gcd(a.num_, b.den_), g2 = gcd(b.num_, a.den_);
        return BasicRat(checked_mul(a.num_ / g1, b.num_ / g2), checked_mul(a.den_ / g2, b.den_ / g1));
    }
    friend BasicRat operator/(const BasicRat& a, const BasicRat& b) {
        if (b.num_ == 0) throw PreconditionError("division by zero rational");
        return a * BasicRat(b.den_, b.num_);
    }

    friend bool operator==(const BasicRat& a, const BasicRat& b) { return a.num_ == b.num_ && a.den_ == b.den_; }
    friend std::strong_ordering operator<=>(const BasicRat& a, const BasicRat& b) {
        return compare(a.num_, a.den_, b.num_, b.den_);
    }

    // floor and round-half-up, exact
    I floor() const { return floor_div(num_, den_); }
    I round_half_up() const { return (*this + BasicRat(1, 2)).floor(); }
    bool is_integer() const { return den_ == 1; }

    friend std::ostream& operator<<(std::ostream& os, const BasicRat& r) { return os << r.str(); }

private:
    I num_ = 0;
    I den_ = 1;

    static I abs(I v) { return v < 0 ? checked_sub(I{0}, v) : v; }
    static I gcd(I a, I b) {
        a = abs(a);
        b = abs(b);
        while (b != 0) {
            I t = a % b;
            a = b;
            b = t;
        }
        return a == 0 ? I{1} : a;
    }
    static I floor_div(I a, I b) {
        I q = a / b;
        if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
        return q;
    }
    void normalize() {
        if (den_ < 0) {
            num_ = checked_sub(I{0}, num_);
            den_ = checked_sub(I{0}, den_);
        }
        I g = gcd(num_, den_);
        num_ /= g;
        den_ /= g;
    }
    // a/b vs c/d with b, d > 0
    static std::strong_ordering compare(I a, I b, I c, I d) {
        for (;;) {
            I qa = floor_div(a, b), qc = floor_div(c, d);
            if (qa != qc) return qa <=> qc;
            I ra = a - qa * b, rc = c - qc * d;  // in [0, b) and [0, d)
            if (ra == 0 || rc == 0) return (ra != 0) <=> (rc != 0);
            // ra/b vs rc/d  <=>  d/rc vs b/ra
            I na = d, nb = rc, nc = b, nd = ra;
            a = na;
            b = nb;
            c = nc;
            d = nd;
        }
    }
};

using Rat = BasicRat<std::int64_t>;
using WideRat = BasicRat<i128>;

}  // namespace densitree
