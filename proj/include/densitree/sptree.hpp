#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <optional>
#include <string>
#include <vector>

#include "densitree/bits.hpp"
#include "densitree/tree.hpp"

namespace densitree {

inline constexpr unsigned kSpMaxDepth = 127;  // ℓ_7

// ℓ_n = 2^n - 1 for n <= N.
struct EpochSeq {
    std::vector<std::uint64_t> entries;

    explicit EpochSeq(unsigned N) {
        if (N > 63) throw PreconditionError("epoch index too large");
        for (unsigned n = 0; n <= N; ++n) entries.push_back((std::uint64_t{1} << n) - 1);
    }
    // the n with ℓ_n <= len < ℓ_{n+1}
    static unsigned epoch_of(std::uint64_t len) { return static_cast<unsigned>(bit_length(u128{len + 1}) - 1); }
    static std::uint64_t epoch_end(std::uint64_t len) { return (std::uint64_t{2} << epoch_of(len)) - 1; }
};

// Index of t in length-then-lex order.
inline u128 code_map(const BitString& t) {
    if (t.len >= 128) throw OverflowError("code of a 128-bit string exceeds 128 bits");
    return (u128{1} << t.len) - 1 + t.v;
}

struct Slalom {
    std::vector<std::uint64_t> f;     // widths, f(n) >= 1
    std::vector<std::vector<u128>> S; // S(n), |S(n)| <= f(n)

    Slalom(std::vector<std::uint64_t> widths, std::vector<std::vector<u128>> sets) : f(std::move(widths)), S(std::move(sets)) {
        if (f.size() != S.size()) throw PreconditionError("slalom needs one set per width");
        for (std::size_t n = 0; n < f.size(); ++n) {
            if (f[n] < 1) throw PreconditionError("slalom widths must be positive");
            std::sort(S[n].begin(), S[n].end());
            S[n].erase(std::unique(S[n].begin(), S[n].end()), S[n].end());
            if (S[n].size() > f[n]) throw PreconditionError("slalom set " + std::to_string(n) + " exceeds its width");
        }
    }
    bool captures(std::size_t n, u128 code) const { return std::binary_search(S.at(n).begin(), S.at(n).end(), code); }
};

// -- T0 and p ---------------------------------------------------------------------

// In epoch n (levels ℓ_n .. ℓ_{n+1}), list Lev_{ℓ_n} as s_0 < ... < s_{ℓ_n};
// every node gets its 0-child and at level ℓ_n + i only s_i⌢0^i also gets a 1-child.
inline TreeSlice sp_T0(unsigned L) {
    if (L > kSpMaxDepth) throw PreconditionError("depth exceeds " + std::to_string(kSpMaxDepth));
    std::vector<std::vector<u128>> lv{{0}};
    std::vector<u128> base;
    for (unsigned pos = 0; pos < L; ++pos) {
        unsigned n = EpochSeq::epoch_of(pos);
        std::uint64_t ln = (std::uint64_t{1} << n) - 1;
        if (pos == ln) base = lv[pos];
        u128 grow = base[pos - ln] << (pos - ln);  // s_i⌢0^i
        std::vector<u128> next;
        next.reserve(lv[pos].size() + 1);
        for (u128 v : lv[pos]) {
            next.push_back(v << 1);
            if (v == grow) next.push_back((v << 1) | 1);
        }
        lv.push_back(std::move(next));
    }
    return TreeSlice::from_levels(L, std::move(lv), false);
}

namespace detail {
inline bool level_has(const std::vector<u128>& lv, u128 v) { return std::binary_search(lv.begin(), lv.end(), v); }
}  // namespace detail

struct SpBuild {
    TreeSlice p;
    unsigned rounds = 0;  // number of T_m beyond T_0 that contributed nodes
};

// p = ⋃ T_m to depth L: T_{-1} = {∅}, T_0 as above, T_{m+1} grafts a copy of
// T_0 above u⌢0..0 (padded to the end of u's epoch) for each splitting node u
// of T_m not in T_{m-1}.
inline SpBuild sp_p_build(unsigned L) {
    TreeSlice t0 = sp_T0(L);
    using Levels = std::vector<std::vector<u128>>;
    Levels p(L + 1), cur(L + 1), prev(L + 1);
    for (unsigned l = 0; l <= L; ++l) p[l] = cur[l] = t0.level(l);
    prev[0] = {0};
    unsigned rounds = 0;
    for (;;) {
        // roots grouped by length; lengths are epoch ends, so at most 8 groups
        std::vector<std::vector<u128>> roots(L + 1);
        bool any_root = false;
        for (unsigned l = 0; l < L; ++l) {
            const auto& up = cur[l + 1];
            for (u128 u : cur[l]) {
                if (!detail::level_has(up, u << 1) || !detail::level_has(up, (u << 1) | 1)) continue;
                if (detail::level_has(prev[l], u)) continue;
                unsigned e = static_cast<unsigned>(EpochSeq::epoch_end(l));
                if (e > L) continue;
                any_root = true;
                roots[e].push_back(u << (e - l));
            }
        }
        if (!any_root) break;
        std::vector<unsigned> ends;
        for (unsigned e = 0; e <= L; ++e) {
            if (roots[e].empty()) continue;
            std::sort(roots[e].begin(), roots[e].end());
            roots[e].erase(std::unique(roots[e].begin(), roots[e].end()), roots[e].end());
            ends.push_back(e);
        }
        Levels nxt(L + 1);
        std::size_t before = 0, after = 0;
        for (unsigned l = 0; l <= L; ++l) {
            // prefixes of roots, then one sorted run per root length
            std::vector<u128> out;
            for (unsigned e : ends)
                if (e >= l)
                    for (u128 r : roots[e]) out.push_back(l == 0 ? 0 : r >> (e - l));
            std::sort(out.begin(), out.end());
            for (unsigned e : ends) {
                if (e >= l) continue;
                const auto& xs = t0.level(l - e);
                std::size_t mid = out.size();
                for (u128 r : roots[e])
                    for (u128 x : xs) out.push_back((r << (l - e)) | x);
                std::inplace_merge(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(mid), out.end());
            }
            out.erase(std::unique(out.begin(), out.end()), out.end());
            before += p[l].size();
            std::vector<u128> merged;
            merged.reserve(p[l].size() + out.size());
            std::set_union(p[l].begin(), p[l].end(), out.begin(), out.end(), std::back_inserter(merged));
            p[l].swap(merged);
            after += p[l].size();
            nxt[l] = std::move(out);
        }
        prev = std::move(cur);
        cur = std::move(nxt);
        ++rounds;
        if (after == before) break;
    }
    return {TreeSlice::from_levels(L, std::move(p), false), rounds};
}

inline TreeSlice sp_p(unsigned L) {
    if (L > kSpMaxDepth) throw PreconditionError("depth exceeds " + std::to_string(kSpMaxDepth));
    return sp_p_build(L).p;
}

// -- K_p(t) ---------------------------------------------------------------------------

// Coordinates realized as 1 and as 0 by some node of p above t at the given
// level; bit i of each mask is coordinate i.
struct Realized {
    u128 ones = 0, zeros = 0;
};

inline Realized realized_coordinates(const TreeSlice& p, const BitString& t, unsigned level) {
    if (!p.contains(t)) throw PreconditionError("node " + t.str() + " is not in the tree");
    Realized r;
    u128 any_one = 0, any_zero = 0;
    u128 full = level == 128 ? ~u128{0} : (u128{1} << level) - 1;
    auto [lo, hi] = p.range_below(t, level);
    const auto& lv = p.level(level);
    for (std::size_t i = lo; i < hi; ++i) {
        any_one |= lv[i];
        any_zero |= ~lv[i] & full;
    }
    // stored bit (level-1-i) is coordinate i
    for (unsigned i = 0; i < level; ++i) {
        if ((any_one >> (level - 1 - i)) & 1) r.ones |= u128{1} << i;
        if ((any_zero >> (level - 1 - i)) & 1) r.zeros |= u128{1} << i;
    }
    return r;
}

// Least k >= |t| such that every classified coordinate in [k, L-1) takes both
// values on extensions of t.
inline unsigned K_of(const TreeSlice& p, const BitString& t) {
    const unsigned L = p.depth();
    if (L < 2 || t.len + 1 >= L) throw PreconditionError("slice too shallow to certify K at " + t.str());
    Realized r = realized_coordinates(p, t, L);
    u128 both = r.ones & r.zeros;
    unsigned k = t.len;
    for (unsigned i = t.len; i + 1 < L; ++i)
        if (!((both >> i) & 1)) k = i + 1;
    if (k + 1 >= L) throw PreconditionError("slice too shallow to certify K at " + t.str());
    return k;
}

// -- witness width ---------------------------------------------------------------------

inline unsigned witness_search_cap() {
    if (const char* e = std::getenv("DENSITREE_MAX_SEARCH")) {
        try {
            return static_cast<unsigned>(parse_unsigned<std::uint64_t>(e));
        } catch (const Error&) {
            throw ParseError("DENSITREE_MAX_SEARCH must be a natural number");
        }
    }
    return 15;
}

struct WidthWitness {
    unsigned width = 0;
    std::vector<BitString> leaves;  // chosen level-n nodes, lex order
    std::vector<unsigned> covered;  // coordinates hit with a 1
};

namespace detail {
// ones of a level-n node restricted to coordinates [k, n), as bit (i - k)
inline std::uint32_t hit_mask(u128 v, unsigned n, unsigned k) {
    std::uint32_t m = 0;
    for (unsigned i = k; i < n; ++i)
        if ((v >> (n - 1 - i)) & 1) m |= std::uint32_t{1} << (i - k);
    return m;
}

struct CoverSearch {
    const std::vector<std::uint32_t>& masks;
    std::uint32_t full;
    unsigned d;
    std::vector<std::size_t> pick;

    bool run(std::uint32_t covered, unsigned budget) {
        if (covered == full) return true;
        if (budget == 0) return false;
        unsigned low = static_cast<unsigned>(__builtin_ctz(~covered & full));
        for (std::size_t i = 0; i < masks.size(); ++i) {
            if (!((masks[i] >> low) & 1)) continue;
            pick.push_back(i);
            if (run(covered | masks[i], budget - 1)) return true;
            pick.pop_back();
        }
        return false;
    }
};
}  // namespace detail

// Fewest level-n nodes of p above t whose ones jointly cover [k, n).
// nullopt when no family covers.
inline std::optional<WidthWitness> witness_width(const TreeSlice& p, const BitString& t, unsigned n, unsigned k) {
    if (!p.contains(t)) throw PreconditionError("node " + t.str() + " is not in the tree");
    if (n > p.depth() || n < t.len) throw PreconditionError("level outside the slice or below t");
    unsigned cap = witness_search_cap();
    if (n > cap || n > 31) throw SearchCapError("width search beyond level " + std::to_string(std::min(cap, 31u)));
    if (k >= n) return WidthWitness{0, {}, {}};
    const unsigned d = n - k;
    const std::uint32_t full = d == 32 ? ~std::uint32_t{0} : (std::uint32_t{1} << d) - 1;

    // one representative (lex least) per mask
    std::vector<std::optional<u128>> rep(std::size_t{1} << d);
    auto [lo, hi] = p.range_below(t, n);
    const auto& lv = p.level(n);
    std::uint32_t reach = 0;
    for (std::size_t i = lo; i < hi; ++i) {
        std::uint32_t m = detail::hit_mask(lv[i], n, k);
        reach |= m;
        if (!rep[m]) rep[m] = lv[i];
    }
    if (reach != full) return std::nullopt;

    // drop masks strictly contained in another present mask
    std::vector<char> sup(std::size_t{1} << d, 0);
    for (std::size_t m = 0; m < sup.size(); ++m) sup[m] = rep[m].has_value();
    for (unsigned b = 0; b < d; ++b)
        for (std::size_t m = sup.size(); m-- > 0;)
            if (!((m >> b) & 1) && sup[m | (std::size_t{1} << b)]) sup[m] = 1;
    std::vector<std::uint32_t> masks;
    for (std::size_t m = 1; m < rep.size(); ++m) {
        if (!rep[m]) continue;
        bool dominated = false;
        for (unsigned b = 0; b < d && !dominated; ++b)
            if (!((m >> b) & 1) && sup[m | (std::size_t{1} << b)]) dominated = true;
        if (!dominated) masks.push_back(static_cast<std::uint32_t>(m));
    }
    // deterministic branching order: lex order of representatives
    std::sort(masks.begin(), masks.end(), [&](std::uint32_t a, std::uint32_t b) { return *rep[a] < *rep[b]; });

    detail::CoverSearch s{masks, full, d, {}};
    for (unsigned w = 1; w <= d; ++w) {
        if (!s.run(0, w)) continue;
        WidthWitness out;
        out.width = w;
        for (std::size_t i : s.pick) out.leaves.emplace_back(n, *rep[masks[i]]);
        std::sort(out.leaves.begin(), out.leaves.end());
        for (unsigned i = k; i < n; ++i) out.covered.push_back(i);
        return out;
    }
    return std::nullopt;  // unreachable: reach == full admits a cover of size <= d
}

// -- ones bound --------------------------------------------------------------------------

struct OnesBoundReport {
    struct Level {
        unsigned ell = 0;
        unsigned max_ones = 0;
        BitString argmax;
        bool sound_ok = false;       // max_ones <= bitlength(ℓ)^2
        int real_log = 0;            // 1 holds, 0 undecided, -1 violated: max_ones <= log2(ℓ)^2
    };
    std::vector<Level> levels;       // ℓ = 1..L
    bool sound_ok = true;
    unsigned real_log_violations = 0;  // over ℓ >= 2
    unsigned real_log_undecided = 0;
    unsigned worst_ell = 0;          // maximizes max_ones / bitlength(ℓ)^2
};

inline OnesBoundReport ones_bound_check(const TreeSlice& p, unsigned L) {
    if (L > p.depth()) throw PreconditionError("bound level beyond the slice");
    OnesBoundReport rep;
    std::uint64_t best_num = 0, best_den = 1;
    for (unsigned ell = 1; ell <= L; ++ell) {
        OnesBoundReport::Level lv;
        lv.ell = ell;
        bool first = true;
        for (u128 v : p.level(ell)) {
            unsigned o = popcount128(v);
            if (first || o > lv.max_ones) {
                lv.max_ones = o;
                lv.argmax = BitString(ell, v);
                first = false;
            }
        }
        std::uint64_t bl = bit_length(u128{ell});
        lv.sound_ok = lv.max_ones <= bl * bl;
        // log2(ℓ)^2 bracketed with a generous relative margin
        long double lg = std::log2(static_cast<long double>(ell));
        long double sq = lg * lg, slack = 1e-12L * (sq + 1);
        if (static_cast<long double>(lv.max_ones) <= sq - slack) lv.real_log = 1;
        else if (static_cast<long double>(lv.max_ones) > sq + slack) lv.real_log = -1;
        else lv.real_log = 0;
        if ((ell & (ell - 1)) == 0) {  // exact for powers of two
            std::uint64_t e = bl - 1;
            lv.real_log = lv.max_ones <= e * e ? 1 : -1;
        }
        if (!lv.sound_ok) rep.sound_ok = false;
        if (ell >= 2 && lv.real_log < 0) ++rep.real_log_violations;
        if (ell >= 2 && lv.real_log == 0) ++rep.real_log_undecided;
        if (lv.max_ones * best_den > best_num * bl * bl || rep.worst_ell == 0) {
            best_num = lv.max_ones;
            best_den = bl * bl;
            rep.worst_ell = ell;
        }
        rep.levels.push_back(lv);
    }
    return rep;
}

// -- slalom evasion ------------------------------------------------------------------------

struct Escape {
    unsigned n0 = 0;
    BitString node;
    u128 code = 0;
    std::size_t level_width = 0;
};

// Least i with |Lev_{mseq[i]}(p↾t)| > f(i); the lex-first node there whose code avoids S(i).
inline Escape escape_witness(const TreeSlice& p, const BitString& t, const Slalom& S, const std::vector<std::uint64_t>& mseq) {
    if (!p.contains(t)) throw PreconditionError("node " + t.str() + " is not in the tree");
    if (mseq.size() > S.f.size()) throw PreconditionError("slalom shorter than the level sequence");
    for (std::size_t i = 0; i < mseq.size(); ++i) {
        std::uint64_t m = mseq[i];
        if (m > p.depth()) throw PreconditionError("level " + std::to_string(m) + " beyond the slice");
        if (((m + 1) & m) != 0) throw PreconditionError("level " + std::to_string(m) + " is not an epoch boundary");
        if (m < t.len) continue;
        auto [lo, hi] = p.range_below(t, static_cast<unsigned>(m));
        if (hi - lo <= S.f[i]) continue;
        const auto& lv = p.level(static_cast<unsigned>(m));
        for (std::size_t j = lo; j < hi; ++j) {
            BitString node(static_cast<unsigned>(m), lv[j]);
            u128 c = code_map(node);
            if (!S.captures(i, c)) return {static_cast<unsigned>(i), node, c, hi - lo};
        }
    }
    throw PreconditionError("no listed level of p above " + t.str() + " is wider than the slalom");
}

}  // namespace densitree
