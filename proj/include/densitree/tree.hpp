#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "densitree/bits.hpp"
#include "densitree/density.hpp"
#include "densitree/natset.hpp"

namespace densitree {

// Prefix-closed, dead-end-free finite set of bit-strings of length <= depth.
// Stored level by level; each level is a sorted vector of packed values.
class TreeSlice {
public:
    TreeSlice() : depth_(0), levels_{{0}} {}

    static TreeSlice from_levels(unsigned depth, std::vector<std::vector<u128>> levels, bool validate = true) {
        if (depth > kMaxDepth) throw PreconditionError("slice depth exceeds " + std::to_string(kMaxDepth));
        TreeSlice t;
        t.depth_ = depth;
        t.levels_ = std::move(levels);
        for (auto& lv : t.levels_) {
            std::sort(lv.begin(), lv.end());
            lv.erase(std::unique(lv.begin(), lv.end()), lv.end());
        }
        if (validate) t.validate();
        return t;
    }

    // Builds a slice from an explicit node list; the list must already be a
    // valid slice (no implicit prefix closure).
    static TreeSlice from_nodes(unsigned depth, const std::vector<BitString>& nodes) {
        std::vector<std::vector<u128>> lv(depth + 1);
        for (const auto& b : nodes) {
            if (b.len > depth) throw PreconditionError("node " + b.str() + " is deeper than the slice");
            lv[b.len].push_back(b.v);
        }
        return from_levels(depth, std::move(lv));
    }

    // Prefix closure of the given leaves; every leaf must have length depth.
    static TreeSlice from_leaves(unsigned depth, const std::vector<BitString>& leaves) {
        std::vector<std::vector<u128>> lv(depth + 1);
        for (const auto& b : leaves) {
            if (b.len != depth) throw PreconditionError("leaf " + b.str() + " does not have the slice depth");
            for (unsigned l = 0; l <= depth; ++l) lv[l].push_back(b.prefix(l).v);
        }
        return from_levels(depth, std::move(lv));
    }

    static TreeSlice full(unsigned depth) {
        return constrained(depth, [](unsigned) { return -1; });
    }

    // rule(pos) = -1 for a free coordinate, otherwise the forced bit.
    static TreeSlice constrained(unsigned depth, const std::function<int(unsigned)>& rule) {
        if (depth > kMaxDepth) throw PreconditionError("slice depth exceeds " + std::to_string(kMaxDepth));
        std::vector<std::vector<u128>> lv(depth + 1);
        lv[0] = {0};
        for (unsigned l = 0; l < depth; ++l) {
            int r = rule(l);
            auto& next = lv[l + 1];
            next.reserve(lv[l].size() * (r < 0 ? 2 : 1));
            for (u128 v : lv[l]) {
                if (r < 0) {
                    next.push_back(v << 1);
                    next.push_back((v << 1) | 1);
                } else {
                    next.push_back((v << 1) | static_cast<u128>(r));
                }
            }
        }
        TreeSlice t;
        t.depth_ = depth;
        t.levels_ = std::move(lv);
        return t;
    }

    unsigned depth() const { return depth_; }
    const std::vector<u128>& level(unsigned l) const { return levels_.at(l); }
    std::vector<BitString> level_nodes(unsigned l) const {
        std::vector<BitString> out;
        out.reserve(levels_.at(l).size());
        for (u128 v : levels_[l]) out.emplace_back(l, v);
        return out;
    }
    std::size_t size() const {
        std::size_t n = 0;
        for (const auto& lv : levels_) n += lv.size();
        return n;
    }
    bool contains(const BitString& b) const {
        if (b.len > depth_) return false;
        return std::binary_search(levels_[b.len].begin(), levels_[b.len].end(), b.v);
    }
    bool has_child(const BitString& b, unsigned bit) const { return b.len < depth_ && contains(b.child(bit)); }

    // all nodes in shortlex order
    std::vector<BitString> nodes() const {
        std::vector<BitString> out;
        out.reserve(size());
        for (unsigned l = 0; l <= depth_; ++l)
            for (u128 v : levels_[l]) out.emplace_back(l, v);
        return out;
    }

    // Range [first, last) of level l below node t (t.len <= l).
    std::pair<std::size_t, std::size_t> range_below(const BitString& t, unsigned l) const {
        const auto& lv = levels_.at(l);
        unsigned sh = l - t.len;
        u128 lo = sh >= 128 ? 0 : t.v << sh;
        auto first = std::lower_bound(lv.begin(), lv.end(), lo);
        auto last = first;
        if (sh >= 128) {
            last = lv.end();
        } else {
            u128 top = (t.v + 1) << sh;  // exclusive; wraps to 0 only for the all-ones full-width prefix
            last = (top == 0 && t.v != 0) ? lv.end() : std::lower_bound(first, lv.end(), top);
        }
        return {static_cast<std::size_t>(first - lv.begin()), static_cast<std::size_t>(last - lv.begin())};
    }

    void validate() const {
        if (levels_.size() != depth_ + 1) throw PreconditionError("slice level table does not match its depth");
        if (levels_[0].size() != 1 || levels_[0][0] != 0) throw PreconditionError("slice must contain the empty string");
        for (unsigned l = 1; l <= depth_; ++l) {
            const auto& prev = levels_[l - 1];
            for (u128 v : levels_[l])
                if (!std::binary_search(prev.begin(), prev.end(), v >> 1))
                    throw PreconditionError("slice is not prefix-closed at " + BitString(l, v).str());
            // dead ends: every node of level l-1 needs a child
            std::size_t j = 0;
            for (u128 v : prev) {
                while (j < levels_[l].size() && (levels_[l][j] >> 1) < v) ++j;
                if (j == levels_[l].size() || (levels_[l][j] >> 1) != v)
                    throw PreconditionError("slice has a dead end at " + BitString(l - 1, v).str());
            }
        }
    }

    friend bool operator==(const TreeSlice&, const TreeSlice&) = default;

private:
    unsigned depth_;
    std::vector<std::vector<u128>> levels_;
};

// -- conditions ---------------------------------------------------------------

// (s, A) with max(s) < min(A).
struct MathiasCond {
    std::vector<std::uint64_t> s;
    NatSet A;

    MathiasCond(std::vector<std::uint64_t> stem, NatSet a) : s(std::move(stem)), A(std::move(a)) {
        std::sort(s.begin(), s.end());
        s.erase(std::unique(s.begin(), s.end()), s.end());
        if (!s.empty() && s.back() >= A.min())
            throw PreconditionError("Mathias condition needs max(s) < min(A)");
    }
};

// Silver condition: coordinates in A are free, every other coordinate n below
// the horizon H carries f(n) = [n in ones].
struct SilverCond {
    NatSet A;
    NatSet ones;
    std::uint64_t H;

    SilverCond(NatSet a, NatSet f_ones, std::uint64_t horizon) : A(std::move(a)), ones(std::move(f_ones)), H(horizon) {
        std::uint64_t top = std::min({H, A.horizon(), ones.horizon()});
        if (top > (std::uint64_t{1} << 26)) throw PreconditionError("Silver condition horizon too large to validate");
        for (std::uint64_t x : ones.elements_below(top))
            if (A.contains(x)) throw PreconditionError("Silver condition: f defined on " + std::to_string(x) + " which lies in A");
    }
    // -1 when free, otherwise f(n)
    int value(std::uint64_t n) const {
        if (n >= H) throw PreconditionError("f undefined at coordinate " + std::to_string(n));
        if (A.contains(n)) return -1;
        return ones.contains(n) ? 1 : 0;
    }
};

inline TreeSlice mathias_tree(const MathiasCond& c, unsigned L) {
    if (L > 0 && L - 1 >= c.A.horizon()) throw HorizonError("A is not evaluable below depth " + std::to_string(L));
    return TreeSlice::constrained(L, [&](unsigned pos) {
        if (std::binary_search(c.s.begin(), c.s.end(), pos)) return 1;
        return c.A.contains(pos) ? -1 : 0;
    });
}

inline TreeSlice silver_tree(const SilverCond& c, unsigned L) {
    return TreeSlice::constrained(L, [&](unsigned pos) { return c.value(pos); });
}

// -- structure ------------------------------------------------------------------

// Lengths <= depth-2 are classified; deeper nodes are unknown.
inline bool classified(const TreeSlice& p, unsigned len) { return len + 2 <= p.depth(); }

inline bool is_splitting(const TreeSlice& p, const BitString& t) {
    return classified(p, t.len) && p.contains(t) && p.has_child(t, 0) && p.has_child(t, 1);
}

struct SplitClassification {
    std::vector<BitString> splitting;
    std::vector<BitString> unknown;
};

inline SplitClassification splitting_nodes(const TreeSlice& p) {
    SplitClassification out;
    for (unsigned l = 0; l <= p.depth(); ++l) {
        if (!classified(p, l)) {
            for (u128 v : p.level(l)) out.unknown.emplace_back(l, v);
            continue;
        }
        const auto& next = p.level(l + 1);
        for (std::size_t j = 0; j + 1 < next.size(); ++j)
            if ((next[j] & 1) == 0 && next[j + 1] == (next[j] | 1)) out.splitting.emplace_back(l, next[j] >> 1);
    }
    return out;
}

inline BitString stem(const TreeSlice& p) {
    BitString t;
    while (classified(p, t.len)) {
        bool c0 = p.has_child(t, 0), c1 = p.has_child(t, 1);
        if (c0 && c1) return t;
        t = t.child(c1 ? 1 : 0);
    }
    throw PreconditionError("no splitting node within the classified range");
}

struct UniformSplit {
    std::optional<std::vector<unsigned>> levels;
    std::optional<std::pair<BitString, BitString>> counterexample;  // (splitting, non-splitting), same length
};

inline UniformSplit uniform_split_levels(const TreeSlice& p) {
    UniformSplit out;
    std::vector<unsigned> lv;
    for (unsigned l = 0; classified(p, l); ++l) {
        std::optional<BitString> yes, no;
        for (u128 v : p.level(l)) {
            BitString t(l, v);
            (p.has_child(t, 0) && p.has_child(t, 1) ? yes : no) = t;
            if (yes && no) {
                out.counterexample = std::make_pair(*yes, *no);
                return out;
            }
        }
        if (yes) lv.push_back(l);
    }
    out.levels = std::move(lv);
    return out;
}

inline TreeSlice restrict(const TreeSlice& p, const BitString& t) {
    if (!p.contains(t)) throw PreconditionError("node " + t.str() + " is not in the slice");
    std::vector<std::vector<u128>> lv(p.depth() + 1);
    for (unsigned l = 0; l <= p.depth(); ++l) {
        if (l <= t.len) {
            lv[l] = {t.prefix(l).v};
        } else {
            auto [a, b] = p.range_below(t, l);
            lv[l].assign(p.level(l).begin() + static_cast<std::ptrdiff_t>(a), p.level(l).begin() + static_cast<std::ptrdiff_t>(b));
        }
    }
    return TreeSlice::from_levels(p.depth(), std::move(lv), false);
}

// Classified splitting nodes with exactly n splitting proper prefixes.
inline std::vector<BitString> split_rank_nodes(const TreeSlice& p, unsigned n) {
    stem(p);  // precondition: a stem exists
    std::vector<BitString> out;
    std::vector<unsigned> prev_rank{0};
    std::vector<char> prev_split;
    for (unsigned l = 0; classified(p, l); ++l) {
        const auto& lv = p.level(l);
        std::vector<unsigned> rank(lv.size());
        std::vector<char> split(lv.size());
        for (std::size_t i = 0; i < lv.size(); ++i) {
            BitString t(l, lv[i]);
            if (l > 0) {
                const auto& up = p.level(l - 1);
                auto j = static_cast<std::size_t>(std::lower_bound(up.begin(), up.end(), lv[i] >> 1) - up.begin());
                rank[i] = prev_rank[j] + (prev_split[j] ? 1 : 0);
            }
            split[i] = p.has_child(t, 0) && p.has_child(t, 1);
            if (split[i] && rank[i] == n) out.push_back(t);
        }
        prev_rank = std::move(rank);
        prev_split = std::move(split);
    }
    return out;
}

// Shortest classified splitting node extending t, if the slice shows one.
inline std::optional<BitString> split_successor(const TreeSlice& p, BitString t) {
    while (classified(p, t.len)) {
        bool c0 = p.has_child(t, 0), c1 = p.has_child(t, 1);
        if (c0 && c1) return t;
        t = t.child(c1 ? 1 : 0);
    }
    return std::nullopt;
}

// The skeleton map: stem -> <>, splsuc(t⌢j) -> image(t)⌢j. Branches whose
// successor falls into the unknown band are not continued.
inline std::map<BitString, BitString> split_skeleton(const TreeSlice& p) {
    std::map<BitString, BitString> phi;
    std::vector<BitString> stack{stem(p)};
    phi[stack.back()] = BitString();
    while (!stack.empty()) {
        BitString t = stack.back();
        stack.pop_back();
        for (unsigned j = 0; j < 2; ++j) {
            auto s = split_successor(p, t.child(j));
            if (!s) continue;
            phi[*s] = phi[t].child(j);
            stack.push_back(*s);
        }
    }
    return phi;
}

// -- the ≤ₙ relation ------------------------------------------------------------

namespace detail {
inline bool subset_upto(const NatSet& small, const NatSet& big, std::uint64_t upto) {
    for (std::uint64_t x : small.elements_below(upto))
        if (!big.contains(x)) return false;
    return true;
}
inline bool same_below(const NatSet& a, const NatSet& b, std::uint64_t k) {
    return a.elements_below(k) == b.elements_below(k);
}
}  // namespace detail

// q ≤ p on [0, window), then k^q_n = k^p_n and A_q ∩ k = A_p ∩ k.
inline bool leq_n_check(const MathiasCond& q, const MathiasCond& p, unsigned n, const Rat& eps,
                        std::uint64_t window = 4096) {
    window = std::min({window, q.A.horizon(), p.A.horizon()});
    if (!std::includes(q.s.begin(), q.s.end(), p.s.begin(), p.s.end())) return false;
    for (auto x : q.s)
        if (!std::binary_search(p.s.begin(), p.s.end(), x) && !(x < window && p.A.contains(x))) return false;
    if (!detail::subset_upto(q.A, p.A, window)) return false;
    auto kq = k_sequence(q.A, eps, n), kp = k_sequence(p.A, eps, n);
    if (kq.entries[n] != kp.entries[n]) return false;
    return detail::same_below(q.A, p.A, kq.entries[n]);
}

inline bool leq_n_check(const SilverCond& q, const SilverCond& p, unsigned n, const Rat& eps,
                        std::uint64_t window = 4096) {
    window = std::min({window, q.H, p.H, q.A.horizon(), p.A.horizon()});
    if (!detail::subset_upto(q.A, p.A, window)) return false;
    for (std::uint64_t x = 0; x < window; ++x) {
        int fp = p.value(x);
        if (fp >= 0 && q.value(x) != fp) return false;
    }
    auto kq = k_sequence(q.A, eps, n), kp = k_sequence(p.A, eps, n);
    if (kq.entries[n] != kp.entries[n]) return false;
    return detail::same_below(q.A, p.A, kq.entries[n]);
}

}  // namespace densitree
