#pragma once

#include <algorithm>
#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "densitree/bits.hpp"
#include "densitree/natset.hpp"
#include "densitree/rat.hpp"
#include "densitree/tree.hpp"

namespace densitree {

// -- partitions and the epsilon Cohen coding -----------------------------------

// a_i = {n : n ≡ i mod N+1}, i <= N.
inline std::vector<NatSet> partition_uniform(std::uint64_t N) {
    if (N < 1) throw PreconditionError("partition needs N >= 1");
    std::vector<NatSet> out;
    for (std::uint64_t i = 0; i <= N; ++i) out.push_back(NatSet::residues(N + 1, i));
    return out;
}

namespace detail {
inline std::size_t class_of(std::uint64_t n, const std::vector<NatSet>& partition) {
    for (std::size_t i = 0; i < partition.size(); ++i)
        if (partition[i].contains(n)) return i;
    throw PreconditionError("partition does not cover " + std::to_string(n));
}
inline BitString code_pairs(const std::vector<std::uint64_t>& xs, const std::vector<NatSet>& partition, std::size_t K) {
    BitString c;
    for (std::size_t k = 0; k < K; ++k) {
        bool same = class_of(xs[2 * k], partition) == class_of(xs[2 * k + 1], partition);
        c = c.child(same ? 0 : 1);
    }
    return c;
}
}  // namespace detail

// c(k) = 0 iff the (2k)th and (2k+1)th elements of x share a partition class.
inline BitString cohen_encode_eps(const NatSet& x, const std::vector<NatSet>& partition, std::size_t K) {
    std::vector<std::uint64_t> xs;
    std::uint64_t a = 0;
    while (xs.size() < 2 * K) {
        auto v = x.next_from(a, x.horizon());
        if (!v) throw PreconditionError("x has fewer than " + std::to_string(2 * K) + " elements below its horizon");
        xs.push_back(*v);
        a = *v + 1;
    }
    return detail::code_pairs(xs, partition, K);
}

// Longest string coded by every branch of the materialized tree of c to the
// given depth (brute force over leaves).
inline BitString cohen_decided_prefix(const MathiasCond& c, const std::vector<NatSet>& partition, unsigned depth) {
    TreeSlice t = mathias_tree(c, depth);
    if (t.level(depth).size() > (std::size_t{1} << 22)) throw SearchCapError("too many branches to decide the coded prefix");
    std::optional<BitString> lcp;
    for (u128 v : t.level(depth)) {
        BitString leaf(depth, v);
        std::vector<std::uint64_t> xs;
        for (unsigned i = 0; i < depth; ++i)
            if (leaf.at(i)) xs.push_back(i);
        BitString code = detail::code_pairs(xs, partition, xs.size() / 2);
        if (!lcp) {
            lcp = code;
            continue;
        }
        unsigned l = 0;
        while (l < lcp->len && l < code.len && lcp->at(l) == code.at(l)) ++l;
        *lcp = lcp->prefix(l);
    }
    return *lcp;
}

// Extends (s, A) so that every branch codes r⌢t, two new stem elements per
// target bit. Class choice: the least i such that A ∩ a_i has an element m
// followed, below min(horizon, window), by elements of A both inside and
// outside a_i.
inline MathiasCond cohen_force_extension(const MathiasCond& c, const BitString& decided, const BitString& target,
                                         const std::vector<NatSet>& partition, std::uint64_t window = std::uint64_t{1} << 20) {
    if (c.s.size() % 2 != 0) throw PreconditionError("stem must have an even number of elements");
    std::uint64_t depth0 = c.s.empty() ? 1 : c.s.back() + 1;
    BitString r = cohen_decided_prefix(c, partition, static_cast<unsigned>(depth0));
    if (!(r == decided)) throw PreconditionError("decided prefix " + decided.str() + " does not match " + r.str());

    std::vector<std::uint64_t> s = c.s;
    NatSet A = c.A;
    const std::uint64_t H = std::min(A.horizon(), window);
    for (unsigned b = 0; b < target.len; ++b) {
        std::optional<std::pair<std::uint64_t, std::uint64_t>> pick;
        for (std::size_t i = 0; i < partition.size() && !pick; ++i) {
            std::optional<std::uint64_t> m, same, other;
            for (auto v = A.next_from(0, H); v; v = A.next_from(*v + 1, H)) {
                bool in = partition[i].contains(*v);
                if (!m) {
                    if (in) m = v;
                    continue;
                }
                if (in && !same) same = v;
                if (!in && !other) other = v;
                if (same && other) break;
            }
            if (m && same && other) pick = std::make_pair(*m, target.at(b) ? *other : *same);
        }
        if (!pick) throw PreconditionError("A meets fewer than two partition classes within the horizon");
        auto [m, M] = *pick;
        s.push_back(m);
        s.push_back(M);
        A = A - NatSet::interval(0, M + 1);
    }
    return MathiasCond(std::move(s), std::move(A));
}

// -- the zero-density Cohen coding ---------------------------------------------

// A^i_n = {k : k ≡ i mod 2^{n+1}}, i < 2^{n+1}.
inline std::vector<NatSet> mod_antichain(unsigned n) {
    if (n > 20) throw PreconditionError("antichain index too large to enumerate");
    std::uint64_t m = std::uint64_t{1} << (n + 1);
    std::vector<NatSet> out;
    for (std::uint64_t i = 0; i < m; ++i) out.push_back(NatSet::residues(m, i));
    return out;
}

// Residues i_0..i_N with i_{n+1} ≡ i_n mod 2^{n+1}; x \ b_n ⊆ A^{i_n}_n.
struct ResidueChain {
    std::vector<std::uint64_t> residues;
    std::vector<std::uint64_t> bounds;

    ResidueChain(std::vector<std::uint64_t> res, std::vector<std::uint64_t> b) : residues(std::move(res)), bounds(std::move(b)) {
        if (residues.empty() || residues.size() != bounds.size())
            throw PreconditionError("residue chain needs one tail bound per residue");
        for (std::size_t n = 0; n < residues.size(); ++n) {
            if (n + 1 < 64 && residues[n] >= (std::uint64_t{1} << (n + 1)))
                throw PreconditionError("residue i_" + std::to_string(n) + " out of range");
            if (n > 0 && bounds[n] < bounds[n - 1]) throw PreconditionError("tail bounds must be non-decreasing");
            if (n > 0 && !congruent(residues[n], residues[n - 1], static_cast<unsigned>(n)))
                throw PreconditionError("residue chain is not coherent at " + std::to_string(n));
        }
    }
    std::size_t depth() const { return residues.size() - 1; }

    // k ∈ A_n = A^{i_n}_n
    bool in_class(std::uint64_t k, std::size_t n) const {
        return congruent(k, residues.at(n), static_cast<unsigned>(n + 1));
    }

private:
    static bool congruent(std::uint64_t a, std::uint64_t b, unsigned e) {
        if (e >= 64) return a == b;
        std::uint64_t mask = (std::uint64_t{1} << e) - 1;
        return (a & mask) == (b & mask);
    }
};

struct CohenZeroTrace {
    BitString c;
    std::vector<std::uint64_t> n;  // n_0 .. n_K
    std::vector<std::uint64_t> m;  // m_1 .. m_K
    std::uint64_t horizon;         // verdicts are certified below this bound
};

inline CohenZeroTrace cohen_encode_zero(const NatSet& x, const ResidueChain& chain, std::size_t K) {
    const std::uint64_t H = x.horizon();
    CohenZeroTrace tr{BitString(), {x.min()}, {}, H};
    for (std::size_t i = 0; i < K; ++i) {
        auto mv = x.next_from(tr.n.back() + 1, H);
        if (!mv) throw HorizonError("x has no element after " + std::to_string(tr.n.back()) + " below the horizon");
        std::uint64_t m = *mv;
        tr.m.push_back(m);
        if (m > chain.depth())
            throw HorizonError("residue chain of depth " + std::to_string(chain.depth()) + " does not reach index " +
                               std::to_string(m));
        std::uint64_t b = std::max(chain.bounds[m], m + 1);
        if (b > H) throw HorizonError("tail bound " + std::to_string(b) + " is past the horizon");
        // the chain's tail claim, checked on what the horizon shows
        for (auto v = x.next_from(b, H); v; v = x.next_from(*v + 1, H))
            if (!chain.in_class(*v, m))
                throw PreconditionError("x contradicts the residue chain at index " + std::to_string(m));
        std::optional<std::uint64_t> escape;
        for (auto v = x.next_from(m + 1, b); v; v = x.next_from(*v + 1, b))
            if (!chain.in_class(*v, m)) {
                escape = v;
                break;
            }
        tr.c = tr.c.child(escape ? 1 : 0);
        tr.n.push_back(escape ? *escape : m);
    }
    return tr;
}

// {2^j : j >= from}, e.g. from = 1 gives {2^{k+1} : k >= 0}.
inline NatSet pow2_set(unsigned from, std::uint64_t horizon = ~std::uint64_t{0}) {
    if (from > 63) throw PreconditionError("pow2 exponent out of range");
    std::vector<Segment<std::uint64_t>> segs;
    for (unsigned j = from; j < 64; ++j) segs.push_back({std::uint64_t{1} << j, (std::uint64_t{1} << j) + 1, 1});
    return NatSet::blocks("pow2", "from=" + std::to_string(from), std::move(segs), horizon);
}

// -- the lower-density antichain ------------------------------------------------

namespace detail {
inline std::uint64_t F_f(const BitString& f, unsigned n) {
    std::uint64_t v = 0;
    for (unsigned i = 0; i <= n; ++i) v = (v << 1) | (f.at(i) ? 1 : 0);
    return v;
}
}  // namespace detail

// The window A^n_f ⊆ I_n = [2^{n+1}, 2^{n+2}): k = ⌊eps·2^{n+1}⌋ consecutive
// elements starting at 2^{n+1} + F_f(n), wrapping cyclically inside I_n.
inline std::vector<Segment<std::uint64_t>> eps_family_window(const BitString& f, const Rat& eps, unsigned n) {
    std::uint64_t size = std::uint64_t{1} << (n + 1), base = size;
    std::uint64_t k = static_cast<std::uint64_t>((eps * Rat(static_cast<std::int64_t>(size))).floor());
    std::uint64_t start = base + detail::F_f(f, n);
    if (k == 0) return {};
    if (start + k <= base + size) return {{start, start + k, 1}};
    std::uint64_t wrap = start + k - (base + size);
    return {{base, base + wrap, 1}, {start, base + size, 1}};
}

inline NatSet antichain_lower_eps(const BitString& f, const Rat& eps, std::uint64_t horizon = ~std::uint64_t{0}) {
    if (eps <= Rat(0) || eps >= Rat(1)) throw PreconditionError("epsilon must lie in (0,1)");
    if (f.len > 60) throw PreconditionError("index string too long");
    std::vector<Segment<std::uint64_t>> segs;
    for (unsigned n = 0; n < f.len; ++n)
        for (auto s : eps_family_window(f, eps, n)) segs.push_back(s);
    std::uint64_t h = std::min(horizon, std::uint64_t{1} << (f.len + 1));
    return NatSet::blocks("eps_family", "f=" + f.str() + ";eps=" + eps.str(), std::move(segs), h);
}

// -- the half-density ternary antichain -----------------------------------------

struct HalfFamily {
    WideNatSet A_f;
    std::array<WideNatSet, 3> B;
    std::vector<std::array<u128, 4>> grid;  // (k^n_{-1}, k^n_0, k^n_1, k^n_2)
};

// Grid rows n = 0..levels-1: k^0_j = j+1, then k^n_j is the least integer
// above 2^n·k^n_{j-1} at an even distance from k^n_{j-1}.
inline std::vector<std::array<u128, 4>> half_grid(unsigned levels) {
    std::vector<std::array<u128, 4>> g;
    for (unsigned n = 0; n < levels; ++n) {
        std::array<u128, 4> row{};
        if (n == 0) {
            row = {0, 1, 2, 3};
        } else {
            row[0] = g.back()[3];
            for (int j = 1; j < 4; ++j) {
                u128 v = checked_add(checked_mul(row[j - 1], pow2<u128>(n)), u128{1});
                if ((v - row[j - 1]) % 2 != 0) v = checked_add(v, u128{1});
                row[j] = v;
            }
        }
        g.push_back(row);
    }
    return g;
}

namespace detail {
// B^n_i ∩ [k^n_{-1}, k^n_2) as segments (steps a-c); empty at n = 0.
inline std::vector<Segment<u128>> half_b_level(const std::array<u128, 4>& k, unsigned n, int i) {
    if (n == 0) return {};
    // step j in {a,b,c} splits [k_{j-1}, k_j) between two sets, avoiding set j
    static constexpr std::array<std::array<int, 2>, 3> owners{{{1, 2}, {0, 2}, {0, 1}}};
    std::vector<Segment<u128>> out;
    for (int j = 0; j < 3; ++j) {
        u128 lo = k[j], hi = k[j + 1];
        if (owners[j][0] == i) out.push_back({lo, hi, 2});
        if (owners[j][1] == i && lo + 1 < hi) out.push_back({lo + 1, hi, 2});
    }
    return out;
}
inline std::string ternary_str(const std::vector<int>& f) {
    std::string s;
    for (int d : f) s.push_back(static_cast<char>('0' + d));
    return s;
}
}  // namespace detail

inline HalfFamily antichain_half(const std::vector<int>& f, u128 horizon = max_of<u128>()) {
    if (f.empty()) throw PreconditionError("ternary index string must be nonempty");
    for (int d : f)
        if (d < 0 || d > 2) throw PreconditionError("ternary digits must be 0, 1 or 2");
    auto grid = half_grid(static_cast<unsigned>(f.size()));
    u128 h = std::min(horizon, grid.back()[3]);
    std::array<std::vector<Segment<u128>>, 3> bsegs;
    std::vector<Segment<u128>> asegs;
    for (unsigned n = 0; n < f.size(); ++n) {
        for (int i = 0; i < 3; ++i) {
            auto lv = detail::half_b_level(grid[n], n, i);
            bsegs[i].insert(bsegs[i].end(), lv.begin(), lv.end());
        }
        if (n == 0) continue;
        // A^n_{f(n)}: the other two sets share step f(n) completely
        const auto& k = grid[n];
        for (int j = 0; j < 3; ++j) {
            if (j == f[n]) {
                asegs.push_back({k[j], k[j + 1], 1});
                continue;
            }
            for (auto s : detail::half_b_level(k, n, 3 - j - f[n]))
                if (s.lo >= k[j] && s.lo < k[j + 1]) asegs.push_back(s);
        }
    }
    std::string levels = std::to_string(f.size());
    HalfFamily out{WideNatSet::blocks("half_family", "f=" + detail::ternary_str(f), std::move(asegs), h),
                   {WideNatSet::blocks("half_b", "i=0;levels=" + levels, std::move(bsegs[0]), h),
                    WideNatSet::blocks("half_b", "i=1;levels=" + levels, std::move(bsegs[1]), h),
                    WideNatSet::blocks("half_b", "i=2;levels=" + levels, std::move(bsegs[2]), h)},
                   std::move(grid)};
    return out;
}

// -- collapse coding ----------------------------------------------------------------

struct CollapseParams {
    std::uint64_t k = 1, k0 = 0, r = 4, m = 4, z1 = 3, z2 = 2;

    void validate() const {
        if (k < 1 || r < 1 || m < 1 || z1 < 1 || z2 < 1)
            throw PreconditionError("collapse parameters k, r, m, z1, z2 must be positive");
    }
    // 2/r, z2/z1, ((r-1)/r)((mk-1)/(mk))
    std::array<Rat, 3> budget_chain() const {
        validate();
        auto I = [](std::uint64_t v) { return static_cast<std::int64_t>(v); };
        Rat mk(I(m * k));
        return {Rat(2, I(r)), Rat(I(z2), I(z1)), Rat(I(r) - 1, I(r)) * ((mk - Rat(1)) / mk)};
    }
    bool budget_holds() const {
        auto c = budget_chain();
        return c[0] < c[1] && c[1] <= c[2];
    }
};

// ℓ_{-1} = 0, ℓ_0 = z1·k·(k0+1), ℓ_n = m·k·ℓ_{n-1}; returns ℓ_{-1..N}.
inline std::vector<std::uint64_t> ell_seq(const CollapseParams& p, unsigned N) {
    p.validate();
    std::vector<std::uint64_t> l{0, checked_mul(checked_mul(p.z1, p.k), checked_add(p.k0, std::uint64_t{1}))};
    for (unsigned n = 1; n <= N; ++n) l.push_back(checked_mul(checked_mul(p.m, p.k), l.back()));
    return l;
}

namespace detail {
// closest natural to ones/ell · z1k/z2, ties up
inline std::uint64_t collapse_round(std::uint64_t ones, std::uint64_t ell, const CollapseParams& p) {
    u128 num = u128{2} * ones * p.z1 * p.k + u128{p.z2} * ell;
    u128 den = u128{2} * p.z2 * ell;
    return static_cast<std::uint64_t>(num / den);
}
}  // namespace detail

inline std::uint64_t collapse_f(const NatSet& x, const CollapseParams& p, unsigned n) {
    std::uint64_t ell = ell_seq(p, n).back();
    return detail::collapse_round(x.count_upto(ell), ell, p);
}

inline BitString collapse_decode(const NatSet& x, const CollapseParams& p, unsigned N) {
    BitString out;
    for (unsigned n = 0; n < N; ++n) out = out.child(static_cast<unsigned>(collapse_f(x, p, n) % 2));
    return out;
}

// A finite Silver fragment on [0, H): free coordinates and the coordinates set to 1.
struct SilverFragment {
    std::uint64_t H = 0;
    std::vector<std::uint64_t> free;  // sorted
    std::vector<std::uint64_t> ones;  // sorted, disjoint from free

    static SilverFragment all_free(std::uint64_t H) {
        SilverFragment f{H, {}, {}};
        for (std::uint64_t i = 0; i < H; ++i) f.free.push_back(i);
        return f;
    }
    SilverCond as_condition() const {
        return SilverCond(NatSet::explicit_set(free), NatSet::explicit_set(ones), H);
    }
    std::uint64_t free_in(std::uint64_t lo, std::uint64_t hi) const {
        return static_cast<std::uint64_t>(std::lower_bound(free.begin(), free.end(), hi) -
                                          std::lower_bound(free.begin(), free.end(), lo));
    }
    std::uint64_t ones_in(std::uint64_t lo, std::uint64_t hi) const {
        return static_cast<std::uint64_t>(std::lower_bound(ones.begin(), ones.end(), hi) -
                                          std::lower_bound(ones.begin(), ones.end(), lo));
    }
};

struct EncodeStep {
    SilverFragment out;
    unsigned n = 0;
    std::uint64_t block_lo = 0, block_hi = 0;
    std::uint64_t fixed_ones = 0, fixed_zeros = 0;
    std::uint64_t free_after = 0;  // free coordinates left in the block
    std::uint64_t min_free = 0;    // ⌈block/(rk)⌉
    Rat budget;                    // (z2/z1)(ℓ_n/k)
    bool within_budget = false;    // fixed_ones + fixed_zeros <= budget
    std::uint64_t value = 0;       // collapse_f at ℓ_n, identical on all completions
};

// One block of the collapse encoder. Fixes the fewest free coordinates of
// [ℓ_{n-1}, ℓ_n), lowest index first (ones, then zeros), such that every
// completion has the same rounded value at ℓ_n with parity rho and at least
// ⌈block/(rk)⌉ coordinates of the block stay free. Among equally small
// fixings the one with fewer ones wins.
inline EncodeStep collapse_encode_step(const SilverFragment& frag, const CollapseParams& p, unsigned n, unsigned rho) {
    auto ell = ell_seq(p, n);
    const std::uint64_t lo = ell[n], hi = ell[n + 1], block = hi - lo;
    if (frag.H < hi) throw PreconditionError("fragment does not cover [0, ℓ_n)");
    std::vector<std::uint64_t> phi(std::lower_bound(frag.free.begin(), frag.free.end(), lo),
                                   std::lower_bound(frag.free.begin(), frag.free.end(), hi));
    if (phi.size() * p.k < block)
        throw PreconditionError("block [" + std::to_string(lo) + "," + std::to_string(hi) + ") has fewer than block/k free coordinates");
    const std::uint64_t rk = checked_mul(p.r, p.k);
    const std::uint64_t min_free = (block + rk - 1) / rk;
    const std::uint64_t c0 = frag.ones_in(0, hi), u_prev = frag.free_in(0, lo), F = phi.size();

    std::optional<std::pair<std::uint64_t, std::uint64_t>> choice;  // (fixed, ones)
    for (std::uint64_t s = 0; s + min_free <= F && !choice; ++s) {
        std::uint64_t u = u_prev + F - s;
        for (std::uint64_t a = 0; a <= s; ++a) {
            std::uint64_t q = detail::collapse_round(c0 + a, hi, p);
            if (q % 2 == rho && detail::collapse_round(c0 + a + u, hi, p) == q) {
                choice = std::make_pair(s, a);
                break;
            }
        }
    }
    if (!choice)
        throw PreconditionError("no fixing of block " + std::to_string(n) + " decides parity " + std::to_string(rho) +
                                " while keeping block/(rk) coordinates free");
    auto [s, a] = *choice;
    EncodeStep st;
    st.n = n;
    st.block_lo = lo;
    st.block_hi = hi;
    st.fixed_ones = a;
    st.fixed_zeros = s - a;
    st.free_after = F - s;
    st.min_free = min_free;
    st.budget = Rat(static_cast<std::int64_t>(p.z2 * hi), static_cast<std::int64_t>(p.z1 * p.k));
    st.within_budget = Rat(static_cast<std::int64_t>(s)) <= st.budget;
    st.value = detail::collapse_round(c0 + a, hi, p);
    st.out = frag;
    std::vector<std::uint64_t> fixed(phi.begin(), phi.begin() + static_cast<std::ptrdiff_t>(s));
    std::erase_if(st.out.free, [&](std::uint64_t x) { return std::binary_search(fixed.begin(), fixed.end(), x); });
    st.out.ones.insert(st.out.ones.end(), phi.begin(), phi.begin() + static_cast<std::ptrdiff_t>(a));
    std::sort(st.out.ones.begin(), st.out.ones.end());
    return st;
}

struct EncodeResult {
    SilverFragment fragment;
    std::vector<EncodeStep> steps;
};

// Runs the encoder over ρ starting from `start` (default: every coordinate of
// [0, ℓ_{|ρ|-1}) free and no coordinate set to 1).
inline EncodeResult collapse_encode(const CollapseParams& p, const BitString& rho,
                                    std::optional<SilverFragment> start = std::nullopt) {
    if (rho.len == 0) return {start.value_or(SilverFragment{}), {}};
    auto ell = ell_seq(p, rho.len - 1);
    EncodeResult res{start.value_or(SilverFragment::all_free(ell.back())), {}};
    for (unsigned n = 0; n < rho.len; ++n) {
        res.steps.push_back(collapse_encode_step(res.fragment, p, n, rho.at(n) ? 1 : 0));
        res.fragment = res.steps.back().out;
    }
    return res;
}

}  // namespace densitree
