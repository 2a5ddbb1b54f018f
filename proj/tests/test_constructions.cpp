#include <gtest/gtest.h>

#include "densitree/constructions.hpp"
#include "densitree/verify.hpp"
#include "oracles.hpp"

using namespace densitree;
using u64 = std::uint64_t;

namespace {
NatSet evens() { return NatSet::residues(2, 0); }

bool same_upto(const NatSet& a, const NatSet& b, u64 n) {
    for (u64 x = 0; x < n; ++x)
        if (a.contains(x) != b.contains(x)) return false;
    return true;
}
}  // namespace

TEST(Partition, ResidueClasses) {
    auto p1 = partition_uniform(1);
    ASSERT_EQ(p1.size(), 2u);
    EXPECT_TRUE(same_upto(p1[0], evens(), 100));
    EXPECT_TRUE(same_upto(p1[1], NatSet::residues(2, 1), 100));
    auto p2 = partition_uniform(2);
    for (u64 i = 0; i < 3; ++i) EXPECT_TRUE(same_upto(p2[i], NatSet::residues(3, i), 100));
    for (const auto& a : partition_uniform(3)) EXPECT_EQ(*a.closed_form_density(), Rat(1, 4));
}

TEST(CohenEps, Examples) {
    auto mod2 = partition_uniform(1);
    EXPECT_EQ(cohen_encode_eps(NatSet::explicit_set({0, 2}), mod2, 1).str(), "0");
    EXPECT_EQ(cohen_encode_eps(NatSet::explicit_set({0, 1, 2, 4}), mod2, 2).str(), "10");
    EXPECT_EQ(cohen_encode_eps(NatSet::explicit_set({0, 1}), {NatSet::omega()}, 1).str(), "0");
    EXPECT_THROW(cohen_encode_eps(NatSet::explicit_set({0, 1}), mod2, 2), PreconditionError);
}

TEST(CohenEps, MatchesPairOracle) {
    verify::Rng rng(21);
    for (int it = 0; it < 50; ++it) {
        std::vector<u64> xs;
        for (u64 x = 0; x < 80; ++x)
            if (rng.coin(1, 3)) xs.push_back(x);
        u64 N = rng.between(1, 5);
        std::size_t K = xs.size() / 2;
        EXPECT_EQ(cohen_encode_eps(NatSet::explicit_set(xs), partition_uniform(N), K).str(), oracle::pair_code(xs, N + 1));
    }
}

TEST(ForceExtension, Examples) {
    auto mod4 = partition_uniform(3);
    MathiasCond c({}, evens());
    auto r = cohen_decided_prefix(c, mod4, 1);
    EXPECT_EQ(r.str(), "");
    auto z = cohen_force_extension(c, r, BitString::parse("0"), mod4);
    EXPECT_EQ(z.s, (std::vector<u64>{0, 4}));
    EXPECT_TRUE(same_upto(z.A, evens() - NatSet::interval(0, 6), 200));
    auto o = cohen_force_extension(c, r, BitString::parse("1"), mod4);
    EXPECT_EQ(o.s, (std::vector<u64>{0, 2}));
    EXPECT_TRUE(same_upto(o.A, evens() - NatSet::interval(0, 3), 200));
    auto e = cohen_force_extension(c, r, BitString(), mod4);
    EXPECT_TRUE(e.s.empty());
    EXPECT_TRUE(same_upto(e.A, c.A, 200));
}

TEST(ForceExtension, EveryBranchCodesTarget) {
    auto part = partition_uniform(2);
    MathiasCond c({0, 1}, NatSet::periodic(5, {0, 2, 3}) - NatSet::interval(0, 2));
    auto r = cohen_decided_prefix(c, part, 2);
    for (unsigned len = 0; len <= 4; ++len)
        for (unsigned v = 0; v < (1u << len); ++v) {
            BitString t(len, v);
            auto out = cohen_force_extension(c, r, t, part);
            std::string want = r.append(t).str();
            unsigned D = static_cast<unsigned>(out.s.back() + 6);
            for (const auto& b : mathias_tree(out, D).level_nodes(D)) {
                std::vector<u64> xs;
                for (unsigned i = 0; i < D; ++i)
                    if (b.at(i)) xs.push_back(i);
                EXPECT_EQ(oracle::pair_code(xs, 3).substr(0, want.size()), want);
            }
        }
}

TEST(ForceExtension, RejectsWrongPrefix) {
    auto part = partition_uniform(1);
    MathiasCond c({}, NatSet::omega());
    EXPECT_THROW(cohen_force_extension(c, BitString::parse("1"), BitString::parse("0"), part), PreconditionError);
}

TEST(ModAntichain, Examples) {
    auto a0 = mod_antichain(0);
    ASSERT_EQ(a0.size(), 2u);
    EXPECT_TRUE(same_upto(a0[0], evens(), 64));
    EXPECT_TRUE(same_upto(a0[1], NatSet::residues(2, 1), 64));
    EXPECT_EQ(mod_antichain(1).size(), 4u);
    for (const auto& a : mod_antichain(2)) EXPECT_EQ(*a.closed_form_density(), Rat(1, 8));
}

TEST(CohenZero, PowersOfTwo) {
    const u64 H = u64{1} << 20;
    std::vector<u64> res(17, 0), bounds(17), x;
    for (u64 n = 0; n <= 16; ++n) bounds[n] = u64{2} << n;
    for (u64 v = 2; v < H; v *= 2) x.push_back(v);
    ResidueChain chain(res, bounds);
    auto tr = cohen_encode_zero(pow2_set(1, H), chain, 2);
    auto want = oracle::zero_trace(x, res, bounds, 2);
    EXPECT_EQ(tr.c.str(), "11");
    EXPECT_EQ(tr.c.str(), want.c);
    EXPECT_EQ(tr.n, want.n);
    EXPECT_EQ(tr.m, want.m);
    EXPECT_EQ(tr.n[0], 2u);
    EXPECT_EQ(tr.m[0], 4u);
    EXPECT_EQ(tr.n[1], 8u);
    EXPECT_EQ(cohen_encode_zero(pow2_set(1, H), chain, 0).c.str(), "");
}

TEST(CohenZero, TailInsideChainCodesZero) {
    // x = {1} ∪ multiples of 8 from 8 on: m_1 = 8, and A_8 (multiples of 512) is
    // where the chain puts the tail of x only if x stays inside it past b_8.
    const u64 H = 1 << 12;
    std::vector<u64> res(10, 0), bounds{0, 0, 0, 0, 0, 0, 0, 0, 512, 512};
    std::vector<u64> xs{1};
    for (u64 v = 8; v < H; v += (v < 512 ? 8 : 512)) xs.push_back(v);
    auto x = NatSet::explicit_set(xs).with_horizon(H);
    auto tr = cohen_encode_zero(x, ResidueChain(res, bounds), 1);
    auto want = oracle::zero_trace(xs, res, bounds, 1);
    EXPECT_EQ(tr.c.str(), want.c);
    EXPECT_EQ(tr.c.str(), "1");  // 16 escapes A_8 below the bound
    std::vector<u64> ys{1, 8, 512, 1024, 1536};
    auto t2 = cohen_encode_zero(NatSet::explicit_set(ys).with_horizon(2048), ResidueChain(res, bounds), 1);
    EXPECT_EQ(t2.c.str(), "0");
    EXPECT_EQ(t2.c.str(), oracle::zero_trace(ys, res, bounds, 1).c);
}

TEST(CohenZero, MultiplesOfSixteenContradictTheZeroChain) {
    // min x = 0 and m_1 = 16, so the tail must lie in A_16 = multiples of 2^17
    std::vector<u64> res(17, 0), bounds(17, 0);
    auto x = NatSet::residues(16, 0).with_horizon(1 << 12);
    EXPECT_THROW(cohen_encode_zero(x, ResidueChain(res, bounds), 1), PreconditionError);
}

TEST(ResidueChain, Validation) {
    EXPECT_THROW(ResidueChain({0, 1}, {0, 0}), PreconditionError);  // 1 is not ≡ 0 mod 2
    EXPECT_THROW(ResidueChain({0, 0}, {5, 4}), PreconditionError);
    EXPECT_NO_THROW(ResidueChain({1, 3, 3}, {0, 1, 2}));
}

TEST(EpsFamily, Examples) {
    auto f10 = antichain_lower_eps(BitString::parse("10"), Rat(1, 2));
    EXPECT_EQ(f10.elements_below(4), (std::vector<u64>{3}));
    auto lv1 = (f10 & NatSet::interval(4, 8)).elements_below(8);
    EXPECT_EQ(lv1, (std::vector<u64>{6, 7}));
    EXPECT_EQ(antichain_lower_eps(BitString::parse("0"), Rat(1, 2)).elements_below(4), (std::vector<u64>{2}));
}

TEST(EpsFamily, WindowsMatchOracle) {
    verify::Rng rng(31);
    const Rat epss[] = {Rat(1, 3), Rat(1, 2), Rat(3, 4), Rat(7, 8)};
    for (int it = 0; it < 20; ++it) {
        std::string f;
        for (int i = 0; i < 10; ++i) f += rng.coin() ? '1' : '0';
        Rat eps = epss[rng.below(4)];
        auto a = antichain_lower_eps(BitString::parse(f), eps);
        for (unsigned n = 0; n < 10; ++n) {
            u64 lo = u64{2} << n, hi = u64{4} << n;
            auto got = (a & NatSet::interval(lo, hi)).elements_below(hi);
            EXPECT_EQ(got, oracle::eps_window(f, oracle::q(eps.num(), eps.den()), n)) << f << " n=" << n;
        }
    }
}

TEST(HalfFamily, Grid) {
    auto g = half_grid(3);
    EXPECT_EQ(g[0], (std::array<u128, 4>{0, 1, 2, 3}));
    EXPECT_EQ(g[1][0], u128{3});
    EXPECT_EQ(g[1][1], u128{7});
    for (unsigned n = 1; n < 3; ++n)
        for (int j = 1; j < 4; ++j) {
            EXPECT_GT(g[n][j], g[n][j - 1] * (u128{1} << n));
            EXPECT_EQ((g[n][j] - g[n][j - 1]) % 2, 0u);
        }
}

TEST(HalfFamily, PairsOfBSelectEverySecondElement) {
    const unsigned levels = 5;
    auto g = half_grid(levels);
    auto fam = antichain_half(std::vector<int>(levels, 0));
    EXPECT_EQ(fam.B[0].count_upto(g[0][3]), 0u);
    for (unsigned n = 1; n < levels; ++n)
        for (int i = 0; i < 3; ++i)
            for (int j = i + 1; j < 3; ++j) {
                auto u = fam.B[i] | fam.B[j];
                u128 lo = g[n][0], hi = g[n][3];
                // B sets are disjoint (checked below), so the union count is a sum
                u128 cnt = fam.B[i].count_upto(hi) - fam.B[i].count_upto(lo) + fam.B[j].count_upto(hi) - fam.B[j].count_upto(lo);
                EXPECT_GE(cnt, (hi - lo) / 2) << "n=" << n << " i=" << i << " j=" << j;
                if (hi > 100000) continue;
                for (u128 x = lo; x < hi; ++x) EXPECT_FALSE(fam.B[i].contains(x) && fam.B[j].contains(x));
                // never two consecutive misses inside a step
                for (int s = 0; s < 3; ++s)
                    for (u128 x = g[n][s]; x + 1 < g[n][s + 1]; ++x)
                        EXPECT_TRUE(u.contains(x) || u.contains(x + 1)) << "n=" << n << " i=" << i << " j=" << j;
            }
}

TEST(HalfFamily, MembersAreUnionsOfTheirOwnerBlocks) {
    const unsigned levels = 4;
    auto g = half_grid(levels);
    std::vector<int> f{0, 1, 2, 0};
    auto fam = antichain_half(f);
    auto base = antichain_half(std::vector<int>(levels, 0));
    for (unsigned n = 1; n < levels; ++n)
        for (int j = 0; j < 3; ++j) {
            u128 lo = g[n][j], hi = g[n][j + 1];
            if (hi - lo > 50000) continue;
            for (u128 x = lo; x < hi; ++x) {
                bool want = j == f[n] || base.B[3 - j - f[n]].contains(x);
                EXPECT_EQ(fam.A_f.contains(x), want);
            }
        }
}

TEST(Collapse, EllSequence) {
    CollapseParams p;
    EXPECT_EQ(ell_seq(p, 2), (std::vector<u64>{0, 3, 12, 48}));
    p.k = 2;
    auto l = ell_seq(p, 1);
    EXPECT_EQ(l[1], 6u);
    EXPECT_EQ(l[2], 48u);
    EXPECT_EQ(l, oracle::collapse_ell(2, 0, 4, 3, 1));
}

TEST(Collapse, BudgetChain) {
    CollapseParams p;
    p.k = 4;
    auto c = p.budget_chain();
    EXPECT_EQ(c[0], Rat(1, 2));
    EXPECT_EQ(c[1], Rat(2, 3));
    EXPECT_EQ(c[2], Rat(45, 64));
    EXPECT_TRUE(p.budget_holds());
    for (u64 k = 3; k <= 100; ++k) {
        p.k = k;
        EXPECT_TRUE(p.budget_holds()) << k;
    }
    p.k = 1;
    EXPECT_FALSE(p.budget_holds());  // (3/4)(3/4) = 9/16 < 2/3
}

TEST(Collapse, ValueExamples) {
    CollapseParams p;
    std::vector<u64> six{0, 1, 2, 3, 4, 5};
    EXPECT_EQ(collapse_f(NatSet::explicit_set(six), p, 1), 1u);
    EXPECT_EQ(collapse_f(NatSet::empty(), p, 1), 0u);
    std::vector<u64> eight{0, 1, 2, 3, 4, 5, 6, 7};  // 8/12 · 3/2 = 1 exactly
    EXPECT_EQ(collapse_f(NatSet::explicit_set(eight), p, 1), 1u);
    for (u64 k = 1; k <= 3; ++k)
        for (u64 ones = 0; ones <= 48; ++ones) {
            p.k = k;
            std::vector<u64> xs;
            for (u64 i = 0; i < ones; ++i) xs.push_back(i);
            u64 ell = ell_seq(p, 1).back();
            if (ones > ell) continue;
            EXPECT_EQ(collapse_f(NatSet::explicit_set(xs), p, 1), oracle::collapse_value(ones, ell, k, 3, 2));
        }
}

TEST(Collapse, DecodeExamples) {
    CollapseParams p;
    p.k = 2;  // ℓ = 6, 48, 384
    std::vector<u64> xs{0};
    for (u64 v = 6; v < 30; ++v) xs.push_back(v);
    for (u64 v = 48; v < 248; ++v) xs.push_back(v);
    auto x = NatSet::explicit_set(xs);
    EXPECT_EQ(collapse_f(x, p, 0), 1u);
    EXPECT_EQ(collapse_f(x, p, 1), 2u);
    EXPECT_EQ(collapse_f(x, p, 2), 2u);
    EXPECT_EQ(collapse_decode(x, p, 3).str(), "100");
    EXPECT_EQ(collapse_decode(NatSet::empty(), p, 4).str(), "0000");
}

TEST(Collapse, EncoderStepOnAFreeBlock) {
    CollapseParams p;
    auto st = collapse_encode_step(SilverFragment::all_free(12), p, 1, 1);
    EXPECT_LE(st.fixed_ones + st.fixed_zeros, 8u);
    EXPECT_TRUE(st.within_budget);
    EXPECT_GE(st.free_after * 4, 9u);
    EXPECT_EQ(st.value % 2, 1u);
}

TEST(Collapse, RoundTripAtKTwo) {
    CollapseParams p;
    p.k = 2;
    verify::Rng rng(41);
    for (unsigned len = 1; len <= 4; ++len)
        for (unsigned v = 0; v < (1u << len); ++v) {
            BitString rho(len, v);
            auto res = collapse_encode(p, rho);
            const auto& fr = res.fragment;
            for (int trial = 0; trial < 6; ++trial) {
                std::vector<u64> x = fr.ones;
                for (u64 f : fr.free)
                    if (trial == 1 || (trial > 1 && rng.coin())) x.push_back(f);
                std::sort(x.begin(), x.end());
                EXPECT_EQ(collapse_decode(NatSet::explicit_set(x), p, len), rho);
            }
            auto ell = ell_seq(p, len - 1);
            for (unsigned n = 0; n < len; ++n)
                EXPECT_GE(fr.free_in(ell[n], ell[n + 1]) * p.r * p.k, ell[n + 1] - ell[n]);
        }
}

TEST(Collapse, InfeasibleBlockIsReported) {
    CollapseParams p;  // k = 1: block [0,3) cannot keep a free coordinate and force parity 0
    EXPECT_THROW(collapse_encode(p, BitString::parse("0")), PreconditionError);
}
