#include <gtest/gtest.h>

#include <cstdlib>
#include <set>

#include "densitree/sptree.hpp"
#include "densitree/verify.hpp"
#include "oracles.hpp"

using namespace densitree;
using u64 = std::uint64_t;

namespace {
std::set<std::string> level_strs(const TreeSlice& t, unsigned l) {
    std::set<std::string> out;
    for (const auto& b : t.level_nodes(l)) out.insert(b.str());
    return out;
}
}  // namespace

TEST(EpochSeq, Entries) {
    EXPECT_EQ(EpochSeq(4).entries, (std::vector<u64>{0, 1, 3, 7, 15}));
    EXPECT_EQ(EpochSeq::epoch_of(0), 0u);
    EXPECT_EQ(EpochSeq::epoch_of(2), 1u);
    EXPECT_EQ(EpochSeq::epoch_of(3), 2u);
    EXPECT_EQ(EpochSeq::epoch_end(2), 3u);
    EXPECT_EQ(EpochSeq::epoch_end(127), 255u);
}

TEST(CodeMap, LengthThenLex) {
    EXPECT_EQ(code_map(BitString()), u128{0});
    EXPECT_EQ(code_map(BitString::parse("0")), u128{1});
    EXPECT_EQ(code_map(BitString::parse("1")), u128{2});
    // injective and order-preserving on all strings up to length 8
    u128 prev = 0;
    bool first = true;
    for (unsigned len = 0; len <= 8; ++len)
        for (u64 v = 0; v < (u64{1} << len); ++v) {
            u128 c = code_map(BitString(len, v));
            EXPECT_EQ(oracle::code_of(len, v), oracle::cpp_int(static_cast<u64>(c)));
            if (!first) {
                EXPECT_EQ(c, prev + 1);
            }
            prev = c;
            first = false;
        }
}

TEST(T0, FigureLevels) {
    auto t = sp_T0(7);
    EXPECT_EQ(level_strs(sp_T0(0), 0), (std::set<std::string>{""}));
    EXPECT_EQ(level_strs(t, 2), (std::set<std::string>{"00", "01", "10"}));
    EXPECT_EQ(level_strs(t, 3), (std::set<std::string>{"000", "010", "100", "101"}));
    EXPECT_EQ(t.level(7).size(), 8u);
}

TEST(T0, Invariants) {
    const unsigned L = 127;
    auto t = sp_T0(L);
    for (unsigned l = 0; l <= L; ++l) {
        ASSERT_EQ(t.level(l).size(), l + 1);
        unsigned n = EpochSeq::epoch_of(l);
        for (u128 v : t.level(l)) {
            ASSERT_LE(popcount128(v), n);
            if (l < L) {
                ASSERT_TRUE(t.contains(BitString(l, v).child(0)));
            }
        }
    }
    EXPECT_EQ(K_of(t, BitString()), 0u);
}

TEST(T0, OnesAtLevelFour) {
    auto t = sp_T0(4);
    unsigned most = 0;
    for (u128 v : t.level(4)) most = std::max(most, popcount128(v));
    EXPECT_EQ(most, 2u);
    EXPECT_TRUE(t.contains(BitString::parse("1010")));
    for (u128 v : t.level(1)) EXPECT_LE(popcount128(v), 1u);
}

TEST(SpP, ContainsT0AndGraftsPaddedCopies) {
    auto p = sp_p(15), t0 = sp_T0(15);
    for (const auto& b : t0.nodes()) EXPECT_TRUE(p.contains(b));
    EXPECT_NO_THROW(p.validate());
    // "10" splits in T0 at length 2 < ℓ_2 = 3; its padding "100" roots a copy of T0
    auto root = BitString::parse("100");
    for (unsigned l = 0; l <= 12; ++l)
        for (const auto& b : t0.level_nodes(l)) EXPECT_TRUE(p.contains(root.append(b))) << b.str();
}

TEST(SpP, DeterministicAndPrefixStable) {
    auto a = sp_p(31), b = sp_p(31), c = sp_p(63);
    EXPECT_EQ(a, b);
    for (unsigned l = 0; l <= 31; ++l) EXPECT_EQ(a.level(l), c.level(l));
}

TEST(KOf, Examples) {
    auto full = TreeSlice::full(8);
    for (const auto& t : {BitString(), BitString::parse("1"), BitString::parse("0110")}) EXPECT_EQ(K_of(full, t), t.len);
    // chain of length 3 then full
    auto chain_full = TreeSlice::constrained(8, [](unsigned pos) { return pos < 3 ? 0 : -1; });
    EXPECT_EQ(K_of(chain_full, BitString()), 3u);
    EXPECT_THROW(K_of(full, BitString::parse("0000000")), PreconditionError);
}

TEST(Width, Examples) {
    auto w = witness_width(sp_T0(3), BitString(), 3, 0);
    ASSERT_TRUE(w);
    EXPECT_EQ(w->width, 2u);
    EXPECT_EQ(verify::oracle_min_width(sp_T0(3), BitString(), 3, 0), 2u);
    auto f = witness_width(TreeSlice::full(4), BitString(), 4, 0);
    ASSERT_TRUE(f);
    EXPECT_EQ(f->width, 1u);
    EXPECT_EQ(verify::oracle_min_width(TreeSlice::full(4), BitString(), 4, 0), 1u);
    // no 1 below "00" at coordinates 2,3
    auto zeros = TreeSlice::constrained(4, [](unsigned pos) { return pos < 2 ? -1 : 0; });
    EXPECT_FALSE(witness_width(zeros, BitString::parse("00"), 4, 2));
    EXPECT_FALSE(verify::oracle_min_width(zeros, BitString::parse("00"), 4, 2));
}

TEST(Width, AgreesWithOracleOnRandomSlices) {
    verify::Rng rng(51);
    for (int it = 0; it < 50; ++it) {
        unsigned n = static_cast<unsigned>(rng.between(2, 10));
        auto p = verify::random_slice(rng, n, 12);
        unsigned k = static_cast<unsigned>(rng.below(n));
        auto a = witness_width(p, BitString(), n, k);
        auto b = verify::oracle_min_width(p, BitString(), n, k);
        ASSERT_EQ(a.has_value(), b.has_value());
        if (a) {
            EXPECT_EQ(a->width, *b);
        }
    }
}

TEST(Width, SearchCapFromEnvironment) {
    auto p = TreeSlice::full(20);
    ::setenv("DENSITREE_MAX_SEARCH", "8", 1);
    EXPECT_EQ(witness_search_cap(), 8u);
    EXPECT_THROW(witness_width(p, BitString(), 12, 0), SearchCapError);
    ::unsetenv("DENSITREE_MAX_SEARCH");
    EXPECT_EQ(witness_search_cap(), 15u);
    EXPECT_NO_THROW(witness_width(p, BitString(), 12, 0));
}

TEST(OnesBound, HoldsOnP) {
    auto p = sp_p(63);
    auto r = ones_bound_check(p, 63);
    EXPECT_TRUE(r.sound_ok);
    EXPECT_EQ(r.real_log_violations, 0u);
    // brute recount of the per-level maxima
    for (const auto& lv : r.levels) {
        unsigned most = 0;
        for (u128 v : p.level(lv.ell)) most = std::max(most, popcount128(v));
        EXPECT_EQ(lv.max_ones, most);
    }
}

TEST(Escape, Examples) {
    auto t0 = sp_T0(3);
    Slalom s({1}, {{code_map(BitString::parse("000"))}});
    auto e = escape_witness(t0, BitString(), s, {3});
    EXPECT_EQ(e.n0, 0u);
    EXPECT_TRUE((std::set<std::string>{"010", "100", "101"}).count(e.node.str()));
    EXPECT_EQ(e.level_width, 4u);
    Slalom empty({1}, {{}});
    EXPECT_EQ(escape_witness(t0, BitString(), empty, {3}).node.str(), "000");
    auto chain = TreeSlice::constrained(3, [](unsigned) { return 0; });
    Slalom cover({1}, {{code_map(BitString::parse("000"))}});
    EXPECT_THROW(escape_witness(chain, BitString(), cover, {3}), PreconditionError);
    EXPECT_THROW(escape_witness(t0, BitString(), empty, {2}), PreconditionError);  // not an epoch end
}

TEST(Slalom, Validation) {
    EXPECT_THROW(Slalom({1}, {{1, 2}}), PreconditionError);
    EXPECT_THROW(Slalom({0}, {{}}), PreconditionError);
    EXPECT_THROW(Slalom({1, 1}, {{}}), PreconditionError);
}
