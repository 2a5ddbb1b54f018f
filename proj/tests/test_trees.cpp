#include <gtest/gtest.h>

#include <set>

#include "densitree/tree.hpp"
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
std::set<std::string> strs(const std::vector<BitString>& v) {
    std::set<std::string> out;
    for (const auto& b : v) out.insert(b.str());
    return out;
}
NatSet evens() { return NatSet::residues(2, 0); }
NatSet odds() { return NatSet::residues(2, 1); }
MathiasCond m_ex() { return MathiasCond({0}, evens() - NatSet::interval(0, 2)); }
}  // namespace

TEST(BitString, Basics) {
    auto b = BitString::parse("1011");
    EXPECT_EQ(b.str(), "1011");
    EXPECT_TRUE(b.at(0));
    EXPECT_FALSE(b.at(1));
    EXPECT_EQ(b.child(0).str(), "10110");
    EXPECT_EQ(b.prefix(2).str(), "10");
    EXPECT_EQ(b.parent().str(), "101");
    EXPECT_TRUE(BitString::parse("10").is_prefix_of(b));
    EXPECT_FALSE(BitString::parse("11").is_prefix_of(b));
    EXPECT_EQ(BitString::parse("10").append(BitString::parse("01")).str(), "1001");
    EXPECT_EQ(BitString::parse("1").pad_zeros(3).str(), "100");
    EXPECT_EQ(b.ones(), 3u);
    EXPECT_THROW(BitString::parse("102"), ParseError);
    // shortlex
    EXPECT_LT(BitString::parse("11"), BitString::parse("000"));
    EXPECT_LT(BitString::parse("01"), BitString::parse("10"));
}

TEST(TreeSlice, ValidationRejectsBrokenSlices) {
    EXPECT_THROW(TreeSlice::from_nodes(2, {BitString(), BitString::parse("0"), BitString::parse("01"), BitString::parse("11")}),
                 PreconditionError);
    // dead end at "1"
    EXPECT_THROW(TreeSlice::from_nodes(2, {BitString(), BitString::parse("0"), BitString::parse("1"), BitString::parse("00")}),
                 PreconditionError);
    EXPECT_NO_THROW(TreeSlice::full(5).validate());
    EXPECT_EQ(TreeSlice::full(5).size(), 63u);
}

TEST(MathiasTree, Examples) {
    EXPECT_EQ(level_strs(mathias_tree(m_ex(), 5), 4), (std::set<std::string>{"1000", "1010"}));
    EXPECT_EQ(mathias_tree(MathiasCond({}, NatSet::omega()), 3), TreeSlice::full(3));
    EXPECT_EQ(level_strs(mathias_tree(m_ex(), 4), 3), (std::set<std::string>{"100", "101"}));
    EXPECT_THROW(MathiasCond({4}, evens()), PreconditionError);
}

TEST(SilverTree, Examples) {
    EXPECT_EQ(level_strs(silver_tree(SilverCond(evens(), odds(), 4), 3), 3), (std::set<std::string>{"010", "011", "110", "111"}));
    EXPECT_EQ(level_strs(silver_tree(SilverCond(odds(), NatSet::empty(), 4), 2), 2), (std::set<std::string>{"00", "01"}));
    EXPECT_EQ(silver_tree(SilverCond(NatSet::omega(), NatSet::empty(), 3), 2), TreeSlice::full(2));
    EXPECT_THROW(SilverCond(evens(), NatSet::explicit_set({2}), 10), PreconditionError);
}

TEST(MathiasTree, LeavesMatchEnumeration) {
    verify::Rng rng(3);
    for (int it = 0; it < 20; ++it) {
        unsigned L = static_cast<unsigned>(rng.between(1, 14));
        u64 m = rng.between(1, 5);
        std::vector<u64> r;
        for (u64 x = 0; x < m; ++x)
            if (rng.coin()) r.push_back(x);
        if (r.empty()) r.push_back(0);
        NatSet A = NatSet::periodic(m, r) - NatSet::interval(0, 3);
        std::vector<u64> s;
        for (u64 x = 0; x < 3; ++x)
            if (rng.coin()) s.push_back(x);
        std::vector<unsigned> free;
        for (unsigned x = 0; x < L; ++x)
            if (A.contains(x)) free.push_back(x);
        std::set<std::string> want;
        for (u64 mask = 0; mask < (u64{1} << free.size()); ++mask) {
            std::string b(L, '0');
            for (u64 x : s)
                if (x < L) b[x] = '1';
            for (std::size_t i = 0; i < free.size(); ++i)
                if ((mask >> i) & 1) b[free[i]] = '1';
            want.insert(b);
        }
        auto t = mathias_tree(MathiasCond(s, A), L);
        EXPECT_NO_THROW(t.validate());
        EXPECT_EQ(level_strs(t, L), want);
    }
}

TEST(Splitting, Examples) {
    auto full2 = splitting_nodes(TreeSlice::full(2));
    EXPECT_EQ(strs(full2.splitting), (std::set<std::string>{""}));
    EXPECT_EQ(full2.unknown.size(), 6u);  // lengths 1 and 2 are past the classified range
    auto chain = TreeSlice::from_nodes(2, {BitString(), BitString::parse("0"), BitString::parse("00")});
    EXPECT_TRUE(splitting_nodes(chain).splitting.empty());
    // lengths 0..3 classified at depth 5; only length 2 splits
    EXPECT_EQ(strs(splitting_nodes(mathias_tree(m_ex(), 5)).splitting), (std::set<std::string>{"10"}));
    auto six = splitting_nodes(mathias_tree(m_ex(), 6)).splitting;
    EXPECT_EQ(strs(six), (std::set<std::string>{"10", "1000", "1010"}));
}

TEST(Stem, Examples) {
    EXPECT_EQ(stem(TreeSlice::full(3)).str(), "");
    EXPECT_EQ(stem(mathias_tree(m_ex(), 5)).str(), "10");
    EXPECT_EQ(stem(silver_tree(SilverCond(odds(), NatSet::empty(), 5), 4)).str(), "0");
    auto chain = TreeSlice::from_nodes(2, {BitString(), BitString::parse("0"), BitString::parse("00")});
    EXPECT_THROW(stem(chain), PreconditionError);
}

TEST(UniformSplit, Examples) {
    auto u = uniform_split_levels(mathias_tree(m_ex(), 6));
    ASSERT_TRUE(u.levels);
    EXPECT_EQ(*u.levels, (std::vector<unsigned>{2, 4}));
    auto f = uniform_split_levels(TreeSlice::full(3));
    ASSERT_TRUE(f.levels);
    EXPECT_EQ(*f.levels, (std::vector<unsigned>{0, 1}));
    // "00" splits, "01" does not
    auto bad = TreeSlice::from_leaves(4, {BitString::parse("0000"), BitString::parse("0010"), BitString::parse("0100")});
    auto c = uniform_split_levels(bad);
    EXPECT_FALSE(c.levels);
    ASSERT_TRUE(c.counterexample);
    EXPECT_EQ(c.counterexample->first.len, c.counterexample->second.len);
    EXPECT_TRUE(is_splitting(bad, c.counterexample->first));
    EXPECT_FALSE(is_splitting(bad, c.counterexample->second));
}

TEST(Restrict, Examples) {
    auto full = TreeSlice::full(2);
    EXPECT_EQ(restrict(full, BitString()), full);
    EXPECT_EQ(strs(restrict(full, BitString::parse("1")).nodes()), (std::set<std::string>{"", "1", "10", "11"}));
    auto m = mathias_tree(m_ex(), 6);
    auto r = restrict(m, BitString::parse("101"));
    for (const auto& b : r.nodes()) {
        bool rel = b.is_prefix_of(BitString::parse("101")) || BitString::parse("101").is_prefix_of(b);
        EXPECT_TRUE(rel && m.contains(b)) << b.str();
    }
    EXPECT_EQ(level_strs(r, 6), (std::set<std::string>{"101000", "101010"}));
    EXPECT_THROW(restrict(m, BitString::parse("11")), PreconditionError);
}

TEST(SplitRank, Examples) {
    auto m = mathias_tree(m_ex(), 6);
    EXPECT_EQ(strs(split_rank_nodes(m, 0)), (std::set<std::string>{stem(m).str()}));
    EXPECT_EQ(strs(split_rank_nodes(TreeSlice::full(3), 1)), (std::set<std::string>{"0", "1"}));
    auto s = silver_tree(SilverCond(evens(), odds(), 6), 5);
    EXPECT_EQ(strs(split_rank_nodes(s, 1)), (std::set<std::string>{"01", "11"}));
}

TEST(Skeleton, Examples) {
    auto s = silver_tree(SilverCond(evens(), NatSet::empty(), 6), 5);
    auto phi = split_skeleton(s);
    EXPECT_EQ(phi.at(BitString()).str(), "");
    EXPECT_EQ(phi.at(BitString::parse("00")).str(), "0");
    EXPECT_EQ(phi.at(BitString::parse("10")).str(), "1");
    auto full = split_skeleton(TreeSlice::full(4));
    for (const auto& [k, v] : full) EXPECT_EQ(k, v);
    EXPECT_EQ(full.size(), 7u);  // lengths 0..2 are classified at depth 4
    auto m = split_skeleton(mathias_tree(m_ex(), 6));
    EXPECT_EQ(m.at(BitString::parse("10")).str(), "");
    EXPECT_EQ(m.at(BitString::parse("1000")).str(), "0");
    EXPECT_EQ(m.at(BitString::parse("1010")).str(), "1");
}

TEST(LeqN, Reflexive) {
    MathiasCond p({}, evens().with_horizon(4096));
    for (unsigned n = 0; n < 5; ++n) EXPECT_TRUE(leq_n_check(p, p, n, Rat(1, 2)));
    SilverCond sp(evens().with_horizon(4096), odds().with_horizon(4096), 4096);
    EXPECT_TRUE(leq_n_check(sp, sp, 3, Rat(1, 2)));
}

TEST(LeqN, EvensAgainstMultiplesOfFour) {
    // decided by comparing both k-sequences and A below k_n
    auto ev = [](u64 x) { return x % 2 == 0; };
    auto m4 = [](u64 x) { return x % 4 == 0; };
    MathiasCond p({}, evens().with_horizon(4096)), q({}, NatSet::residues(4, 0).with_horizon(4096));
    for (unsigned n = 0; n <= 3; ++n) {
        auto kp = oracle::k_sequence(ev, oracle::q(1, 2), n, 4096), kq = oracle::k_sequence(m4, oracle::q(1, 2), n, 4096);
        bool same = kp[n] == kq[n];
        for (u64 x = 0; same && x < kp[n]; ++x) same = ev(x) == m4(x);
        EXPECT_EQ(leq_n_check(q, p, n, Rat(1, 2)), same) << "n=" << n;
    }
    EXPECT_TRUE(leq_n_check(q, p, 1, Rat(1, 2)));
    EXPECT_FALSE(leq_n_check(q, p, 3, Rat(1, 2)));
}

TEST(LeqN, PruningAboveKnHolds) {
    NatSet A = NatSet::periodic(3, {0, 1}).with_horizon(4096);
    MathiasCond p({}, A);
    for (unsigned n = 1; n <= 4; ++n) {
        u64 kn = k_sequence(A, Rat(1, 2), n).entries[n];
        NatSet Aq = (A - NatSet::explicit_set({kn + 1, kn + 3})).with_horizon(4096);
        EXPECT_TRUE(leq_n_check(MathiasCond({}, Aq), p, n, Rat(1, 2)));
        // pruning below k_n breaks it
        auto below = A.elements_below(kn);
        NatSet Ab = (A - NatSet::explicit_set({below.back()})).with_horizon(4096);
        EXPECT_FALSE(leq_n_check(MathiasCond({}, Ab), p, n, Rat(1, 2)));
    }
}
