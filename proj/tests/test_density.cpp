#include <gtest/gtest.h>

#include "densitree/density.hpp"
#include "densitree/io.hpp"
#include "densitree/verify.hpp"
#include "oracles.hpp"

using namespace densitree;
using u64 = std::uint64_t;

namespace {
NatSet mult4() { return NatSet::residues(4, 0); }
NatSet evens() { return NatSet::residues(2, 0); }

oracle::Periodic random_periodic(verify::Rng& rng) {
    oracle::Periodic p;
    p.m = rng.between(1, 12);
    for (u64 x = 0; x < p.m; ++x)
        if (rng.coin()) p.r.push_back(x);
    p.t = rng.below(40);
    for (u64 x = 0; x < p.t; ++x) {
        if (rng.coin(1, 4)) p.add.push_back(x);
        else if (rng.coin(1, 3)) p.del.push_back(x);
    }
    return p;
}
}  // namespace

TEST(Rat, ParseAndNormalize) {
    EXPECT_EQ(Rat::parse("2/4"), Rat(1, 2));
    EXPECT_EQ(Rat::parse("3").str(), "3/1");
    EXPECT_EQ(Rat(-2, -4).str(), "1/2");
    EXPECT_THROW(Rat::parse("1/0"), ParseError);
    EXPECT_THROW(Rat::parse("0.5"), ParseError);
    EXPECT_THROW(Rat::parse(""), ParseError);
}

TEST(Rat, ArithmeticAndOrder) {
    EXPECT_EQ(Rat(1, 3) + Rat(1, 6), Rat(1, 2));
    EXPECT_EQ(Rat(3, 4) * Rat(15, 16), Rat(45, 64));
    EXPECT_LT(Rat(2, 3), Rat(45, 64));
    EXPECT_EQ(Rat(7, 2).floor(), 3);
    EXPECT_EQ(Rat(-7, 2).floor(), -4);
    EXPECT_EQ(Rat(3, 4).round_half_up(), 1);
    EXPECT_EQ(Rat(1, 2).round_half_up(), 1);
}

TEST(Rat, OverflowIsReported) {
    Rat big(std::numeric_limits<std::int64_t>::max() / 2 + 1);
    EXPECT_THROW(big * Rat(4), OverflowError);
}

TEST(NatSet, CountExamples) {
    EXPECT_EQ(mult4().count_upto(12), 3u);
    EXPECT_EQ(NatSet::empty().count_upto(100), 0u);
    EXPECT_EQ(evens().count_upto(7), 4u);
}

TEST(NatSet, PeriodicWithExceptions) {
    auto a = NatSet::periodic(3, {0}, 10, {1, 2}, {3});
    EXPECT_TRUE(a.contains(1));
    EXPECT_FALSE(a.contains(3));
    EXPECT_TRUE(a.contains(6));
    EXPECT_FALSE(a.contains(11));
    EXPECT_TRUE(a.contains(12));
    EXPECT_EQ(a.min(), 0u);
    EXPECT_EQ(a.count_upto(13), 6u);  // 0,1,2,6,9,12
}

TEST(NatSet, CountAgreesWithClosedFormOracle) {
    verify::Rng rng(5);
    for (int it = 0; it < 60; ++it) {
        auto p = random_periodic(rng);
        auto a = NatSet::periodic(p.m, p.r, p.t, p.add, p.del);
        for (u64 n = 0; n <= 10000; n += 1 + n / 50) ASSERT_EQ(a.count_upto(n), p.count(n)) << a.canonical() << " n=" << n;
        auto d = a.closed_form_density();
        ASSERT_TRUE(d);
        EXPECT_EQ(*d, Rat(static_cast<std::int64_t>(p.r.size()), static_cast<std::int64_t>(p.m)));
    }
}

TEST(NatSet, BooleanCombinations) {
    auto u = evens() | NatSet::residues(3, 0);
    auto i = evens() & NatSet::residues(3, 0);
    auto d = evens() - NatSet::residues(3, 0);
    auto c = NatSet::complement(evens());
    for (u64 x = 0; x < 200; ++x) {
        EXPECT_EQ(u.contains(x), x % 2 == 0 || x % 3 == 0);
        EXPECT_EQ(i.contains(x), x % 6 == 0);
        EXPECT_EQ(d.contains(x), x % 2 == 0 && x % 3 != 0);
        EXPECT_EQ(c.contains(x), x % 2 == 1);
    }
    EXPECT_EQ(i.count_upto(60), 10u);
    EXPECT_EQ(*u.closed_form_density(), Rat(2, 3));
}

TEST(NatSet, HorizonIsEnforced) {
    auto a = evens().with_horizon(10);
    EXPECT_EQ(a.count_upto(10), 5u);
    EXPECT_THROW(a.contains(10), HorizonError);
    EXPECT_THROW(a.count_upto(11), HorizonError);
    EXPECT_THROW(NatSet::empty().with_horizon(50).min(), HorizonError);
}

TEST(NatSet, CanonicalRoundTrip) {
    std::vector<NatSet> sets{evens(), NatSet::periodic(5, {1, 3}, 7, {0}, {3}), NatSet::explicit_set({1, 4, 9}),
                             NatSet::interval(3, 9), (evens() - NatSet::interval(0, 6)) | NatSet::explicit_set({1}),
                             NatSet::complement(mult4())};
    for (const auto& s : sets) {
        auto back = io::parse_natset(s.canonical());
        EXPECT_EQ(back.canonical(), s.canonical());
        for (u64 x = 0; x < 100; ++x) EXPECT_EQ(back.contains(x), s.contains(x));
    }
}

TEST(NatSet, ParseErrors) {
    EXPECT_THROW(io::parse_natset("periodic:m=4"), ParseError);
    EXPECT_THROW(io::parse_natset("nope:1"), ParseError);
    EXPECT_THROW(io::parse_natset("explicit:[1,x]"), ParseError);
    EXPECT_THROW(io::parse_natset("combo:union(evens)"), ParseError);
    EXPECT_THROW(io::parse_natset("blocks:unknown()"), ParseError);
    EXPECT_THROW(io::parse_natset("periodic:m=4;r=[0];zz=1"), ParseError);
}

TEST(DensityProfile, Examples) {
    auto p = density_profile(mult4(), std::vector<u64>{4, 8, 12});
    EXPECT_EQ(p.values, (std::vector<Rat>{Rat(1, 4), Rat(1, 4), Rat(1, 4)}));
    EXPECT_EQ(p.csv(), "4,1,4\n8,1,4\n12,1,4\n");
    EXPECT_EQ(*p.asymptotic, Rat(1, 4));
    auto q = density_profile(evens(), std::vector<u64>{1, 2});
    EXPECT_EQ(q.values, (std::vector<Rat>{Rat(1), Rat(1, 2)}));
    auto e = density_profile(NatSet::empty(), std::vector<u64>{5});
    EXPECT_EQ(e.values[0], Rat(0));
}

TEST(DensityProfile, RejectsBadCheckpoints) {
    EXPECT_THROW(density_profile(evens(), std::vector<u64>{0}), PreconditionError);
    EXPECT_THROW(density_profile(evens(), std::vector<u64>{4, 4}), PreconditionError);
}

TEST(RelativeDensity, Examples) {
    auto same = relative_density_profile(evens(), evens(), std::vector<u64>{1, 7, 30});
    for (const auto& v : same.values) EXPECT_EQ(v, Rat(1));
    EXPECT_EQ(relative_density_profile(mult4(), evens(), std::vector<u64>{8}).values[0], Rat(1, 2));
    EXPECT_EQ(relative_density_profile(NatSet::empty(), evens(), std::vector<u64>{4}).values[0], Rat(0));
    EXPECT_THROW(relative_density_profile(NatSet::omega(), evens(), std::vector<u64>{4}), PreconditionError);
}

TEST(KSequence, Examples) {
    EXPECT_EQ(k_sequence(evens(), Rat(1, 2), 2).entries, (std::vector<u64>{0, 1, 2}));
    EXPECT_EQ(k_sequence(NatSet::omega(), Rat(1), 1).entries, (std::vector<u64>{0, 1}));
    EXPECT_EQ(k_sequence(mult4(), Rat(1, 2), 1).entries[1], 1u);
}

TEST(KSequence, MatchesOracle) {
    verify::Rng rng(11);
    const Rat epss[] = {Rat(1, 4), Rat(1, 2), Rat(3, 4)};
    for (int it = 0; it < 40; ++it) {
        auto p = random_periodic(rng);
        if (p.r.empty()) continue;
        Rat eps = epss[rng.below(3)];
        if (p.density() < oracle::q(eps.num(), eps.den())) continue;
        auto a = NatSet::periodic(p.m, p.r, p.t, p.add, p.del).with_horizon(1 << 14);
        auto want = oracle::k_sequence([&](u64 x) { return p.member(x); }, oracle::q(eps.num(), eps.den()), 6, 1 << 14);
        EXPECT_EQ(k_sequence(a, eps, 6).entries, want) << a.canonical() << " eps=" << eps.str();
    }
}

TEST(KSequence, SparseSetRunsIntoHorizon) {
    EXPECT_THROW(k_sequence(mult4().with_horizon(1000), Rat(1, 2), 4), HorizonError);
    EXPECT_THROW(k_sequence(evens(), Rat(0), 2), PreconditionError);
}

TEST(DominatingProfile, Examples) {
    EXPECT_EQ(dominating_profile(evens(), Rat(1, 2), 2), (std::vector<u64>{1, 1}));
    EXPECT_EQ(dominating_profile(NatSet::omega(), Rat(1), 1), (std::vector<u64>{1}));
    EXPECT_EQ(dominating_profile(NatSet::residues(2, 1), Rat(1, 2), 1), (std::vector<u64>{1}));
}

TEST(DominatingProfile, MatchesOracleAndIsMonotone) {
    verify::Rng rng(12);
    for (int it = 0; it < 30; ++it) {
        auto p = random_periodic(rng);
        if (p.density() < oracle::q(1, 2)) continue;
        auto a = NatSet::periodic(p.m, p.r, p.t, p.add, p.del).with_horizon(1 << 14);
        if (a.count_upto(1 << 14) == 0) continue;
        auto f = dominating_profile(a, Rat(1, 2), 8);
        EXPECT_EQ(f, oracle::dominating([&](u64 x) { return p.member(x); }, oracle::q(1, 2), 8, 1 << 14));
        EXPECT_TRUE(std::is_sorted(f.begin(), f.end()));
    }
}
