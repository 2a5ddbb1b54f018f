#pragma once

#include <chrono>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "densitree/constructions.hpp"
#include "densitree/density.hpp"
#include "densitree/io.hpp"
#include "densitree/sptree.hpp"
#include "densitree/tree.hpp"

namespace densitree::verify {

using json = io::json;

enum class Scale { Small, Default };

inline Scale parse_scale(std::string_view s) {
    if (s == "small") return Scale::Small;
    if (s == "default") return Scale::Default;
    throw ParseError("scale must be small or default");
}

struct Failure {
    std::string check;
    json inputs;
    std::string expected;
    std::string actual;
};

struct SuiteReport {
    std::string suite;
    std::uint64_t seed = 0;
    Scale scale = Scale::Default;
    std::uint64_t checks = 0;
    std::vector<Failure> failures;
    double elapsed_ms = 0;

    bool pass() const { return failures.empty(); }

    // Timing is opt-in so that identical runs serialize identically.
    json to_json(bool with_timing = false) const {
        json j;
        j["suite"] = suite;
        j["seed"] = seed;
        j["scale"] = scale == Scale::Small ? "small" : "default";
        j["verdict"] = pass() ? "pass" : "fail";
        j["checks"] = checks;
        j["failures"] = json::array();
        for (const auto& f : failures)
            j["failures"].push_back({{"check", f.check}, {"inputs", f.inputs}, {"expected", f.expected}, {"actual", f.actual}});
        if (with_timing) j["elapsed_ms"] = elapsed_ms;
        return j;
    }
};

// Deterministic across platforms: raw engine output only, no std distributions.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : g_(seed) {}
    std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : g_() % n; }
    std::uint64_t between(std::uint64_t lo, std::uint64_t hi) { return lo + below(hi - lo + 1); }  // inclusive
    bool coin(std::uint64_t num = 1, std::uint64_t den = 2) { return below(den) < num; }

private:
    std::mt19937_64 g_;
};

namespace detail {

class Recorder {
public:
    explicit Recorder(SuiteReport& r) : r_(r) {}
    bool operator()(bool ok, const std::string& check, json inputs, const std::string& expected, const std::string& actual) {
        ++r_.checks;
        if (!ok) r_.failures.push_back({check, std::move(inputs), expected, actual});
        return ok;
    }
    // an unexpected library error counts as a failed check
    template <class F>
    void guarded(const std::string& check, json inputs, F&& body) {
        try {
            body();
        } catch (const std::exception& e) {
            (*this)(false, check, std::move(inputs), "no error", e.what());
        }
    }

private:
    SuiteReport& r_;
};

template <class T>
std::string s(T v) {
    if constexpr (std::is_same_v<T, u128>) return to_dec(v);
    else return std::to_string(v);
}

inline std::vector<std::uint64_t> random_subset(Rng& rng, std::uint64_t lo, std::uint64_t hi, std::uint64_t num, std::uint64_t den) {
    std::vector<std::uint64_t> out;
    for (std::uint64_t x = lo; x < hi; ++x)
        if (rng.coin(num, den)) out.push_back(x);
    return out;
}

// Periodic set plus a direct membership oracle built from the raw fields.
struct PeriodicCase {
    std::uint64_t m, t;
    std::vector<std::uint64_t> r, add, del;
    bool member(std::uint64_t n) const {
        bool in_r = std::binary_search(r.begin(), r.end(), n % m);
        if (n >= t) return in_r;
        if (std::binary_search(add.begin(), add.end(), n)) return true;
        return in_r && !std::binary_search(del.begin(), del.end(), n);
    }
    NatSet set() const { return NatSet::periodic(m, r, t, add, del); }
    std::string text() const { return set().canonical(); }
};

inline PeriodicCase random_periodic(Rng& rng, std::uint64_t min_residues = 0) {
    PeriodicCase c;
    c.m = rng.between(std::max<std::uint64_t>(1, min_residues), 12);
    do {
        c.r = random_subset(rng, 0, c.m, 1, 2);
    } while (c.r.size() < min_residues);
    c.t = rng.below(31);
    c.add = random_subset(rng, 0, c.t, 1, 4);
    for (auto x : random_subset(rng, 0, c.t, 1, 4))
        if (!std::binary_search(c.add.begin(), c.add.end(), x)) c.del.push_back(x);
    return c;
}

inline Rat pow2_inv(unsigned n) { return Rat(1, std::int64_t{1} << n); }

// Brute count |A ∩ n| via membership.
template <Natural N>
N brute_count(const BasicNatSet<N>& a, N n) {
    N c = 0;
    for (N x = 0; x < n; ++x) c += a.contains(x) ? 1 : 0;
    return c;
}

// |(P ∩ Q) ∩ [0, upto)| for block-described sets, segment by segment.
template <Natural N>
N blocks_intersection_count(const BasicNatSet<N>& a, const BasicNatSet<N>& b, N upto) {
    using B = typename BasicNatSet<N>::Blocks;
    const auto* pa = std::get_if<B>(&a.descriptor());
    const auto* pb = std::get_if<B>(&b.descriptor());
    if (!pa || !pb) throw PreconditionError("intersection count needs block sets");
    N total = 0;
    for (const auto& x : pa->segs)
        for (const auto& y : pb->segs) {
            N lo = std::max(x.lo, y.lo), hi = std::min({x.hi, y.hi, upto});
            if (lo >= hi) continue;
            // first common element at or after lo
            auto first_x = x.next_from(lo);
            if (!first_x) continue;
            std::optional<N> common;
            N v = *first_x;
            for (N i = 0; i < y.step && v < hi; ++i, v += x.step)
                if (y.contains(v)) {
                    common = v;
                    break;
                }
            if (!common) continue;
            N g = x.step, h = y.step;
            while (h != 0) g = std::exchange(h, g % h);
            N step = x.step / g * y.step;
            total += (hi - *common - 1) / step + 1;
        }
    return total;
}

}  // namespace detail

// -- exhaustive oracle for the width search --------------------------------------

// Smallest family of level-n nodes above t whose ones cover [k, n), found by
// trying every family in order of size. No pruning.
inline std::optional<unsigned> oracle_min_width(const TreeSlice& p, const BitString& t, unsigned n, unsigned k,
                                                std::uint64_t max_families = 20'000'000) {
    if (n > 10) throw SearchCapError("oracle limited to n <= 10");
    if (!p.contains(t) || n > p.depth() || n < t.len) throw PreconditionError("bad oracle query");
    if (k >= n) return 0u;
    auto [lo, hi] = p.range_below(t, n);
    std::vector<u128> leaves(p.level(n).begin() + static_cast<std::ptrdiff_t>(lo), p.level(n).begin() + static_cast<std::ptrdiff_t>(hi));
    auto covers = [&](const std::vector<std::size_t>& pick) {
        for (unsigned i = k; i < n; ++i) {
            bool hit = false;
            for (std::size_t j : pick) hit = hit || ((leaves[j] >> (n - 1 - i)) & 1);
            if (!hit) return false;
        }
        return true;
    };
    std::uint64_t tried = 0;
    const std::size_t m = leaves.size();
    for (std::size_t w = 1; w <= m; ++w) {
        std::vector<std::size_t> pick(w);
        for (std::size_t i = 0; i < w; ++i) pick[i] = i;
        for (;;) {
            if (++tried > max_families) throw SearchCapError("oracle family budget exhausted");
            if (covers(pick)) return static_cast<unsigned>(w);
            std::size_t i = w;
            while (i > 0 && pick[i - 1] == m - w + i - 1) --i;
            if (i == 0) break;
            ++pick[i - 1];
            for (std::size_t j = i; j < w; ++j) pick[j] = pick[j - 1] + 1;
        }
    }
    return std::nullopt;
}

// A random dead-end-free slice of depth n given by a few random leaves.
inline TreeSlice random_slice(Rng& rng, unsigned n, unsigned max_leaves) {
    std::vector<BitString> leaves;
    std::uint64_t count = rng.between(1, max_leaves);
    for (std::uint64_t i = 0; i < count; ++i) {
        BitString b;
        for (unsigned j = 0; j < n; ++j) b = b.child(rng.coin(1, 3) ? 1 : 0);
        leaves.push_back(b);
    }
    return TreeSlice::from_leaves(n, leaves);
}

// -- suites ------------------------------------------------------------------------

namespace detail {

inline void suite_density(Rng& rng, Scale scale, Recorder& rec) {
    const bool small = scale == Scale::Small;
    const std::uint64_t top = small ? 1000 : 10000;
    for (int it = 0; it < (small ? 10 : 100); ++it) {
        auto c = random_periodic(rng);
        rec.guarded("periodic_count", {{"set", c.text()}}, [&] {
            NatSet a = c.set();
            std::uint64_t run = 0, bad = top + 1;
            for (std::uint64_t n = 0; n <= top; ++n) {
                if (a.count_upto(n) != run && bad > top) bad = n;
                run += c.member(n) ? 1 : 0;
            }
            rec(bad > top, "periodic_count", {{"set", c.text()}, {"upto", top}}, "count_upto equals enumeration",
                bad > top ? "agree" : "first mismatch at " + s(bad));
            auto d = a.closed_form_density();
            rec(d && *d == Rat(static_cast<std::int64_t>(c.r.size()), static_cast<std::int64_t>(c.m)), "closed_form_density",
                {{"set", c.text()}}, "|r|/m", d ? d->str() : "none");
        });
    }

    static const Rat epss[] = {Rat(1, 4), Rat(1, 3), Rat(1, 2), Rat(2, 3), Rat(3, 4), Rat(1)};
    for (int it = 0; it < (small ? 10 : 50); ++it) {
        Rat eps = epss[rng.below(6)];
        // density at least eps keeps every k_n reachable
        PeriodicCase c;
        do {
            c = random_periodic(rng, 1);
        } while (Rat(static_cast<std::int64_t>(c.r.size()), static_cast<std::int64_t>(c.m)) < eps);
        json in{{"set", c.text()}, {"eps", eps.str()}};
        rec.guarded("kseq", in, [&] {
            NatSet a = c.set().with_horizon(1 << 16);
            auto ks = k_sequence(a, eps, 6);
            std::uint64_t first = 0;
            while (!c.member(first)) ++first;
            rec(ks.entries[0] == first, "kseq_k0_is_min", in, s(first), s(ks.entries[0]));
            for (unsigned n = 1; n < ks.entries.size(); ++n) {
                Rat thr = eps - pow2_inv(n);
                auto meets = [&](std::uint64_t k) {
                    std::uint64_t cnt = 0;
                    for (std::uint64_t x = 0; x < k; ++x) cnt += c.member(x) ? 1 : 0;
                    return Rat(static_cast<std::int64_t>(cnt)) >= Rat(static_cast<std::int64_t>(k)) * thr;
                };
                std::uint64_t kn = ks.entries[n];
                rec(kn > ks.entries[n - 1] && meets(kn), "kseq_inequality", in, "|A∩k_n| >= k_n(eps-2^-n)", "k_" + s(n) + "=" + s(kn));
                bool minimal = true;
                for (std::uint64_t k = ks.entries[n - 1] + 1; k < kn && minimal; ++k) minimal = !meets(k);
                rec(minimal, "kseq_minimality", in, "no smaller k qualifies", "k_" + s(n) + "=" + s(kn));
            }
        });
    }

    for (int it = 0; it < (small ? 10 : 50); ++it) {
        auto ca = random_periodic(rng, 1), cb = random_periodic(rng, 1);
        NatSet A = ca.set(), B = A & cb.set();
        json in{{"A", ca.text()}, {"B", B.canonical()}};
        rec.guarded("relative_density", in, [&] {
            std::vector<std::uint64_t> cps;
            for (std::uint64_t m = 1; m <= 400; m += rng.between(1, 20))
                if (A.count_upto(m) > 0) cps.push_back(m);
            auto prof = relative_density_profile(B, A, cps);
            for (unsigned n0 = 1; n0 <= 5; ++n0) {
                Rat bound = Rat(1) - pow2_inv(n0);
                std::vector<std::uint64_t> hits;
                for (std::size_t i = 0; i < cps.size(); ++i)
                    if (prof.values[i] < bound) hits.push_back(cps[i]);
                if (hits.size() < 3) continue;
                for (auto m : hits) {
                    auto bm = brute_count(B, m), am = brute_count(A, m);
                    rec(Rat(static_cast<std::int64_t>(bm)) < bound * Rat(static_cast<std::int64_t>(am)), "relative_density_bound", in,
                        "|B∩m| < (1-2^-" + s(n0) + ")|A∩m|", "m=" + s(m) + " |B∩m|=" + s(bm) + " |A∩m|=" + s(am));
                }
            }
        });
    }

    for (int it = 0; it < (small ? 10 : 50); ++it) {
        Rat eps = epss[rng.below(6)];
        PeriodicCase c;
        do {
            c = random_periodic(rng, 1);
        } while (Rat(static_cast<std::int64_t>(c.r.size()), static_cast<std::int64_t>(c.m)) < eps);
        json in{{"x", c.text()}, {"eps", eps.str()}};
        rec.guarded("dominating_monotone", in, [&] {
            auto f = dominating_profile(c.set().with_horizon(1 << 16), eps, 8);
            bool mono = std::is_sorted(f.begin(), f.end());
            rec(mono, "dominating_monotone", in, "non-decreasing", "ok");
        });
    }

    for (int it = 0; it < (small ? 5 : 20); ++it) {
        auto c = random_periodic(rng);
        json in{{"set", c.text()}};
        rec.guarded("profile_range", in, [&] {
            std::vector<std::uint64_t> cps{1, 7, 64, 100, 999};
            auto p = density_profile(c.set(), cps);
            bool ok = true;
            for (std::size_t i = 0; i < cps.size(); ++i)
                ok = ok && p.values[i] >= Rat(0) && p.values[i] <= Rat(1) &&
                     p.values[i] == Rat(static_cast<std::int64_t>(brute_count(c.set(), cps[i])), static_cast<std::int64_t>(cps[i]));
            rec(ok, "profile_range", in, "values exact and within [0,1]", ok ? "ok" : "mismatch");
        });
    }
}

inline std::vector<unsigned> members_in(const NatSet& a, std::uint64_t lo, std::uint64_t hi) {
    std::vector<unsigned> out;
    for (std::uint64_t x = lo; x < hi; ++x)
        if (a.contains(x)) out.push_back(static_cast<unsigned>(x));
    return out;
}

inline std::string join(const std::vector<unsigned>& v) {
    std::string out = "[";
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
    return out + "]";
}

inline void suite_trees(Rng& rng, Scale scale, Recorder& rec) {
    const bool small = scale == Scale::Small;
    const unsigned maxL = small ? 10 : 16;
    for (int it = 0; it < (small ? 10 : 40); ++it) {
        unsigned L = static_cast<unsigned>(rng.between(2, maxL));
        std::uint64_t a0 = rng.below(5);
        auto pc = random_periodic(rng, 1);
        NatSet A = pc.set() - NatSet::interval(0, a0);
        auto stem_elems = random_subset(rng, 0, a0, 1, 2);
        json in{{"s", stem_elems}, {"A", A.canonical()}, {"L", L}};
        rec.guarded("mathias_tree", in, [&] {
            std::uint64_t amin = A.with_horizon(1 << 12).min();
            MathiasCond c(stem_elems, A);
            auto t = mathias_tree(c, L);
            bool valid = true;
            try {
                t.validate();
            } catch (const Error&) {
                valid = false;
            }
            rec(valid, "mathias_tree_valid", in, "prefix-closed, no dead ends", valid ? "ok" : "invalid");
            auto u = uniform_split_levels(t);
            std::vector<unsigned> want;
            for (std::uint64_t x = amin; x + 2 <= L; ++x)
                if (A.contains(x)) want.push_back(static_cast<unsigned>(x));
            rec(u.levels && *u.levels == want, "mathias_split_levels", in, join(want), u.levels ? join(*u.levels) : "not uniform");
        });
    }
    for (int it = 0; it < (small ? 10 : 40); ++it) {
        unsigned L = static_cast<unsigned>(rng.between(2, maxL));
        auto pa = random_periodic(rng), po = random_periodic(rng);
        NatSet A = pa.set(), ones = po.set() - A;
        json in{{"A", A.canonical()}, {"ones", ones.canonical()}, {"L", L}};
        rec.guarded("silver_tree", in, [&] {
            SilverCond c(A, ones, L + 1);
            auto t = silver_tree(c, L);
            bool valid = true;
            try {
                t.validate();
            } catch (const Error&) {
                valid = false;
            }
            rec(valid, "silver_tree_valid", in, "prefix-closed, no dead ends", valid ? "ok" : "invalid");
            auto u = uniform_split_levels(t);
            auto want = members_in(A, 0, L >= 1 ? L - 1 : 0);
            rec(u.levels && *u.levels == want, "silver_split_levels", in, join(want), u.levels ? join(*u.levels) : "not uniform");

            // restriction
            auto nodes = t.nodes();
            BitString r = nodes[rng.below(nodes.size())];
            auto once = restrict(t, r), twice = restrict(once, r);
            bool sub = true;
            for (const auto& b : once.nodes()) sub = sub && t.contains(b);
            rec(once == twice && sub, "restrict_idempotent_monotone", {{"tree", in}, {"t", r.str()}}, "idempotent and contained",
                once == twice ? (sub ? "ok" : "not contained") : "not idempotent");

            // skeleton
            try {
                stem(t);
            } catch (const PreconditionError&) {
                return;  // nothing splits in the classified range
            }
            auto phi = split_skeleton(t);
            bool iso = true;
            for (const auto& [a, fa] : phi)
                for (const auto& [b, fb] : phi) iso = iso && (a.is_prefix_of(b) == fa.is_prefix_of(fb));
            std::set<BitString> image;
            for (const auto& [a, fa] : phi) image.insert(fa);
            std::size_t k = u.levels ? u.levels->size() : 0;
            bool full = image.size() == (std::size_t{1} << k) - 1;
            for (const auto& b : image) full = full && b.len < k;
            rec(iso, "skeleton_order_isomorphism", in, "s ⊴ t iff φ(s) ⊴ φ(t)", iso ? "ok" : "violated");
            rec(full, "skeleton_full_image", in, "image is 2^{<" + s(k) + "}",
                s(image.size()) + " images");
        });
    }
    static const Rat epss[] = {Rat(1, 4), Rat(1, 3), Rat(1, 2)};
    for (int it = 0; it < (small ? 10 : 40); ++it) {
        Rat eps = epss[rng.below(3)];
        auto pp = random_periodic(rng, 6);
        NatSet Ap = pp.set().with_horizon(1 << 14);
        // q: drop a random finite set of elements from A_p
        auto drop = random_subset(rng, 0, 40, 1, 6);
        NatSet Aq = (Ap - NatSet::explicit_set(drop)).with_horizon(1 << 14);
        json in{{"Ap", Ap.canonical()}, {"Aq", Aq.canonical()}, {"eps", eps.str()}};
        for (unsigned n = 0; n < 4; ++n) {
            try {
                MathiasCond p({}, Ap), q({}, Aq);
                bool hi = leq_n_check(q, p, n + 1, eps), lo = leq_n_check(q, p, n, eps);
                rec(!hi || lo, "leq_n_monotone", in, "leq_{n+1} implies leq_n", "n=" + s(n));
            } catch (const HorizonError&) {
                // k-sequence not reachable within the horizon: no verdict
            } catch (const std::exception& e) {
                rec(false, "leq_n_monotone", in, "no error", e.what());
            }
        }
    }
}

// i0 = first disagreement; with f(i0) = 1, i1 is where both a same-direction and an
// opposite disagreement have occurred after i0.
inline std::optional<unsigned> eps_pair_i1(const BitString& f, const BitString& g) {
    unsigned i0 = 0;
    while (i0 < f.len && f.at(i0) == g.at(i0)) ++i0;
    if (i0 == f.len) return std::nullopt;
    bool f_high = f.at(i0);
    std::optional<unsigned> same, opp;
    for (unsigned i = i0 + 1; i < f.len; ++i) {
        if (f.at(i) == g.at(i)) continue;
        if (f.at(i) == f_high) {
            if (!same) same = i;
        } else if (!opp) {
            opp = i;
        }
    }
    if (!same || !opp) return std::nullopt;
    return std::max(*same, *opp);
}

inline void suite_antichains(Rng& rng, Scale scale, Recorder& rec) {
    const bool small = scale == Scale::Small;
    const unsigned N = small ? 9 : 12;
    static const Rat epss[] = {Rat(1, 3), Rat(1, 2), Rat(5, 8), Rat(2, 3), Rat(3, 4), Rat(7, 8)};
    int pairs = 0, attempts = 0;
    while (pairs < (small ? 5 : 12) && attempts++ < 10000) {
        Rat eps = epss[rng.below(6)];
        BitString f(N, rng.below(std::uint64_t{1} << N)), g(N, rng.below(std::uint64_t{1} << N));
        auto i1 = eps_pair_i1(f, g);
        if (!i1) continue;
        ++pairs;
        json in{{"f", f.str()}, {"g", g.str()}, {"eps", eps.str()}, {"i1", *i1}};
        rec.guarded("eps_family", in, [&] {
            NatSet Af = antichain_lower_eps(f, eps), Ag = antichain_lower_eps(g, eps);
            Rat c = std::min(pow2_inv(*i1), Rat(1) - eps);
            for (unsigned n = 0; n < N; ++n) {
                std::uint64_t lo = std::uint64_t{2} << n, hi = std::uint64_t{4} << n;
                std::uint64_t k = static_cast<std::uint64_t>((eps * Rat(static_cast<std::int64_t>(lo))).floor());
                std::uint64_t cf = 0, both = 0;
                for (std::uint64_t x = lo; x < hi; ++x) {
                    bool a = Af.contains(x), b = Ag.contains(x);
                    cf += a;
                    both += a && b;
                }
                rec(cf == k, "eps_interval_count", in, "k=" + s(k) + " at n=" + s(n), s(cf));
                if (n > *i1) {
                    Rat ratio(static_cast<std::int64_t>(both), static_cast<std::int64_t>(lo));
                    rec(ratio <= eps - c, "eps_pairwise_bound", in, "<= " + (eps - c).str() + " at n=" + s(n),
                        ratio.str());
                }
            }
        });
    }

    const unsigned levels = small ? 5 : 8;
    auto grid = half_grid(levels);
    auto fam = antichain_half(std::vector<int>(levels, 0));
    for (unsigned n = 1; n < levels; ++n) {
        const auto& k = grid[n];
        json in{{"n", n}};
        for (int i = 0; i < 3; ++i)
            for (int j = i + 1; j < 3; ++j) {
                u128 c = fam.B[i].count_upto(k[3]) - fam.B[i].count_upto(k[0]) + fam.B[j].count_upto(k[3]) - fam.B[j].count_upto(k[0]);
                u128 want = (k[3] - k[0]) / 2;
                rec(c >= want, "half_pair_union_half", {{"n", n}, {"i", i}, {"j", j}}, ">= " + s(want), s(c));
            }
        for (int i = 0; i < 3; ++i) {
            u128 c = fam.B[i].count_upto(k[i + 1]);
            // c / k_i < 2^-n  <=>  c * 2^n < k_i
            rec(c * pow2<u128>(n) < k[i + 1], "half_B_small", {{"n", n}, {"i", i}}, "|B_i∩k_i|·2^n < k_i",
                s(c) + " vs " + s(k[i + 1]));
        }
    }
    for (int it = 0; it < (small ? 5 : 10); ++it) {
        std::vector<int> f(levels), g(levels);
        for (unsigned n = 0; n < levels; ++n) {
            f[n] = static_cast<int>(rng.below(3));
            g[n] = static_cast<int>(rng.below(3));
        }
        std::string fs, gs;
        for (unsigned n = 0; n < levels; ++n) {
            fs += static_cast<char>('0' + f[n]);
            gs += static_cast<char>('0' + g[n]);
        }
        json in{{"f", fs}, {"g", gs}};
        rec.guarded("half_pairwise", in, [&] {
            auto Ff = antichain_half(f), Fg = antichain_half(g);
            for (unsigned n = 1; n < levels; ++n) {
                if (f[n] == g[n]) continue;
                const auto& k = grid[n];
                int l = 3 - f[n] - g[n];
                u128 at2 = blocks_intersection_count(Ff.A_f, Fg.A_f, k[3]);
                rec(at2 <= k[2] && at2 * pow2<u128>(n) < k[3], "half_pairwise_at_k2", in,
                    "|A_f∩A_g∩k_2| <= k_1 and ·2^n < k_2 at n=" + s(n),
                    s(at2) + " (k_1=" + s(k[2]) + ", k_2=" + s(k[3]) + ")");
                u128 atl = blocks_intersection_count(Ff.A_f, Fg.A_f, k[l + 1]);
                rec(atl <= k[l] && atl * pow2<u128>(n) < k[l + 1], "half_pairwise_at_k_l", in,
                    "|A_f∩A_g∩k_l| <= k_{l-1} at n=" + s(n) + ", l=" + s(l),
                    s(atl));
            }
        });
    }
}

inline BitString code_of(const std::vector<std::uint64_t>& xs, const std::vector<NatSet>& part) {
    BitString c;
    for (std::size_t k = 0; 2 * k + 1 < xs.size(); ++k) {
        std::size_t a = 0, b = 0;
        while (!part[a].contains(xs[2 * k])) ++a;
        while (!part[b].contains(xs[2 * k + 1])) ++b;
        c = c.child(a == b ? 0 : 1);
    }
    return c;
}

inline void suite_cohen(Rng& rng, Scale scale, Recorder& rec) {
    const bool small = scale == Scale::Small;
    for (std::uint64_t N = 1; N <= 5; ++N) {
        auto part = partition_uniform(N);
        bool ok = part.size() == N + 1;
        for (std::uint64_t x = 0; x < 1000 && ok; ++x) {
            int hits = 0;
            for (const auto& a : part) hits += a.contains(x);
            ok = hits == 1;
        }
        for (const auto& a : part) ok = ok && a.closed_form_density() == Rat(1, static_cast<std::int64_t>(N + 1));
        rec(ok, "partition_uniform", {{"N", N}}, "disjoint cover, densities 1/(N+1)", ok ? "ok" : "violated");
    }
    for (unsigned n = 0; n <= 4; ++n) {
        auto fam = mod_antichain(n);
        bool ok = fam.size() == (std::size_t{1} << (n + 1));
        for (const auto& a : fam) ok = ok && a.closed_form_density() == Rat(1, std::int64_t{2} << n);
        rec(ok, "mod_antichain_density", {{"n", n}}, "2^(n+1) classes of density 2^-(n+1)", ok ? "ok" : "violated");
    }

    // force-extension round trip
    struct Start {
        std::vector<std::uint64_t> s;
        NatSet A;
        std::uint64_t N;
    };
    std::vector<Start> starts{
        {{}, NatSet::residues(2, 0), 3},
        {{}, NatSet::omega(), 1},
        {{}, NatSet::residues(3, 1), 1},
        {{0, 1}, NatSet::omega() - NatSet::interval(0, 2), 2},
        {{1, 3}, NatSet::residues(2, 0) - NatSet::interval(0, 4), 3},
        {{}, NatSet::periodic(6, {0, 1, 3}), 1},
        {{0, 5}, NatSet::periodic(5, {1, 2}) - NatSet::interval(0, 6), 2},
        {{2, 4}, NatSet::residues(2, 1) - NatSet::interval(0, 5), 3},
        {{}, NatSet::periodic(4, {1, 2, 3}), 2},
        {{0, 2, 3, 7}, NatSet::omega() - NatSet::interval(0, 8), 4},
    };
    std::size_t nstarts = small ? 4 : starts.size();
    for (std::size_t si = 0; si < nstarts; ++si) {
        std::uint64_t N = starts[si].N;
        auto part = partition_uniform(N);
        MathiasCond c(starts[si].s, starts[si].A);
        for (unsigned len = 0; len <= 3; ++len)
            for (unsigned v = 0; v < (1u << len); ++v) {
                BitString t(len, v);
                json in{{"s", c.s}, {"A", c.A.canonical()}, {"N", N}, {"target", t.str()}};
                rec.guarded("force_extension", in, [&] {
                    std::uint64_t d0 = c.s.empty() ? 1 : c.s.back() + 1;
                    auto r = cohen_decided_prefix(c, part, static_cast<unsigned>(d0));
                    auto out = cohen_force_extension(c, r, t, part);
                    bool refines = std::includes(out.s.begin(), out.s.end(), c.s.begin(), c.s.end());
                    for (auto x : out.s)
                        refines = refines && (std::binary_search(c.s.begin(), c.s.end(), x) || c.A.contains(x));
                    std::uint64_t D = out.s.empty() ? 1 : out.s.back() + 9;
                    for (std::uint64_t x = 0; x < D + 64; ++x) refines = refines && (!out.A.contains(x) || c.A.contains(x));
                    rec(refines, "force_extension_refines", in, "(s',A') <= (s,A)", refines ? "ok" : "not below");
                    rec(out.s.size() == c.s.size() + 2 * t.len, "force_extension_stem_growth", in, s(c.s.size() + 2 * t.len),
                        s(out.s.size()));
                    // every branch of the output tree, a few levels past the stem
                    BitString want = r.append(t);
                    auto tree = mathias_tree(out, static_cast<unsigned>(D));
                    bool all = true;
                    for (u128 leaf : tree.level(static_cast<unsigned>(D))) {
                        BitString b(static_cast<unsigned>(D), leaf);
                        std::vector<std::uint64_t> xs;
                        for (unsigned i = 0; i < b.len; ++i)
                            if (b.at(i)) xs.push_back(i);
                        auto code = code_of(xs, part);
                        all = all && want.is_prefix_of(code);
                    }
                    rec(all, "force_extension_codes_target", in, "every branch codes " + want.str(), all ? "ok" : "a branch escapes");
                });
            }
    }

    // encode_eps against the pair oracle
    for (int it = 0; it < (small ? 10 : 40); ++it) {
        auto xs = random_subset(rng, 0, 60, 1, 3);
        if (xs.size() < 2) continue;
        std::uint64_t N = rng.between(1, 4);
        auto part = partition_uniform(N);
        std::size_t K = xs.size() / 2;
        json in{{"x", xs}, {"N", N}};
        rec.guarded("encode_eps", in, [&] {
            auto c = cohen_encode_eps(NatSet::explicit_set(xs), part, K);
            auto o = code_of(xs, part);
            rec(c == o, "encode_eps_oracle", in, o.str(), c.str());
        });
    }

    // zero-density coding on the powers of two against a direct trace
    {
        json in{{"x", "blocks:pow2(from=1)"}, {"K", 2}};
        rec.guarded("encode_zero_trace", in, [&] {
            std::vector<std::uint64_t> res(17, 0), bounds(17);
            for (std::uint64_t n = 0; n <= 16; ++n) bounds[n] = std::uint64_t{2} << n;
            ResidueChain chain(res, bounds);
            auto tr = cohen_encode_zero(pow2_set(1, std::uint64_t{1} << 20), chain, 2);
            // direct: n0 = 2; m1 = 4, 8 ∉ A_4 (8 mod 32 ≠ 0) so n1 = 8; m2 = 16, 32 ∉ A_16 so n2 = 32
            bool ok = tr.c.str() == "11" && tr.n == std::vector<std::uint64_t>{2, 8, 32} && tr.m == std::vector<std::uint64_t>{4, 16};
            rec(ok, "encode_zero_trace", in, "c=11 n=(2,8,32) m=(4,16)", "c=" + tr.c.str());
        });
    }
}

inline void suite_collapse(Rng& rng, Scale scale, Recorder& rec) {
    const bool small = scale == Scale::Small;
    {
        CollapseParams p;
        p.k = 4;
        auto ch = p.budget_chain();
        rec(ch[0] == Rat(1, 2) && ch[1] == Rat(2, 3) && ch[2] == Rat(45, 64) && p.budget_holds(), "budget_at_default_constants",
            {{"k", 4}}, "1/2 < 2/3 <= 45/64", ch[0].str() + " " + ch[1].str() + " " + ch[2].str());
    }
    for (std::uint64_t k = 1; k <= 100; ++k) {
        CollapseParams p;
        p.k = k;
        auto ch = p.budget_chain();
        rec(p.budget_holds(), "budget_inequality", {{"k", k}}, "2/r < z2/z1 <= ((r-1)/r)((mk-1)/mk)",
            ch[0].str() + " < " + ch[1].str() + " <= " + ch[2].str());
    }
    {
        CollapseParams p;
        auto l = ell_seq(p, 2);
        rec(l == std::vector<std::uint64_t>{0, 3, 12, 48}, "ell_seq", {{"k", 1}}, "0,3,12,48", s(l[1]) + "," + s(l[2]) + "," + s(l[3]));
    }

    const unsigned maxlen = small ? 3 : 4;
    for (std::uint64_t k : {std::uint64_t{1}, std::uint64_t{2}}) {
        CollapseParams p;
        p.k = k;
        for (unsigned len = 1; len <= maxlen; ++len)
            for (unsigned v = 0; v < (1u << len); ++v) {
                BitString rho(len, v);
                json in{{"k", k}, {"rho", rho.str()}};
                EncodeResult res;
                try {
                    res = collapse_encode(p, rho);
                } catch (const std::exception& e) {
                    rec(false, "collapse_roundtrip", in, "encoder succeeds", e.what());
                    continue;
                }
                const auto& fr = res.fragment;
                auto ell = ell_seq(p, len - 1);
                for (const auto& st : res.steps) {
                    std::uint64_t block = st.block_hi - st.block_lo;
                    std::uint64_t free_now = fr.free_in(st.block_lo, st.block_hi);
                    bool frac = free_now * p.r * p.k >= block;
                    rec(frac, "collapse_free_fraction", in, ">= block/(rk) free in block " + s(st.n),
                        s(free_now) + " of " + s(block));
                    Rat fixed(static_cast<std::int64_t>(st.fixed_ones + st.fixed_zeros));
                    rec(fixed <= st.budget, "collapse_fixed_budget", in, "<= " + st.budget.str() + " fixed in block " + s(st.n),
                        fixed.str());
                }
                // f at ℓ_n depends on the completion only through its count of ones,
                // so every completion falls into one of u+1 count classes
                bool parity_ok = true;
                std::string where;
                for (unsigned n = 0; n < len && parity_ok; ++n) {
                    std::uint64_t hi = ell[n + 1];
                    std::uint64_t u = fr.free_in(0, hi);
                    std::vector<std::uint64_t> frees(fr.free.begin(), fr.free.begin() + static_cast<std::ptrdiff_t>(u));
                    const std::vector<std::uint64_t> ones_below(fr.ones.begin(), std::lower_bound(fr.ones.begin(), fr.ones.end(), hi));
                    auto value_with = [&](const std::vector<std::uint64_t>& extra) {
                        std::vector<std::uint64_t> x = ones_below;
                        x.insert(x.end(), extra.begin(), extra.end());
                        std::sort(x.begin(), x.end());
                        return collapse_f(NatSet::explicit_set(x), p, n);
                    };
                    if (hi <= 48 && u <= 16) {
                        for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << u) && parity_ok; ++mask) {
                            std::vector<std::uint64_t> extra;
                            for (std::uint64_t i = 0; i < u; ++i)
                                if ((mask >> i) & 1) extra.push_back(frees[i]);
                            if (value_with(extra) % 2 != static_cast<std::uint64_t>(rho.at(n))) {
                                parity_ok = false;
                                where = "n=" + s(n) + " completion mask " + s(mask);
                            }
                        }
                    } else {
                        for (std::uint64_t j = 0; j <= u && parity_ok; ++j) {
                            std::vector<std::uint64_t> extra(frees.begin(), frees.begin() + static_cast<std::ptrdiff_t>(j));
                            if (value_with(extra) % 2 != static_cast<std::uint64_t>(rho.at(n))) {
                                parity_ok = false;
                                where = "n=" + s(n) + " with " + s(j) + " free ones";
                            }
                        }
                    }
                }
                rec(parity_ok, "collapse_parity_invariance", in, "every completion decodes bit n to rho(n)", parity_ok ? "ok" : where);
                // random full completions through the public decoder
                bool rt = true;
                for (int trial = 0; trial < 4 && rt; ++trial) {
                    std::vector<std::uint64_t> x = fr.ones;
                    for (auto f : fr.free)
                        if (rng.coin()) x.push_back(f);
                    std::sort(x.begin(), x.end());
                    rt = collapse_decode(NatSet::explicit_set(x), p, len) == rho;
                }
                rec(rt, "collapse_roundtrip", in, "decode(completion) = rho", rt ? "ok" : "mismatch");
            }
    }
}

inline void suite_sptree(Rng& rng, Scale scale, Recorder& rec) {
    const bool small = scale == Scale::Small;
    const unsigned L = small ? 31 : 127;
    {
        auto t0 = sp_T0(L);
        bool card = true, zero = true, ones = true, one_new = true, half_new = true;
        for (unsigned l = 0; l <= L; ++l) {
            const auto& lv = t0.level(l);
            card = card && lv.size() == l + 1;
            unsigned n = EpochSeq::epoch_of(l);
            for (u128 v : lv) {
                ones = ones && popcount128(v) <= n;
                if (l < L) zero = zero && t0.contains(BitString(l, v).child(0));
            }
            // level ℓ_{n+1}: at most one 1 in [ℓ_n, ℓ_{n+1}), carried by exactly half the nodes
            if (((l + 1) & l) == 0 && l > 0) {
                unsigned ln = (l - 1) / 2;
                std::size_t with = 0;
                for (u128 v : lv) {
                    unsigned c = popcount128(v & ((u128{1} << (l - ln)) - 1));
                    one_new = one_new && c <= 1;
                    with += c == 1;
                }
                half_new = half_new && 2 * with == lv.size();
            }
        }
        json in{{"L", L}};
        rec(card, "t0_level_sizes", in, "|Lev_l| = l+1", card ? "ok" : "violated");
        rec(zero, "t0_zero_closure", in, "t⌢0 ∈ T0", zero ? "ok" : "violated");
        rec(ones, "t0_ones_per_epoch", in, "ones(t) <= n on [ℓ_n, ℓ_{n+1})", ones ? "ok" : "violated");
        rec(one_new && half_new, "t0_new_one_per_epoch", in, "at most one new 1 per epoch, on half of the level",
            one_new ? (half_new ? "ok" : "wrong share") : "two new ones");
        rec(K_of(t0, BitString()) == 0, "t0_K_root", in, "0", s(static_cast<std::uint64_t>(K_of(t0, BitString()))));
        auto w = witness_width(sp_T0(3), BitString(), 3, 0);
        rec(w && w->width == 2, "t0_width_3", {}, "2", w ? s(w->width) : "none");
    }

    for (int it = 0; it < (small ? 10 : 50); ++it) {
        unsigned n = static_cast<unsigned>(rng.between(2, 10));
        auto p = random_slice(rng, n, 12);
        unsigned k = static_cast<unsigned>(rng.below(n));
        json in{{"slice", io::to_json(p)}, {"n", n}, {"k", k}};
        rec.guarded("width_oracle", in, [&] {
            auto w = witness_width(p, BitString(), n, k);
            auto o = oracle_min_width(p, BitString(), n, k);
            std::string ws = w ? s(w->width) : "none", os = o ? s(*o) : "none";
            rec(ws == os, "width_oracle_agreement", in, os, ws);
        });
    }

    // pigeonhole: w leaves covering [k,n) with ones force a leaf with >= ⌈(n-k)/w⌉ ones
    {
        bool ok = true;
        std::string where;
        for (unsigned n = 1; n <= 4 && ok; ++n) {
            const unsigned size = 1u << n;
            for (std::uint32_t sub = 1; sub < (1u << size) && ok; ++sub) {
                unsigned w = static_cast<unsigned>(__builtin_popcount(sub));
                std::uint32_t uni = 0;
                unsigned maxones = 0;
                for (unsigned v = 0; v < size; ++v)
                    if ((sub >> v) & 1) {
                        uni |= v;
                        maxones = std::max(maxones, static_cast<unsigned>(__builtin_popcount(v)));
                    }
                for (unsigned k = 0; k < n && ok; ++k) {
                    std::uint32_t need = ((1u << (n - k)) - 1);  // coordinates k..n-1 are the low n-k bits
                    if ((uni & need) != need) continue;
                    if (maxones * w < n - k) {
                        ok = false;
                        where = "n=" + s(n) + " family " + s(sub);
                    }
                }
            }
        }
        unsigned top = small ? 6 : 8;
        for (unsigned n = 5; n <= top && ok; ++n)
            for (unsigned k = 0; k < n && ok; ++k) {
                unsigned d = n - k;
                for (unsigned w = 1; w <= d && ok; ++w) {
                    unsigned c = (d + w - 1) / w;
                    std::vector<std::uint32_t> light;
                    for (std::uint32_t m = 1; m < (1u << d); ++m)
                        if (static_cast<unsigned>(__builtin_popcount(m)) < c) light.push_back(m);
                    std::vector<char> seen(1u << d, 0);
                    std::vector<std::uint32_t> frontier{0};
                    seen[0] = 1;
                    for (unsigned step = 0; step < w; ++step) {
                        std::vector<std::uint32_t> next;
                        for (auto st : frontier)
                            for (auto m : light)
                                if (!seen[st | m]) {
                                    seen[st | m] = 1;
                                    next.push_back(st | m);
                                }
                        frontier.swap(next);
                    }
                    if (seen[(1u << d) - 1]) {
                        ok = false;
                        where = "n=" + s(n) + " k=" + s(k) + " w=" + s(w);
                    }
                }
            }
        rec(ok, "width_pigeonhole", {{"max_n", top}}, "some leaf has >= ⌈(n-k)/w⌉ ones", ok ? "ok" : where);
    }

    // monotonicity under pruning
    {
        const unsigned D = small ? 10 : 12;
        auto p = sp_p(D);
        unsigned Kp = K_of(p, BitString());
        auto wp = witness_width(p, BitString(), D, Kp);
        int done = 0, attempts = 0;
        while (done < (small ? 20 : 100) && attempts++ < 20000) {
            std::vector<BitString> keep;
            for (u128 v : p.level(D))
                if (rng.coin(2, 3)) keep.emplace_back(D, v);
            if (keep.empty()) continue;
            auto q = TreeSlice::from_leaves(D, keep);
            unsigned Kq;
            try {
                Kq = K_of(q, BitString());
            } catch (const PreconditionError&) {
                continue;
            }
            if (Kq != Kp) continue;
            ++done;
            auto wq = witness_width(q, BitString(), D, Kp);
            // no witness counts as infinitely wide
            bool ok = wp ? (!wq || wq->width >= wp->width) : !wq;
            rec(ok, "width_monotone", {{"depth", D}, {"kept", keep.size()}}, ">= " + (wp ? s(wp->width) : std::string("none")),
                wq ? s(wq->width) : "none");
        }
    }

    // ones bound and evasion on p
    auto p = sp_p(L);
    {
        auto r = ones_bound_check(p, L);
        rec(r.sound_ok, "ones_bound_bitlength", {{"L", L}}, "ones(t) <= bitlength(ℓ)^2", r.sound_ok ? "ok" : "violated");
        rec(r.real_log_violations == 0, "ones_bound_log", {{"L", L}}, "ones(t) <= log2(ℓ)^2 for ℓ >= 2",
            s(r.real_log_violations) + " violations, " + s(r.real_log_undecided) + " undecided");
    }
    {
        EpochSeq ep(EpochSeq::epoch_of(L));
        std::vector<std::uint64_t> mseq(ep.entries.begin() + 1, ep.entries.end());
        std::vector<std::uint64_t> f;
        for (std::size_t n = 0; n < mseq.size(); ++n) f.push_back(n + 1);
        for (int it = 0; it < (small ? 5 : 20); ++it) {
            std::vector<std::vector<u128>> sets;
            for (std::size_t n = 0; n < mseq.size(); ++n) {
                const auto& lv = p.level(static_cast<unsigned>(mseq[n]));
                std::vector<u128> S;
                for (std::uint64_t j = 0; j < f[n]; ++j) S.push_back(code_map(BitString(static_cast<unsigned>(mseq[n]), lv[rng.below(lv.size())])));
                sets.push_back(std::move(S));
            }
            Slalom sl(f, sets);
            json in{{"trial", it}};
            rec.guarded("escape_witness", in, [&] {
                auto e = escape_witness(p, BitString(), sl, mseq);
                std::set<u128> codes;
                for (u128 v : p.level(static_cast<unsigned>(mseq[e.n0]))) codes.insert(code_map(BitString(static_cast<unsigned>(mseq[e.n0]), v)));
                bool ok = !sl.captures(e.n0, e.code) && code_map(e.node) == e.code && codes.count(e.code) &&
                          codes.size() > f[e.n0];
                rec(ok, "escape_witness_sound", in, "code outside S(n0) on a level wider than f(n0)", "n0=" + s(e.n0));
            });
        }
    }
}

}  // namespace detail

inline const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names{"density", "trees", "antichains", "cohen", "collapse", "sptree"};
    return names;
}

inline SuiteReport run_suite(const std::string& name, std::uint64_t seed, Scale scale) {
    SuiteReport rep;
    rep.suite = name;
    rep.seed = seed;
    rep.scale = scale;
    Rng rng(seed);
    detail::Recorder rec(rep);
    auto start = std::chrono::steady_clock::now();
    if (name == "density") detail::suite_density(rng, scale, rec);
    else if (name == "trees") detail::suite_trees(rng, scale, rec);
    else if (name == "antichains") detail::suite_antichains(rng, scale, rec);
    else if (name == "cohen") detail::suite_cohen(rng, scale, rec);
    else if (name == "collapse") detail::suite_collapse(rng, scale, rec);
    else if (name == "sptree") detail::suite_sptree(rng, scale, rec);
    else throw PreconditionError("unknown suite '" + name + "'");
    rep.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return rep;
}

}  // namespace densitree::verify
