#pragma once

#include <algorithm>
#include <memory>
#include <optional>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "densitree/int128.hpp"
#include "densitree/rat.hpp"

namespace densitree {

template <Natural N>
using RatFor = std::conditional_t<std::is_same_v<N, u128>, WideRat, Rat>;

// Arithmetic progression lo, lo+step, ... strictly below hi.
template <Natural N>
struct Segment {
    N lo{}, hi{}, step{1};

    N count_below(N n) const {
        if (n <= lo) return 0;
        N top = n < hi ? n : hi;
        return (top - lo - 1) / step + 1;
    }
    bool contains(N n) const { return n >= lo && n < hi && (n - lo) % step == 0; }
    std::optional<N> next_from(N a) const {
        if (a >= hi) return std::nullopt;
        if (a <= lo) return lo;
        N k = (a - lo + step - 1) / step;
        N v = lo + k * step;  // no overflow: v < hi + step and hi is representable
        if (v >= hi || v < a) return std::nullopt;
        return v;
    }
};

enum class ComboOp { Union, Intersection, Difference, Complement };

inline const char* combo_name(ComboOp op) {
    switch (op) {
        case ComboOp::Union: return "union";
        case ComboOp::Intersection: return "intersection";
        case ComboOp::Difference: return "difference";
        case ComboOp::Complement: return "complement";
    }
    return "?";
}

// A subset of the naturals described finitely, with membership decidable below
// an evaluation horizon. Queries at or past the horizon throw HorizonError.
template <Natural N>
class BasicNatSet {
public:
    struct Explicit {
        std::vector<N> elems;  // sorted, unique
    };
    // n >= t: n mod m in r.  n < t: same, then add/del applied.
    struct Periodic {
        N m{1};
        std::vector<N> r;
        N t{0};
        std::vector<N> add, del;
    };
    struct Blocks {
        std::string id;      // generator id
        std::string params;  // generator parameters, canonical text
        std::vector<Segment<N>> segs;  // sorted, pairwise disjoint spans
    };
    struct Combo {
        ComboOp op;
        std::shared_ptr<const BasicNatSet> lhs, rhs;  // rhs null for complement
    };
    using Descriptor = std::variant<Explicit, Periodic, Blocks, Combo>;

    BasicNatSet() : BasicNatSet(Explicit{}) {}

    // -- construction -------------------------------------------------------

    static BasicNatSet explicit_set(std::vector<N> elems) {
        std::sort(elems.begin(), elems.end());
        elems.erase(std::unique(elems.begin(), elems.end()), elems.end());
        return BasicNatSet(Explicit{std::move(elems)});
    }
    static BasicNatSet empty() { return explicit_set({}); }

    static BasicNatSet periodic(N m, std::vector<N> r, N t = 0, std::vector<N> add = {}, std::vector<N> del = {}) {
        if (m == 0) throw PreconditionError("periodic set needs modulus m >= 1");
        auto norm = [](std::vector<N>& v) {
            std::sort(v.begin(), v.end());
            v.erase(std::unique(v.begin(), v.end()), v.end());
        };
        norm(r);
        norm(add);
        norm(del);
        for (N x : r)
            if (x >= m) throw PreconditionError("periodic residue " + to_dec(x) + " not below modulus " + to_dec(m));
        for (N x : add)
            if (x >= t) throw PreconditionError("periodic exception " + to_dec(x) + " not below threshold");
        for (N x : del)
            if (x >= t) throw PreconditionError("periodic exception " + to_dec(x) + " not below threshold");
        for (N x : add)
            if (std::binary_search(del.begin(), del.end(), x))
                throw PreconditionError("element " + to_dec(x) + " both added and removed");
        auto in_r = [&](N x) { return std::binary_search(r.begin(), r.end(), x % m); };
        std::erase_if(add, [&](N x) { return in_r(x); });
        std::erase_if(del, [&](N x) { return !in_r(x); });
        return BasicNatSet(Periodic{m, std::move(r), t, std::move(add), std::move(del)});
    }
    static BasicNatSet omega() { return periodic(1, {0}); }
    static BasicNatSet residues(N m, N i) { return periodic(m, {i}); }

    static BasicNatSet blocks(std::string id, std::string params, std::vector<Segment<N>> segs, N horizon) {
        std::erase_if(segs, [](const Segment<N>& s) { return s.lo >= s.hi; });
        std::sort(segs.begin(), segs.end(), [](const auto& a, const auto& b) { return a.lo < b.lo; });
        for (std::size_t i = 0; i < segs.size(); ++i) {
            if (segs[i].step == 0) throw PreconditionError("block segment with zero step");
            if (i > 0 && segs[i].lo < segs[i - 1].hi) throw PreconditionError("overlapping block segments");
        }
        // only what lies below the horizon is described
        std::erase_if(segs, [&](const Segment<N>& s) { return s.lo >= horizon; });
        for (auto& s : segs) s.hi = std::min(s.hi, horizon);
        BasicNatSet s(Blocks{std::move(id), std::move(params), std::move(segs)});
        s.horizon_ = horizon;
        return s;
    }

    // [lo, hi) as a one-segment block set, exact everywhere.
    static BasicNatSet interval(N lo, N hi) {
        return blocks("interval", "lo=" + to_dec(lo) + ";hi=" + to_dec(hi), {Segment<N>{lo, hi, 1}}, max_of<N>());
    }

    static BasicNatSet combine(ComboOp op, const BasicNatSet& a, const BasicNatSet& b) {
        if (op == ComboOp::Complement) throw PreconditionError("complement is unary");
        BasicNatSet s(Combo{op, std::make_shared<const BasicNatSet>(a), std::make_shared<const BasicNatSet>(b)});
        s.horizon_ = std::min(a.horizon_, b.horizon_);
        return s;
    }
    static BasicNatSet complement(const BasicNatSet& a) {
        BasicNatSet s(Combo{ComboOp::Complement, std::make_shared<const BasicNatSet>(a), nullptr});
        s.horizon_ = a.horizon_;
        return s;
    }
    friend BasicNatSet operator|(const BasicNatSet& a, const BasicNatSet& b) { return combine(ComboOp::Union, a, b); }
    friend BasicNatSet operator&(const BasicNatSet& a, const BasicNatSet& b) {
        return combine(ComboOp::Intersection, a, b);
    }
    friend BasicNatSet operator-(const BasicNatSet& a, const BasicNatSet& b) {
        return combine(ComboOp::Difference, a, b);
    }

    // Returns a copy whose horizon is min(current, h).
    BasicNatSet with_horizon(N h) const {
        BasicNatSet s = *this;
        s.horizon_ = std::min(horizon_, h);
        return s;
    }

    // -- queries ------------------------------------------------------------

    N horizon() const { return horizon_; }
    const Descriptor& descriptor() const { return d_; }

    bool contains(N n) const {
        if (n >= horizon_) throw HorizonError("membership of " + to_dec(n) + " is past horizon " + to_dec(horizon_));
        return contains_raw(n);
    }

    // |A ∩ [0, n)|
    N count_upto(N n) const {
        if (n > horizon_) throw HorizonError("count up to " + to_dec(n) + " is past horizon " + to_dec(horizon_));
        return count_raw(n);
    }

    // least element >= a and < limit; limit must not exceed the horizon
    std::optional<N> next_from(N a, N limit) const {
        if (limit > horizon_) throw HorizonError("search up to " + to_dec(limit) + " is past horizon " + to_dec(horizon_));
        if (a >= limit) return std::nullopt;
        auto v = next_raw(a, limit);
        if (v && *v >= limit) return std::nullopt;
        return v;
    }

    // least element, searching the whole horizon
    N min() const {
        auto v = next_from(0, horizon_);
        if (!v) throw HorizonError("no element below horizon " + to_dec(horizon_));
        return *v;
    }

    std::vector<N> elements_below(N n) const {
        if (n > horizon_) throw HorizonError("enumeration up to " + to_dec(n) + " is past horizon " + to_dec(horizon_));
        std::vector<N> out;
        N a = 0;
        while (auto v = next_raw(a, n)) {
            if (*v >= n) break;
            out.push_back(*v);
            if (*v == max_of<N>()) break;
            a = *v + 1;
        }
        return out;
    }

    // Exact asymptotic density when it is available in closed form.
    std::optional<RatFor<N>> closed_form_density() const {
        using R = RatFor<N>;
        using I = decltype(R{}.num());
        if (auto* p = std::get_if<Periodic>(&d_))
            return R(static_cast<I>(p->r.size()), static_cast<I>(p->m));
        if (auto* e = std::get_if<Explicit>(&d_); e && horizon_ == max_of<N>()) return R(0);
        // Boolean combinations of eventually periodic sets: count one period past every threshold.
        if (std::holds_alternative<Combo>(d_) && horizon_ == max_of<N>()) {
            auto ep = eventual_period();
            if (!ep) return std::nullopt;
            auto [m, t] = *ep;
            N hits = 0;
            for (N x = t; x < t + m; ++x) hits += contains_raw(x) ? 1 : 0;
            return R(static_cast<I>(hits), static_cast<I>(m));
        }
        return std::nullopt;
    }

    // Canonical text; see parse_natset for the grammar.
    std::string canonical() const {
        auto list = [](const std::vector<N>& v) {
            std::string s = "[";
            for (std::size_t i = 0; i < v.size(); ++i) {
                if (i) s += ",";
                s += to_dec(v[i]);
            }
            return s + "]";
        };
        if (auto* e = std::get_if<Explicit>(&d_)) return "explicit:" + list(e->elems);
        if (auto* p = std::get_if<Periodic>(&d_))
            return "periodic:m=" + to_dec(p->m) + ";r=" + list(p->r) + ";t=" + to_dec(p->t) + ";add=" + list(p->add) +
                   ";del=" + list(p->del);
        if (auto* b = std::get_if<Blocks>(&d_)) return "blocks:" + b->id + "(" + b->params + ")";
        const auto& c = std::get<Combo>(d_);
        if (c.op == ComboOp::Complement) return std::string("combo:complement(") + c.lhs->canonical() + ")";
        return std::string("combo:") + combo_name(c.op) + "(" + c.lhs->canonical() + "," + c.rhs->canonical() + ")";
    }

private:
    Descriptor d_;
    N horizon_ = max_of<N>();

    explicit BasicNatSet(Descriptor d) : d_(std::move(d)) {}

    // (period, threshold) when membership is periodic from the threshold on; the period is capped.
    std::optional<std::pair<N, N>> eventual_period() const {
        constexpr N kCap = N{1} << 20;
        if (auto* e = std::get_if<Explicit>(&d_)) return std::pair<N, N>{1, e->elems.empty() ? 0 : e->elems.back() + 1};
        if (auto* p = std::get_if<Periodic>(&d_)) return std::pair<N, N>{p->m, p->t};
        if (std::holds_alternative<Blocks>(d_)) return std::nullopt;
        const auto& c = std::get<Combo>(d_);
        auto a = c.lhs->eventual_period();
        if (!a) return std::nullopt;
        if (!c.rhs) return a;
        auto b = c.rhs->eventual_period();
        if (!b) return std::nullopt;
        N x = a->first, y = b->first;
        while (y) x = std::exchange(y, x % y);
        N g = x;
        if (a->first / g > kCap / b->first) return std::nullopt;
        return std::pair<N, N>{a->first / g * b->first, std::max(a->second, b->second)};
    }

    bool contains_raw(N n) const {
        if (auto* e = std::get_if<Explicit>(&d_)) return std::binary_search(e->elems.begin(), e->elems.end(), n);
        if (auto* p = std::get_if<Periodic>(&d_)) {
            if (n < p->t) {
                if (std::binary_search(p->add.begin(), p->add.end(), n)) return true;
                if (std::binary_search(p->del.begin(), p->del.end(), n)) return false;
            }
            return std::binary_search(p->r.begin(), p->r.end(), n % p->m);
        }
        if (auto* b = std::get_if<Blocks>(&d_)) {
            auto it = std::upper_bound(b->segs.begin(), b->segs.end(), n,
                                       [](N v, const Segment<N>& s) { return v < s.lo; });
            if (it == b->segs.begin()) return false;
            return std::prev(it)->contains(n);
        }
        const auto& c = std::get<Combo>(d_);
        switch (c.op) {
            case ComboOp::Union: return c.lhs->contains_raw(n) || c.rhs->contains_raw(n);
            case ComboOp::Intersection: return c.lhs->contains_raw(n) && c.rhs->contains_raw(n);
            case ComboOp::Difference: return c.lhs->contains_raw(n) && !c.rhs->contains_raw(n);
            case ComboOp::Complement: return !c.lhs->contains_raw(n);
        }
        return false;
    }

    N count_raw(N n) const {
        if (auto* e = std::get_if<Explicit>(&d_))
            return static_cast<N>(std::lower_bound(e->elems.begin(), e->elems.end(), n) - e->elems.begin());
        if (auto* p = std::get_if<Periodic>(&d_)) {
            N q = n / p->m, rem = n % p->m;
            N below_rem = static_cast<N>(std::lower_bound(p->r.begin(), p->r.end(), rem) - p->r.begin());
            N c = static_cast<N>(p->r.size()) * q + below_rem;
            c += static_cast<N>(std::lower_bound(p->add.begin(), p->add.end(), n) - p->add.begin());
            c -= static_cast<N>(std::lower_bound(p->del.begin(), p->del.end(), n) - p->del.begin());
            return c;
        }
        if (auto* b = std::get_if<Blocks>(&d_)) {
            N c = 0;
            for (const auto& s : b->segs) {
                if (s.lo >= n) break;
                c += s.count_below(n);
            }
            return c;
        }
        const auto& c = std::get<Combo>(d_);
        if (c.op == ComboOp::Complement) return n - c.lhs->count_raw(n);
        N cnt = 0, a = 0;
        while (auto v = next_raw(a, n)) {
            if (*v >= n) break;
            ++cnt;
            a = *v + 1;
        }
        return cnt;
    }

    // Least element >= a; may return values >= limit (callers clip). limit
    // bounds scans for descriptors without a closed form.
    std::optional<N> next_raw(N a, N limit) const {
        if (a >= limit) return std::nullopt;
        if (auto* e = std::get_if<Explicit>(&d_)) {
            auto it = std::lower_bound(e->elems.begin(), e->elems.end(), a);
            if (it == e->elems.end()) return std::nullopt;
            return *it;
        }
        if (auto* p = std::get_if<Periodic>(&d_)) {
            while (a < limit) {
                std::optional<N> best;
                if (!p->r.empty()) {
                    N q = a / p->m, rem = a % p->m;
                    auto it = std::lower_bound(p->r.begin(), p->r.end(), rem);
                    N base = q * p->m;
                    if (it != p->r.end()) best = base + *it;
                    else if (base <= max_of<N>() - p->m - p->r.front()) best = base + p->m + p->r.front();
                }
                auto ai = std::lower_bound(p->add.begin(), p->add.end(), a);
                if (ai != p->add.end() && (!best || *ai < *best)) best = *ai;
                if (!best) return std::nullopt;
                if (std::binary_search(p->del.begin(), p->del.end(), *best)) {
                    a = *best + 1;
                    continue;
                }
                return best;
            }
            return std::nullopt;
        }
        if (auto* b = std::get_if<Blocks>(&d_)) {
            auto it = std::upper_bound(b->segs.begin(), b->segs.end(), a,
                                       [](N v, const Segment<N>& s) { return v < s.lo; });
            if (it != b->segs.begin()) {
                if (auto v = std::prev(it)->next_from(a)) return v;
            }
            for (; it != b->segs.end(); ++it)
                if (auto v = it->next_from(a)) return v;
            return std::nullopt;
        }
        const auto& c = std::get<Combo>(d_);
        switch (c.op) {
            case ComboOp::Union: {
                auto l = c.lhs->next_raw(a, limit), r = c.rhs->next_raw(a, limit);
                if (!l) return r;
                if (!r) return l;
                return std::min(*l, *r);
            }
            case ComboOp::Intersection: {
                while (a < limit) {
                    auto l = c.lhs->next_raw(a, limit);
                    if (!l || *l >= limit) return std::nullopt;
                    auto r = c.rhs->next_raw(*l, limit);
                    if (!r || *r >= limit) return std::nullopt;
                    if (*r == *l) return l;
                    a = *r;
                }
                return std::nullopt;
            }
            case ComboOp::Difference: {
                while (a < limit) {
                    auto l = c.lhs->next_raw(a, limit);
                    if (!l || *l >= limit) return std::nullopt;
                    if (!c.rhs->contains_raw(*l)) return l;
                    a = *l + 1;
                }
                return std::nullopt;
            }
            case ComboOp::Complement: {
                while (a < limit) {
                    if (!c.lhs->contains_raw(a)) return a;
                    ++a;
                }
                return std::nullopt;
            }
        }
        return std::nullopt;
    }
};

using NatSet = BasicNatSet<std::uint64_t>;
using WideNatSet = BasicNatSet<u128>;

}  // namespace densitree
