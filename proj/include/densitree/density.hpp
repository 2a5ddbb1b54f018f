#pragma once

#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "densitree/natset.hpp"

namespace densitree {

template <Natural N>
struct BasicDensityProfile {
    std::vector<N> checkpoints;
    std::vector<RatFor<N>> values;                  // |A ∩ c| / c, or relative values
    std::optional<RatFor<N>> asymptotic;            // closed form, Periodic only

    // One `checkpoint,num,den` row per checkpoint.
    std::string csv() const {
        std::ostringstream os;
        for (std::size_t i = 0; i < checkpoints.size(); ++i)
            os << to_dec(checkpoints[i]) << "," << to_dec(values[i].num()) << "," << to_dec(values[i].den()) << "\n";
        return os.str();
    }
};
using DensityProfile = BasicDensityProfile<std::uint64_t>;

// Entries k_0 < k_1 < ... < k_N of the checkpoint sequence for (A, eps).
struct KSeq {
    Rat epsilon;
    std::vector<std::uint64_t> entries;
};

template <Natural N>
N count_upto(const BasicNatSet<N>& a, N n) {
    return a.count_upto(n);
}

namespace detail {
template <Natural N>
void check_checkpoints(const std::vector<N>& cps) {
    for (std::size_t i = 0; i < cps.size(); ++i) {
        if (cps[i] == 0) throw PreconditionError("checkpoints must be positive");
        if (i > 0 && cps[i] <= cps[i - 1]) throw PreconditionError("checkpoints must be strictly increasing");
    }
}
template <Natural N>
auto as_signed(N v) {
    using I = decltype(RatFor<N>{}.num());
    if (v > static_cast<N>(max_of<I>())) throw OverflowError("value too large for a rational");
    return static_cast<I>(v);
}
}  // namespace detail

template <Natural N>
BasicDensityProfile<N> density_profile(const BasicNatSet<N>& a, const std::vector<N>& checkpoints) {
    detail::check_checkpoints(checkpoints);
    BasicDensityProfile<N> p;
    p.checkpoints = checkpoints;
    for (N c : checkpoints)
        p.values.emplace_back(detail::as_signed(a.count_upto(c)), detail::as_signed(c));
    p.asymptotic = a.closed_form_density();
    return p;
}

// |A ∩ B ∩ c| / |A ∩ c| at each checkpoint; B ⊆ A is verified below the last one.
template <Natural N>
BasicDensityProfile<N> relative_density_profile(const BasicNatSet<N>& b, const BasicNatSet<N>& a,
                                                const std::vector<N>& checkpoints) {
    detail::check_checkpoints(checkpoints);
    BasicDensityProfile<N> p;
    p.checkpoints = checkpoints;
    if (checkpoints.empty()) return p;
    N top = checkpoints.back();
    for (N x : b.elements_below(top))
        if (!a.contains(x)) throw PreconditionError("containment violation: " + to_dec(x) + " is in B but not in A");
    for (N c : checkpoints) {
        N den = a.count_upto(c);
        if (den == 0) throw PreconditionError("|A ∩ " + to_dec(c) + "| is zero");
        p.values.emplace_back(detail::as_signed(b.count_upto(c)), detail::as_signed(den));
    }
    return p;
}

namespace detail {
// count >= k * (eps - 2^-n), exactly:  count * den * 2^n >= k * (num * 2^n - den)
inline bool meets_threshold(std::uint64_t count, std::uint64_t k, const Rat& eps, unsigned n) {
    i128 p = i128{1} << n;
    i128 lhs = checked_mul(checked_mul(static_cast<i128>(count), static_cast<i128>(eps.den())), p);
    i128 rhs = checked_mul(static_cast<i128>(k),
                           checked_sub(checked_mul(static_cast<i128>(eps.num()), p), static_cast<i128>(eps.den())));
    return lhs >= rhs;
}
inline void check_eps(const Rat& eps) {
    if (eps <= Rat(0) || eps > Rat(1)) throw PreconditionError("epsilon must lie in (0,1], got " + eps.str());
}
}  // namespace detail

// k_0 = min(A); k_n = least k > k_{n-1} with |A ∩ k| >= k (eps - 2^-n).
inline KSeq k_sequence(const NatSet& a, const Rat& eps, unsigned n_max) {
    detail::check_eps(eps);
    if (n_max > 62) throw PreconditionError("index too large for exact thresholds");
    KSeq ks{eps, {}};
    std::uint64_t k = a.min();
    ks.entries.push_back(k);
    std::uint64_t cnt = k + 1 <= a.horizon() ? a.count_upto(k + 1) : 0;  // |A ∩ (k+1)|
    auto exhausted = [&](unsigned n) {
        return HorizonError("k_" + std::to_string(n) + " not found below horizon " + to_dec(a.horizon()));
    };
    for (unsigned n = 1; n <= n_max; ++n) {
        if (k >= a.horizon()) throw exhausted(n);
        ++k;  // candidate; invariant cnt = |A ∩ k|
        while (!detail::meets_threshold(cnt, k, eps, n)) {
            if (k >= a.horizon()) throw exhausted(n);
            if (a.contains(k)) ++cnt;
            ++k;
        }
        ks.entries.push_back(k);
        if (n < n_max) {
            if (k >= a.horizon()) throw exhausted(n + 1);
            if (a.contains(k)) ++cnt;
        }
    }
    return ks;
}

// f(n) = min{k >= 1 : |x ∩ k| / k >= eps - 2^-n} for n = 1..N.
inline std::vector<std::uint64_t> dominating_profile(const NatSet& x, const Rat& eps, unsigned n_max) {
    detail::check_eps(eps);
    if (n_max > 62) throw PreconditionError("index too large for exact thresholds");
    x.min();  // nonempty below horizon
    std::vector<std::uint64_t> out;
    for (unsigned n = 1; n <= n_max; ++n) {
        std::uint64_t k = 1;
        std::uint64_t cnt = x.contains(0) ? 1 : 0;
        while (!detail::meets_threshold(cnt, k, eps, n)) {
            if (k >= x.horizon())
                throw HorizonError("f(" + std::to_string(n) + ") not found below horizon " + to_dec(x.horizon()));
            if (x.contains(k)) ++cnt;
            ++k;
        }
        out.push_back(k);
    }
    return out;
}

}  // namespace densitree
