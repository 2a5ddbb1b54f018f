#pragma once

#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "densitree/constructions.hpp"
#include "densitree/density.hpp"
#include "densitree/natset.hpp"
#include "densitree/tree.hpp"

namespace densitree::io {

using json = nlohmann::ordered_json;

namespace detail {
inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

// Split on `sep` at bracket depth zero.
inline std::vector<std::string_view> split_top(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    int depth = 0;
    std::size_t start = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        char c = s[i];
        if (c == '(' || c == '[') ++depth;
        else if (c == ')' || c == ']') {
            if (--depth < 0) throw ParseError("unbalanced brackets in '" + std::string(s) + "'");
        } else if (c == sep && depth == 0) {
            out.push_back(s.substr(start, i - start));
            start = i + 1;
        }
    }
    if (depth != 0) throw ParseError("unbalanced brackets in '" + std::string(s) + "'");
    out.push_back(s.substr(start));
    return out;
}

inline std::map<std::string, std::string, std::less<>> key_values(std::string_view s) {
    std::map<std::string, std::string, std::less<>> kv;
    if (trim(s).empty()) return kv;
    for (auto part : split_top(s, ';')) {
        part = trim(part);
        auto eq = part.find('=');
        if (eq == std::string_view::npos) throw ParseError("expected key=value, got '" + std::string(part) + "'");
        auto key = std::string(trim(part.substr(0, eq)));
        if (!kv.emplace(key, std::string(trim(part.substr(eq + 1)))).second) throw ParseError("duplicate key '" + key + "'");
    }
    return kv;
}

// "name(body)" -> {name, body}
inline std::pair<std::string_view, std::string_view> call_form(std::string_view s) {
    s = trim(s);
    auto open = s.find('(');
    if (open == std::string_view::npos || s.back() != ')') throw ParseError("expected name(...), got '" + std::string(s) + "'");
    return {trim(s.substr(0, open)), s.substr(open + 1, s.size() - open - 2)};
}
}  // namespace detail

// "[1,2,3]" or "1,2,3"
template <Natural N>
std::vector<N> parse_list(std::string_view s) {
    s = detail::trim(s);
    if (!s.empty() && s.front() == '[') {
        if (s.back() != ']') throw ParseError("unterminated list '" + std::string(s) + "'");
        s = s.substr(1, s.size() - 2);
    }
    std::vector<N> out;
    if (detail::trim(s).empty()) return out;
    for (auto part : detail::split_top(s, ',')) out.push_back(parse_unsigned<N>(detail::trim(part)));
    return out;
}

inline std::vector<int> parse_ternary(std::string_view s) {
    std::vector<int> out;
    for (char c : s) {
        if (c < '0' || c > '2') throw ParseError("ternary string may only contain 0, 1 and 2: '" + std::string(s) + "'");
        out.push_back(c - '0');
    }
    if (out.empty()) throw ParseError("ternary string must be nonempty");
    return out;
}

namespace detail {
inline const std::string& need(const std::map<std::string, std::string, std::less<>>& kv, std::string_view key, std::string_view id) {
    auto it = kv.find(key);
    if (it == kv.end()) throw ParseError(std::string(id) + " needs parameter '" + std::string(key) + "'");
    return it->second;
}

template <Natural N>
BasicNatSet<N> make_blocks(std::string_view id, std::string_view params) {
    auto kv = key_values(params);
    auto expect = [&](std::initializer_list<std::string_view> keys) {
        for (auto& [k, v] : kv) {
            bool known = false;
            for (auto want : keys) known = known || k == want;
            if (!known) throw ParseError("unknown parameter '" + k + "' for " + std::string(id));
        }
    };
    if (id == "interval") {
        expect({"lo", "hi"});
        return BasicNatSet<N>::interval(parse_unsigned<N>(need(kv, "lo", id)), parse_unsigned<N>(need(kv, "hi", id)));
    }
    if constexpr (std::is_same_v<N, std::uint64_t>) {
        if (id == "pow2") {
            expect({"from"});
            return pow2_set(static_cast<unsigned>(parse_unsigned<std::uint64_t>(need(kv, "from", id))));
        }
        if (id == "eps_family") {
            expect({"f", "eps"});
            return antichain_lower_eps(BitString::parse(need(kv, "f", id)), Rat::parse(need(kv, "eps", id)));
        }
    } else {
        if (id == "half_family") {
            expect({"f"});
            return antichain_half(parse_ternary(need(kv, "f", id))).A_f;
        }
        if (id == "half_b") {
            expect({"i", "levels"});
            auto i = parse_unsigned<std::uint64_t>(need(kv, "i", id));
            auto levels = parse_unsigned<std::uint64_t>(need(kv, "levels", id));
            if (i > 2 || levels < 1 || levels > 64) throw ParseError("half_b needs i <= 2 and 1 <= levels <= 64");
            return antichain_half(std::vector<int>(levels, 0)).B[i];
        }
    }
    throw ParseError("unknown block generator '" + std::string(id) + "'");
}
}  // namespace detail

// Inverse of BasicNatSet::canonical(), plus the shorthands omega, empty,
// evens and odds.
template <Natural N>
BasicNatSet<N> parse_natset(std::string_view text) {
    using S = BasicNatSet<N>;
    std::string_view s = detail::trim(text);
    if (s == "omega") return S::omega();
    if (s == "empty") return S::empty();
    if (s == "evens") return S::residues(2, 0);
    if (s == "odds") return S::residues(2, 1);
    auto colon = s.find(':');
    if (colon == std::string_view::npos) throw ParseError("set descriptor needs a kind prefix: '" + std::string(s) + "'");
    auto kind = s.substr(0, colon);
    auto body = detail::trim(s.substr(colon + 1));
    if (kind == "explicit") return S::explicit_set(parse_list<N>(body));
    if (kind == "periodic") {
        auto kv = detail::key_values(body);
        for (auto& [k, v] : kv)
            if (k != "m" && k != "r" && k != "t" && k != "add" && k != "del") throw ParseError("unknown periodic field '" + k + "'");
        auto get = [&](const char* k) -> std::string { auto it = kv.find(k); return it == kv.end() ? "" : it->second; };
        if (get("m").empty() || get("r").empty()) throw ParseError("periodic needs m and r");
        N t = get("t").empty() ? N{0} : parse_unsigned<N>(get("t"));
        return S::periodic(parse_unsigned<N>(get("m")), parse_list<N>(get("r")), t, parse_list<N>(get("add")),
                           parse_list<N>(get("del")));
    }
    if (kind == "blocks") {
        auto [id, params] = detail::call_form(body);
        return detail::make_blocks<N>(id, params);
    }
    if (kind == "combo") {
        auto [op, args] = detail::call_form(body);
        auto parts = detail::split_top(args, ',');
        if (op == "complement") {
            if (parts.size() != 1) throw ParseError("complement takes one argument");
            return S::complement(parse_natset<N>(parts[0]));
        }
        if (parts.size() != 2) throw ParseError("combo:" + std::string(op) + " takes two arguments");
        auto l = parse_natset<N>(parts[0]), r = parse_natset<N>(parts[1]);
        if (op == "union") return l | r;
        if (op == "intersection") return l & r;
        if (op == "difference") return l - r;
        throw ParseError("unknown combo operation '" + std::string(op) + "'");
    }
    throw ParseError("unknown set kind '" + std::string(kind) + "'");
}

inline NatSet parse_natset(std::string_view text) { return parse_natset<std::uint64_t>(text); }

// -- emitters ----------------------------------------------------------------

template <Natural N>
json to_json(const BasicNatSet<N>& s) {
    json j;
    j["set"] = s.canonical();
    j["horizon"] = s.horizon() == max_of<N>() ? json("unbounded") : json(to_dec(s.horizon()));
    return j;
}

template <Integer I>
json to_json(const BasicRat<I>& r) {
    return r.str();
}

template <Natural N>
json to_json(const BasicDensityProfile<N>& p) {
    json j;
    j["checkpoints"] = json::array();
    for (std::size_t i = 0; i < p.checkpoints.size(); ++i)
        j["checkpoints"].push_back({{"n", to_dec(p.checkpoints[i])}, {"value", p.values[i].str()}});
    j["asymptotic"] = p.asymptotic ? json(p.asymptotic->str()) : json(nullptr);
    return j;
}

inline json to_json(const TreeSlice& t) {
    json j;
    j["depth"] = t.depth();
    j["nodes"] = json::array();
    for (const auto& b : t.nodes()) j["nodes"].push_back(b.str());
    return j;
}

inline std::string node_label(const BitString& b) { return b.len == 0 ? "∅" : b.str(); }

// Root on top, one rank per level, edges labelled by the bit taken;
// classified splitting nodes are double-circled.
inline std::string to_dot(const TreeSlice& t, std::string_view name = "tree") {
    std::ostringstream os;
    os << "digraph " << name << " {\n  rankdir=TB;\n  node [shape=circle];\n";
    auto id = [](const BitString& b) { return "\"n" + b.str() + "\""; };
    for (unsigned l = 0; l <= t.depth(); ++l) {
        os << "  { rank=same;";
        for (const auto& b : t.level_nodes(l)) {
            os << " " << id(b) << " [label=\"" << node_label(b) << "\"";
            if (is_splitting(t, b)) os << ", shape=doublecircle";
            os << "];";
        }
        os << " }\n";
    }
    for (unsigned l = 1; l <= t.depth(); ++l)
        for (const auto& b : t.level_nodes(l))
            os << "  " << id(b.parent()) << " -> " << id(b) << " [label=\"" << (b.at(l - 1) ? 1 : 0) << "\"];\n";
    os << "}\n";
    return os.str();
}

}  // namespace densitree::io
