// densitree: command-line front end for the densitree library.
//
// Machine-readable output goes to stdout, diagnostics to stderr.
// Exit status: 0 success, 1 domain error or failed suite, 2 usage error.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "densitree/constructions.hpp"
#include "densitree/density.hpp"
#include "densitree/io.hpp"
#include "densitree/sptree.hpp"
#include "densitree/tree.hpp"
#include "densitree/verify.hpp"

namespace {

using namespace densitree;
using io::json;

struct Common {
    std::string horizon, depth, eps, seed = "0", format;
};

std::map<const CLI::App*, std::string> default_formats;

void add_common(CLI::App* c, Common& o, const std::string& default_format, std::vector<std::string> formats) {
    c->add_option("--horizon", o.horizon, "evaluation horizon for infinite sets");
    c->add_option("--depth", o.depth, "slice depth");
    c->add_option("--eps", o.eps, "rational NUM/DEN");
    c->add_option("--seed", o.seed, "random seed")->capture_default_str();
    default_formats[c] = default_format;
    c->add_option("--format", o.format, "output format, default " + default_format)->check(CLI::IsMember(std::move(formats)));
}

std::uint64_t nat(const std::string& s, const char* what) {
    if (s.empty()) throw ParseError(std::string("missing ") + what);
    return parse_unsigned<std::uint64_t>(s);
}
unsigned small_nat(const std::string& s, const char* what, unsigned max) {
    auto v = nat(s, what);
    if (v > max) throw ParseError(std::string(what) + " must be at most " + std::to_string(max));
    return static_cast<unsigned>(v);
}
Rat rat(const std::string& s, const char* what) {
    if (s.empty()) throw ParseError(std::string("missing ") + what);
    return Rat::parse(s);
}
NatSet natset(const std::string& text, const Common& o) {
    if (text.empty()) throw ParseError("missing set descriptor");
    NatSet a = io::parse_natset(text);
    return o.horizon.empty() ? a : a.with_horizon(nat(o.horizon, "horizon"));
}

void emit(const json& j) { std::cout << j.dump(2) << "\n"; }

void emit_tree(const TreeSlice& t, const std::string& format) {
    if (format == "dot") std::cout << io::to_dot(t);
    else emit(io::to_json(t));
}

json kv_json(const std::map<BitString, BitString>& m) {
    json j = json::object();
    for (const auto& [k, v] : m) j[k.str().empty() ? "<>" : k.str()] = v.str();
    return j;
}

std::vector<u128> parse_codes(std::string_view s) {
    return io::parse_list<u128>(s);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Finite-scale constructions for density-parametrized tree forcings"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "show help for every subcommand");

    Common o;
    std::string set, set2, checkpoints, stem, ones, n_arg, k_arg, target, f_arg, node, residues, bounds;
    std::string ck = "1", ck0 = "0", cr = "4", cm = "4", cz1 = "3", cz2 = "2", rho;
    std::string widths, sets_arg, mseq_arg, suite = "all", scale = "default";
    bool timing = false;

    auto* density = app.add_subcommand("density", "density profile |A∩c|/c at checkpoints");
    add_common(density, o, "csv", {"csv", "json"});
    density->add_option("--set", set, "set descriptor")->required();
    density->add_option("--checkpoints", checkpoints, "comma-separated checkpoints")->required();
    density->add_option("--relative-to", set2, "report |B∩c|/|A∩c| against this A");

    auto* kseq = app.add_subcommand("kseq", "checkpoint sequence k_0 < ... < k_N");
    add_common(kseq, o, "json", {"json", "csv"});
    kseq->add_option("--set", set, "set descriptor")->required();
    kseq->add_option("--n", n_arg, "last index N")->required();

    auto* dom = app.add_subcommand("dominate", "dominating profile f(1..N)");
    add_common(dom, o, "json", {"json", "csv"});
    dom->add_option("--set", set, "set descriptor")->required();
    dom->add_option("--n", n_arg, "last index N")->required();

    auto* mt = app.add_subcommand("mathias-tree", "materialize a Mathias condition (s, A)");
    add_common(mt, o, "json", {"json", "dot"});
    mt->add_option("--stem", stem, "stem elements, comma-separated");
    mt->add_option("--set", set, "reservoir A")->required();

    auto* st = app.add_subcommand("silver-tree", "materialize a Silver condition (f, A)");
    add_common(st, o, "json", {"json", "dot"});
    st->add_option("--set", set, "free coordinates A")->required();
    st->add_option("--ones", ones, "coordinates outside A where f is 1")->default_val("empty");

    auto* sk = app.add_subcommand("skeleton", "splitting structure: stem, levels, skeleton map");
    add_common(sk, o, "json", {"json"});
    std::string kind = "mathias";
    sk->add_option("--kind", kind, "mathias or silver")->check(CLI::IsMember({"mathias", "silver"}))->capture_default_str();
    sk->add_option("--stem", stem, "Mathias stem");
    sk->add_option("--set", set, "A")->required();
    sk->add_option("--ones", ones, "Silver ones")->default_val("empty");

    auto* part = app.add_subcommand("partition", "uniform partition into N+1 residue classes");
    add_common(part, o, "json", {"json"});
    part->add_option("--n", n_arg, "N")->required();

    auto* ceps = app.add_subcommand("cohen-eps", "pair coding of x against a uniform partition");
    add_common(ceps, o, "json", {"json"});
    ceps->add_option("--set", set, "x")->required();
    ceps->add_option("--n", n_arg, "partition size N (N+1 classes)")->required();
    ceps->add_option("--k", k_arg, "number of pairs K")->required();

    auto* czero = app.add_subcommand("cohen-zero", "residue-chain coding of x");
    add_common(czero, o, "json", {"json"});
    czero->add_option("--set", set, "x")->required();
    czero->add_option("--residues", residues, "i_0,...,i_N")->required();
    czero->add_option("--bounds", bounds, "b_0,...,b_N")->required();
    czero->add_option("--k", k_arg, "code length K")->required();

    auto* fe = app.add_subcommand("force-extend", "extend (s, A) to decide a target after its coded prefix");
    add_common(fe, o, "json", {"json"});
    fe->add_option("--stem", stem, "stem elements");
    fe->add_option("--set", set, "A")->required();
    fe->add_option("--n", n_arg, "partition size N")->required();
    fe->add_option("--target", target, "bit-string to force")->required();

    auto* ae = app.add_subcommand("antichain-eps", "lower-density family member A_f");
    add_common(ae, o, "json", {"json", "csv"});
    ae->add_option("--f", f_arg, "bit-string index")->required();

    auto* ah = app.add_subcommand("antichain-half", "half-density family member A_f with B_0, B_1, B_2 and grid");
    add_common(ah, o, "json", {"json"});
    ah->add_option("--f", f_arg, "ternary index")->required();

    auto* col = app.add_subcommand("collapse", "collapse coding");
    col->require_subcommand(1);
    auto collapse_opts = [&](CLI::App* c) {
        add_common(c, o, "json", {"json"});
        c->add_option("--k", ck, "k")->capture_default_str();
        c->add_option("--k0", ck0, "k0")->capture_default_str();
        c->add_option("--r", cr, "r")->capture_default_str();
        c->add_option("--m", cm, "m")->capture_default_str();
        c->add_option("--z1", cz1, "z1")->capture_default_str();
        c->add_option("--z2", cz2, "z2")->capture_default_str();
    };
    auto* c_ell = col->add_subcommand("ell", "block ends ℓ_{-1..N}");
    collapse_opts(c_ell);
    c_ell->add_option("--n", n_arg, "N")->required();
    auto* c_f = col->add_subcommand("f", "rounded weighted count at ℓ_n");
    collapse_opts(c_f);
    c_f->add_option("--set", set, "x")->required();
    c_f->add_option("--n", n_arg, "n")->required();
    auto* c_dec = col->add_subcommand("decode", "parities of f at ℓ_0..ℓ_{N-1}");
    collapse_opts(c_dec);
    c_dec->add_option("--set", set, "x")->required();
    c_dec->add_option("--n", n_arg, "N")->required();
    auto* c_enc = col->add_subcommand("encode", "fix coordinates so every completion decodes to rho");
    collapse_opts(c_enc);
    c_enc->add_option("--rho", rho, "target bit-string")->required();
    auto* c_rt = col->add_subcommand("roundtrip", "encode rho, decode sample completions");
    collapse_opts(c_rt);
    c_rt->add_option("--rho", rho, "target bit-string")->required();

    auto* sp = app.add_subcommand("sptree", "splitting-tree suite");
    sp->require_subcommand(1);
    auto* s_t0 = sp->add_subcommand("t0", "the tree T0");
    add_common(s_t0, o, "json", {"json", "dot"});
    auto* s_p = sp->add_subcommand("p", "the condition p = ⋃ T_m");
    add_common(s_p, o, "json", {"json", "dot"});
    auto* s_kof = sp->add_subcommand("kof", "K_p(t) on T0 or p");
    add_common(s_kof, o, "json", {"json"});
    std::string which = "p";
    auto which_opt = [&](CLI::App* c) {
        c->add_option("--tree", which, "t0 or p")->check(CLI::IsMember({"t0", "p"}))->capture_default_str();
        c->add_option("--node", node, "node t (bit-string)")->default_val("");
    };
    which_opt(s_kof);
    auto* s_w = sp->add_subcommand("width", "1-hitting witness width at level n");
    add_common(s_w, o, "json", {"json"});
    which_opt(s_w);
    s_w->add_option("--n", n_arg, "level n")->required();
    s_w->add_option("--k", k_arg, "first coordinate k")->required();
    auto* s_ones = sp->add_subcommand("ones", "ones-count bound per level");
    add_common(s_ones, o, "json", {"json", "csv"});
    which_opt(s_ones);
    auto* s_ev = sp->add_subcommand("evade", "escape a slalom on epoch levels");
    add_common(s_ev, o, "json", {"json"});
    which_opt(s_ev);
    s_ev->add_option("--widths", widths, "f(0),f(1),...; default n+1");
    s_ev->add_option("--sets", sets_arg, "codes of S(0)|S(1)|...; default random from --seed");
    s_ev->add_option("--levels", mseq_arg, "epoch levels; default ℓ_1..ℓ_N within depth");

    auto* ver = app.add_subcommand("verify", "run property suites");
    add_common(ver, o, "json", {"json"});
    ver->add_option("--suite", suite, "suite name or all")->capture_default_str();
    ver->add_option("--scale", scale, "small or default")->check(CLI::IsMember({"small", "default"}))->capture_default_str();
    ver->add_flag("--timing", timing, "include elapsed time in reports");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return 2;
    }
    if (o.format.empty()) {
        const CLI::App* leaf = &app;
        while (!leaf->get_subcommands().empty()) leaf = leaf->get_subcommands().front();
        o.format = default_formats[leaf];
    }

    try {
        if (*density) {
            auto cps = io::parse_list<std::uint64_t>(checkpoints);
            NatSet a = natset(set, o);
            auto prof = set2.empty() ? density_profile(a, cps) : relative_density_profile(a, natset(set2, o), cps);
            if (o.format == "csv") std::cout << prof.csv();
            else emit({{"set", a.canonical()}, {"profile", io::to_json(prof)}});
        } else if (*kseq) {
            auto ks = k_sequence(natset(set, o), rat(o.eps, "--eps"), small_nat(n_arg, "--n", 62));
            if (o.format == "csv") {
                for (std::size_t i = 0; i < ks.entries.size(); ++i) std::cout << i << "," << ks.entries[i] << "\n";
            } else {
                emit({{"eps", ks.epsilon.str()}, {"entries", ks.entries}});
            }
        } else if (*dom) {
            auto f = dominating_profile(natset(set, o), rat(o.eps, "--eps"), small_nat(n_arg, "--n", 62));
            if (o.format == "csv") {
                for (std::size_t i = 0; i < f.size(); ++i) std::cout << i + 1 << "," << f[i] << "\n";
            } else {
                emit({{"eps", rat(o.eps, "--eps").str()}, {"f", f}});
            }
        } else if (*mt) {
            MathiasCond c(io::parse_list<std::uint64_t>(stem), natset(set, o));
            emit_tree(mathias_tree(c, small_nat(o.depth, "--depth", kMaxDepth)), o.format);
        } else if (*st) {
            unsigned L = small_nat(o.depth, "--depth", kMaxDepth);
            std::uint64_t H = o.horizon.empty() ? L : nat(o.horizon, "horizon");
            SilverCond c(natset(set, o), natset(ones, o), H);
            emit_tree(silver_tree(c, L), o.format);
        } else if (*sk) {
            unsigned L = small_nat(o.depth, "--depth", kMaxDepth);
            TreeSlice t = kind == "mathias" ? mathias_tree(MathiasCond(io::parse_list<std::uint64_t>(stem), natset(set, o)), L)
                                            : silver_tree(SilverCond(natset(set, o), natset(ones, o), o.horizon.empty() ? L : nat(o.horizon, "horizon")), L);
            auto sn = splitting_nodes(t);
            json j;
            j["depth"] = L;
            j["splitting"] = json::array();
            for (const auto& b : sn.splitting) j["splitting"].push_back(b.str());
            j["unknown"] = sn.unknown.size();
            auto u = uniform_split_levels(t);
            if (u.levels) j["split_levels"] = *u.levels;
            else j["counterexample"] = {u.counterexample->first.str(), u.counterexample->second.str()};
            try {
                j["stem"] = densitree::stem(t).str();
                j["skeleton"] = kv_json(split_skeleton(t));
            } catch (const PreconditionError&) {
                j["stem"] = nullptr;
            }
            emit(j);
        } else if (*part) {
            auto ps = partition_uniform(nat(n_arg, "--n"));
            json j = json::array();
            for (const auto& a : ps) j.push_back({{"set", a.canonical()}, {"density", a.closed_form_density()->str()}});
            emit(j);
        } else if (*ceps) {
            auto c = cohen_encode_eps(natset(set, o), partition_uniform(nat(n_arg, "--n")), nat(k_arg, "--k"));
            emit({{"code", c.str()}});
        } else if (*czero) {
            ResidueChain chain(io::parse_list<std::uint64_t>(residues), io::parse_list<std::uint64_t>(bounds));
            auto tr = cohen_encode_zero(natset(set, o), chain, nat(k_arg, "--k"));
            emit({{"code", tr.c.str()}, {"n", tr.n}, {"m", tr.m}, {"certified_below", tr.horizon == max_of<std::uint64_t>() ? json("unbounded") : json(tr.horizon)}});
        } else if (*fe) {
            MathiasCond c(io::parse_list<std::uint64_t>(stem), natset(set, o));
            auto partition = partition_uniform(nat(n_arg, "--n"));
            std::uint64_t d0 = c.s.empty() ? 1 : c.s.back() + 1;
            auto r = cohen_decided_prefix(c, partition, static_cast<unsigned>(d0));
            auto out = cohen_force_extension(c, r, BitString::parse(target), partition);
            emit({{"decided", r.str()}, {"target", target}, {"stem", out.s}, {"A", out.A.canonical()}});
        } else if (*ae) {
            auto f = BitString::parse(f_arg);
            Rat eps = rat(o.eps, "--eps");
            NatSet a = antichain_lower_eps(f, eps);
            if (o.format == "csv") {
                for (auto x : a.elements_below(a.horizon())) std::cout << x << "\n";
            } else {
                json lv = json::array();
                for (unsigned n = 0; n < f.len; ++n) {
                    std::uint64_t lo = std::uint64_t{2} << n;
                    lv.push_back({{"n", n}, {"interval", {lo, 2 * lo}}, {"elements", (a & NatSet::interval(lo, 2 * lo)).elements_below(2 * lo)}});
                }
                emit({{"set", a.canonical()}, {"horizon", a.horizon()}, {"levels", lv}});
            }
        } else if (*ah) {
            auto fam = antichain_half(io::parse_ternary(f_arg));
            json grid = json::array();
            for (const auto& row : fam.grid) grid.push_back({to_dec(row[0]), to_dec(row[1]), to_dec(row[2]), to_dec(row[3])});
            emit({{"A_f", fam.A_f.canonical()},
                  {"B", {fam.B[0].canonical(), fam.B[1].canonical(), fam.B[2].canonical()}},
                  {"grid", grid},
                  {"horizon", to_dec(fam.A_f.horizon())}});
        } else if (*col) {
            CollapseParams p;
            p.k = nat(ck, "--k");
            p.k0 = nat(ck0, "--k0");
            p.r = nat(cr, "--r");
            p.m = nat(cm, "--m");
            p.z1 = nat(cz1, "--z1");
            p.z2 = nat(cz2, "--z2");
            p.validate();
            auto chain = p.budget_chain();
            json params{{"k", p.k}, {"k0", p.k0}, {"r", p.r}, {"m", p.m}, {"z1", p.z1}, {"z2", p.z2},
                        {"budget_chain", {chain[0].str(), chain[1].str(), chain[2].str()}}, {"budget_holds", p.budget_holds()}};
            if (*c_ell) {
                emit({{"params", params}, {"ell", ell_seq(p, small_nat(n_arg, "--n", 40))}});
            } else if (*c_f) {
                emit({{"params", params}, {"f", collapse_f(natset(set, o), p, small_nat(n_arg, "--n", 40))}});
            } else if (*c_dec) {
                emit({{"params", params}, {"decoded", collapse_decode(natset(set, o), p, small_nat(n_arg, "--n", 40)).str()}});
            } else {
                auto r = BitString::parse(rho);
                if (r.len == 0) throw ParseError("--rho must be nonempty");
                auto res = collapse_encode(p, r);
                json steps = json::array();
                for (const auto& s : res.steps)
                    steps.push_back({{"n", s.n}, {"block", {s.block_lo, s.block_hi}}, {"fixed_ones", s.fixed_ones}, {"fixed_zeros", s.fixed_zeros},
                                     {"free_after", s.free_after}, {"min_free", s.min_free}, {"budget", s.budget.str()},
                                     {"within_budget", s.within_budget}, {"value", s.value}});
                json j{{"params", params}, {"rho", rho}, {"steps", steps}, {"horizon", res.fragment.H}, {"ones", res.fragment.ones}};
                if (*c_rt) {
                    verify::Rng rng(nat(o.seed, "--seed"));
                    json samples = json::array();
                    bool ok = true;
                    for (int trial = 0; trial < 8; ++trial) {
                        std::vector<std::uint64_t> x = res.fragment.ones;
                        for (auto f : res.fragment.free)
                            if (trial == 1 || (trial > 1 && rng.coin())) x.push_back(f);
                        std::sort(x.begin(), x.end());
                        auto d = collapse_decode(NatSet::explicit_set(x), p, r.len).str();
                        ok = ok && d == rho;
                        samples.push_back(d);
                    }
                    j["decoded_samples"] = samples;
                    j["roundtrip"] = ok;
                    emit(j);
                    return ok ? 0 : 1;
                }
                emit(j);
            }
        } else if (*sp) {
            unsigned L = o.depth.empty() ? kSpMaxDepth : small_nat(o.depth, "--depth", kSpMaxDepth);
            auto build = [&]() { return which == "t0" ? sp_T0(L) : sp_p(L); };
            if (*s_t0) {
                emit_tree(sp_T0(L), o.format);
            } else if (*s_p) {
                emit_tree(sp_p(L), o.format);
            } else if (*s_kof) {
                auto t = build();
                auto b = BitString::parse(node);
                emit({{"tree", which}, {"depth", L}, {"node", node}, {"K", K_of(t, b)}});
            } else if (*s_w) {
                auto t = build();
                auto b = BitString::parse(node);
                unsigned n = small_nat(n_arg, "--n", kSpMaxDepth), k = small_nat(k_arg, "--k", kSpMaxDepth);
                auto w = witness_width(t, b, n, k);
                json j{{"tree", which}, {"node", node}, {"n", n}, {"k", k}};
                if (w) {
                    j["width"] = w->width;
                    json leaves = json::array();
                    for (const auto& l : w->leaves) leaves.push_back(l.str());
                    j["certificate"] = {{"leaves", leaves}, {"covered", w->covered}};
                } else {
                    j["width"] = "none";
                }
                emit(j);
            } else if (*s_ones) {
                auto t = build();
                auto r = ones_bound_check(t, L);
                if (o.format == "csv") {
                    for (const auto& lv : r.levels) std::cout << lv.ell << "," << lv.max_ones << "," << lv.sound_ok << "," << lv.real_log << "\n";
                } else {
                    json levels = json::array();
                    for (const auto& lv : r.levels)
                        levels.push_back({{"ell", lv.ell}, {"max_ones", lv.max_ones}, {"argmax", lv.argmax.str()}, {"bitlength_ok", lv.sound_ok},
                                          {"log_bound", lv.real_log > 0 ? "holds" : lv.real_log < 0 ? "violated" : "undecided"}});
                    emit({{"tree", which}, {"depth", L}, {"bitlength_ok", r.sound_ok}, {"log_violations_ell_ge_2", r.real_log_violations},
                          {"log_undecided", r.real_log_undecided}, {"worst_ell", r.worst_ell}, {"levels", levels}});
                }
            } else if (*s_ev) {
                auto t = build();
                auto b = BitString::parse(node);
                std::vector<std::uint64_t> mseq;
                if (mseq_arg.empty()) {
                    for (std::uint64_t l = 1; l <= L; l = 2 * l + 1) mseq.push_back(l);
                } else {
                    mseq = io::parse_list<std::uint64_t>(mseq_arg);
                }
                std::vector<std::uint64_t> f;
                if (widths.empty()) {
                    for (std::size_t i = 0; i < mseq.size(); ++i) f.push_back(i + 1);
                } else {
                    f = io::parse_list<std::uint64_t>(widths);
                }
                std::vector<std::vector<u128>> S;
                if (!sets_arg.empty()) {
                    for (auto part_s : io::detail::split_top(sets_arg, '|')) S.push_back(parse_codes(part_s));
                } else {
                    verify::Rng rng(nat(o.seed, "--seed"));
                    for (std::size_t i = 0; i < f.size() && i < mseq.size(); ++i) {
                        if (mseq[i] > L) throw PreconditionError("level beyond depth");
                        const auto& lv = t.level(static_cast<unsigned>(mseq[i]));
                        std::vector<u128> Si;
                        for (std::uint64_t j = 0; j < f[i]; ++j) Si.push_back(code_map(BitString(static_cast<unsigned>(mseq[i]), lv[rng.below(lv.size())])));
                        S.push_back(std::move(Si));
                    }
                }
                Slalom sl(f, S);
                auto e = escape_witness(t, b, sl, mseq);
                emit({{"n0", e.n0}, {"level", mseq[e.n0]}, {"node", e.node.str()}, {"code", to_dec(e.code)}, {"level_width", e.level_width},
                      {"f_n0", f[e.n0]}});
            }
        } else if (*ver) {
            auto sc = verify::parse_scale(scale);
            std::uint64_t seed = nat(o.seed, "--seed");
            std::vector<std::string> names;
            if (suite == "all") names = verify::suite_names();
            else names = {suite};
            bool ok = true;
            json out = json::array();
            for (const auto& nm : names) {
                auto rep = verify::run_suite(nm, seed, sc);
                ok = ok && rep.pass();
                out.push_back(rep.to_json(timing));
            }
            emit(names.size() == 1 ? out[0] : out);
            return ok ? 0 : 1;
        }
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
