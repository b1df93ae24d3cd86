#include "pika/modelcheck.hpp"

#include <algorithm>
#include <functional>
#include <random>
#include <sstream>

#include "pika/diag.hpp"

namespace pika::mc {

using namespace ssl;
using interp::Heap;
using interp::Store;

const char* show(SatResult::Kind k) {
    switch (k) {
        case SatResult::Kind::Sat: return "Sat";
        case SatResult::Kind::Unsat: return "Unsat";
        case SatResult::Kind::Unknown: return "Unknown";
    }
    return "?";
}

const PredicateDef* PredicateEnv::find(const std::string& n) const {
    auto it = preds.find(n);
    return it == preds.end() ? nullptr : &it->second;
}

// ---------------------------------------------------------------- pure terms

namespace {

bool numeric(const Val& v) { return v.kind != Val::Kind::Bool; }

[[noreturn]] void sort_mismatch(const TermPtr& t, const std::string& why) {
    throw PikaError("SortMismatch", "", why + " in " + print_term(t));
}

}  // namespace

Val eval_term(const Store& s, const TermPtr& t) {
    using TK = Term::Kind;
    auto num = [&](const TermPtr& x) {
        Val v = eval_term(s, x);
        if (!numeric(v)) sort_mismatch(t, "expected a number, got " + v.show());
        return v.v;
    };
    auto boolean = [&](const TermPtr& x) {
        Val v = eval_term(s, x);
        if (v.kind != Val::Kind::Bool) sort_mismatch(t, "expected a boolean, got " + v.show());
        return v.v != 0;
    };
    switch (t->kind) {
        case TK::Int: return Val::int_(t->ival);
        case TK::Bool: return Val::bool_(t->bval);
        case TK::Var: {
            auto it = s.find(t->name);
            if (it == s.end()) throw PikaError("UnboundVariable", "", "`" + t->name + "` has no value");
            return it->second;
        }
        case TK::Eq: {
            Val a = eval_term(s, t->args[0]), b = eval_term(s, t->args[1]);
            if (numeric(a) != numeric(b)) sort_mismatch(t, "comparing " + a.show() + " with " + b.show());
            return Val::bool_(a.v == b.v);
        }
        case TK::And: return Val::bool_(boolean(t->args[0]) && boolean(t->args[1]));
        case TK::Or: return Val::bool_(boolean(t->args[0]) || boolean(t->args[1]));
        case TK::Not: return Val::bool_(!boolean(t->args[0]));
        case TK::Lt: return Val::bool_(num(t->args[0]) < num(t->args[1]));
        case TK::Add: return Val::int_(num(t->args[0]) + num(t->args[1]));
        case TK::Sub: return Val::int_(num(t->args[0]) - num(t->args[1]));
        case TK::Mod: {
            long long a = num(t->args[0]), b = num(t->args[1]);
            if (b == 0) sort_mismatch(t, "modulo by zero");
            return Val::int_(a % b);
        }
        case TK::Ite: return boolean(t->args[0]) ? eval_term(s, t->args[1]) : eval_term(s, t->args[2]);
    }
    sort_mismatch(t, "unknown term");
}

bool eval_pure(const Store& s, const TermPtr& t) {
    Val v = eval_term(s, t);
    if (v.kind != Val::Kind::Bool) sort_mismatch(t, "a pure constraint must be boolean");
    return v.v != 0;
}

// ---------------------------------------------------------------- satisfaction

namespace {

struct Item {
    bool is_pure = false;
    TermPtr t;
    Heaplet h;
    bool ro = false;
    int depth = 0;
};

struct Goal {
    Store bind;
    Heap rem;
    std::vector<Item> items;
};

bool bound(const Store& s, const TermPtr& t) {
    std::set<std::string> vs;
    term_vars(t, vs);
    for (const auto& v : vs)
        if (!s.count(v)) return false;
    return true;
}

void heaplet_vars(const Heaplet& h, std::set<std::string>& out) {
    if (!h.base.empty()) out.insert(h.base);
    if (h.value) term_vars(h.value, out);
    for (const auto& a : h.args) term_vars(a, out);
}

std::string show_item(const Item& it) {
    return it.is_pure ? print_term(it.t, Style::Minimal) : emit_heaplet(it.h, Style::Minimal);
}

struct Solver {
    const Heap& global;
    const PredicateEnv& env;
    int limit;
    int next_local = 0;
    std::string last_reason;

    enum class Step { Done, Blocked, Fail };

    Step fail(const std::string& why) {
        last_reason = why;
        return Step::Fail;
    }

    Step pure_step(Goal& g, const TermPtr& t) {
        if (bound(g.bind, t)) {
            try {
                if (eval_pure(g.bind, t)) return Step::Done;
                return fail("`" + print_term(t, Style::Minimal) + "` is false");
            } catch (const PikaError& e) {
                return fail(e.what());
            }
        }
        if (t->kind == Term::Kind::Eq) {
            for (int side = 0; side < 2; ++side) {
                const TermPtr& v = t->args[side];
                const TermPtr& o = t->args[1 - side];
                if (v->kind == Term::Kind::Var && !g.bind.count(v->name) && bound(g.bind, o)) {
                    try {
                        g.bind[v->name] = eval_term(g.bind, o);
                    } catch (const PikaError& e) {
                        return fail(e.what());
                    }
                    return Step::Done;
                }
            }
        }
        return Step::Blocked;
    }

    Step points_to(Goal& g, const Item& it) {
        const Heaplet& h = it.h;
        auto b = g.bind.find(h.base);
        if (b == g.bind.end()) return Step::Blocked;
        long long at = b->second.v + h.offset;
        bool ro = it.ro || h.readonly;
        const Heap& from = ro ? global : g.rem;
        auto c = from.find(at);
        if (c == from.end()) {
            if (!ro && global.count(at)) return fail("cell @" + std::to_string(at) + " is claimed twice");
            return fail("no cell at @" + std::to_string(at) + " for " + emit_heaplet(h, Style::Minimal));
        }
        Val cell = c->second;
        const TermPtr& v = h.value;
        if (v->kind == Term::Kind::Var && !g.bind.count(v->name)) {
            g.bind[v->name] = cell;
        } else if (bound(g.bind, v)) {
            Val want;
            try {
                want = eval_term(g.bind, v);
            } catch (const PikaError& e) {
                return fail(e.what());
            }
            if (numeric(want) != numeric(cell) || want.v != cell.v)
                return fail("@" + std::to_string(at) + " holds " + cell.show() + ", " +
                            emit_heaplet(h, Style::Minimal) + " wants " + want.show());
        } else {
            return Step::Blocked;
        }
        if (!ro) g.rem.erase(at);
        return Step::Done;
    }

    // One deterministic step on the first item that can take one.
    Step simple(Goal& g, const Item& it) {
        if (it.is_pure) return pure_step(g, it.t);
        switch (it.h.kind) {
            case Heaplet::Kind::Emp:
            case Heaplet::Kind::Block:
            case Heaplet::Kind::Temp: return Step::Done;
            case Heaplet::Kind::PointsTo: return points_to(g, it);
            default: return Step::Blocked;
        }
    }

    // The ways a predicate application can unfold, each as replacement items.
    std::vector<std::vector<Item>> unfold(Goal& g, const Item& it, std::string& why) {
        const Heaplet& h = it.h;
        bool ro = it.ro || h.kind == Heaplet::Kind::RoPredApply;
        const PredicateDef* p = env.find(h.name);
        if (!p) {
            why = "no predicate named " + h.name;
            return {};
        }
        if (p->params.size() != h.args.size()) {
            why = h.name + " applied to " + std::to_string(h.args.size()) + " arguments";
            return {};
        }
        std::map<std::string, TermPtr> sub;
        std::vector<Item> prefix;
        for (size_t i = 0; i < p->params.size(); ++i) {
            const TermPtr& a = h.args[i];
            if (a->kind == Term::Kind::Var) {
                sub[p->params[i].name] = a;
            } else {
                std::string n = "#" + std::to_string(next_local++);
                sub[p->params[i].name] = t_var(n);
                Item eq;
                eq.is_pure = true;
                eq.t = t_eq(t_var(n), a);
                prefix.push_back(eq);
            }
        }
        Val root = eval_term(g.bind, h.args[0]);
        const interp::FsVal* w = (!env.use_cond && env.witness && root.kind == Val::Kind::Loc)
                                     ? env.witness->at(root.v)
                                     : nullptr;
        std::vector<std::vector<Item>> out;
        for (const auto& br : p->branches) {
            std::set<std::string> locals;
            if (br.cond) term_vars(br.cond, locals);
            for (const auto& t : br.body.pure) term_vars(t, locals);
            for (const auto& x : br.body.spatial) heaplet_vars(x, locals);
            std::map<std::string, TermPtr> full = sub;
            for (const auto& v : locals)
                if (!full.count(v)) full[v] = t_var("#" + std::to_string(next_local++));
            std::vector<Item> items = prefix;
            if (w) {
                if (br.tag != w->ctor) continue;
            } else if (br.cond && !is_true(br.cond)) {
                TermPtr c = subst(br.cond, full);
                Goal probe = g;
                bool decided = true, holds = true;
                for (const auto& pi : prefix)
                    if (pure_step(probe, pi.t) != Step::Done) decided = false;
                if (decided && bound(probe.bind, c)) {
                    try {
                        holds = eval_pure(probe.bind, c);
                    } catch (const PikaError&) {
                        holds = false;
                    }
                    if (!holds) continue;
                } else {
                    Item ci;
                    ci.is_pure = true;
                    ci.t = c;
                    items.push_back(ci);
                }
            }
            for (const auto& t : br.body.pure) {
                Item pi;
                pi.is_pure = true;
                pi.t = subst(t, full);
                items.push_back(pi);
            }
            for (const auto& x : br.body.spatial) {
                Item hi;
                hi.h = subst(x, full);
                hi.ro = ro;
                hi.depth = it.depth + 1;
                items.push_back(hi);
            }
            out.push_back(std::move(items));
        }
        if (out.empty())
            why = "no branch of " + h.name + " applies at " + root.show() + (w ? " (" + w->ctor + ")" : "");
        return out;
    }

    SatResult solve(Goal g) {
        for (;;) {
            if (g.items.empty()) {
                if (g.rem.empty()) return SatResult::ok();
                std::string cells;
                for (const auto& [l, v] : g.rem) cells += " @" + std::to_string(l);
                return SatResult::unsat("cells not described by the assertion:" + cells);
            }
            bool moved = false;
            for (size_t i = 0; i < g.items.size(); ++i) {
                Step s = simple(g, g.items[i]);
                if (s == Step::Fail) return SatResult::unsat(last_reason);
                if (s == Step::Done) {
                    g.items.erase(g.items.begin() + i);
                    moved = true;
                    break;
                }
            }
            if (moved) continue;

            for (size_t i = 0; i < g.items.size(); ++i) {
                const Item& it = g.items[i];
                if (it.is_pure) continue;
                if (it.h.kind == Heaplet::Kind::FuncApply)
                    return SatResult::unknown("func heaplets are not modelled: " + show_item(it));
                if (it.h.kind != Heaplet::Kind::PredApply && it.h.kind != Heaplet::Kind::RoPredApply) continue;
                if (it.h.args.empty() || !bound(g.bind, it.h.args[0])) continue;
                if (it.depth >= limit) return SatResult::unknown("unfolding depth " + std::to_string(limit) + " reached");
                Item cur = it;
                g.items.erase(g.items.begin() + i);
                std::string why;
                std::vector<std::vector<Item>> alts;
                try {
                    alts = unfold(g, cur, why);
                } catch (const PikaError& e) {
                    return SatResult::unsat(e.what());
                }
                if (alts.empty()) return SatResult::unsat(why);
                if (alts.size() == 1) {
                    g.items.insert(g.items.begin(), alts[0].begin(), alts[0].end());
                    moved = true;
                    break;
                }
                return branch(g, alts);
            }
            if (moved) continue;

            // a cell whose address is still unknown: try every candidate
            for (const auto& it : g.items) {
                if (it.is_pure || it.h.kind != Heaplet::Kind::PointsTo || g.bind.count(it.h.base)) continue;
                const Heap& from = (it.ro || it.h.readonly) ? global : g.rem;
                std::vector<std::vector<Item>> alts;
                std::vector<Goal> goals;
                SatResult best = SatResult::unsat("no cell fits " + show_item(it));
                for (const auto& [l, v] : from) {
                    Goal c = g;
                    c.bind[it.h.base] = Val::loc(l - it.h.offset);
                    SatResult r = solve(c);
                    if (r.sat()) return r;
                    if (r.kind == SatResult::Kind::Unknown) best = r;
                    else if (best.kind != SatResult::Kind::Unknown) best = r;
                }
                return best;
            }

            // a structure root no cell mentions (empty constructors write nothing):
            // try every location the witness knows, or null and the heap's cells
            for (const auto& it : g.items) {
                if (it.is_pure || it.h.args.empty() || it.h.args[0]->kind != Term::Kind::Var) continue;
                if (it.h.kind != Heaplet::Kind::PredApply && it.h.kind != Heaplet::Kind::RoPredApply) continue;
                const std::string& v = it.h.args[0]->name;
                if (g.bind.count(v)) continue;
                std::vector<long long> cands;
                if (env.witness && !env.use_cond) {
                    for (const auto& [l, _] : env.witness->vals) cands.push_back(l);
                } else {
                    cands.push_back(0);
                    for (const auto& [l, _] : global) cands.push_back(l);
                }
                SatResult best = SatResult::unsat("no location fits " + show_item(it));
                for (long long l : cands) {
                    Goal c = g;
                    c.bind[v] = Val::loc(l);
                    SatResult r = solve(c);
                    if (r.sat()) return r;
                    if (r.kind == SatResult::Kind::Unknown || best.kind != SatResult::Kind::Unknown) best = r;
                }
                return best;
            }

            std::string rest;
            for (const auto& it : g.items) rest += "\n    " + show_item(it);
            return SatResult::unsat("cannot resolve:" + rest);
        }
    }

    SatResult branch(const Goal& g, const std::vector<std::vector<Item>>& alts) {
        SatResult best = SatResult::unsat("no branch fits");
        for (const auto& a : alts) {
            Goal c = g;
            c.items.insert(c.items.begin(), a.begin(), a.end());
            SatResult r = solve(c);
            if (r.sat()) return r;
            if (r.kind == SatResult::Kind::Unknown || best.kind != SatResult::Kind::Unknown) best = r;
        }
        return best;
    }
};

}  // namespace

SatResult satisfies(const Model& m, const Assertion& a, const PredicateEnv& env, int depth) {
    Solver s{m.heap, env, depth, 0, ""};
    Goal g;
    g.bind = m.store;
    g.rem = m.heap;
    for (const auto& p : a.pure)
        for (const auto& c : conjuncts(p)) {
            Item it;
            it.is_pure = true;
            it.t = c;
            g.items.push_back(it);
        }
    for (const auto& h : a.spatial) {
        Item it;
        it.h = h;
        g.items.push_back(it);
    }
    return s.solve(std::move(g));
}

// ---------------------------------------------------------------- signature

const std::string& default_core_signature_text() {
    static const std::string text = R"(-- Signature the soundness suite generates expressions over.
data List := Nil | Cons Int List;
data Tree := Leaf | Node Int Tree Tree;

Sll : List >-> layout[x];
Sll (Nil) := emp;
Sll (Cons head tail) := x :-> head, (x+1) :-> tail, Sll tail;

TreeLayout : Tree >-> layout[x];
TreeLayout (Leaf) := emp;
TreeLayout (Node payload left right) :=
  x :-> payload, (x+1) :-> left, (x+2) :-> right,
  TreeLayout left, TreeLayout right;

%generate len [Sll] Int
%generate sumList [Sll] Int
%generate headOr0 [Sll] Int
%generate id [Sll] Sll
%generate mapAdd1 [Sll] Sll
%generate tail [Sll] Sll
%generate leftList [TreeLayout] Sll
%generate treeSum [TreeLayout] Int
%generate mirror [TreeLayout] TreeLayout

len : List -> Int;
len (Nil) := 0;
len (Cons h t) := 1 + instantiate [Sll] Int len t;

sumList : List -> Int;
sumList (Nil) := 0;
sumList (Cons h t) := h + instantiate [Sll] Int sumList t;

headOr0 : List -> Int;
headOr0 (Nil) := 0;
headOr0 (Cons h t) := h;

id : List -> List;
id (Nil) := lower Sll (Nil);
id (Cons h t) := lower Sll (Cons h (lower Sll t));

mapAdd1 : List -> List;
mapAdd1 (Nil) := lower Sll (Nil);
mapAdd1 (Cons h t) := lower Sll (Cons (h + 1) (instantiate [Sll] Sll mapAdd1 t));

tail : List -> List;
tail (Nil) := lower Sll (Nil);
tail (Cons h t) := lower Sll t;

leftList : Tree -> List;
leftList (Leaf) := lower Sll (Nil);
leftList (Node v l rt) := lower Sll (Cons v (instantiate [TreeLayout] Sll leftList l));

treeSum : Tree -> Int;
treeSum (Leaf) := 0;
treeSum (Node v l rt) := v + (instantiate [TreeLayout] Int treeSum l + instantiate [TreeLayout] Int treeSum rt);

mirror : Tree -> Tree;
mirror (Leaf) := lower TreeLayout (Leaf);
mirror (Node v l rt) :=
  lower TreeLayout (Node v (instantiate [TreeLayout] TreeLayout mirror rt)
                           (instantiate [TreeLayout] TreeLayout mirror l));
)";
    return text;
}

namespace {

void add_predicates(CoreSignature& sig, bool broken_add) {
    CoreEnv ce{sig.env.get(), sig.unit.get(), broken_add};
    sig.preds.preds.clear();
    for (const auto& l : sig.unit->layout_defs) sig.preds.add(translate_layout_predicate(l));
    for (const auto& f : sig.fns)
        sig.preds.add(translate_fn_core(ce, *sig.unit->def(f.name), f.arg, f.res));
}

}  // namespace

CoreSignature load_core_signature(const std::string& text) {
    CoreSignature sig;
    sig.unit = std::make_shared<SourceUnit>(parse_program_text(text));
    elaborate(*sig.unit);  // type checks every definition and directive
    sig.env = std::make_shared<GlobalEnv>(build_global_env(*sig.unit));
    for (const auto& d : sig.unit->directives) {
        if (d.args.size() != 1)
            throw PikaError("UnsupportedConstruct", "", d.fn + " takes more than one argument", d.span);
        sig.fns.push_back({d.fn, d.args[0], d.result});
    }
    add_predicates(sig, false);
    return sig;
}

const CoreSignature& default_core_signature() {
    static const CoreSignature sig = load_core_signature(default_core_signature_text());
    return sig;
}

// ---------------------------------------------------------------- soundness

SoundnessReport check_soundness(const CoreSignature& sig, const ExprPtr& e, int depth, bool broken_add) {
    SoundnessReport rep;
    rep.expr = print_expr(e);
    std::ostringstream tr;
    tr << "expression: " << rep.expr << "\n";
    std::string why;
    if (!is_core_expr(e, &why)) {
        rep.result = SatResult::unsat("UnsupportedConstruct: " + why);
        tr << rep.result.reason << "\n";
        rep.trace = tr.str();
        return rep;
    }
    try {
        interp::Program prog{sig.env.get(), sig.unit.get()};
        interp::Outcome o = interp::eval(prog, e);
        Model m{o.state.store, o.state.heap};
        std::set<std::string> V;
        for (const auto& [k, _] : m.store) V.insert(k);
        CoreEnv ce{sig.env.get(), sig.unit.get(), broken_add};
        CoreResult t = translate_expr_core(ce, e, V, o.var);
        CoreSignature local = sig;
        if (broken_add) add_predicates(local, true);
        local.preds.witness = &o.state.fs;
        local.preds.use_cond = false;
        tr << "value: " << o.value.show() << " in " << o.var << "\n" << m.show();
        tr << "translation: " << emit_assertion(t.assertion(), Style::Minimal) << "\n";
        rep.result = satisfies(m, t.assertion(), local.preds, depth);
    } catch (const PikaError& err) {
        rep.result = SatResult::unsat(err.what());
    }
    tr << "verdict: " << show(rep.result.kind);
    if (!rep.result.reason.empty()) tr << " (" << rep.result.reason << ")";
    tr << "\n";
    rep.trace = tr.str();
    return rep;
}

// ---------------------------------------------------------------- generator

int expr_size(const ExprPtr& e) {
    if (!e) return 0;
    int n = 1;
    for (const auto& a : e->args) n += expr_size(a);
    return n;
}

namespace {

struct Gen {
    const CoreSignature& sig;
    std::mt19937_64 rng;

    int pick(int n) { return static_cast<int>(rng() % static_cast<std::uint64_t>(n)); }

    LayoutRef ref(const std::string& n) {
        LayoutRef r;
        r.name = n;
        return r;
    }

    // Layouts of the fields of `ctor` in layout l ("Int" for payloads).
    std::vector<std::string> field_layouts(const LayoutDef& l, const std::string& ctor) {
        const LayoutBranch* br = l.branch_for(ctor);
        const CtorInfo* ci = sig.env->ctor(ctor);
        std::vector<std::string> out;
        for (size_t i = 0; i < ci->fields.size(); ++i) {
            std::string lay = "Int";
            for (const auto& h : br->body)
                if (h.kind == LayoutHeaplet::Kind::Apply && h.arg == br->pat.vars[i]) lay = h.layout;
            out.push_back(lay);
        }
        return out;
    }

    int min_cost(const std::string& ty) { return ty == "Int" ? 1 : 2; }

    // Constructor application of layout l in at most `budget` nodes (the ctor node included).
    ExprPtr ctor(const std::string& lay, int budget) {
        const LayoutDef& l = *sig.env->layout(lay);
        std::vector<std::pair<std::string, std::vector<std::string>>> fits;
        for (const auto& b : l.branches) {
            auto fl = field_layouts(l, b.pat.name);
            int need = 1;
            for (const auto& f : fl) need += min_cost(f);
            if (need <= budget) fits.push_back({b.pat.name, fl});
        }
        // lean towards constructors with fields so the budget gets used
        size_t k = fits.size() - 1;
        if (fits.size() > 1 && pick(4) == 0) k = pick(static_cast<int>(fits.size()));
        std::sort(fits.begin(), fits.end(), [](const auto& a, const auto& b) { return a.second.size() < b.second.size(); });
        auto& [name, fl] = fits[k];
        int extra = budget - 1;
        for (const auto& f : fl) extra -= min_cost(f);
        std::vector<ExprPtr> args;
        for (size_t i = 0; i < fl.size(); ++i) {
            int take = i + 1 == fl.size() ? extra : pick(extra + 1);
            extra -= take;
            args.push_back(gen(fl[i], min_cost(fl[i]) + take));
        }
        return mk_ctor(name, args);
    }

    ExprPtr inst(const CoreSignature::Fn& f, int budget) {
        ExprPtr arg;
        if (pick(3) == 0)
            arg = ctor(f.arg.name, budget - 1);
        else
            arg = gen(f.arg.name, budget - 1);
        return mk_inst({f.arg}, f.res, f.name, {arg});
    }

    ExprPtr gen(const std::string& ty, int budget) {
        std::vector<const CoreSignature::Fn*> fns;
        for (const auto& f : sig.fns)
            if (f.res.name == ty && budget >= 1 + min_cost(f.arg.name)) fns.push_back(&f);
        if (ty == "Int") {
            if (budget < 3 || pick(4) == 0) return mk_int(pick(10));
            int choice = pick(fns.empty() ? 1 : 2);
            if (choice == 0) {
                int left = 1 + pick(budget - 2);
                return mk_binop("+", gen("Int", left), gen("Int", budget - 1 - left));
            }
            return inst(*fns[pick(static_cast<int>(fns.size()))], budget);
        }
        if (budget < 3 || fns.empty() || pick(2) == 0) return mk_lower(ref(ty), ctor(ty, budget - 1));
        return inst(*fns[pick(static_cast<int>(fns.size()))], budget);
    }
};

}  // namespace

ExprPtr gen_core_expr(const CoreSignature& sig, std::uint64_t seed, int budget) {
    if (budget < 1) budget = 1;
    Gen g{sig, std::mt19937_64(seed)};
    std::vector<std::string> tys = {"Int"};
    if (budget >= 2)
        for (const auto& l : sig.unit->layout_defs) tys.push_back(l.name);
    ExprPtr e = g.gen(tys[g.pick(static_cast<int>(tys.size()))], budget);
    infer_expr(*sig.env, {}, e);
    return e;
}

// ---------------------------------------------------------------- separating conjunction

bool check_otimes(const Model& a, const Model& b, const Assertion& pa, const Assertion& pb, const PredicateEnv& env) {
    for (const auto& [k, v] : a.store) {
        auto it = b.store.find(k);
        if (it == b.store.end() || it->second != v)
            throw PikaError("PreconditionViolated", "", "store of the first model is not contained in the second (" + k + ")");
    }
    for (const auto& [l, _] : a.heap)
        if (b.heap.count(l))
            throw PikaError("PreconditionViolated", "", "heaps overlap at @" + std::to_string(l));
    if (!satisfies(a, pa, env).sat())
        throw PikaError("PreconditionViolated", "", "first model does not satisfy " + emit_assertion(pa));
    if (!satisfies(b, pb, env).sat())
        throw PikaError("PreconditionViolated", "", "second model does not satisfy " + emit_assertion(pb));
    Model c{b.store, a.heap};
    for (const auto& [l, v] : b.heap) c.heap[l] = v;
    return satisfies(c, conj_otimes(pa, pb), env).sat();
}

namespace {

// A random model and an assertion it satisfies, heap cells in [lo, lo + span).
struct Side {
    Model m;
    Assertion p;
};

Side random_side(std::mt19937_64& rng, const std::string& tag, long long lo, const Store& inherited) {
    auto pick = [&](int n) { return static_cast<int>(rng() % static_cast<std::uint64_t>(n)); };
    Side s;
    s.m.store = inherited;
    int vars = 0, exists = 0;
    auto var = [&](Val v) {
        std::string n = tag + std::to_string(vars++);
        s.m.store[n] = v;
        return n;
    };
    auto ex = [&]() { return "e" + tag + std::to_string(exists++); };
    long long next = lo;
    int pieces = 1 + pick(4);
    for (int i = 0; i < pieces; ++i) {
        switch (pick(4)) {
            case 0: {  // pure fact about a store variable
                long long k = pick(7) - 3;
                std::string x = var(Val::int_(k));
                if (pick(2))
                    s.p.pure.push_back(t_eq(t_var(x), t_int(k)));
                else
                    s.p.pure.push_back(t_bin(Term::Kind::Lt, t_var(x), t_int(k + 1 + pick(3))));
                break;
            }
            case 1: {  // one cell, value known or existential
                long long val = pick(5);
                s.m.heap[next] = Val::int_(val);
                std::string x = var(Val::loc(next));
                ++next;
                if (pick(2)) {
                    s.p.spatial.push_back(h_pts(x, 0, t_int(val)));
                } else {
                    std::string e = ex();
                    s.p.spatial.push_back(h_pts(x, 0, t_var(e)));
                    s.p.pure.push_back(t_bin(Term::Kind::Lt, t_var(e), t_int(val + 1)));
                }
                break;
            }
            case 2: {  // two cells off one base
                std::string x = var(Val::loc(next));
                s.m.heap[next] = Val::int_(pick(5));
                s.m.heap[next + 1] = Val::int_(pick(5));
                std::string e1 = ex(), e2 = ex();
                s.p.spatial.push_back(h_pts(x, 0, t_var(e1)));
                s.p.spatial.push_back(h_pts(x, 1, t_var(e2)));
                s.p.pure.push_back(t_eq(t_bin(Term::Kind::Add, t_var(e1), t_var(e2)),
                                        t_int(s.m.heap[next].v + s.m.heap[next + 1].v)));
                next += 2;
                break;
            }
            default: {  // null-terminated Sll list
                int len = pick(4);
                long long head = 0;
                std::vector<long long> cells;
                for (int j = 0; j < len; ++j) {
                    cells.push_back(next);
                    next += 2;
                }
                for (int j = len - 1; j >= 0; --j) {
                    s.m.heap[cells[j]] = Val::int_(pick(3));
                    s.m.heap[cells[j] + 1] = Val::loc(head);
                    head = cells[j];
                }
                std::string x = var(Val::loc(head));
                s.p.spatial.push_back(h_pred("Sll", {t_var(x)}));
                break;
            }
        }
    }
    if (s.p.spatial.empty()) s.p.spatial.push_back(h_emp());
    return s;
}

}  // namespace

OtimesReport run_otimes_suite(std::uint64_t seed, int count) {
    OtimesReport rep;
    PredicateEnv env;
    env.use_cond = true;
    for (const auto& l : default_core_signature().unit->layout_defs) env.add(translate_layout_predicate(l));
    for (int i = 0; i < count; ++i) {
        std::mt19937_64 rng(seed * 1000003ULL + static_cast<std::uint64_t>(i));
        Side a = random_side(rng, "a", 1, {});
        long long lo = 1000;
        Side b = random_side(rng, "b", lo, a.m.store);
        ++rep.pairs;
        try {
            if (!check_otimes(a.m, b.m, a.p, b.p, env)) {
                rep.violations.push_back("pair " + std::to_string(i) + ": " + emit_assertion(a.p) + " (x) " +
                                         emit_assertion(b.p));
            }
        } catch (const PikaError& e) {
            rep.violations.push_back("pair " + std::to_string(i) + ": " + e.what());
        }
    }
    return rep;
}

// ---------------------------------------------------------------- cond oracle

namespace {

struct Shape {
    std::string layout;
    std::string ctor;
    std::vector<long long> ints;             // payload per field (unused for structures)
    std::vector<std::shared_ptr<Shape>> subs;  // structure per field (null for payloads)
};

std::vector<std::shared_ptr<Shape>> shapes(const GlobalEnv& g, const std::string& lay, int depth,
                                           const std::vector<long long>& payloads) {
    std::vector<std::shared_ptr<Shape>> out;
    if (depth < 1) return out;
    const LayoutDef* l = g.layout(lay);
    for (const auto& b : l->branches) {
        const CtorInfo* ci = g.ctor(b.pat.name);
        std::vector<std::vector<std::pair<long long, std::shared_ptr<Shape>>>> choices;
        bool ok = true;
        for (size_t i = 0; i < ci->fields.size(); ++i) {
            std::string sub;
            for (const auto& h : b.body)
                if (h.kind == LayoutHeaplet::Kind::Apply && h.arg == b.pat.vars[i]) sub = h.layout;
            std::vector<std::pair<long long, std::shared_ptr<Shape>>> opts;
            if (sub.empty()) {
                for (long long p : payloads) opts.push_back({p, nullptr});
            } else {
                for (auto& s : shapes(g, sub, depth - 1, payloads)) opts.push_back({0, s});
            }
            if (opts.empty()) ok = false;
            choices.push_back(opts);
        }
        if (!ok) continue;
        std::vector<size_t> idx(choices.size(), 0);
        for (;;) {
            auto s = std::make_shared<Shape>();
            s->layout = lay;
            s->ctor = b.pat.name;
            for (size_t i = 0; i < choices.size(); ++i) {
                s->ints.push_back(choices[i][idx[i]].first);
                s->subs.push_back(choices[i][idx[i]].second);
            }
            out.push_back(s);
            size_t k = 0;
            while (k < idx.size() && ++idx[k] == choices[k].size()) idx[k++] = 0;
            if (k == idx.size()) break;
        }
    }
    return out;
}

// Null-encoded layout of a shape; returns the root location.
long long lay_out(const GlobalEnv& g, const Shape& s, Heap& h, long long& next) {
    const LayoutDef* l = g.layout(s.layout);
    const LayoutBranch* b = l->branch_for(s.ctor);
    if (b->is_emp()) return 0;
    std::map<std::string, Val> env;
    for (size_t i = 0; i < s.subs.size(); ++i)
        env[b->pat.vars[i]] = s.subs[i] ? Val::loc(lay_out(g, *s.subs[i], h, next)) : Val::int_(s.ints[i]);
    int span = 1;
    for (const auto& x : b->body)
        if (x.kind == LayoutHeaplet::Kind::PointsTo) span = std::max(span, x.offset + 1);
    long long at = next;
    next += span;
    for (const auto& x : b->body)
        if (x.kind == LayoutHeaplet::Kind::PointsTo) h[at + x.offset] = env.at(x.payload);
    return at;
}

}  // namespace

CondOracleReport run_cond_oracle(const GlobalEnv& g, const LayoutDef& l, int max_depth,
                                 const std::vector<long long>& payloads) {
    CondOracleReport rep;
    PredicateEnv env;
    env.use_cond = true;
    for (const auto& [_, d] : g.layouts) env.add(translate_layout_predicate(*d));
    const std::string x = l.params.at(0);
    for (const auto& s : shapes(g, l.name, max_depth, payloads)) {
        Model m;
        long long next = 1;
        long long root = lay_out(g, *s, m.heap, next);
        m.store[x] = Val::loc(root);
        ++rep.heaps;
        for (const auto& b : l.branches) {
            bool want = b.pat.name == s->ctor;
            bool got = eval_pure(m.store, cond(l, b.pat.name, x));
            ++rep.checks;
            if (got != want)
                rep.violations.push_back(l.name + ": cond for " + b.pat.name + " is " + (got ? "true" : "false") +
                                         " on a " + s->ctor + " heap rooted at @" + std::to_string(root));
        }
        SatResult r = satisfies(m, {{}, {h_pred(l.name, {t_var(x)})}}, env);
        ++rep.checks;
        if (!r.sat())
            rep.violations.push_back(l.name + ": " + s->ctor + " heap does not satisfy " + l.name + "(" + x +
                                     "): " + r.reason);
    }
    return rep;
}

}  // namespace pika::mc
