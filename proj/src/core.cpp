#include "pika/diag.hpp"
#include "pika/translate.hpp"

namespace pika {

using namespace ssl;

namespace {

using K = Expr::Kind;

[[noreturn]] void unsupported(const ExprPtr& e, const std::string& why) {
    throw PikaError("UnsupportedConstruct", "", why + ": `" + print_expr(e) + "`", e->span);
}

struct CoreT {
    const CoreEnv& env;
    std::set<std::string> used;
    std::vector<TermPtr> pure;
    std::vector<Heaplet> heap;
    long long k = 0;

    std::string fresh() {
        for (;;) {
            std::string n = "v" + std::to_string(k++);
            if (used.insert(n).second) return n;
        }
    }
    std::string dest(const std::string& want) { return want.empty() ? fresh() : want; }

    const LayoutDef& layout(const LayoutRef& l, const ExprPtr& at) {
        const LayoutDef* d = env.g->layout(l.name);
        if (!d) unsupported(at, "unknown layout " + l.name);
        return *d;
    }

    // Cells of the constructor's branch at x, fields named by `vals`; nested
    // layout applications become read-only predicate applications.
    void cells(const LayoutDef& l, const std::string& ctor, const std::string& x,
               const std::vector<std::string>& vals, bool readonly, const ExprPtr& at) {
        const LayoutBranch* br = l.branch_for(ctor);
        if (!br) unsupported(at, "layout " + l.name + " has no branch for " + ctor);
        std::map<std::string, std::string> env_;
        for (size_t i = 0; i < br->pat.vars.size() && i < vals.size(); ++i) env_[br->pat.vars[i]] = vals[i];
        if (!l.params.empty()) env_[l.params[0]] = x;
        auto name = [&](const std::string& v) {
            auto it = env_.find(v);
            return it == env_.end() ? v : it->second;
        };
        for (const auto& h : br->body) {
            if (h.kind == LayoutHeaplet::Kind::PointsTo)
                heap.push_back(h_pts(name(h.base), h.offset, t_var(name(h.payload)), readonly));
            else if (h.kind == LayoutHeaplet::Kind::Apply && !readonly)
                heap.push_back(h_ro(h.layout, {t_var(name(h.arg))}));
        }
    }

    std::string var(const std::string& v, const std::string& want) {
        if (want.empty() || want == v) return v;
        pure.push_back(t_eq(t_var(want), t_var(v)));
        return want;
    }

    ExprPtr lowered_body(const ExprPtr& body, const LayoutRef& b) {
        if (!b.is_base() && body->kind == K::Ctor) return mk_lower(b, body, body->span);
        return body;
    }

    std::string go(const ExprPtr& e, const std::string& want) {
        switch (e->kind) {
            case K::Int: {
                std::string d = dest(want);
                pure.push_back(t_eq(t_var(d), t_int(e->ival)));
                return d;
            }
            case K::Bool: {
                std::string d = dest(want);
                pure.push_back(t_eq(t_var(d), t_bool(e->bval)));
                return d;
            }
            case K::Var: return var(e->name, want);
            case K::BinOp: {
                if (e->name != "+") unsupported(e, "only + is in the core");
                std::string a = go(e->args[0], "");
                std::string b = go(e->args[1], "");
                std::string d = dest(want);
                TermPtr sum = t_bin(Term::Kind::Add, t_var(a), t_var(b));
                if (env.broken_add) sum = t_bin(Term::Kind::Add, sum, t_int(1));
                pure.push_back(t_eq(t_var(d), sum));
                return d;
            }
            case K::Lower: {
                const ExprPtr& inner = e->args[0];
                if (inner->kind == K::Var) {
                    heap.push_back(h_ro(e->layout.name, {t_var(inner->name)}));
                    return var(inner->name, want);
                }
                if (inner->kind == K::Ctor) {
                    std::vector<std::string> vals;
                    for (const auto& a : inner->args) vals.push_back(go(a, ""));
                    std::string x = dest(want);
                    cells(layout(e->layout, e), inner->name, x, vals, false, e);
                    return x;
                }
                return go(inner, want);
            }
            case K::Instantiate: {
                if (e->args.size() != 1 || e->arg_layouts.size() != 1)
                    unsupported(e, "only single-argument functions are in the core");
                const ExprPtr& arg = e->args[0];
                std::string pred = core_pred_name(e->name, e->arg_layouts[0], e->layout);
                if (arg->kind == K::Ctor) {
                    // inline the matching case on the freshly built argument
                    const FnDef* def = env.unit->def(e->name);
                    if (!def) unsupported(e, "no definition for " + e->name);
                    std::vector<std::string> vals;
                    for (const auto& a : arg->args) vals.push_back(go(a, ""));
                    std::string x = fresh();
                    cells(layout(e->arg_layouts[0], e), arg->name, x, vals, false, e);
                    for (const auto& c : def->cases) {
                        if (c.pats.size() != 1 || c.bodies.size() != 1 || c.bodies[0].guard) continue;
                        const Pattern& p = c.pats[0];
                        std::map<std::string, std::string> ren;
                        if (p.is_ctor) {
                            if (p.name != arg->name) continue;
                            for (size_t i = 0; i < p.vars.size() && i < vals.size(); ++i) ren[p.vars[i]] = vals[i];
                        } else {
                            ren[p.name] = x;
                        }
                        return go(lowered_body(rename_vars(c.bodies[0].body, ren), e->layout), want);
                    }
                    throw PikaError("NoMatchingFnCase", "S-INST-CONSTR", e->name + " has no case for " + arg->name,
                                    e->span);
                }
                std::string a;
                if (arg->kind == K::Var)
                    a = arg->name;
                else if (arg->kind == K::Lower && arg->args[0]->kind == K::Var)
                    a = arg->args[0]->name;
                else
                    a = go(arg, "");
                std::string d = dest(want);
                heap.push_back(h_pred(pred, {t_var(a), t_var(d)}));
                return d;
            }
            default: unsupported(e, "outside the core subset");
        }
    }
};

}  // namespace

std::string core_pred_name(const std::string& f, const LayoutRef& a, const LayoutRef& b) {
    return mangle(f, {a}, b);
}

CoreResult translate_expr_core(const CoreEnv& env, const ExprPtr& e, const std::set<std::string>& V,
                               const std::string& want) {
    CoreT t{env, V, {}, {}};
    std::string r = t.go(e, want);
    return {t.pure, t.heap, t.used, r};
}

Branch translate_fn_def_core(const CoreEnv& env, const FnCase& c, const LayoutRef& a, const LayoutRef& b) {
    if (c.pats.size() != 1 || !c.pats[0].is_ctor || c.bodies.size() != 1 || c.bodies[0].guard)
        throw PikaError("UnsupportedConstruct", "FNDEF",
                        "core functions take one constructor pattern and have no guards", c.span);
    const LayoutDef* l = env.g->layout(a.name);
    if (!l) throw PikaError("UnknownLayout", "FNDEF", "no layout named " + a.name, c.span);
    const Pattern& p = c.pats[0];
    CoreT t{env, {"x", "r"}, {}, {}};
    std::vector<std::string> vals;
    std::map<std::string, std::string> ren;
    for (const auto& v : p.vars) {
        vals.push_back(t.fresh());
        ren[v] = vals.back();
    }
    t.cells(*l, p.name, "x", vals, true, c.bodies[0].body);
    t.go(t.lowered_body(rename_vars(c.bodies[0].body, ren), b), "r");
    Branch br;
    br.cond = cond(*l, p.name, "x");
    br.body = {t.pure, t.heap};
    br.tag = p.name;
    return br;
}

PredicateDef translate_fn_core(const CoreEnv& env, const FnDef& f, const LayoutRef& a, const LayoutRef& b) {
    PredicateDef p;
    p.name = core_pred_name(f.name, a, b);
    p.inductive = true;
    p.params = {{"loc", "x"}, {b.is_base() ? (b.name == "Bool" ? "bool" : "int") : "loc", "r"}};
    for (const auto& c : f.cases) p.branches.push_back(translate_fn_def_core(env, c, a, b));
    return p;
}

bool is_core_expr(const ExprPtr& e, std::string* why) {
    auto no = [&](const std::string& w) {
        if (why) *why = w + ": `" + print_expr(e) + "`";
        return false;
    };
    switch (e->kind) {
        case K::Int:
        case K::Bool:
        case K::Var: return true;
        case K::BinOp:
            if (e->name != "+") return no("only + is in the core");
            return is_core_expr(e->args[0], why) && is_core_expr(e->args[1], why);
        case K::Lower:
            if (e->args[0]->kind == K::Ctor) {
                for (const auto& a : e->args[0]->args)
                    if (!is_core_expr(a, why)) return false;
                return true;
            }
            return is_core_expr(e->args[0], why);
        case K::Instantiate:
            if (e->args.size() != 1) return no("only single-argument functions are in the core");
            if (e->args[0]->kind == K::Ctor) {
                for (const auto& a : e->args[0]->args)
                    if (!is_core_expr(a, why)) return false;
                return true;
            }
            return is_core_expr(e->args[0], why);
        case K::Let: return no("let is outside the core");
        case K::If: return no("if-then-else is outside the core");
        case K::Not: return no("not is outside the core");
        case K::App: return no("calls must be written with instantiate in the core");
        case K::Ctor: return no("constructors must be lowered in the core");
        default: return no("outside the core subset");
    }
}

}  // namespace pika
