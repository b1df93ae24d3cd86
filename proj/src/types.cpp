#include "pika/types.hpp"

#include <algorithm>
#include <set>

namespace pika {

const CtorInfo* GlobalEnv::ctor(const std::string& n) const {
    auto it = ctors.find(n);
    return it == ctors.end() ? nullptr : &it->second;
}
const LayoutDef* GlobalEnv::layout(const std::string& n) const {
    auto it = layouts.find(n);
    return it == layouts.end() ? nullptr : it->second;
}
const TypeExpr* GlobalEnv::fn(const std::string& n) const {
    auto it = fns.find(n);
    return it == fns.end() ? nullptr : &it->second;
}

namespace {

[[noreturn]] void fail(const std::string& kind, const std::string& rule, const std::string& msg, Span s) {
    throw PikaError(kind, rule, msg, s);
}

TypeExpr base_of_layout(const LayoutRef& l) {
    if (l.name == "Int") return TypeExpr::int_();
    if (l.name == "Bool") return TypeExpr::bool_();
    return TypeExpr::ptr_int();
}

void check_type_names(const GlobalEnv& g, const TypeExpr& t, Span s) {
    if (t.kind == TypeExpr::Kind::Adt && !g.adts.count(t.name))
        fail("UnknownType", "", "unknown type '" + t.name + "'", s);
    for (const auto& p : t.parts) check_type_names(g, p, s);
}

std::string adt_of(const GlobalEnv& g, const TypeExpr& t) {
    if (t.kind == TypeExpr::Kind::Adt) return t.name;
    if (t.kind == TypeExpr::Kind::Layout) {
        const LayoutDef* l = g.layout(t.name);
        return l ? l->adt : "";
    }
    return "";
}

}  // namespace

GlobalEnv build_global_env(const SourceUnit& u) {
    GlobalEnv g;
    for (const auto& d : u.data_defs) {
        if (g.adts.count(d.name)) fail("DuplicateName", "G-DATA", "data type '" + d.name + "' defined twice", d.span);
        g.adts[d.name] = &d;
        for (const auto& a : d.alts) {
            if (g.ctors.count(a.ctor))
                fail("DuplicateName", "G-DATA", "constructor '" + a.ctor + "' defined twice", d.span);
            g.ctors[a.ctor] = CtorInfo{a.ctor, d.name, a.fields};
        }
    }
    for (const auto& d : u.data_defs)
        for (const auto& a : d.alts)
            for (const auto& f : a.fields) check_type_names(g, f, d.span);

    for (const auto& l : u.layout_defs) {
        if (g.layouts.count(l.name) || g.adts.count(l.name))
            fail("DuplicateName", "G-LAYOUT", "layout '" + l.name + "' defined twice", l.span);
        if (!g.adts.count(l.adt))
            fail("UnknownAdtInLayout", "G-LAYOUT", "layout '" + l.name + "' names undeclared data type '" + l.adt + "'",
                 l.span);
        g.layouts[l.name] = &l;
    }
    for (const auto& l : u.layout_defs) {
        std::set<std::string> seen;
        for (const auto& b : l.branches) {
            const CtorInfo* c = g.ctor(b.pat.name);
            if (!c || c->adt != l.adt)
                fail("LayoutAdtMismatch", "G-LAYOUT",
                     "layout '" + l.name + "' has a branch for '" + b.pat.name + "', which is not a constructor of '" +
                         l.adt + "'",
                     b.pat.span);
            if (!seen.insert(b.pat.name).second)
                fail("DuplicateName", "G-LAYOUT", "layout '" + l.name + "' has two branches for '" + b.pat.name + "'",
                     b.pat.span);
            if (b.pat.vars.size() != c->fields.size())
                fail("ConstructorArity", "G-LAYOUT",
                     "'" + c->name + "' takes " + std::to_string(c->fields.size()) + " fields, pattern binds " +
                         std::to_string(b.pat.vars.size()),
                     b.pat.span);
            std::map<std::string, TypeExpr> vars;
            for (size_t i = 0; i < b.pat.vars.size(); ++i) {
                if (vars.count(b.pat.vars[i]))
                    fail("DuplicateName", "G-LAYOUT", "pattern variable '" + b.pat.vars[i] + "' bound twice",
                         b.pat.span);
                vars[b.pat.vars[i]] = c->fields[i];
            }
            for (const auto& h : b.body) {
                if (h.kind == LayoutHeaplet::Kind::PointsTo) {
                    if (std::find(l.params.begin(), l.params.end(), h.base) == l.params.end())
                        fail("UnboundVariable", "G-LAYOUT", "'" + h.base + "' is not a parameter of layout '" + l.name + "'",
                             b.pat.span);
                    if (!vars.count(h.payload))
                        fail("UnboundVariable", "G-LAYOUT", "'" + h.payload + "' is not bound by the pattern",
                             b.pat.span);
                } else if (h.kind == LayoutHeaplet::Kind::Apply) {
                    auto v = vars.find(h.arg);
                    if (v == vars.end())
                        fail("UnboundVariable", "G-LAYOUT", "'" + h.arg + "' is not bound by the pattern", b.pat.span);
                    const LayoutDef* inner = g.layout(h.layout);
                    if (!inner) fail("UnknownLayout", "G-LAYOUT", "unknown layout '" + h.layout + "'", b.pat.span);
                    if (v->second.kind != TypeExpr::Kind::Adt || v->second.name != inner->adt)
                        fail("LayoutAdtMismatch", "G-LAYOUT",
                             "layout '" + h.layout + "' applied to field '" + h.arg + "' of type " +
                                 show_type(v->second),
                             b.pat.span);
                }
            }
        }
    }

    for (const auto& s : u.fn_sigs) {
        if (g.fns.count(s.name) || g.ctors.count(s.name))
            fail("DuplicateName", "G-FN", "function '" + s.name + "' declared twice", s.span);
        check_type_names(g, s.type, s.span);
        g.fns[s.name] = s.type;
    }
    for (const auto& d : u.fn_defs)
        if (!g.fns.count(d.name))
            fail("MissingSignature", "G-FN", "function '" + d.name + "' has no type signature",
                 d.cases.empty() ? Span{} : d.cases[0].span);
    for (const auto& d : u.directives)
        if (!u.def(d.fn))
            fail("UnknownFunction", "G-GENERATE", "%generate names '" + d.fn + "', which has no definition", d.span);
    return g;
}

bool compatible(const GlobalEnv& g, const TypeExpr& expected, const TypeExpr& found) {
    using K = TypeExpr::Kind;
    if (expected == found) return true;
    auto intlike = [](const TypeExpr& t) { return t.kind == K::Int || t.kind == K::PtrInt; };
    if (intlike(expected) && intlike(found)) return true;
    if (expected.kind == K::Adt && found.kind == K::Layout) return adt_of(g, found) == expected.name;
    if (expected.kind == K::Layout && found.kind == K::Adt) return adt_of(g, expected) == found.name;
    if (expected.kind == K::Fn && found.kind == K::Fn && expected.parts.size() == found.parts.size()) {
        for (size_t i = 0; i < expected.parts.size(); ++i)
            if (!compatible(g, expected.parts[i], found.parts[i])) return false;
        return true;
    }
    return false;
}

namespace {

TypeExpr record(const ExprPtr& e, TypeExpr t) {
    e->ty = t;
    e->typed = true;
    return t;
}

const TypeExpr* lookup_fn(const TypeCtx& ctx, const std::string& n) {
    auto it = ctx.locals.find(n);
    if (it != ctx.locals.end()) return it->second.kind == TypeExpr::Kind::Fn ? &it->second : nullptr;
    return ctx.g->fn(n);
}

void expect_type(const TypeCtx& ctx, const TypeExpr& want, const TypeExpr& got, const std::string& rule,
                 const std::string& what, Span s) {
    if (!compatible(*ctx.g, want, got))
        fail("TypeMismatch", rule, what + ": expected " + show_type(want) + ", found " + show_type(got), s);
}

void check_layout_arg(const TypeCtx& ctx, const LayoutRef& l, const TypeExpr& param, const std::string& rule, Span s) {
    const GlobalEnv& g = *ctx.g;
    if (l.is_fn()) {
        if (param.kind != TypeExpr::Kind::Fn || param.parts.size() != l.fn.size())
            fail("LayoutAdtMismatch", rule, "function layout used for parameter of type " + show_type(param), s);
        for (size_t i = 0; i < l.fn.size(); ++i) check_layout_arg(ctx, l.fn[i], param.parts[i], rule, s);
        return;
    }
    if (l.is_base()) {
        if (!compatible(g, base_of_layout(l), param))
            fail("LayoutAdtMismatch", rule, "layout " + l.name + " used for type " + show_type(param), s);
        return;
    }
    const LayoutDef* ld = g.layout(l.name);
    if (!ld) fail("UnknownLayout", rule, "unknown layout '" + l.name + "'", s);
    if (param.kind != TypeExpr::Kind::Adt || param.name != ld->adt)
        fail("LayoutAdtMismatch", rule,
             "layout '" + l.name + "' is for '" + ld->adt + "' but the type here is " + show_type(param), s);
}

TypeExpr layout_type(const LayoutRef& l) {
    if (l.is_base()) return base_of_layout(l);
    return TypeExpr::layout(l.name);
}

}  // namespace

bool check_concrete(const TypeCtx& ctx, const ExprPtr& e, const TypeExpr& adt) {
    TypeExpr t = infer_expr(ctx, e);
    using K = TypeExpr::Kind;
    switch (adt.kind) {
        case K::Int: return t.kind == K::Int || t.kind == K::PtrInt;
        case K::Bool: return t.kind == K::Bool;
        case K::PtrInt: return t.kind == K::PtrInt || t.kind == K::Int;
        case K::Adt:
            if (t.kind == K::Layout) return adt_of(*ctx.g, t) == adt.name;
            return !ctx.strict && t.kind == K::Adt && t.name == adt.name;
        case K::Layout: return t == adt;
        case K::Fn: return false;
    }
    return false;
}

TypeExpr infer_expr(const GlobalEnv& g, const LocalEnv& l, const ExprPtr& e) {
    TypeCtx ctx;
    ctx.g = &g;
    ctx.locals = l;
    return infer_expr(ctx, e);
}

TypeExpr infer_expr(const TypeCtx& ctx, const ExprPtr& e) {
    using K = Expr::Kind;
    const GlobalEnv& g = *ctx.g;
    switch (e->kind) {
        case K::Int: return record(e, TypeExpr::int_());
        case K::Bool: return record(e, TypeExpr::bool_());
        case K::Null:
            if (e->typed) return e->ty;
            fail("TypeMismatch", "T-VAR", "null location outside elaborated code", e->span);
        case K::Var: {
            auto it = ctx.locals.find(e->name);
            if (it != ctx.locals.end()) return record(e, it->second);
            if (const TypeExpr* f = g.fn(e->name)) return record(e, *f);
            if (g.ctor(e->name)) return record(e, TypeExpr::adt(g.ctor(e->name)->adt));
            fail("UnboundVariable", "T-VAR", "'" + e->name + "' is not in scope", e->span);
        }
        case K::Addr: {
            auto it = ctx.locals.find(e->name);
            if (it == ctx.locals.end()) fail("UnboundVariable", "T-VAR", "'" + e->name + "' is not in scope", e->span);
            if (it->second.kind != TypeExpr::Kind::Int)
                fail("TypeMismatch", "T-ADDR", "addr needs an Int variable, '" + e->name + "' has type " +
                                                   show_type(it->second),
                     e->span);
            return record(e, TypeExpr::ptr_int());
        }
        case K::BinOp: {
            const std::string& op = e->name;
            TypeExpr a = infer_expr(ctx, e->args[0]);
            TypeExpr b = infer_expr(ctx, e->args[1]);
            if (op == "+" || op == "-" || op == "%") {
                std::string rule = op == "+" ? "T-ADD" : op == "-" ? "T-SUB" : "T-MOD";
                if (a.kind != TypeExpr::Kind::Int) expect_type(ctx, TypeExpr::int_(), a, rule, "left operand of " + op, e->args[0]->span);
                if (b.kind != TypeExpr::Kind::Int) expect_type(ctx, TypeExpr::int_(), b, rule, "right operand of " + op, e->args[1]->span);
                if (a.kind != TypeExpr::Kind::Int || b.kind != TypeExpr::Kind::Int)
                    fail("TypeMismatch", rule, "operands of " + op + " must be Int", e->span);
                return record(e, TypeExpr::int_());
            }
            if (op == "<") {
                if (a.kind != TypeExpr::Kind::Int || b.kind != TypeExpr::Kind::Int)
                    fail("TypeMismatch", "T-CMP", "operands of < must be Int, found " + show_type(a) + " and " + show_type(b),
                         e->span);
                return record(e, TypeExpr::bool_());
            }
            if (op == "==") {
                bool ok = (a.is_base() && b.is_base() && compatible(g, a, b));
                if (!ok)
                    fail("TypeMismatch", "T-CMP", "cannot compare " + show_type(a) + " with " + show_type(b), e->span);
                return record(e, TypeExpr::bool_());
            }
            if (a.kind != TypeExpr::Kind::Bool || b.kind != TypeExpr::Kind::Bool)
                fail("TypeMismatch", "T-LOGIC", "operands of " + op + " must be Bool", e->span);
            return record(e, TypeExpr::bool_());
        }
        case K::Not: {
            TypeExpr a = infer_expr(ctx, e->args[0]);
            if (a.kind != TypeExpr::Kind::Bool)
                fail("TypeMismatch", "T-NOT", "not expects Bool, found " + show_type(a), e->span);
            return record(e, TypeExpr::bool_());
        }
        case K::If: {
            TypeExpr c = infer_expr(ctx, e->args[0]);
            if (c.kind != TypeExpr::Kind::Bool)
                fail("TypeMismatch", "T-IF", "condition must be Bool, found " + show_type(c), e->args[0]->span);
            TypeExpr t = infer_expr(ctx, e->args[1]);
            TypeExpr f = infer_expr(ctx, e->args[2]);
            if (!compatible(g, t, f) && !compatible(g, f, t))
                fail("TypeMismatch", "T-IF", "branches have types " + show_type(t) + " and " + show_type(f), e->span);
            return record(e, t);
        }
        case K::Let: {
            TypeExpr b = infer_expr(ctx, e->args[0]);
            if (b.kind == TypeExpr::Kind::Fn)
                fail("TypeMismatch", "T-LET", "cannot bind a function with let", e->span);
            TypeCtx inner = ctx;
            inner.locals[e->name] = b;
            return record(e, infer_expr(inner, e->args[1]));
        }
        case K::Ctor: {
            const CtorInfo* c = g.ctor(e->name);
            if (!c) fail("UnknownConstructor", "T-CONSTR", "unknown constructor '" + e->name + "'", e->span);
            if (c->fields.size() != e->args.size())
                fail("ConstructorArity", "T-CONSTR",
                     "'" + c->name + "' takes " + std::to_string(c->fields.size()) + " arguments, given " +
                         std::to_string(e->args.size()),
                     e->span);
            for (size_t i = 0; i < e->args.size(); ++i)
                expect_type(ctx, c->fields[i], infer_expr(ctx, e->args[i]), "T-CONSTR",
                            "argument " + std::to_string(i + 1) + " of " + c->name, e->args[i]->span);
            return record(e, TypeExpr::adt(c->adt));
        }
        case K::App: {
            const TypeExpr* ft = lookup_fn(ctx, e->name);
            if (!ft) {
                if (ctx.locals.count(e->name))
                    fail("TypeMismatch", "T-APP", "'" + e->name + "' is not a function", e->span);
                fail("UnboundVariable", "T-FN-GLOBAL", "unknown function '" + e->name + "'", e->span);
            }
            auto ps = ft->params();
            if (ps.size() != e->args.size())
                fail("ArityMismatch", "T-APP",
                     "'" + e->name + "' takes " + std::to_string(ps.size()) + " arguments, given " +
                         std::to_string(e->args.size()),
                     e->span);
            for (size_t i = 0; i < ps.size(); ++i)
                expect_type(ctx, ps[i], infer_expr(ctx, e->args[i]), "T-APP",
                            "argument " + std::to_string(i + 1) + " of " + e->name, e->args[i]->span);
            return record(e, ft->result());
        }
        case K::Instantiate: {
            const TypeExpr* ft = lookup_fn(ctx, e->name);
            if (!ft) fail("UnboundVariable", "T-FN-GLOBAL", "unknown function '" + e->name + "'", e->span);
            auto ps = ft->params();
            if (ps.size() != e->arg_layouts.size())
                fail("ArityMismatch", "T-INSTANTIATE",
                     "'" + e->name + "' takes " + std::to_string(ps.size()) + " arguments, " +
                         std::to_string(e->arg_layouts.size()) + " layouts given",
                     e->span);
            if (ps.size() != e->args.size())
                fail("ArityMismatch", "T-INSTANTIATE",
                     "'" + e->name + "' takes " + std::to_string(ps.size()) + " arguments, given " +
                         std::to_string(e->args.size()),
                     e->span);
            for (size_t i = 0; i < ps.size(); ++i) {
                const LayoutRef& l = e->arg_layouts[i];
                check_layout_arg(ctx, l, ps[i], "T-INSTANTIATE", l.span.valid() ? l.span : e->span);
                TypeExpr at = infer_expr(ctx, e->args[i]);
                if (l.is_fn() || l.is_base()) {
                    expect_type(ctx, l.is_fn() ? ps[i] : base_of_layout(l), at, "T-INSTANTIATE", "argument " + std::to_string(i + 1) + " of " + e->name,
                                e->args[i]->span);
                    continue;
                }
                const LayoutDef* ld = g.layout(l.name);
                std::string got = adt_of(g, at);
                if (got.empty())
                    fail("TypeMismatch", "T-INSTANTIATE",
                         "argument " + std::to_string(i + 1) + " of " + e->name + " has type " + show_type(at) +
                             ", expected a value of '" + ld->adt + "'",
                         e->args[i]->span);
                if (got != ld->adt)
                    fail("LayoutAdtMismatch", "T-INSTANTIATE",
                         "layout '" + l.name + "' is for '" + ld->adt + "' but the argument has type " + show_type(at),
                         e->args[i]->span);
                if (at.kind == TypeExpr::Kind::Layout && at.name != l.name)
                    fail("LayoutAdtMismatch", "T-INSTANTIATE",
                         "argument is laid out as '" + at.name + "', not '" + l.name + "'", e->args[i]->span);
            }
            const LayoutRef& r = e->layout;
            if (r.is_fn()) fail("TypeMismatch", "T-INSTANTIATE", "result layout cannot be a function", e->span);
            check_layout_arg(ctx, r, ft->result(), "T-INSTANTIATE", r.span.valid() ? r.span : e->span);
            return record(e, layout_type(r));
        }
        case K::Lower: {
            const LayoutRef& l = e->layout;
            const LayoutDef* ld = g.layout(l.name);
            const ExprPtr& x = e->args[0];
            std::string rule = x->kind == K::Var ? "T-LOWER-VAR" : x->kind == K::Ctor ? "T-LOWER-CONSTR" : "T-LOWER";
            if (!ld) fail("UnknownLayout", rule, "unknown layout '" + l.name + "'", e->span);
            if (x->kind == K::Ctor) {
                const CtorInfo* c = g.ctor(x->name);
                if (!c) fail("UnknownConstructor", "T-CONSTR", "unknown constructor '" + x->name + "'", x->span);
                if (c->adt != ld->adt)
                    fail("LayoutAdtMismatch", rule,
                         "layout '" + l.name + "' is for '" + ld->adt + "' but '" + c->name + "' builds '" + c->adt +
                             "'",
                         e->span);
                if (c->fields.size() != x->args.size())
                    fail("ConstructorArity", rule,
                         "'" + c->name + "' takes " + std::to_string(c->fields.size()) + " arguments, given " +
                             std::to_string(x->args.size()),
                         x->span);
                for (size_t i = 0; i < x->args.size(); ++i) {
                    TypeExpr at = infer_expr(ctx, x->args[i]);
                    expect_type(ctx, c->fields[i], at, rule, "argument " + std::to_string(i + 1) + " of " + c->name,
                                x->args[i]->span);
                    if (!check_concrete(ctx, x->args[i], c->fields[i]))
                        fail("NonConcrete", rule,
                             "argument " + std::to_string(i + 1) + " of " + c->name + " has type " + show_type(at) +
                                 ", which has no layout",
                             x->args[i]->span);
                }
                record(x, TypeExpr::adt(c->adt));
                return record(e, TypeExpr::layout(l.name));
            }
            TypeExpr t = infer_expr(ctx, x);
            if (adt_of(g, t) != ld->adt)
                fail("LayoutAdtMismatch", rule,
                     "layout '" + l.name + "' is for '" + ld->adt + "' but the expression has type " + show_type(t),
                     e->span);
            return record(e, TypeExpr::layout(l.name));
        }
    }
    fail("TypeMismatch", "", "unsupported expression", e->span);
}

bool ElabParam::is_loc() const { return type.kind != TypeExpr::Kind::Int && type.kind != TypeExpr::Kind::Bool; }

const ElabDirective* TypedProgram::directive(const std::string& fn) const {
    for (const auto& d : directives)
        if (d.fn == fn) return &d;
    return nullptr;
}

std::string layout_tag(const LayoutRef& l, bool result) {
    if (l.is_fn()) {
        std::string s;
        for (size_t i = 0; i < l.fn.size(); ++i) s += (i ? "_to_" : "") + layout_tag(l.fn[i], true);
        return s;
    }
    if (l.name == "Ptr Int") return "Ptr_Int";
    if (l.is_base()) return l.name;
    if (result) return "rw_" + l.name;
    return (l.mode == Mode::Mutable ? "rw_" : "ro_") + l.name;
}

std::string mangle(const std::string& fn, const std::vector<LayoutRef>& args, const LayoutRef& res) {
    std::string s = fn + "__" + layout_tag(res, true);
    for (const auto& a : args) s += "__" + layout_tag(a, false);
    return s;
}

namespace {

// G-FN outside any instantiation: pattern variables keep their ADT types.
void check_fn_generic(const GlobalEnv& g, const FnDef& d) {
    const TypeExpr& ft = g.fns.at(d.name);
    auto ps = ft.params();
    for (const auto& c : d.cases) {
        if (c.pats.size() != ps.size())
            fail("ArityMismatch", "G-FN",
                 "'" + d.name + "' takes " + std::to_string(ps.size()) + " arguments, case has " +
                     std::to_string(c.pats.size()) + " patterns",
                 c.span);
        TypeCtx ctx;
        ctx.g = &g;
        ctx.strict = false;
        for (size_t i = 0; i < ps.size(); ++i) {
            const Pattern& p = c.pats[i];
            auto bind = [&](const std::string& v, const TypeExpr& t) {
                if (ctx.locals.count(v)) fail("DuplicateName", "G-FN", "'" + v + "' bound twice", p.span);
                ctx.locals[v] = t;
            };
            if (!p.is_ctor) {
                bind(p.name, ps[i]);
                continue;
            }
            const CtorInfo* ci = g.ctor(p.name);
            if (!ci) fail("UnknownConstructor", "G-FN", "unknown constructor '" + p.name + "'", p.span);
            if (ps[i].kind != TypeExpr::Kind::Adt || ps[i].name != ci->adt)
                fail("TypeMismatch", "G-FN",
                     "pattern '" + p.name + "' builds '" + ci->adt + "' but the parameter has type " + show_type(ps[i]),
                     p.span);
            if (ci->fields.size() != p.vars.size())
                fail("ConstructorArity", "G-FN",
                     "'" + ci->name + "' takes " + std::to_string(ci->fields.size()) + " fields, pattern binds " +
                         std::to_string(p.vars.size()),
                     p.span);
            for (size_t j = 0; j < p.vars.size(); ++j) bind(p.vars[j], ci->fields[j]);
        }
        for (const auto& gb : c.bodies) {
            if (gb.guard) {
                TypeExpr gt = infer_expr(ctx, gb.guard);
                if (gt.kind != TypeExpr::Kind::Bool)
                    fail("TypeMismatch", "T-GUARD", "guard must be Bool, found " + show_type(gt), gb.guard->span);
            }
            TypeExpr bt = infer_expr(ctx, gb.body);
            expect_type(ctx, ft.result(), bt, "G-FN", "body of " + d.name, gb.body->span);
        }
    }
}

struct Elaborator {
    const GlobalEnv& g;
    const ElabDirective& d;

    ExprPtr wrap_lower(const LayoutRef& l, ExprPtr e) {
        LayoutRef lr = l;
        return mk_lower(lr, std::move(e), e ? e->span : Span{});
    }

    // pos: 0 result, 1 field/argument governed by `lay`, 2 other
    ExprPtr run(const ExprPtr& e, int pos, const LayoutRef* lay) {
        using K = Expr::Kind;
        ExprPtr c = std::make_shared<Expr>(*e);
        switch (e->kind) {
            case K::Let:
                c->args[0] = run(e->args[0], 2, nullptr);
                c->args[1] = run(e->args[1], pos, lay);
                return c;
            case K::If:
                c->args[0] = run(e->args[0], 2, nullptr);
                c->args[1] = run(e->args[1], pos, lay);
                c->args[2] = run(e->args[2], pos, lay);
                return c;
            case K::BinOp:
            case K::Not:
                for (auto& a : c->args) a = run(a, 2, nullptr);
                return c;
            case K::App: {
                if (e->name == d.fn) {
                    std::vector<ExprPtr> args;
                    for (size_t i = 0; i < e->args.size(); ++i)
                        args.push_back(run(e->args[i], 1, i < d.dir.args.size() ? &d.dir.args[i] : nullptr));
                    ExprPtr r = mk_inst(d.dir.args, d.dir.result, e->name, args, e->span);
                    r->recursive = true;
                    return r;
                }
                const TypeExpr* ft = g.fn(e->name);
                TypeExpr local;
                if (!ft) fail("UnboundVariable", "T-FN-GLOBAL", "unknown function '" + e->name + "'", e->span);
                bool all_base = ft->result().is_base();
                for (const auto& p : ft->params()) all_base = all_base && p.is_base();
                if (!all_base)
                    fail("MissingInstantiate", "T-INSTANTIATE",
                         "call to '" + e->name + "' needs instantiate to choose layouts", e->span);
                std::vector<LayoutRef> ls;
                for (const auto& p : ft->params()) {
                    LayoutRef l;
                    l.name = show_type(p);
                    ls.push_back(l);
                }
                LayoutRef rl;
                rl.name = show_type(ft->result());
                std::vector<ExprPtr> args;
                for (const auto& a : e->args) args.push_back(run(a, 2, nullptr));
                return mk_inst(ls, rl, e->name, args, e->span);
            }
            case K::Instantiate: {
                for (size_t i = 0; i < c->args.size(); ++i) {
                    const LayoutRef* al = i < c->arg_layouts.size() ? &c->arg_layouts[i] : nullptr;
                    c->args[i] = run(e->args[i], 1, al && !al->is_base() && !al->is_fn() ? al : nullptr);
                }
                if (e->name == d.fn && same_layouts(c->arg_layouts, d.dir.args) &&
                    c->layout.name == d.dir.result.name)
                    c->recursive = true;
                return c;
            }
            case K::Ctor: {
                const CtorInfo* ci = g.ctor(e->name);
                if (!ci) fail("UnknownConstructor", "T-CONSTR", "unknown constructor '" + e->name + "'", e->span);
                const LayoutRef* target = pos == 0 ? (d.dir.result.is_base() ? nullptr : &d.dir.result) : lay;
                if (!target) {
                    for (auto& a : c->args) a = run(a, 2, nullptr);
                    return c;
                }
                lower_fields(c, *target);
                return wrap_lower(*target, c);
            }
            case K::Lower: {
                if (e->args[0]->kind == K::Ctor) {
                    // fields of an explicit lower stay as written: a bare
                    // constructor there is non-concrete
                    ExprPtr inner = std::make_shared<Expr>(*e->args[0]);
                    for (auto& a : inner->args) a = run(a, 2, nullptr);
                    c->args[0] = inner;
                } else {
                    c->args[0] = run(e->args[0], 2, nullptr);
                }
                return c;
            }
            case K::Var: {
                if (pos == 0 && !d.dir.result.is_base()) {
                    auto it = env->find(e->name);
                    if (it != env->end() && !it->second.is_base() && it->second.kind != TypeExpr::Kind::Fn)
                        return wrap_lower(d.dir.result, c);
                }
                return c;
            }
            default: return c;
        }
    }

    void lower_fields(const ExprPtr& ctor, const LayoutRef& target) {
        const LayoutDef* ld = g.layout(target.name);
        const CtorInfo* ci = g.ctor(ctor->name);
        const LayoutBranch* br = ld && ci ? ld->branch_for(ci->name) : nullptr;
        for (size_t i = 0; i < ctor->args.size(); ++i) {
            const LayoutRef* fl = nullptr;
            LayoutRef tmp;
            if (br && ci && i < ci->fields.size() && i < br->pat.vars.size() && !ci->fields[i].is_base()) {
                for (const auto& h : br->body)
                    if (h.kind == LayoutHeaplet::Kind::Apply && h.arg == br->pat.vars[i]) {
                        tmp.name = h.layout;
                        tmp.mode = target.mode;
                        fl = &tmp;
                    }
            }
            ctor->args[i] = run(ctor->args[i], 1, fl);
        }
    }

    static bool same_layouts(const std::vector<LayoutRef>& a, const std::vector<LayoutRef>& b) {
        if (a.size() != b.size()) return false;
        for (size_t i = 0; i < a.size(); ++i)
            if (a[i].name != b[i].name || a[i].mode != b[i].mode) return false;
        return true;
    }

    const LocalEnv* env = nullptr;
};

}  // namespace

ElabDirective elaborate_instance(const TypedProgram& tp, const GenerateDirective& dir) {
    const GlobalEnv& g = tp.env;
    const FnDef* def = tp.unit->def(dir.fn);
    if (!def) fail("UnknownFunction", "G-GENERATE", "no definition for '" + dir.fn + "'", dir.span);
    ElabDirective d;
    d.dir = dir;
    d.fn = dir.fn;
    d.fn_type = g.fns.at(dir.fn);
    auto ps = d.fn_type.params();
    if (ps.size() != dir.args.size())
        fail("ArityMismatch", "T-INSTANTIATE",
             "'" + dir.fn + "' takes " + std::to_string(ps.size()) + " arguments, " + std::to_string(dir.args.size()) +
                 " layouts given",
             dir.span);
    TypeCtx base;
    base.g = &g;
    for (size_t i = 0; i < ps.size(); ++i) {
        check_layout_arg(base, dir.args[i], ps[i], "T-INSTANTIATE", dir.args[i].span.valid() ? dir.args[i].span : dir.span);
        ElabParam p;
        p.layout = dir.args[i];
        p.type = dir.args[i].is_base() ? base_of_layout(dir.args[i])
                 : dir.args[i].is_fn() ? ps[i]
                                       : TypeExpr::layout(dir.args[i].name);
        bool adt = !dir.args[i].is_base() && !dir.args[i].is_fn();
        p.ssl = (adt ? "__p_x" : "__p_") + std::to_string(i);
        d.params.push_back(p);
    }
    if (dir.result.is_fn()) fail("TypeMismatch", "T-INSTANTIATE", "result layout cannot be a function", dir.span);
    check_layout_arg(base, dir.result, d.fn_type.result(), "T-INSTANTIATE",
                     dir.result.span.valid() ? dir.result.span : dir.span);
    d.result.layout = dir.result;
    d.result.layout.mode = Mode::Mutable;
    if (dir.result.is_base()) {
        d.result.type = base_of_layout(dir.result);
        d.result.ssl = "__r";
    } else {
        d.result.type = TypeExpr::layout(dir.result.name);
        d.result.ssl = "__r_" + g.layout(dir.result.name)->params[0];
    }
    d.pred_name = mangle(dir.fn, dir.args, dir.result);

    for (const auto& fc : def->cases) {
        ElabCase ec;
        ec.pats = fc.pats;
        for (size_t i = 0; i < ps.size() && i < fc.pats.size(); ++i) {
            const Pattern& p = fc.pats[i];
            if (!p.is_ctor) {
                ec.env[p.name] = d.params[i].type;
                continue;
            }
            const CtorInfo* ci = g.ctor(p.name);
            const LayoutDef* ld = g.layout(dir.args[i].name);
            const LayoutBranch* br = ld ? ld->branch_for(p.name) : nullptr;
            if (!br)
                fail("NoSuchBranch", "G-FN", "layout '" + dir.args[i].name + "' has no branch for '" + p.name + "'",
                     p.span);
            for (size_t j = 0; j < p.vars.size(); ++j) {
                const std::string& lv = br->pat.vars[j];
                TypeExpr t = ci->fields[j];
                for (const auto& h : br->body) {
                    if (h.kind == LayoutHeaplet::Kind::Apply && h.arg == lv) {
                        t = TypeExpr::layout(h.layout);
                        ec.field_layout[p.vars[j]] = h.layout;
                    }
                    if (h.kind == LayoutHeaplet::Kind::PointsTo && h.payload == lv)
                        ec.cell_of[p.vars[j]] = {static_cast<int>(i), h.offset};
                }
                ec.env[p.vars[j]] = t;
            }
        }
        Elaborator el{g, d};
        el.env = &ec.env;
        TypeCtx ctx;
        ctx.g = &g;
        ctx.locals = ec.env;
        for (const auto& gb : fc.bodies) {
            ElabBody eb;
            if (gb.guard) {
                eb.guard = el.run(gb.guard, 2, nullptr);
                TypeExpr gt = infer_expr(ctx, eb.guard);
                if (gt.kind != TypeExpr::Kind::Bool)
                    fail("TypeMismatch", "T-GUARD", "guard must be Bool, found " + show_type(gt), gb.guard->span);
            }
            eb.body = el.run(gb.body, 0, nullptr);
            TypeExpr bt = infer_expr(ctx, eb.body);
            if (!compatible(g, d.result.type, bt))
                fail("TypeMismatch", "G-FN",
                     "body of " + d.fn + " has type " + show_type(bt) + ", expected " + show_type(d.result.type),
                     gb.body->span);
            ec.bodies.push_back(eb);
        }
        d.cases.push_back(std::move(ec));
    }
    return d;
}

TypedProgram elaborate(const SourceUnit& u) {
    TypedProgram tp;
    tp.unit = std::make_shared<SourceUnit>(u);
    tp.env = build_global_env(*tp.unit);
    for (const auto& d : tp.unit->fn_defs) check_fn_generic(tp.env, d);
    for (const auto& dir : tp.unit->directives) tp.directives.push_back(elaborate_instance(tp, dir));
    return tp;
}

}  // namespace pika
