#include "pika/interp.hpp"

#include <algorithm>
#include <sstream>
#include <tuple>

namespace pika::interp {

std::string Val::show() const {
    switch (kind) {
        case Kind::Int: return std::to_string(v);
        case Kind::Bool: return v ? "true" : "false";
        case Kind::Loc: return "@" + std::to_string(v);
    }
    return "?";
}

std::string FsVal::show() const {
    if (!is_ctor) return base.show();
    std::string out = ctor;
    for (const auto& f : fields) {
        std::string s = f.show();
        if (f.is_ctor && !f.fields.empty()) s = "(" + s + ")";
        out += " " + s;
    }
    return out;
}

bool operator==(const FsVal& a, const FsVal& b) {
    if (a.is_ctor != b.is_ctor) return false;
    if (!a.is_ctor) return a.base == b.base;
    return a.ctor == b.ctor && a.fields == b.fields;
}

std::string Model::show() const {
    std::ostringstream o;
    o << "store:";
    if (store.empty()) o << " (empty)";
    o << "\n";
    for (const auto& [k, v] : store) o << "  " << k << " = " << v.show() << "\n";
    o << "heap:";
    if (heap.empty()) o << " (empty)";
    o << "\n";
    for (const auto& [l, v] : heap) o << "  @" << l << " :-> " << v.show() << "\n";
    return o.str();
}

const FsVal* FsStore::at(long long l) const {
    auto it = vals.find(l);
    return it == vals.end() ? nullptr : &it->second;
}

Heap act_on_heap(const Heap& h, const std::vector<GroundHeaplet>& body) {
    Heap out = h;
    for (const auto& g : body) {
        switch (g.kind) {
            case GroundHeaplet::Kind::Emp: break;
            case GroundHeaplet::Kind::Apply: break;  // L-APPLY: the argument is already a value
            case GroundHeaplet::Kind::PointsTo: {
                if (!g.value || !g.base)
                    throw PikaError("UngroundedHeaplet", "L-POINTSTO",
                                    "right-hand side `" + g.var + "` is not a value");
                long long at = g.base->v + g.offset;
                if (out.count(at))
                    throw PikaError("HeapOverlap", "L-POINTSTO", "cell @" + std::to_string(at) + " already written");
                out[at] = *g.value;
                break;
            }
        }
    }
    return out;
}

namespace {

using K = Expr::Kind;

struct Machine {
    const Program& p;
    State s;
    long long next_r = 1;
    long long next_p = 1;

    std::string fresh(const char* prefix, long long& k) {
        for (;;) {
            std::string n = prefix + std::to_string(k++);
            if (!s.store.count(n)) return n;
        }
    }

    long long fresh_loc() const {
        long long m = 0;
        if (!s.heap.empty()) m = std::max(m, s.heap.rbegin()->first);
        if (!s.fs.vals.empty()) m = std::max(m, s.fs.vals.rbegin()->first);
        for (const auto& [_, v] : s.store)
            if (v.kind == Val::Kind::Loc) m = std::max(m, v.v);
        return m + 1;
    }

    Outcome done(FsVal v, std::string var) { return {std::move(v), {}, std::move(var)}; }

    std::string bind(Val v) {
        std::string r = fresh("r", next_r);
        s.store[r] = v;
        return r;
    }

    const LayoutDef& layout(const LayoutRef& l, const Span& sp) {
        const LayoutDef* d = p.g->layout(l.name);
        if (!d) throw PikaError("UnknownLayout", "AM-LOWER", "no layout named " + l.name, sp);
        return *d;
    }

    // AM-LOWER on a constructor application: evaluate the fields left to right,
    // allocate a fresh block and write the layout branch's cells.
    std::pair<FsVal, long long> build(const LayoutDef& l, const ExprPtr& ctor) {
        std::vector<Val> vals;
        std::vector<FsVal> fs;
        for (const auto& a : ctor->args) {
            Outcome o = go(a);
            vals.push_back(s.store.at(o.var));
            fs.push_back(o.value);
        }
        const LayoutBranch* br = l.branch_for(ctor->name);
        if (!br)
            throw PikaError("NoSuchBranch", "AM-LOWER", "layout " + l.name + " has no branch for " + ctor->name,
                            ctor->span);
        long long at = fresh_loc();
        std::map<std::string, Val> env;
        for (size_t i = 0; i < br->pat.vars.size() && i < vals.size(); ++i) env[br->pat.vars[i]] = vals[i];
        if (!l.params.empty()) env[l.params[0]] = Val::loc(at);
        std::vector<GroundHeaplet> body;
        for (const auto& h : br->body) {
            GroundHeaplet g;
            if (h.kind == LayoutHeaplet::Kind::Emp) {
                g.kind = GroundHeaplet::Kind::Emp;
            } else if (h.kind == LayoutHeaplet::Kind::PointsTo) {
                g.kind = GroundHeaplet::Kind::PointsTo;
                if (env.count(h.base)) g.base = env[h.base];
                g.offset = h.offset;
                g.var = h.payload;
                if (env.count(h.payload)) g.value = env[h.payload];
                if (!g.base)
                    throw PikaError("UnsupportedConstruct", "AM-LOWER",
                                    "layout " + l.name + " writes through a second parameter " + h.base);
            } else {
                g.kind = GroundHeaplet::Kind::Apply;
                g.layout = h.layout;
                if (env.count(h.arg)) g.base = env[h.arg];
            }
            body.push_back(g);
        }
        s.heap = act_on_heap(s.heap, body);
        FsVal v{true, {}, ctor->name, fs};
        s.fs.vals[at] = v;
        s.fs.fields[at] = vals;
        return {v, at};
    }

    std::pair<FsVal, long long> as_structure(const Outcome& o, const Span& sp, const char* rule) {
        Val v = s.store.at(o.var);
        const FsVal* f = v.kind == Val::Kind::Loc ? s.fs.at(v.v) : nullptr;
        if (!f || !f->is_ctor)
            throw PikaError("NotAConstructorValue", rule, "`" + o.var + "` holds " + v.show(), sp);
        return {*f, v.v};
    }

    Outcome go(const ExprPtr& e) {
        switch (e->kind) {
            case K::Int: {
                Val v = Val::int_(e->ival);
                return done(FsVal::of(v), bind(v));
            }
            case K::Bool: {
                Val v = Val::bool_(e->bval);
                return done(FsVal::of(v), bind(v));
            }
            case K::Var: {
                auto it = s.store.find(e->name);
                if (it == s.store.end())
                    throw PikaError("UnboundVariable", "AM-VAR", "`" + e->name + "` is not in the store", e->span);
                if (it->second.kind == Val::Kind::Loc) {
                    const FsVal* f = s.fs.at(it->second.v);
                    if (!f)
                        throw PikaError("NotAConstructorValue", "AM-VAR-LOC",
                                        "location " + it->second.show() + " has no value", e->span);
                    return done(*f, e->name);
                }
                return done(FsVal::of(it->second), e->name);
            }
            case K::BinOp: {
                if (e->name != "+")
                    throw PikaError("UnsupportedConstruct", "AM-ADD", "operator " + e->name + " is outside the core",
                                    e->span);
                Outcome a = go(e->args[0]);
                Outcome b = go(e->args[1]);
                Val x = s.store.at(a.var), y = s.store.at(b.var);
                if (x.kind != Val::Kind::Int || y.kind != Val::Kind::Int)
                    throw PikaError("SortMismatch", "AM-ADD", "adding " + x.show() + " and " + y.show(), e->span);
                Val v = Val::int_(x.v + y.v);
                return done(FsVal::of(v), bind(v));
            }
            case K::Lower: {
                const ExprPtr& inner = e->args[0];
                if (inner->kind == K::Ctor) {
                    auto [v, at] = build(layout(e->layout, e->span), inner);
                    return done(v, bind(Val::loc(at)));
                }
                Outcome o = go(inner);
                as_structure(o, e->span, "AM-LOWER");
                return o;
            }
            case K::Instantiate: return instantiate(e);
            default:
                throw PikaError("UnsupportedConstruct", "", "`" + print_expr(e) + "` is outside the core subset",
                                e->span);
        }
    }

    Outcome instantiate(const ExprPtr& e) {
        if (e->args.size() != 1 || e->arg_layouts.size() != 1)
            throw PikaError("UnsupportedConstruct", "AM-INSTANTIATE", "only single-argument functions are evaluated",
                            e->span);
        const FnDef* def = p.unit->def(e->name);
        if (!def) throw PikaError("UnknownFunction", "AM-INSTANTIATE", "no definition for " + e->name, e->span);
        const ExprPtr& arg = e->args[0];
        FsVal v;
        long long at;
        std::string arg_var;
        if (arg->kind == K::Ctor) {
            std::tie(v, at) = build(layout(e->arg_layouts[0], e->span), arg);
            arg_var = bind(Val::loc(at));
        } else {
            Outcome o = go(arg);
            std::tie(v, at) = as_structure(o, arg->span, "AM-INSTANTIATE");
            arg_var = o.var;
        }
        const FnCase* hit = nullptr;
        for (const auto& c : def->cases) {
            if (c.pats.size() != 1) continue;
            if (!c.pats[0].is_ctor || c.pats[0].name == v.ctor) {
                hit = &c;
                break;
            }
        }
        if (!hit)
            throw PikaError("NoMatchingFnCase", "AM-INSTANTIATE", e->name + " has no case for " + v.ctor, e->span);
        if (hit->bodies.size() != 1 || hit->bodies[0].guard)
            throw PikaError("UnsupportedConstruct", "AM-INSTANTIATE", e->name + " uses guards", hit->span);
        std::map<std::string, std::string> ren;
        const Pattern& pat = hit->pats[0];
        if (pat.is_ctor) {
            const auto& vals = s.fs.fields.at(at);
            for (size_t i = 0; i < pat.vars.size(); ++i) {
                std::string n = fresh("p", next_p);
                s.store[n] = vals.at(i);
                ren[pat.vars[i]] = n;
            }
        } else {
            ren[pat.name] = arg_var;
        }
        ExprPtr body = rename_vars(hit->bodies[0].body, ren);
        if (!e->layout.is_base() && body->kind == K::Ctor) body = mk_lower(e->layout, body, body->span);
        return go(body);
    }
};

}  // namespace

Outcome eval(const Program& p, const ExprPtr& e, State s) {
    Machine m{p, std::move(s)};
    Outcome o = m.go(e);
    o.state = std::move(m.s);
    return o;
}

}  // namespace pika::interp
