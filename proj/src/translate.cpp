#include "pika/translate.hpp"

#include <algorithm>
#include <functional>

#include "pika/diag.hpp"

namespace pika {

using namespace ssl;

namespace {

[[noreturn]] void fail(const std::string& kind, const std::string& msg, Span s = {}) {
    throw PikaError(kind, "", msg, s);
}

}  // namespace

TermPtr cond(const LayoutDef& l, const std::string& ctor, const std::string& x) {
    const LayoutBranch* b = l.branch_for(ctor);
    if (!b) fail("NoSuchBranch", "layout '" + l.name + "' has no branch for '" + ctor + "'", l.span);
    if (l.branches.size() == 1) return t_bool(true);
    int same = 0;
    for (const auto& o : l.branches)
        if (o.is_emp() == b->is_emp()) ++same;
    if (same > 1)
        fail("AmbiguousBranches", "layout '" + l.name + "' has " + std::to_string(same) + " " +
                                      (b->is_emp() ? "empty" : "non-empty") +
                                      " branches, so a null test cannot tell them apart",
             l.span);
    TermPtr isnull = t_eq(t_var(x), t_int(0));
    return b->is_emp() ? isnull : t_not(isnull);
}

TermPtr cond(const LayoutDef& l, const std::string& ctor) { return cond(l, ctor, l.params.at(0)); }

namespace {

std::vector<Heaplet> blocks_for(const std::vector<Heaplet>& cells) {
    std::map<std::string, int> extent;
    std::vector<std::string> order;
    for (const auto& h : cells) {
        if (h.kind != Heaplet::Kind::PointsTo) continue;
        if (!extent.count(h.base)) order.push_back(h.base);
        extent[h.base] = std::max(extent[h.base], h.offset + 1);
    }
    std::vector<Heaplet> out;
    for (const auto& b : order) out.push_back(h_block(b, extent[b]));
    return out;
}

PredicateDef layout_pred(const LayoutDef& l, bool ro) {
    PredicateDef p;
    p.name = (ro ? "ro_" : "") + l.name;
    for (const auto& x : l.params) p.params.push_back({"loc", x});
    for (const auto& b : l.branches) {
        Branch br;
        br.cond = cond(l, b.pat.name);
        br.tag = b.pat.name;
        std::vector<Heaplet> cells;
        for (const auto& h : b.body) {
            if (h.kind == LayoutHeaplet::Kind::PointsTo)
                cells.push_back(h_pts(h.base, h.offset, t_var(h.payload), ro));
        }
        br.body.spatial = cells;
        for (const auto& bl : blocks_for(cells)) br.body.spatial.push_back(bl);
        for (const auto& h : b.body) {
            if (h.kind != LayoutHeaplet::Kind::Apply) continue;
            if (ro)
                br.body.spatial.push_back(h_ro(h.layout, {t_var(h.arg)}));
            else
                br.body.spatial.push_back(h_pred(h.layout, {t_var(h.arg)}));
        }
        p.branches.push_back(std::move(br));
    }
    return p;
}

}  // namespace

PredicateDef translate_layout_predicate(const LayoutDef& l) { return layout_pred(l, false); }
PredicateDef readonly_layout_predicate(const LayoutDef& l) { return layout_pred(l, true); }

PredicateDef copy_predicate(const LayoutDef& l) {
    PredicateDef p;
    p.name = l.name + "__copy";
    const std::string& x = l.params.at(0);
    std::string r = x == "r" ? "r0" : "r";
    p.params = {{"loc", x}, {"loc", r}};
    for (const auto& b : l.branches) {
        Branch br;
        br.cond = cond(l, b.pat.name, x);
        br.tag = b.pat.name;
        if (b.is_emp()) {
            br.body.pure.push_back(t_eq(t_var(r), t_int(0)));
            p.branches.push_back(std::move(br));
            continue;
        }
        std::map<std::string, std::string> copy_of;
        std::vector<Heaplet> src, dst, calls;
        for (const auto& h : b.body) {
            if (h.kind != LayoutHeaplet::Kind::Apply) continue;
            std::string y = h.arg + "_c";
            copy_of[h.arg] = y;
            calls.push_back(h_pred(h.layout + "__copy", {t_var(h.arg), t_var(y)}));
        }
        for (const auto& h : b.body) {
            if (h.kind != LayoutHeaplet::Kind::PointsTo) continue;
            src.push_back(h_pts(h.base, h.offset, t_var(h.payload)));
            auto c = copy_of.find(h.payload);
            dst.push_back(h_pts(h.base == x ? r : h.base, h.offset, t_var(c == copy_of.end() ? h.payload : c->second)));
        }
        auto& sp = br.body.spatial;
        sp.insert(sp.end(), src.begin(), src.end());
        for (const auto& bl : blocks_for(src)) sp.push_back(bl);
        sp.insert(sp.end(), calls.begin(), calls.end());
        sp.insert(sp.end(), dst.begin(), dst.end());
        for (const auto& bl : blocks_for(dst)) sp.push_back(bl);
        p.branches.push_back(std::move(br));
    }
    return p;
}

namespace {

void collect_names(const ExprPtr& e, std::set<std::string>& out) {
    if (!e) return;
    if (e->kind == Expr::Kind::Var || e->kind == Expr::Kind::Addr) out.insert(e->name);
    for (const auto& a : e->args) collect_names(a, out);
}

bool is_loc_layout(const LayoutRef& l) { return !l.is_base() || l.name == "Ptr Int"; }

struct Fresh {
    int next = 0;
    int temp = 0;
    std::string loc() { return "__p_x" + std::to_string(next++); }
    std::string base() { return "__p_" + std::to_string(next++); }
    std::string tmp() { return "__temp_" + std::to_string(temp++); }
};

struct Arm {
    const TypedProgram& tp;
    const ElabDirective& d;
    const ElabCase& ec;
    Fresh fr;
    std::map<std::string, TermPtr> sub;
    std::vector<TermPtr> pure;
    std::vector<Heaplet> heap;
    ArmTrace tr;
    std::set<std::string>* copies;

    const LayoutDef& layout(const std::string& n) {
        const LayoutDef* l = tp.env.layout(n);
        if (!l) fail("UnknownLayout", "unknown layout '" + n + "'");
        return *l;
    }

    static Term::Kind op_kind(const std::string& op) {
        if (op == "+") return Term::Kind::Add;
        if (op == "-") return Term::Kind::Sub;
        if (op == "%") return Term::Kind::Mod;
        if (op == "<") return Term::Kind::Lt;
        if (op == "==") return Term::Kind::Eq;
        if (op == "&&") return Term::Kind::And;
        return Term::Kind::Or;
    }

    // Cells for a constructor written at `dest`, following layout L.
    void construct(const LayoutDef& l, const ExprPtr& ctor, const std::string& dest) {
        const LayoutBranch* b = l.branch_for(ctor->name);
        if (!b) fail("NoSuchBranch", "layout '" + l.name + "' has no branch for '" + ctor->name + "'", ctor->span);
        std::map<std::string, TermPtr> field;
        for (size_t j = 0; j < b->pat.vars.size() && j < ctor->args.size(); ++j)
            field[b->pat.vars[j]] = value(ctor->args[j], false);
        std::vector<Heaplet> cells;
        for (const auto& h : b->body)
            if (h.kind == LayoutHeaplet::Kind::PointsTo) cells.push_back(h_pts(dest, h.offset, field.at(h.payload)));
        for (const auto& c : cells) heap.push_back(c);
        for (const auto& bl : blocks_for(cells)) heap.push_back(bl);
    }

    std::vector<TermPtr> call_args(const ExprPtr& e) {
        std::vector<TermPtr> as;
        for (const auto& a : e->args) as.push_back(value(a, true));
        return as;
    }

    std::string callee(const ExprPtr& e) {
        return e->recursive ? d.pred_name : mangle(e->name, e->arg_layouts, e->layout);
    }

    void call(const ExprPtr& e, std::vector<TermPtr> args, const std::string& out) {
        args.push_back(t_var(out));
        if (e->recursive)
            heap.push_back(h_pred(d.pred_name, std::move(args)));
        else
            heap.push_back(h_func(callee(e), std::move(args)));
    }

    TermPtr value(const ExprPtr& e, bool call_arg) {
        using K = Expr::Kind;
        switch (e->kind) {
            case K::Int: return t_int(e->ival);
            case K::Bool: return t_bool(e->bval);
            case K::Null: return t_int(0);
            case K::Var: {
                auto it = sub.find(e->name);
                return it == sub.end() ? t_var(e->name) : it->second;
            }
            case K::BinOp: return t_bin(op_kind(e->name), value(e->args[0], false), value(e->args[1], false));
            case K::Not: return t_not(value(e->args[0], false));
            case K::If:
                return t_ite(value(e->args[0], false), value(e->args[1], false), value(e->args[2], false));
            case K::Addr: {
                auto it = ec.cell_of.find(e->name);
                if (it == ec.cell_of.end())
                    fail("NonConstructibleBody", "'" + e->name + "' does not live in a heap cell", e->span);
                TermPtr base = t_var(d.params[it->second.first].ssl);
                int off = it->second.second;
                return off ? t_bin(Term::Kind::Add, base, t_int(off)) : base;
            }
            case K::Lower: {
                const ExprPtr& x = e->args[0];
                if (x->kind == K::Ctor) {
                    const LayoutDef& l = layout(e->layout.name);
                    const LayoutBranch* b = l.branch_for(x->name);
                    if (b && b->is_emp()) return t_int(0);
                    std::string y = fr.loc();
                    construct(l, x, y);
                    return t_var(y);
                }
                return value(x, call_arg);
            }
            case K::Instantiate: {
                auto args = call_args(e);
                const LayoutRef& rl = e->layout;
                if (!is_loc_layout(rl)) {
                    std::string p = fr.base();
                    if (e->recursive) {
                        std::string t = fr.tmp();
                        call(e, args, t);
                        pure.push_back(t_eq(t_var(t), t_var(p)));
                    } else {
                        call(e, args, p);
                    }
                    return t_var(p);
                }
                std::string v = rl.is_base() ? fr.base() : fr.loc();
                call(e, args, v);
                if (call_arg) heap.push_back(h_temp(v));
                return t_var(v);
            }
            case K::Let: {
                bind_let(e);
                return value(e->args[1], call_arg);
            }
            default:
                fail("NonConstructibleBody", "cannot translate '" + print_expr(e) + "' to a pure term", e->span);
        }
    }

    void bind_let(const ExprPtr& e) {
        const ExprPtr& bound = e->args[0];
        bool adt = bound->typed && !bound->ty.is_base();
        sub.erase(e->name);
        TermPtr v = value(bound, false);
        TermPtr eq = t_eq(t_var(e->name), v);
        pure.push_back(eq);
        tr.lets.push_back(eq);
        if (adt) sub[e->name] = v;
    }

    void result(const ExprPtr& e, const std::string& dest) {
        using K = Expr::Kind;
        switch (e->kind) {
            case K::Let:
                bind_let(e);
                result(e->args[1], dest);
                return;
            case K::Instantiate:
                call(e, call_args(e), dest);
                return;
            case K::Lower: {
                const ExprPtr& x = e->args[0];
                const LayoutDef& l = layout(e->layout.name);
                if (x->kind == K::Ctor) {
                    const LayoutBranch* b = l.branch_for(x->name);
                    if (b && b->is_emp()) {
                        TermPtr z = t_eq(t_var(dest), t_int(0));
                        pure.push_back(z);
                        tr.emp_result.push_back(z);
                        return;
                    }
                    construct(l, x, dest);
                    return;
                }
                if (x->kind == K::Var) {
                    Heaplet c = h_func(l.name + "__copy", {value(x, false), t_var(dest)});
                    heap.push_back(c);
                    tr.copies.push_back(c);
                    copies->insert(l.name);
                    return;
                }
                result(x, dest);
                return;
            }
            default: break;
        }
        if (!d.result.layout.is_base() || (e->typed && !e->ty.is_base()))
            fail("NonConstructibleBody",
                 "result '" + print_expr(e) + "' cannot be built at layout " + d.result.layout.name, e->span);
        TermPtr t = value(e, false);
        if (d.result.type.kind == TypeExpr::Kind::PtrInt)
            heap.push_back(h_pts(dest, 0, t));
        else
            pure.push_back(t_eq(t_var(dest), t));
    }
};

std::vector<std::string> layouts_closure(const GlobalEnv& g, std::vector<std::string> roots) {
    std::vector<std::string> out;
    std::set<std::string> seen;
    std::function<void(const std::string&)> visit = [&](const std::string& n) {
        if (!seen.insert(n).second) return;
        const LayoutDef* l = g.layout(n);
        if (!l) return;
        out.push_back(n);
        for (const auto& b : l->branches)
            for (const auto& h : b.body)
                if (h.kind == LayoutHeaplet::Kind::Apply) visit(h.layout);
    };
    for (const auto& r : roots) visit(r);
    return out;
}

}  // namespace

std::string CompiledDirective::text(bool with_goal) const {
    std::string out;
    for (const auto& p : aux) out += emit_predicate(p) + "\n";
    out += emit_predicate(pred);
    if (with_goal) out += "\n" + emit_goal_spec(goal);
    return out;
}

CompiledDirective compile_directive(const TypedProgram& tp, const ElabDirective& d) {
    CompiledDirective out;
    out.file_stem = d.pred_name;
    out.pred.name = d.pred_name;
    for (const auto& p : d.params) out.pred.params.push_back({p.is_loc() ? "loc" : "int", p.ssl});
    out.pred.params.push_back({d.result.is_loc() ? "loc" : "int", d.result.ssl});
    if (d.result.type.kind == TypeExpr::Kind::Bool) out.pred.params.back().sort = "bool";

    std::set<std::string> copies;
    for (size_t ci = 0; ci < d.cases.size(); ++ci) {
        const ElabCase& ec = d.cases[ci];
        for (size_t bi = 0; bi < ec.bodies.size(); ++bi) {
            const ElabBody& eb = ec.bodies[bi];
            Arm arm{tp, d, ec, Fresh{}, {}, {}, {}, {}, &copies};
            arm.fr.next = static_cast<int>(d.params.size());
            arm.tr.case_index = ci;
            arm.tr.body_index = bi;

            std::set<std::string> used;
            collect_names(eb.guard, used);
            collect_names(eb.body, used);

            std::vector<Heaplet> unfold;
            for (size_t i = 0; i < ec.pats.size() && i < d.params.size(); ++i) {
                const Pattern& p = ec.pats[i];
                const ElabParam& prm = d.params[i];
                if (!p.is_ctor) {
                    arm.sub[p.name] = t_var(prm.ssl);
                    continue;
                }
                const LayoutDef& l = arm.layout(prm.layout.name);
                arm.tr.conds.push_back(cond(l, p.name, prm.ssl));
                const LayoutBranch* b = l.branch_for(p.name);
                bool any = std::any_of(p.vars.begin(), p.vars.end(), [&](const std::string& v) { return used.count(v); });
                bool ro = prm.layout.mode == Mode::Readonly;
                if (!any) {
                    if (!b->is_emp()) {
                        if (ro)
                            unfold.push_back(h_ro(l.name, {t_var(prm.ssl)}));
                        else
                            unfold.push_back(h_pred(l.name, {t_var(prm.ssl)}));
                    }
                    continue;
                }
                std::map<std::string, std::string> rename;
                for (size_t j = 0; j < b->pat.vars.size() && j < p.vars.size(); ++j) rename[b->pat.vars[j]] = p.vars[j];
                std::vector<Heaplet> cells;
                for (const auto& h : b->body)
                    if (h.kind == LayoutHeaplet::Kind::PointsTo)
                        cells.push_back(h_pts(prm.ssl, h.offset, t_var(rename.at(h.payload)), ro));
                unfold.insert(unfold.end(), cells.begin(), cells.end());
                for (const auto& bl : blocks_for(cells)) unfold.push_back(bl);
                for (const auto& h : b->body) {
                    if (h.kind != LayoutHeaplet::Kind::Apply || h.layout == l.name) continue;
                    if (ro)
                        unfold.push_back(h_ro(h.layout, {t_var(rename.at(h.arg))}));
                    else
                        unfold.push_back(h_pred(h.layout, {t_var(rename.at(h.arg))}));
                }
            }
            arm.tr.unfold.spatial = unfold;
            arm.heap = unfold;

            std::vector<TermPtr> conds = arm.tr.conds;
            if (eb.guard) conds.push_back(arm.value(eb.guard, false));
            arm.tr.conds = conds;
            arm.result(eb.body, d.result.ssl);

            Branch br;
            br.cond = t_conj(conds);
            br.body.pure = arm.pure;
            br.body.spatial = arm.heap;
            arm.tr.body = br.body;
            for (auto& h : br.body.spatial) h.readonly = false;
            out.pred.branches.push_back(std::move(br));
            out.arms.push_back(std::move(arm.tr));
        }
    }

    // auxiliary predicates: layouts, their read-only companions, copies
    std::vector<std::string> roots, ro_roots;
    for (const auto& p : d.params) {
        if (p.layout.is_base() || p.layout.is_fn()) continue;
        roots.push_back(p.layout.name);
        if (p.layout.mode == Mode::Readonly) ro_roots.push_back(p.layout.name);
    }
    if (!d.result.layout.is_base()) roots.push_back(d.result.layout.name);
    for (const auto& b : out.pred.branches)
        for (const auto& h : b.body.spatial) {
            if (h.kind == Heaplet::Kind::RoPredApply) ro_roots.push_back(h.name);
            if (h.kind == Heaplet::Kind::PredApply && tp.env.layout(h.name)) roots.push_back(h.name);
        }
    for (const auto& n : layouts_closure(tp.env, roots)) out.aux.push_back(translate_layout_predicate(*tp.env.layout(n)));
    for (const auto& n : layouts_closure(tp.env, ro_roots))
        out.aux.push_back(readonly_layout_predicate(*tp.env.layout(n)));
    for (const auto& n : layouts_closure(tp.env, {copies.begin(), copies.end()}))
        out.aux.push_back(copy_predicate(*tp.env.layout(n)));

    GoalSpec& g = out.goal;
    g.fn = d.fn;
    std::vector<TermPtr> pargs;
    for (size_t i = 0; i < d.params.size(); ++i) {
        std::string x = "x" + std::to_string(i + 1);
        g.params.push_back({"loc", x});
        const ElabParam& p = d.params[i];
        if (!p.layout.is_base() && !p.layout.is_fn()) {
            g.pre.spatial.push_back(h_pred(p.layout.name, {t_var(x)}));
            pargs.push_back(t_var(x));
        } else {
            std::string v = "v" + std::to_string(i + 1);
            g.pre.spatial.push_back(h_pts(x, 0, t_var(v)));
            g.post.spatial.push_back(h_pts(x, 0, t_var(v)));
            pargs.push_back(t_var(v));
        }
    }
    g.params.push_back({"loc", "r"});
    g.pre.spatial.push_back(h_pts("r", 0, t_int(0)));
    pargs.push_back(t_var("r0"));
    g.post.spatial.push_back(h_pred(d.pred_name, pargs));
    g.post.spatial.push_back(h_pts("r", 0, t_var("r0")));
    return out;
}

std::vector<CompiledDirective> compile_program(const TypedProgram& tp) {
    std::vector<CompiledDirective> out;
    for (const auto& d : tp.directives) out.push_back(compile_directive(tp, d));
    return out;
}

// ------------------------------------------------------------------ stages

namespace {

struct StagePrinter {
    const TypedProgram& tp;
    const ElabDirective& d;
    bool null_emp = false;  // stage 2 onwards: empty constructors print as 0
    int fresh = 0;

    std::string dest_name(bool result_pos) {
        if (result_pos) return "r";
        int k = fresh++;
        return k == 0 ? "y" : "y" + std::to_string(k);
    }

    static std::string mode(Mode m) { return m == Mode::Mutable ? "mutable" : "readonly"; }

    bool emp_ctor(const ExprPtr& lower) const {
        const ExprPtr& x = lower->args[0];
        if (x->kind != Expr::Kind::Ctor) return false;
        const LayoutDef* l = tp.env.layout(lower->layout.name);
        const LayoutBranch* b = l ? l->branch_for(x->name) : nullptr;
        return b && b->is_emp();
    }

    bool atomic(const ExprPtr& e) const {
        switch (e->kind) {
            case Expr::Kind::Int: return e->ival >= 0;
            case Expr::Kind::Bool:
            case Expr::Kind::Var:
            case Expr::Kind::Null: return true;
            case Expr::Kind::Ctor: return e->args.empty();
            case Expr::Kind::Lower: return null_emp && emp_ctor(e);
            default: return false;
        }
    }

    std::string atom(const ExprPtr& e, bool rp) {
        std::string s = show(e, rp);
        return atomic(e) ? s : "(" + s + ")";
    }

    std::string show(const ExprPtr& e, bool rp) {
        using K = Expr::Kind;
        switch (e->kind) {
            case K::Int: return std::to_string(e->ival);
            case K::Bool: return e->bval ? "true" : "false";
            case K::Var: return e->name;
            case K::Null: return "0";
            case K::Addr: return "addr " + e->name;
            case K::Not: return "not " + atom(e->args[0], false);
            case K::BinOp: return atom(e->args[0], false) + " " + e->name + " " + atom(e->args[1], false);
            case K::If:
                return "if " + show(e->args[0], false) + " then " + show(e->args[1], rp) + " else " +
                       show(e->args[2], rp);
            case K::Let: return "let " + e->name + " := " + show(e->args[0], false) + " in " + show(e->args[1], rp);
            case K::Ctor:
            case K::App: {
                std::string s = e->name;
                for (const auto& a : e->args) s += " " + atom(a, false);
                return s;
            }
            case K::Lower: {
                std::string s = "lower " + e->layout.name + "[" + mode(e->layout.mode) + " ; " + dest_name(rp) + "] ";
                if (null_emp && emp_ctor(e)) return s + "0";
                return s + atom(e->args[0], false);
            }
            case K::Instantiate: {
                std::string s = "instantiate [";
                for (size_t i = 0; i < e->arg_layouts.size(); ++i) {
                    const LayoutRef& l = e->arg_layouts[i];
                    if (i) s += ", ";
                    if (l.is_base() || l.is_fn()) {
                        s += print_layout_ref(l);
                        continue;
                    }
                    std::string an = i < e->args.size() && e->args[i]->kind == K::Var ? e->args[i]->name : "_";
                    s += l.name + "[" + mode(l.mode) + " ; " + an + "]";
                }
                std::string dn = dest_name(rp);
                s += "] " + (e->layout.is_base() ? print_layout_ref(e->layout) : e->layout.name + "[" + dn + "]") +
                     " " + e->name;
                for (const auto& a : e->args) s += " " + atom(a, false);
                return s;
            }
        }
        return "?";
    }
};

std::string plain_pattern(const Pattern& p) {
    if (!p.is_ctor) return p.name;
    if (p.vars.empty()) return p.name;
    std::string s = "(" + p.name;
    for (const auto& v : p.vars) s += " " + v;
    return s + ")";
}

std::string display_assertion(const Assertion& a, bool drop_blocks) {
    std::string pure;
    for (const auto& p : a.pure)
        for (const auto& c : conjuncts(p)) pure += (pure.empty() ? "" : ", ") + print_term(c, Style::Minimal);
    std::string sp;
    for (const auto& h : a.spatial) {
        if (h.kind == Heaplet::Kind::Emp || (drop_blocks && h.kind == Heaplet::Kind::Block)) continue;
        sp += (sp.empty() ? "" : ", ") + emit_heaplet(h, Style::Minimal);
    }
    if (sp.empty()) sp = "emp";
    return "layout{ " + (pure.empty() ? "" : pure + " ; ") + sp + " }";
}

}  // namespace

std::string dump_stages(const TypedProgram& tp, const std::string& fn) {
    const ElabDirective* dp = tp.directive(fn);
    if (!dp) throw PikaError("MissingGenerateDirective", "", "'" + fn + "' has no %generate directive");
    const ElabDirective& d = *dp;
    CompiledDirective cd = compile_directive(tp, d);

    // display names: argument x, result r, fresh locations y, y1, ...
    std::map<std::string, TermPtr> base_names;
    std::set<std::string> taken;
    for (const auto& p : d.params) {
        if (p.layout.is_base() || p.layout.is_fn()) continue;
        std::string n = tp.env.layout(p.layout.name)->params.at(0);
        std::string c = n;
        for (int k = 1; taken.count(c); ++k) c = n + std::to_string(k);
        taken.insert(c);
        base_names[p.ssl] = t_var(c);
    }
    base_names[d.result.ssl] = t_var("r");
    auto rename_arm = [&](const ArmTrace& a) {
        std::map<std::string, TermPtr> m = base_names;
        int k = 0;
        std::set<std::string> vs;
        std::function<void(const TermPtr&)> note = [&](const TermPtr& t) {
            std::set<std::string> s;
            term_vars(t, s);
            for (const auto& v : s)
                if (v.rfind("__p_x", 0) == 0 && !m.count(v)) {
                    m[v] = t_var(k == 0 ? "y" : "y" + std::to_string(k));
                    ++k;
                }
        };
        for (const auto& h : a.body.spatial) {
            if (h.kind == Heaplet::Kind::PointsTo) note(t_var(h.base));
            if (h.value) note(h.value);
            for (const auto& x : h.args) note(x);
        }
        for (const auto& p : a.body.pure) note(p);
        return m;
    };

    std::string out;
    auto section = [&](int n, const std::string& title, const std::string& body) {
        out += std::to_string(n) + ". " + title + "\n";
        out += body.empty() ? "Not applicable.\n" : "\n" + body;
        out += "\n";
    };

    auto header_elab = [&](size_t ci) {
        std::string s = fn;
        const auto& pats = d.cases[ci].pats;
        for (size_t i = 0; i < pats.size(); ++i) {
            const ElabParam& p = d.params[i];
            if (!pats[i].is_ctor || p.layout.is_base() || p.layout.is_fn()) {
                s += " " + plain_pattern(pats[i]);
                continue;
            }
            std::string xn = base_names.count(p.ssl) ? base_names.at(p.ssl)->name : p.ssl;
            s += " (" + p.layout.name + "[" + StagePrinter::mode(p.layout.mode) + " ; " + xn + "] " +
                 plain_pattern(pats[i]) + ")";
        }
        return s;
    };
    auto header_plain = [&](size_t ci) {
        std::string s = fn;
        for (const auto& p : d.cases[ci].pats) s += " " + plain_pattern(p);
        return s;
    };

    auto render_cases = [&](bool null_emp, bool elab_header,
                            const std::function<std::string(size_t, size_t, const std::string&)>& annotate) {
        std::string s;
        size_t arm = 0;
        for (size_t ci = 0; ci < d.cases.size(); ++ci) {
            const ElabCase& ec = d.cases[ci];
            s += elab_header ? header_elab(ci) : header_plain(ci);
            bool guarded = ec.bodies.size() > 1 || (ec.bodies.size() == 1 && ec.bodies[0].guard);
            for (size_t bi = 0; bi < ec.bodies.size(); ++bi, ++arm) {
                StagePrinter sp{tp, d, null_emp, 0};
                std::string body = sp.show(ec.bodies[bi].body, true);
                body = annotate(arm, ci, body);
                if (guarded) {
                    StagePrinter gp{tp, d, null_emp, 0};
                    std::string g = ec.bodies[bi].guard ? gp.show(ec.bodies[bi].guard, false) : "true";
                    s += "\n  | " + g + " :=\n    " + body + ";";
                } else {
                    s += " :=\n    " + body + ";";
                }
            }
            s += "\n";
        }
        return s;
    };
    auto plain = [](size_t, size_t, const std::string& b) { return b; };

    // 1
    section(1, "Type checking and elaboration.", render_cases(false, true, plain));

    // 2
    bool any_emp = std::any_of(cd.arms.begin(), cd.arms.end(), [](const ArmTrace& a) { return !a.emp_result.empty(); });
    section(2, "Unfold empty constructors.", any_emp ? render_cases(true, true, plain) : "");

    // 3
    bool any_pat = false;
    for (const auto& ec : d.cases)
        for (const auto& p : ec.pats) any_pat = any_pat || p.is_ctor;
    auto stage3 = [&](size_t arm, size_t, const std::string& b) {
        const ArmTrace& a = cd.arms[arm];
        auto m = rename_arm(a);
        Assertion ann;
        ann.pure = a.emp_result;
        ann.spatial = a.unfold.spatial;
        ann = subst(ann, m);
        std::string e = b;
        if (!a.emp_result.empty() && e.rfind("lower ", 0) == 0 && e.size() > 2 && e.substr(e.size() - 2) == " 0")
            e = "0";
        return display_assertion(ann, true) + "\n    & " + e;
    };
    section(3, "Unfold pattern matches using layouts.", any_pat || any_emp ? render_cases(true, false, stage3) : "");

    // 4
    bool any_copy = std::any_of(cd.arms.begin(), cd.arms.end(), [](const ArmTrace& a) { return !a.copies.empty(); });
    auto stage4 = [&](size_t arm, size_t, const std::string& b) {
        const ArmTrace& a = cd.arms[arm];
        if (a.copies.empty()) return b;
        Assertion ann;
        ann.spatial = a.copies;
        return display_assertion(subst(ann, rename_arm(a)), true) + "\n    & " + b;
    };
    section(4, "Insert copying predicate applications.", any_copy ? render_cases(true, false, stage4) : "");

    // 5
    bool any_let = std::any_of(cd.arms.begin(), cd.arms.end(), [](const ArmTrace& a) { return !a.lets.empty(); });
    auto stage5 = [&](size_t arm, size_t, const std::string& b) {
        const ArmTrace& a = cd.arms[arm];
        if (a.lets.empty()) return b;
        Assertion ann;
        ann.pure = a.lets;
        return display_assertion(subst(ann, rename_arm(a)), true) + "\n    & " + b;
    };
    section(5, "Translate lets.", any_let ? render_cases(true, false, stage5) : "");

    // 6
    {
        std::string s;
        size_t arm = 0;
        for (size_t ci = 0; ci < d.cases.size(); ++ci) {
            const ElabCase& ec = d.cases[ci];
            s += header_plain(ci);
            bool guarded = ec.bodies.size() > 1 || (ec.bodies.size() == 1 && ec.bodies[0].guard);
            for (size_t bi = 0; bi < ec.bodies.size(); ++bi, ++arm) {
                const ArmTrace& a = cd.arms[arm];
                std::string ann = display_assertion(subst(a.body, rename_arm(a)), true);
                if (guarded) {
                    StagePrinter gp{tp, d, true, 0};
                    std::string g = ec.bodies[bi].guard ? gp.show(ec.bodies[bi].guard, false) : "true";
                    s += "\n  | " + g + " :=\n    " + ann + ";";
                } else {
                    s += " :=\n    " + ann + ";";
                }
            }
            s += "\n";
        }
        section(6, "Unfold constructor applications.", s);
    }

    // 7
    {
        std::string s;
        std::vector<std::string> roots;
        for (const auto& p : d.params)
            if (!p.layout.is_base() && !p.layout.is_fn()) roots.push_back(p.layout.name);
        if (!d.result.layout.is_base()) roots.push_back(d.result.layout.name);
        for (const auto& n : layouts_closure(tp.env, roots)) {
            PredicateDef lp = translate_layout_predicate(*tp.env.layout(n));
            lp.inductive = true;
            s += emit_predicate(lp, Style::Minimal) + "\n";
        }
        PredicateDef p;
        p.inductive = true;
        p.name = cd.pred.name;
        for (const auto& prm : cd.pred.params) {
            auto it = base_names.find(prm.name);
            p.params.push_back({prm.sort, it == base_names.end() ? prm.name : it->second->name});
        }
        for (const auto& a : cd.arms) {
            auto m = rename_arm(a);
            Branch b;
            b.cond = subst(t_conj(a.conds), m);
            b.body = subst(a.body, m);
            p.branches.push_back(b);
        }
        s += emit_predicate(p, Style::Minimal);
        section(7, "Generation.", s);
    }
    return out;
}

}  // namespace pika
