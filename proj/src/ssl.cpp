#include "pika/ssl.hpp"

#include <cctype>
#include <functional>

#include "pika/diag.hpp"

namespace pika::ssl {

using K = Term::Kind;

TermPtr t_int(long long v) {
    auto t = std::make_shared<Term>();
    t->kind = K::Int;
    t->ival = v;
    return t;
}
TermPtr t_bool(bool b) {
    auto t = std::make_shared<Term>();
    t->kind = K::Bool;
    t->bval = b;
    return t;
}
TermPtr t_var(std::string n) {
    auto t = std::make_shared<Term>();
    t->kind = K::Var;
    t->name = std::move(n);
    return t;
}
TermPtr t_bin(K k, TermPtr a, TermPtr b) {
    auto t = std::make_shared<Term>();
    t->kind = k;
    t->args = {std::move(a), std::move(b)};
    return t;
}
TermPtr t_eq(TermPtr a, TermPtr b) { return t_bin(K::Eq, std::move(a), std::move(b)); }
TermPtr t_and(TermPtr a, TermPtr b) { return t_bin(K::And, std::move(a), std::move(b)); }
TermPtr t_not(TermPtr a) {
    auto t = std::make_shared<Term>();
    t->kind = K::Not;
    t->args = {std::move(a)};
    return t;
}
TermPtr t_ite(TermPtr c, TermPtr a, TermPtr b) {
    auto t = std::make_shared<Term>();
    t->kind = K::Ite;
    t->args = {std::move(c), std::move(a), std::move(b)};
    return t;
}

bool is_true(const TermPtr& t) { return t && t->kind == K::Bool && t->bval; }

TermPtr t_conj(const std::vector<TermPtr>& cs) {
    TermPtr acc;
    for (const auto& c : cs) {
        if (is_true(c)) continue;
        acc = acc ? t_and(acc, c) : c;
    }
    return acc ? acc : t_bool(true);
}

std::vector<TermPtr> conjuncts(const TermPtr& t) {
    std::vector<TermPtr> out;
    std::function<void(const TermPtr&)> go = [&](const TermPtr& x) {
        if (!x || is_true(x)) return;
        if (x->kind == K::And) {
            go(x->args[0]);
            go(x->args[1]);
        } else {
            out.push_back(x);
        }
    };
    go(t);
    return out;
}

bool same_term(const TermPtr& a, const TermPtr& b) {
    if (a->kind != b->kind || a->ival != b->ival || a->bval != b->bval || a->name != b->name ||
        a->args.size() != b->args.size())
        return false;
    for (size_t i = 0; i < a->args.size(); ++i)
        if (!same_term(a->args[i], b->args[i])) return false;
    return true;
}

void term_vars(const TermPtr& t, std::set<std::string>& out) {
    if (t->kind == K::Var) out.insert(t->name);
    for (const auto& a : t->args) term_vars(a, out);
}

TermPtr subst(const TermPtr& t, const std::map<std::string, TermPtr>& m) {
    if (t->kind == K::Var) {
        auto it = m.find(t->name);
        return it == m.end() ? t : it->second;
    }
    if (t->args.empty()) return t;
    auto c = std::make_shared<Term>(*t);
    for (auto& a : c->args) a = subst(a, m);
    return c;
}

namespace {

const char* op_text(K k) {
    switch (k) {
        case K::Eq: return "==";
        case K::And: return "&&";
        case K::Or: return "||";
        case K::Lt: return "<";
        case K::Add: return "+";
        case K::Sub: return "-";
        case K::Mod: return "%";
        default: return "?";
    }
}

int level(K k) {
    switch (k) {
        case K::Ite: return 0;
        case K::Or: return 1;
        case K::And: return 2;
        case K::Eq:
        case K::Lt: return 3;
        case K::Add:
        case K::Sub: return 4;
        case K::Mod: return 5;
        case K::Not: return 6;
        default: return 7;
    }
}

std::string full(const TermPtr& t) {
    switch (t->kind) {
        case K::Int: return std::to_string(t->ival);
        case K::Bool: return t->bval ? "true" : "false";
        case K::Var: return t->name;
        case K::Not: return "(not " + full(t->args[0]) + ")";
        case K::Ite: return "(" + full(t->args[0]) + " ? " + full(t->args[1]) + " : " + full(t->args[2]) + ")";
        default: return "(" + full(t->args[0]) + " " + op_text(t->kind) + " " + full(t->args[1]) + ")";
    }
}

std::string minimal(const TermPtr& t, int ctx) {
    int my = level(t->kind);
    std::string s;
    switch (t->kind) {
        case K::Int: s = std::to_string(t->ival); break;
        case K::Bool: s = t->bval ? "true" : "false"; break;
        case K::Var: s = t->name; break;
        case K::Not: s = "not " + minimal(t->args[0], 7); break;
        case K::Ite:
            s = minimal(t->args[0], 1) + " ? " + minimal(t->args[1], 1) + " : " + minimal(t->args[2], 0);
            break;
        case K::Eq:
        case K::Lt: s = minimal(t->args[0], 4) + " " + op_text(t->kind) + " " + minimal(t->args[1], 4); break;
        default: s = minimal(t->args[0], my) + " " + op_text(t->kind) + " " + minimal(t->args[1], my + 1); break;
    }
    return my < ctx ? "(" + s + ")" : s;
}

// A pure conjunct at the top of an assertion drops its outermost parentheses.
std::string top(const TermPtr& t, Style s) {
    if (s == Style::Minimal) return minimal(t, 0);
    switch (t->kind) {
        case K::Int:
        case K::Bool:
        case K::Var: return full(t);
        case K::Not: return "not " + full(t->args[0]);
        case K::Ite: return full(t->args[0]) + " ? " + full(t->args[1]) + " : " + full(t->args[2]);
        default: return full(t->args[0]) + " " + op_text(t->kind) + " " + full(t->args[1]);
    }
}

std::string args_text(const std::vector<TermPtr>& as, Style s) {
    std::string out;
    for (size_t i = 0; i < as.size(); ++i) out += (i ? ", " : "") + print_term(as[i], s);
    return out;
}

std::string params_text(const std::vector<Param>& ps) {
    std::string out;
    for (size_t i = 0; i < ps.size(); ++i) out += (i ? ", " : "") + ps[i].sort + " " + ps[i].name;
    return out;
}

}  // namespace

std::string print_term(const TermPtr& t, Style s) { return s == Style::Full ? full(t) : minimal(t, 0); }

Heaplet h_emp() { return Heaplet{}; }
Heaplet h_pts(std::string base, int off, TermPtr v, bool readonly) {
    Heaplet h;
    h.kind = Heaplet::Kind::PointsTo;
    h.base = std::move(base);
    h.offset = off;
    h.value = std::move(v);
    h.readonly = readonly;
    return h;
}
Heaplet h_block(std::string base, int n) {
    Heaplet h;
    h.kind = Heaplet::Kind::Block;
    h.base = std::move(base);
    h.size = n;
    return h;
}
Heaplet h_pred(std::string name, std::vector<TermPtr> args) {
    Heaplet h;
    h.kind = Heaplet::Kind::PredApply;
    h.name = std::move(name);
    h.args = std::move(args);
    return h;
}
Heaplet h_func(std::string name, std::vector<TermPtr> args) {
    Heaplet h = h_pred(std::move(name), std::move(args));
    h.kind = Heaplet::Kind::FuncApply;
    return h;
}
Heaplet h_temp(std::string v) {
    Heaplet h;
    h.kind = Heaplet::Kind::Temp;
    h.base = std::move(v);
    return h;
}
Heaplet h_ro(std::string layout, std::vector<TermPtr> args) {
    Heaplet h = h_pred(std::move(layout), std::move(args));
    h.kind = Heaplet::Kind::RoPredApply;
    return h;
}

namespace {
std::string subst_base(const std::string& b, const std::map<std::string, TermPtr>& m) {
    auto it = m.find(b);
    if (it != m.end() && it->second->kind == K::Var) return it->second->name;
    return b;
}
}  // namespace

Heaplet subst(const Heaplet& h, const std::map<std::string, TermPtr>& m) {
    Heaplet c = h;
    if (!c.base.empty()) c.base = subst_base(c.base, m);
    if (c.value) c.value = subst(c.value, m);
    for (auto& a : c.args) a = subst(a, m);
    return c;
}

Assertion subst(const Assertion& a, const std::map<std::string, TermPtr>& m) {
    Assertion c;
    for (const auto& p : a.pure) c.pure.push_back(subst(p, m));
    for (const auto& h : a.spatial) c.spatial.push_back(subst(h, m));
    return c;
}

Assertion conj_otimes(const Assertion& a, const Assertion& b) {
    Assertion c;
    for (const auto* x : {&a, &b}) {
        for (const auto& p : x->pure)
            for (const auto& q : conjuncts(p)) c.pure.push_back(q);
        for (const auto& h : x->spatial)
            if (h.kind != Heaplet::Kind::Emp) c.spatial.push_back(h);
    }
    return c;
}

std::string emit_heaplet(const Heaplet& h, Style s) {
    switch (h.kind) {
        case Heaplet::Kind::Emp: return "emp";
        case Heaplet::Kind::PointsTo: {
            std::string loc = h.offset ? "(" + h.base + "+" + std::to_string(h.offset) + ")" : h.base;
            return loc + (h.readonly ? " :=> " : " :-> ") + print_term(h.value, s);
        }
        case Heaplet::Kind::Block: return "[" + h.base + "," + std::to_string(h.size) + "]";
        case Heaplet::Kind::PredApply: return h.name + "(" + args_text(h.args, s) + ")";
        case Heaplet::Kind::FuncApply: return "func " + h.name + "(" + args_text(h.args, s) + ")";
        case Heaplet::Kind::Temp: return "temploc " + h.base;
        case Heaplet::Kind::RoPredApply: return "ro_" + h.name + "(" + args_text(h.args, s) + ")";
    }
    return "";
}

std::string emit_assertion(const Assertion& a, Style s) {
    std::string pure;
    for (const auto& p : a.pure)
        for (const auto& c : conjuncts(p)) pure += (pure.empty() ? "" : " && ") + top(c, s);
    std::string sp;
    for (const auto& h : a.spatial) {
        if (h.kind == Heaplet::Kind::Emp) continue;
        sp += (sp.empty() ? "" : " ** ") + emit_heaplet(h, s);
    }
    if (sp.empty()) sp = "emp";
    return "{ " + (pure.empty() ? "" : pure + " ; ") + sp + " }";
}

std::string emit_predicate(const PredicateDef& p, Style s) {
    std::string out = (p.inductive ? "inductive " : "predicate ") + p.name + "(" + params_text(p.params) + ") {\n";
    for (const auto& b : p.branches) out += "| " + print_term(b.cond, s) + " => " + emit_assertion(b.body, s) + "\n";
    return out + "}\n";
}

std::string emit_goal_spec(const GoalSpec& g) {
    return "void " + g.fn + "(" + params_text(g.params) + ")\n  " + emit_assertion(g.pre) + "\n  " +
           emit_assertion(g.post) + "\n{ ?? }\n";
}

const PredicateDef* SslFile::pred(const std::string& n) const {
    for (const auto& p : preds)
        if (p.name == n) return &p;
    return nullptr;
}

// ---------------------------------------------------------------- parsing

namespace {

struct STok {
    enum Kind { Ident, Int, Sym, End } kind;
    std::string text;
    long long value = 0;
    int line = 0, col = 0;
};

std::vector<STok> slex(const std::string& s) {
    static const char* syms[] = {":->", ":=>", "=>", "==", "!=", "<=", "&&", "||", "**", "??", "<", "+", "-", "%",
                                 "?",   ":",   "(",  ")",  "{",  "}",  "[",  "]",  ",",  ";",  "|", "!"};
    std::vector<STok> out;
    int line = 1, col = 1;
    size_t i = 0;
    auto adv = [&](size_t n) {
        for (size_t k = 0; k < n; ++k) {
            if (s[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
            ++i;
        }
    };
    while (i < s.size()) {
        char c = s[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            adv(1);
            continue;
        }
        if (c == '/' && i + 1 < s.size() && s[i + 1] == '/') {
            while (i < s.size() && s[i] != '\n') adv(1);
            continue;
        }
        STok t{STok::Sym, "", 0, line, col};
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t j = i;
            while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_')) ++j;
            t.kind = STok::Ident;
            t.text = s.substr(i, j - i);
            adv(j - i);
            out.push_back(t);
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            size_t j = i;
            while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
            t.kind = STok::Int;
            t.text = s.substr(i, j - i);
            t.value = std::stoll(t.text);
            adv(j - i);
            out.push_back(t);
            continue;
        }
        bool found = false;
        for (const char* sym : syms) {
            std::string sy(sym);
            if (s.compare(i, sy.size(), sy) == 0) {
                t.text = sy;
                adv(sy.size());
                out.push_back(t);
                found = true;
                break;
            }
        }
        if (!found)
            throw PikaError("SslParseError", "", std::string("illegal character '") + c + "'", Span{line, col, line, col + 1});
    }
    out.push_back(STok{STok::End, "<end>", 0, line, col});
    return out;
}

struct SParser {
    std::vector<STok> toks;
    size_t pos = 0;

    const STok& peek(size_t k = 0) const { return toks[std::min(pos + k, toks.size() - 1)]; }
    bool is(const std::string& s, size_t k = 0) const {
        const STok& t = peek(k);
        return (t.kind == STok::Sym || t.kind == STok::Ident) && t.text == s;
    }
    [[noreturn]] void error(const std::string& what) const {
        const STok& t = peek();
        throw PikaError("SslParseError", "", "expected " + what + ", found '" + t.text + "'",
                        Span{t.line, t.col, t.line, t.col + static_cast<int>(t.text.size())});
    }
    void expect(const std::string& s) {
        if (!is(s)) error("'" + s + "'");
        ++pos;
    }
    std::string ident() {
        if (peek().kind != STok::Ident) error("identifier");
        return toks[pos++].text;
    }
    long long integer() {
        bool neg = false;
        if (is("-")) {
            neg = true;
            ++pos;
        }
        if (peek().kind != STok::Int) error("integer");
        long long v = toks[pos++].value;
        return neg ? -v : v;
    }

    TermPtr term() {
        TermPtr c = or_();
        if (is("?")) {
            ++pos;
            TermPtr a = term();
            expect(":");
            TermPtr b = term();
            return t_ite(c, a, b);
        }
        return c;
    }
    TermPtr or_() {
        TermPtr l = and_();
        while (is("||")) {
            ++pos;
            l = t_bin(K::Or, l, and_());
        }
        return l;
    }
    TermPtr and_() {
        TermPtr l = cmp();
        while (is("&&")) {
            ++pos;
            l = t_and(l, cmp());
        }
        return l;
    }
    TermPtr cmp() {
        TermPtr l = add();
        if (is("==")) {
            ++pos;
            return t_eq(l, add());
        }
        if (is("<")) {
            ++pos;
            return t_bin(K::Lt, l, add());
        }
        if (is("!=")) {
            ++pos;
            return t_not(t_eq(l, add()));
        }
        if (is("<=")) {
            ++pos;
            return t_not(t_bin(K::Lt, add(), l));
        }
        return l;
    }
    TermPtr add() {
        TermPtr l = mod();
        while (is("+") || is("-")) {
            K k = is("+") ? K::Add : K::Sub;
            ++pos;
            l = t_bin(k, l, mod());
        }
        return l;
    }
    TermPtr mod() {
        TermPtr l = unary();
        while (is("%")) {
            ++pos;
            l = t_bin(K::Mod, l, unary());
        }
        return l;
    }
    TermPtr unary() {
        if (is("not") || is("!")) {
            ++pos;
            return t_not(unary());
        }
        if (is("-") && peek(1).kind == STok::Int) return t_int(integer());
        return atom();
    }
    TermPtr atom() {
        const STok& t = peek();
        if (t.kind == STok::Int) return t_int(integer());
        if (is("(")) {
            ++pos;
            TermPtr e = term();
            expect(")");
            return e;
        }
        if (t.kind == STok::Ident) {
            ++pos;
            if (t.text == "true") return t_bool(true);
            if (t.text == "false") return t_bool(false);
            if (t.text == "null") return t_int(0);
            return t_var(t.text);
        }
        error("a term");
    }

    std::vector<TermPtr> call_args() {
        expect("(");
        std::vector<TermPtr> as;
        if (!is(")")) {
            as.push_back(term());
            while (is(",")) {
                ++pos;
                as.push_back(term());
            }
        }
        expect(")");
        return as;
    }

    Heaplet heaplet() {
        if (is("emp")) {
            ++pos;
            return h_emp();
        }
        if (is("[")) {
            ++pos;
            std::string b = ident();
            expect(",");
            int n = static_cast<int>(integer());
            expect("]");
            return h_block(b, n);
        }
        if (is("func")) {
            ++pos;
            std::string n = ident();
            return h_func(n, call_args());
        }
        if ((is("temploc") || is("temp")) && peek(1).kind == STok::Ident) {
            ++pos;
            return h_temp(ident());
        }
        if (peek().kind == STok::Ident && is("(", 1)) {
            std::string n = ident();
            auto as = call_args();
            if (n.rfind("ro_", 0) == 0) return h_ro(n.substr(3), as);
            return h_pred(n, as);
        }
        TermPtr loc = add();
        std::string base;
        int off = 0;
        if (loc->kind == K::Var) {
            base = loc->name;
        } else if (loc->kind == K::Add && loc->args[0]->kind == K::Var && loc->args[1]->kind == K::Int) {
            base = loc->args[0]->name;
            off = static_cast<int>(loc->args[1]->ival);
        } else {
            error("a location");
        }
        bool ro = false;
        if (is(":=>")) {
            ro = true;
        } else if (!is(":->")) {
            error("':->'");
        }
        ++pos;
        return h_pts(base, off, or_(), ro);
    }

    bool top_level_semi() const {
        int depth = 0;
        for (size_t k = pos; k < toks.size(); ++k) {
            const STok& t = toks[k];
            if (t.kind != STok::Sym) continue;
            if (t.text == "(" || t.text == "[" || t.text == "{") ++depth;
            if (t.text == ")" || t.text == "]") --depth;
            if (t.text == "}") {
                if (depth == 0) return false;
                --depth;
            }
            if (t.text == ";" && depth == 0) return true;
        }
        return false;
    }

    Assertion assertion() {
        expect("{");
        Assertion a;
        if (top_level_semi()) {
            a.pure = conjuncts(term());
            expect(";");
        }
        Heaplet h = heaplet();
        if (h.kind != Heaplet::Kind::Emp) a.spatial.push_back(h);
        while (is("**")) {
            ++pos;
            h = heaplet();
            if (h.kind != Heaplet::Kind::Emp) a.spatial.push_back(h);
        }
        expect("}");
        return a;
    }

    std::vector<Param> params() {
        expect("(");
        std::vector<Param> ps;
        if (!is(")")) {
            do {
                if (is(",")) ++pos;
                Param p;
                p.sort = ident();
                p.name = ident();
                ps.push_back(p);
            } while (is(","));
        }
        expect(")");
        return ps;
    }

    SslFile file() {
        SslFile f;
        while (peek().kind != STok::End) {
            if (is("predicate") || is("inductive")) {
                PredicateDef p;
                p.inductive = is("inductive");
                ++pos;
                p.name = ident();
                p.params = params();
                expect("{");
                while (is("|")) {
                    ++pos;
                    Branch b;
                    b.cond = term();
                    expect("=>");
                    b.body = assertion();
                    p.branches.push_back(std::move(b));
                }
                expect("}");
                f.preds.push_back(std::move(p));
            } else if (is("void")) {
                ++pos;
                GoalSpec g;
                g.fn = ident();
                g.params = params();
                g.pre = assertion();
                g.post = assertion();
                expect("{");
                expect("??");
                expect("}");
                f.goals.push_back(std::move(g));
            } else {
                error("'predicate' or 'void'");
            }
        }
        return f;
    }
};

}  // namespace

SslFile parse_ssl(const std::string& text) {
    SParser p{slex(text)};
    return p.file();
}

PredicateDef parse_predicate(const std::string& text) {
    SslFile f = parse_ssl(text);
    if (f.preds.empty()) throw PikaError("SslParseError", "", "no predicate in input");
    return f.preds.front();
}

// ------------------------------------------------------ structural equality

namespace {

struct Bij {
    std::map<std::string, std::string> fwd, bwd;
    std::string self_a, self_b;

    bool var(const std::string& a, const std::string& b) {
        auto f = fwd.find(a);
        if (f != fwd.end()) return f->second == b;
        if (bwd.count(b)) return false;
        fwd[a] = b;
        bwd[b] = a;
        return true;
    }
    bool pred_name(const std::string& a, const std::string& b) const {
        if (a == self_a || b == self_b) return a == self_a && b == self_b;
        return a == b;
    }
};

bool unify(const TermPtr& a, const TermPtr& b, Bij& m) {
    if (a->kind != b->kind || a->args.size() != b->args.size()) return false;
    switch (a->kind) {
        case K::Int: return a->ival == b->ival;
        case K::Bool: return a->bval == b->bval;
        case K::Var: return m.var(a->name, b->name);
        default: break;
    }
    if (a->kind == K::Eq || a->kind == K::Add) {
        Bij save = m;
        if (unify(a->args[0], b->args[0], m) && unify(a->args[1], b->args[1], m)) return true;
        m = save;
        if (unify(a->args[0], b->args[1], m) && unify(a->args[1], b->args[0], m)) return true;
        m = save;
        return false;
    }
    for (size_t i = 0; i < a->args.size(); ++i)
        if (!unify(a->args[i], b->args[i], m)) return false;
    return true;
}

bool unify(const Heaplet& a, const Heaplet& b, Bij& m) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case Heaplet::Kind::Emp: return true;
        case Heaplet::Kind::PointsTo:
            return a.offset == b.offset && a.readonly == b.readonly && m.var(a.base, b.base) &&
                   unify(a.value, b.value, m);
        case Heaplet::Kind::Block: return a.size == b.size && m.var(a.base, b.base);
        case Heaplet::Kind::Temp: return m.var(a.base, b.base);
        default: break;
    }
    if (!m.pred_name(a.name, b.name) || a.args.size() != b.args.size()) return false;
    for (size_t i = 0; i < a.args.size(); ++i)
        if (!unify(a.args[i], b.args[i], m)) return false;
    return true;
}

struct Item {
    int cat;  // 0 heaplet, 1 pure, 2 cond
    const Heaplet* h = nullptr;
    TermPtr t;
};

std::vector<Item> items(const Branch& br) {
    std::vector<Item> out;
    for (const auto& h : br.body.spatial)
        if (h.kind != Heaplet::Kind::Emp) out.push_back({0, &h, nullptr});
    for (const auto& p : br.body.pure)
        for (const auto& c : conjuncts(p)) out.push_back({1, nullptr, c});
    for (const auto& c : conjuncts(br.cond)) out.push_back({2, nullptr, c});
    return out;
}

bool match_items(const std::vector<Item>& as, const std::vector<Item>& bs, size_t i, std::vector<bool>& used,
                 Bij& m) {
    if (i == as.size()) return true;
    for (size_t j = 0; j < bs.size(); ++j) {
        if (used[j] || bs[j].cat != as[i].cat) continue;
        Bij save = m;
        bool ok = as[i].cat == 0 ? unify(*as[i].h, *bs[j].h, m) : unify(as[i].t, bs[j].t, m);
        if (ok) {
            used[j] = true;
            if (match_items(as, bs, i + 1, used, m)) return true;
            used[j] = false;
        }
        m = save;
    }
    return false;
}

bool match_branch(const Branch& a, const Branch& b, const Bij& base) {
    auto as = items(a), bs = items(b);
    if (as.size() != bs.size()) return false;
    Bij m = base;
    std::vector<bool> used(bs.size(), false);
    return match_items(as, bs, 0, used, m);
}

bool perfect_matching(const std::vector<std::vector<bool>>& ok, size_t i, std::vector<bool>& used) {
    if (i == ok.size()) return true;
    for (size_t j = 0; j < ok.size(); ++j) {
        if (used[j] || !ok[i][j]) continue;
        used[j] = true;
        if (perfect_matching(ok, i + 1, used)) return true;
        used[j] = false;
    }
    return false;
}

}  // namespace

bool structural_equiv(const PredicateDef& a, const PredicateDef& b) {
    if (a.params.size() != b.params.size() || a.branches.size() != b.branches.size()) return false;
    Bij base;
    base.self_a = a.name;
    base.self_b = b.name;
    for (size_t i = 0; i < a.params.size(); ++i)
        if (a.params[i].sort != b.params[i].sort || !base.var(a.params[i].name, b.params[i].name)) return false;
    size_t n = a.branches.size();
    std::vector<std::vector<bool>> ok(n, std::vector<bool>(n));
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j) ok[i][j] = match_branch(a.branches[i], b.branches[j], base);
    std::vector<bool> used(n, false);
    return perfect_matching(ok, 0, used);
}

int count_nodes(const TermPtr& t) {
    int n = 1;
    for (const auto& a : t->args) n += count_nodes(a);
    return n;
}

int count_nodes(const Assertion& a) {
    int n = 0;
    for (const auto& p : a.pure)
        for (const auto& c : conjuncts(p)) n += count_nodes(c);
    for (const auto& h : a.spatial) {
        switch (h.kind) {
            case Heaplet::Kind::Emp: n += 1; break;
            case Heaplet::Kind::PointsTo: n += 2 + (h.offset ? 1 : 0) + count_nodes(h.value); break;
            case Heaplet::Kind::Block: n += 3; break;
            case Heaplet::Kind::Temp: n += 2; break;
            default:
                n += 2;
                for (const auto& x : h.args) n += count_nodes(x);
        }
    }
    return n;
}

int count_nodes(const PredicateDef& p) {
    int n = 2 + 2 * static_cast<int>(p.params.size());
    for (const auto& b : p.branches) n += 1 + count_nodes(b.cond) + count_nodes(b.body);
    return n;
}

int count_nodes(const GoalSpec& g) {
    return 2 + 2 * static_cast<int>(g.params.size()) + count_nodes(g.pre) + count_nodes(g.post);
}

int count_nodes(const SslFile& f) {
    int n = 0;
    for (const auto& p : f.preds) n += count_nodes(p);
    for (const auto& g : f.goals) n += count_nodes(g);
    return n;
}

}  // namespace pika::ssl
