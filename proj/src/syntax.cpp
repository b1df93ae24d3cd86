#include "pika/syntax.hpp"

#include <cctype>
#include <map>
#include <set>
#include <sstream>

namespace pika {

const char* tok_name(Tok t) {
    switch (t) {
        case Tok::Ident: return "identifier";
        case Tok::Int: return "integer";
        case Tok::KwData: return "'data'";
        case Tok::KwLet: return "'let'";
        case Tok::KwIn: return "'in'";
        case Tok::KwIf: return "'if'";
        case Tok::KwThen: return "'then'";
        case Tok::KwElse: return "'else'";
        case Tok::KwNot: return "'not'";
        case Tok::KwAddr: return "'addr'";
        case Tok::KwInstantiate: return "'instantiate'";
        case Tok::KwLower: return "'lower'";
        case Tok::KwTrue: return "'true'";
        case Tok::KwFalse: return "'false'";
        case Tok::DirectiveGenerate: return "'%generate'";
        case Tok::Assign: return "':='";
        case Tok::PointsToArrow: return "':->'";
        case Tok::ReadOnlyArrow: return "':=>'";
        case Tok::LayoutArrow: return "'>->'";
        case Tok::Arrow: return "'->'";
        case Tok::Colon: return "':'";
        case Tok::Semi: return "';'";
        case Tok::Comma: return "','";
        case Tok::Bar: return "'|'";
        case Tok::OrOr: return "'||'";
        case Tok::AndAnd: return "'&&'";
        case Tok::EqEq: return "'=='";
        case Tok::Less: return "'<'";
        case Tok::Plus: return "'+'";
        case Tok::Minus: return "'-'";
        case Tok::Percent: return "'%'";
        case Tok::LParen: return "'('";
        case Tok::RParen: return "')'";
        case Tok::LBracket: return "'['";
        case Tok::RBracket: return "']'";
        case Tok::End: return "end of input";
    }
    return "?";
}

std::vector<Token> lex(const std::string& text) {
    static const std::map<std::string, Tok> keywords = {
        {"data", Tok::KwData},         {"let", Tok::KwLet},     {"in", Tok::KwIn},
        {"if", Tok::KwIf},             {"then", Tok::KwThen},   {"else", Tok::KwElse},
        {"not", Tok::KwNot},           {"addr", Tok::KwAddr},   {"instantiate", Tok::KwInstantiate},
        {"lower", Tok::KwLower},       {"true", Tok::KwTrue},   {"false", Tok::KwFalse},
    };
    // longest first
    static const std::vector<std::pair<std::string, Tok>> symbols = {
        {":->", Tok::PointsToArrow}, {":=>", Tok::ReadOnlyArrow}, {">->", Tok::LayoutArrow},
        {":=", Tok::Assign},         {"->", Tok::Arrow},          {"||", Tok::OrOr},
        {"&&", Tok::AndAnd},         {"==", Tok::EqEq},           {":", Tok::Colon},
        {";", Tok::Semi},            {",", Tok::Comma},           {"|", Tok::Bar},
        {"<", Tok::Less},            {"+", Tok::Plus},            {"-", Tok::Minus},
        {"%", Tok::Percent},         {"(", Tok::LParen},          {")", Tok::RParen},
        {"[", Tok::LBracket},        {"]", Tok::RBracket},
    };

    std::vector<Token> out;
    size_t i = 0;
    int line = 1, col = 1;
    auto advance = [&](size_t n) {
        for (size_t k = 0; k < n; ++k) {
            if (text[i] == '\n') { ++line; col = 1; } else { ++col; }
            ++i;
        }
    };
    while (i < text.size()) {
        char c = text[i];
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n') { advance(1); continue; }
        if (c == '-' && i + 1 < text.size() && text[i + 1] == '-') {
            while (i < text.size() && text[i] != '\n') advance(1);
            continue;
        }
        Span sp{line, col, line, col};
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t j = i;
            while (j < text.size() && (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_' || text[j] == '\''))
                ++j;
            std::string word = text.substr(i, j - i);
            auto kw = keywords.find(word);
            Token t{kw == keywords.end() ? Tok::Ident : kw->second, word, 0, sp};
            advance(j - i);
            t.span.end_line = line;
            t.span.end_col = col;
            out.push_back(t);
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            size_t j = i;
            while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
            std::string digits = text.substr(i, j - i);
            Token t{Tok::Int, digits, std::stoll(digits), sp};
            advance(j - i);
            t.span.end_line = line;
            t.span.end_col = col;
            out.push_back(t);
            continue;
        }
        if (text.compare(i, 9, "%generate") == 0) {
            Token t{Tok::DirectiveGenerate, "%generate", 0, sp};
            advance(9);
            t.span.end_line = line;
            t.span.end_col = col;
            out.push_back(t);
            continue;
        }
        bool matched = false;
        for (const auto& [sym, kind] : symbols) {
            if (text.compare(i, sym.size(), sym) == 0) {
                Token t{kind, sym, 0, sp};
                advance(sym.size());
                t.span.end_line = line;
                t.span.end_col = col;
                out.push_back(t);
                matched = true;
                break;
            }
        }
        if (matched) continue;
        std::string bad;
        unsigned char uc = static_cast<unsigned char>(c);
        size_t len = uc < 0x80 ? 1 : (uc >> 5) == 0x6 ? 2 : (uc >> 4) == 0xE ? 3 : 4;
        bad = text.substr(i, len);
        throw PikaError("LexError", "", "illegal character '" + bad + "'", sp);
    }
    out.push_back(Token{Tok::End, "", 0, Span{line, col, line, col}});
    return out;
}

// ---------------------------------------------------------------- types

std::vector<TypeExpr> TypeExpr::params() const {
    if (kind != Kind::Fn) return {};
    return std::vector<TypeExpr>(parts.begin(), parts.end() - 1);
}

TypeExpr TypeExpr::result() const {
    if (kind != Kind::Fn) return *this;
    return parts.back();
}

bool operator==(const TypeExpr& a, const TypeExpr& b) {
    return a.kind == b.kind && a.name == b.name && a.parts == b.parts;
}

std::string show_type(const TypeExpr& t) {
    switch (t.kind) {
        case TypeExpr::Kind::Int: return "Int";
        case TypeExpr::Kind::Bool: return "Bool";
        case TypeExpr::Kind::PtrInt: return "Ptr Int";
        case TypeExpr::Kind::Adt: return t.name;
        case TypeExpr::Kind::Layout: return t.name;
        case TypeExpr::Kind::Fn: {
            std::string s;
            for (size_t i = 0; i < t.parts.size(); ++i) {
                if (i) s += " -> ";
                const auto& p = t.parts[i];
                bool paren = p.kind == TypeExpr::Kind::Fn || (p.kind == TypeExpr::Kind::PtrInt && false);
                s += paren ? "(" + show_type(p) + ")" : show_type(p);
            }
            return s;
        }
    }
    return "?";
}

// ---------------------------------------------------------------- AST helpers

ExprPtr mk_int(long long v, Span s) {
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::Int;
    e->ival = v;
    e->span = s;
    return e;
}
ExprPtr mk_bool(bool b, Span s) {
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::Bool;
    e->bval = b;
    e->span = s;
    return e;
}
ExprPtr mk_var(std::string n, Span s) {
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::Var;
    e->name = std::move(n);
    e->span = s;
    return e;
}
ExprPtr mk_binop(std::string op, ExprPtr l, ExprPtr r, Span s) {
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::BinOp;
    e->name = std::move(op);
    e->args = {std::move(l), std::move(r)};
    e->span = s;
    return e;
}
ExprPtr mk_not(ExprPtr x, Span s) {
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::Not;
    e->args = {std::move(x)};
    e->span = s;
    return e;
}
ExprPtr mk_ctor(std::string c, std::vector<ExprPtr> args, Span s) {
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::Ctor;
    e->name = std::move(c);
    e->args = std::move(args);
    e->span = s;
    return e;
}
ExprPtr mk_app(std::string f, std::vector<ExprPtr> args, Span s) {
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::App;
    e->name = std::move(f);
    e->args = std::move(args);
    e->span = s;
    return e;
}
ExprPtr mk_lower(LayoutRef l, ExprPtr x, Span s) {
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::Lower;
    e->layout = std::move(l);
    e->args = {std::move(x)};
    e->span = s;
    return e;
}
ExprPtr mk_inst(std::vector<LayoutRef> args, LayoutRef res, std::string f, std::vector<ExprPtr> xs, Span s) {
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::Instantiate;
    e->arg_layouts = std::move(args);
    e->layout = std::move(res);
    e->name = std::move(f);
    e->args = std::move(xs);
    e->span = s;
    return e;
}

ExprPtr clone(const ExprPtr& e) {
    if (!e) return nullptr;
    auto c = std::make_shared<Expr>(*e);
    for (auto& a : c->args) a = clone(a);
    return c;
}

ExprPtr rename_vars(const ExprPtr& e, const std::map<std::string, std::string>& m) {
    if (!e) return nullptr;
    auto c = std::make_shared<Expr>(*e);
    if (c->kind == Expr::Kind::Var || c->kind == Expr::Kind::Addr) {
        auto it = m.find(c->name);
        if (it != m.end()) c->name = it->second;
    }
    if (c->kind == Expr::Kind::Let && m.count(c->name)) {
        auto inner = m;
        inner.erase(c->name);
        c->args[0] = rename_vars(c->args[0], m);
        c->args[1] = rename_vars(c->args[1], inner);
        return c;
    }
    for (auto& a : c->args) a = rename_vars(a, m);
    return c;
}

bool LayoutBranch::is_emp() const {
    for (const auto& h : body)
        if (h.kind != LayoutHeaplet::Kind::Emp) return false;
    return true;
}

const LayoutBranch* LayoutDef::branch_for(const std::string& ctor) const {
    for (const auto& b : branches)
        if (b.pat.name == ctor) return &b;
    return nullptr;
}

const FnSig* SourceUnit::sig(const std::string& n) const {
    for (const auto& s : fn_sigs)
        if (s.name == n) return &s;
    return nullptr;
}
const FnDef* SourceUnit::def(const std::string& n) const {
    for (const auto& d : fn_defs)
        if (d.name == n) return &d;
    return nullptr;
}
const LayoutDef* SourceUnit::layout(const std::string& n) const {
    for (const auto& l : layout_defs)
        if (l.name == n) return &l;
    return nullptr;
}
const DataDef* SourceUnit::data(const std::string& n) const {
    for (const auto& d : data_defs)
        if (d.name == n) return &d;
    return nullptr;
}

// ---------------------------------------------------------------- parser

namespace {

bool is_upper_ident(const Token& t) {
    return t.kind == Tok::Ident && std::isupper(static_cast<unsigned char>(t.text[0]));
}

class Parser {
public:
    explicit Parser(const std::vector<Token>& t) : toks_(t) {}

    SourceUnit program() {
        SourceUnit u;
        struct PendingLayout {
            std::string name;
            std::vector<LayoutBranch> branches;
            Span span;
        };
        std::vector<PendingLayout> cases;
        while (!at(Tok::End)) {
            if (at(Tok::DirectiveGenerate)) {
                u.directives.push_back(directive());
                accept(Tok::Semi);
            } else if (at(Tok::KwData)) {
                u.data_defs.push_back(data_def());
            } else if (at(Tok::Ident) && peek(1).kind == Tok::Colon) {
                if (peek(2).kind == Tok::Ident && peek(3).kind == Tok::LayoutArrow) {
                    LayoutDef l;
                    l.span = cur().span;
                    l.name = next().text;
                    expect(Tok::Colon);
                    l.adt = expect(Tok::Ident).text;
                    expect(Tok::LayoutArrow);
                    expect_word("layout");
                    expect(Tok::LBracket);
                    l.params.push_back(expect(Tok::Ident).text);
                    while (accept(Tok::Comma)) l.params.push_back(expect(Tok::Ident).text);
                    expect(Tok::RBracket);
                    expect(Tok::Semi);
                    u.layout_defs.push_back(l);
                } else {
                    FnSig s;
                    s.span = cur().span;
                    s.name = next().text;
                    expect(Tok::Colon);
                    s.type = type();
                    expect(Tok::Semi);
                    u.fn_sigs.push_back(s);
                }
            } else if (is_upper_ident(cur())) {
                Span sp = cur().span;
                std::string name = next().text;
                LayoutBranch b;
                b.pat = pattern(true);
                expect(Tok::Assign);
                b.body.push_back(layout_heaplet());
                while (accept(Tok::Comma)) b.body.push_back(layout_heaplet());
                // a layout case may omit its final ';'
                if (!accept(Tok::Semi) && !at(Tok::End) && !at_statement_start())
                    fail({Tok::Semi});
                cases.push_back({name, {b}, sp});
            } else if (at(Tok::Ident)) {
                FnCase c = fn_case();
                FnDef* d = nullptr;
                for (auto& x : u.fn_defs)
                    if (x.name == c.fn) d = &x;
                if (!d) {
                    u.fn_defs.push_back(FnDef{c.fn, {}});
                    d = &u.fn_defs.back();
                }
                d->cases.push_back(std::move(c));
            } else {
                fail({Tok::DirectiveGenerate, Tok::KwData, Tok::Ident});
            }
        }
        for (auto& pc : cases) {
            LayoutDef* l = nullptr;
            for (auto& x : u.layout_defs)
                if (x.name == pc.name) l = &x;
            if (!l)
                throw PikaError("ParseError", "", "layout case for '" + pc.name + "' has no layout signature", pc.span);
            for (auto& b : pc.branches) l->branches.push_back(std::move(b));
        }
        return u;
    }

    ExprPtr expr_only() {
        ExprPtr e = expr();
        if (!at(Tok::End)) fail({Tok::End});
        return e;
    }

private:
    const std::vector<Token>& toks_;
    size_t pos_ = 0;

    const Token& cur() const { return toks_[pos_]; }
    const Token& peek(size_t k) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
    bool at(Tok k) const { return cur().kind == k; }
    const Token& next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
    bool accept(Tok k) {
        if (!at(k)) return false;
        next();
        return true;
    }
    const Token& expect(Tok k) {
        if (!at(k)) fail({k});
        return next();
    }
    void expect_word(const std::string& w) {
        if (!(at(Tok::Ident) && cur().text == w))
            throw PikaError("ParseError", "", "expected '" + w + "', found " + describe(cur()), cur().span);
        next();
    }
    static std::string describe(const Token& t) {
        if (t.kind == Tok::End) return "end of input";
        return "'" + t.text + "'";
    }
    [[noreturn]] void fail(std::initializer_list<Tok> expected) {
        std::string msg = "expected one of {";
        bool first = true;
        for (Tok k : expected) {
            if (!first) msg += ", ";
            msg += tok_name(k);
            first = false;
        }
        msg += "}, found " + describe(cur());
        throw PikaError("ParseError", "", msg, cur().span);
    }
    bool at_statement_start() const {
        return at(Tok::DirectiveGenerate) || at(Tok::KwData) || (at(Tok::Ident) && peek(1).kind == Tok::Colon) ||
               is_upper_ident(cur());
    }

    GenerateDirective directive() {
        GenerateDirective d;
        d.span = cur().span;
        expect(Tok::DirectiveGenerate);
        d.fn = expect(Tok::Ident).text;
        d.args = layout_list();
        d.result = layout_atom();
        return d;
    }

    std::vector<LayoutRef> layout_list() {
        std::vector<LayoutRef> out;
        expect(Tok::LBracket);
        while (!at(Tok::RBracket)) {
            out.push_back(layout_item());
            if (!accept(Tok::Comma) && !at(Tok::RBracket) && !at(Tok::Ident) && !at(Tok::LParen))
                fail({Tok::Comma, Tok::RBracket});
        }
        expect(Tok::RBracket);
        return out;
    }

    LayoutRef layout_item() {
        LayoutRef first = layout_atom();
        if (!at(Tok::Arrow)) return first;
        LayoutRef f;
        f.span = first.span;
        f.fn.push_back(first);
        while (accept(Tok::Arrow)) f.fn.push_back(layout_atom());
        return f;
    }

    LayoutRef layout_atom() {
        LayoutRef l;
        l.span = cur().span;
        if (accept(Tok::LParen)) {
            LayoutRef inner = layout_item();
            expect(Tok::RParen);
            return inner;
        }
        const Token& t = expect(Tok::Ident);
        if (t.text == "Ptr") {
            if (!(at(Tok::Ident) && cur().text == "Int"))
                throw PikaError("ParseError", "", "expected 'Int' after 'Ptr'", cur().span);
            next();
            l.name = "Ptr Int";
            return l;
        }
        l.name = t.text;
        if (at(Tok::LBracket) && peek(1).kind == Tok::Ident &&
            (peek(1).text == "readonly" || peek(1).text == "mutable") && peek(2).kind == Tok::RBracket) {
            next();
            l.mode = next().text == "mutable" ? Mode::Mutable : Mode::Readonly;
            l.mode_given = true;
            expect(Tok::RBracket);
        }
        return l;
    }

    DataDef data_def() {
        DataDef d;
        d.span = cur().span;
        expect(Tok::KwData);
        d.name = expect(Tok::Ident).text;
        expect(Tok::Assign);
        do {
            DataAlt a;
            a.ctor = expect(Tok::Ident).text;
            while (at(Tok::Ident) || at(Tok::LParen)) a.fields.push_back(type_atom());
            d.alts.push_back(a);
        } while (accept(Tok::Bar));
        expect(Tok::Semi);
        return d;
    }

    TypeExpr type() {
        TypeExpr first = type_atom();
        if (!at(Tok::Arrow)) return first;
        TypeExpr f;
        f.kind = TypeExpr::Kind::Fn;
        f.parts.push_back(first);
        while (accept(Tok::Arrow)) f.parts.push_back(type_atom());
        return f;
    }

    TypeExpr type_atom() {
        if (accept(Tok::LParen)) {
            TypeExpr t = type();
            expect(Tok::RParen);
            return t;
        }
        const Token& t = expect(Tok::Ident);
        if (t.text == "Int") return TypeExpr::int_();
        if (t.text == "Bool") return TypeExpr::bool_();
        if (t.text == "Ptr") {
            if (!(at(Tok::Ident) && cur().text == "Int"))
                throw PikaError("ParseError", "", "expected 'Int' after 'Ptr'", cur().span);
            next();
            return TypeExpr::ptr_int();
        }
        return TypeExpr::adt(t.text);
    }

    Pattern pattern(bool ctor_only) {
        Pattern p;
        p.span = cur().span;
        if (accept(Tok::LParen)) {
            // `(n)`: a parenthesised variable
            if (!ctor_only && at(Tok::Ident) && !is_upper_ident(cur()) && peek(1).kind == Tok::RParen) {
                p.name = next().text;
                next();
                return p;
            }
            if (!is_upper_ident(cur()))
                throw PikaError("ParseError", "", "expected constructor name in pattern, found " + describe(cur()),
                                cur().span);
            p.is_ctor = true;
            p.name = next().text;
            while (at(Tok::Ident)) p.vars.push_back(next().text);
            expect(Tok::RParen);
            return p;
        }
        if (is_upper_ident(cur())) {
            p.is_ctor = true;
            p.name = next().text;
            return p;
        }
        if (ctor_only) fail({Tok::LParen});
        p.name = expect(Tok::Ident).text;
        return p;
    }

    LayoutHeaplet layout_heaplet() {
        LayoutHeaplet h;
        if (at(Tok::Ident) && cur().text == "emp") {
            next();
            return h;
        }
        if (accept(Tok::LParen)) {
            h.kind = LayoutHeaplet::Kind::PointsTo;
            h.base = expect(Tok::Ident).text;
            expect(Tok::Plus);
            h.offset = static_cast<int>(expect(Tok::Int).value);
            expect(Tok::RParen);
            if (!accept(Tok::PointsToArrow)) expect(Tok::ReadOnlyArrow);
            h.payload = expect(Tok::Ident).text;
            return h;
        }
        const Token& a = expect(Tok::Ident);
        if (accept(Tok::PointsToArrow) || accept(Tok::ReadOnlyArrow)) {
            h.kind = LayoutHeaplet::Kind::PointsTo;
            h.base = a.text;
            h.payload = expect(Tok::Ident).text;
            return h;
        }
        h.kind = LayoutHeaplet::Kind::Apply;
        h.layout = a.text;
        h.arg = expect(Tok::Ident).text;
        return h;
    }

    FnCase fn_case() {
        FnCase c;
        c.span = cur().span;
        c.fn = expect(Tok::Ident).text;
        while (!at(Tok::Assign) && !at(Tok::Bar)) {
            if (!(at(Tok::Ident) || at(Tok::LParen))) fail({Tok::Assign, Tok::Bar, Tok::LParen, Tok::Ident});
            c.pats.push_back(pattern(false));
        }
        if (accept(Tok::Assign)) {
            c.bodies.push_back({nullptr, expr()});
            expect(Tok::Semi);
            return c;
        }
        while (accept(Tok::Bar)) {
            GuardedBody g;
            g.guard = expr();
            expect(Tok::Assign);
            g.body = expr();
            expect(Tok::Semi);
            c.bodies.push_back(g);
        }
        return c;
    }

    ExprPtr expr() {
        Span sp = cur().span;
        if (accept(Tok::KwLet)) {
            auto e = std::make_shared<Expr>();
            e->kind = Expr::Kind::Let;
            e->span = sp;
            e->name = expect(Tok::Ident).text;
            expect(Tok::Assign);
            ExprPtr bound = expr();
            expect(Tok::KwIn);
            ExprPtr body = expr();
            e->args = {bound, body};
            return e;
        }
        if (accept(Tok::KwIf)) {
            auto e = std::make_shared<Expr>();
            e->kind = Expr::Kind::If;
            e->span = sp;
            ExprPtr c = expr();
            expect(Tok::KwThen);
            ExprPtr t = expr();
            expect(Tok::KwElse);
            ExprPtr f = expr();
            e->args = {c, t, f};
            return e;
        }
        return or_expr();
    }

    ExprPtr or_expr() {
        ExprPtr l = and_expr();
        while (at(Tok::OrOr)) {
            Span sp = next().span;
            l = mk_binop("||", l, and_expr(), sp);
        }
        return l;
    }
    ExprPtr and_expr() {
        ExprPtr l = cmp_expr();
        while (at(Tok::AndAnd)) {
            Span sp = next().span;
            l = mk_binop("&&", l, cmp_expr(), sp);
        }
        return l;
    }
    ExprPtr cmp_expr() {
        ExprPtr l = add_expr();
        if (at(Tok::EqEq) || at(Tok::Less)) {
            const Token& op = next();
            return mk_binop(op.text, l, add_expr(), op.span);
        }
        return l;
    }
    ExprPtr add_expr() {
        ExprPtr l = mod_expr();
        while (at(Tok::Plus) || at(Tok::Minus)) {
            const Token& op = next();
            l = mk_binop(op.text, l, mod_expr(), op.span);
        }
        return l;
    }
    ExprPtr mod_expr() {
        ExprPtr l = unary();
        while (at(Tok::Percent)) {
            Span sp = next().span;
            l = mk_binop("%", l, unary(), sp);
        }
        return l;
    }
    ExprPtr unary() {
        Span sp = cur().span;
        if (accept(Tok::KwNot)) return mk_not(unary(), sp);
        if (accept(Tok::KwAddr)) {
            auto e = std::make_shared<Expr>();
            e->kind = Expr::Kind::Addr;
            e->span = sp;
            e->name = expect(Tok::Ident).text;
            return e;
        }
        if (at(Tok::Minus) && peek(1).kind == Tok::Int) {
            next();
            return mk_int(-next().value, sp);
        }
        return application();
    }

    bool atom_start() const {
        return at(Tok::Int) || at(Tok::Ident) || at(Tok::KwTrue) || at(Tok::KwFalse) || at(Tok::LParen);
    }

    ExprPtr application() {
        Span sp = cur().span;
        if (accept(Tok::KwInstantiate)) {
            std::vector<LayoutRef> args = layout_list();
            LayoutRef res = layout_atom();
            std::string f = expect(Tok::Ident).text;
            std::vector<ExprPtr> xs;
            while (atom_start()) xs.push_back(atom());
            return mk_inst(args, res, f, xs, sp);
        }
        if (accept(Tok::KwLower)) {
            LayoutRef l = layout_atom();
            return mk_lower(l, atom(), sp);
        }
        // `lower_Sll(e)` is accepted as shorthand for `lower Sll (e)`
        if (at(Tok::Ident) && cur().text.size() > 6 && cur().text.rfind("lower_", 0) == 0 &&
            peek(1).kind == Tok::LParen) {
            LayoutRef l;
            l.span = sp;
            l.name = next().text.substr(6);
            next();
            ExprPtr inner = expr();
            expect(Tok::RParen);
            return mk_lower(l, inner, sp);
        }
        if (at(Tok::Ident)) {
            bool ctor = is_upper_ident(cur());
            std::string head = next().text;
            std::vector<ExprPtr> xs;
            while (atom_start()) xs.push_back(atom());
            if (ctor) return mk_ctor(head, xs, sp);
            if (xs.empty()) return mk_var(head, sp);
            return mk_app(head, xs, sp);
        }
        return atom();
    }

    ExprPtr atom() {
        Span sp = cur().span;
        if (at(Tok::Int)) return mk_int(next().value, sp);
        if (accept(Tok::KwTrue)) return mk_bool(true, sp);
        if (accept(Tok::KwFalse)) return mk_bool(false, sp);
        if (at(Tok::Ident)) {
            bool ctor = is_upper_ident(cur());
            std::string n = next().text;
            return ctor ? mk_ctor(n, {}, sp) : mk_var(n, sp);
        }
        if (accept(Tok::LParen)) {
            ExprPtr e = expr();
            expect(Tok::RParen);
            return e;
        }
        fail({Tok::Int, Tok::Ident, Tok::KwTrue, Tok::KwFalse, Tok::LParen});
    }
};

}  // namespace

SourceUnit parse_program(const std::vector<Token>& toks) { return Parser(toks).program(); }

SourceUnit parse_program_text(const std::string& text) { return parse_program(lex(text)); }

ExprPtr parse_expr_text(const std::string& text) {
    auto toks = lex(text);
    return Parser(toks).expr_only();
}

// ---------------------------------------------------------------- printer

namespace {

enum Level { L_LOW = 0, L_OR, L_AND, L_CMP, L_ADD, L_MOD, L_UNARY, L_APP, L_ATOM };

int op_level(const std::string& op) {
    if (op == "||") return L_OR;
    if (op == "&&") return L_AND;
    if (op == "==" || op == "<") return L_CMP;
    if (op == "+" || op == "-") return L_ADD;
    return L_MOD;
}

std::string paren_if(bool p, const std::string& s) { return p ? "(" + s + ")" : s; }

std::string pe(const ExprPtr& e, int need) {
    using K = Expr::Kind;
    switch (e->kind) {
        case K::Int:
            return e->ival < 0 ? "(" + std::to_string(e->ival) + ")" : std::to_string(e->ival);
        case K::Null: return "0";
        case K::Bool: return e->bval ? "true" : "false";
        case K::Var: return e->name;
        case K::Ctor: {
            if (e->args.empty()) return e->name;
            std::string s = e->name;
            for (const auto& a : e->args) s += " " + pe(a, L_ATOM);
            return paren_if(need > L_APP, s);
        }
        case K::App: {
            std::string s = e->name;
            for (const auto& a : e->args) s += " " + pe(a, L_ATOM);
            return paren_if(need > L_APP, s);
        }
        case K::Instantiate: {
            std::string s = "instantiate [";
            for (size_t i = 0; i < e->arg_layouts.size(); ++i) {
                if (i) s += ", ";
                s += print_layout_ref(e->arg_layouts[i]);
            }
            s += "] " + print_layout_ref(e->layout, true) + " " + e->name;
            for (const auto& a : e->args) s += " " + pe(a, L_ATOM);
            return paren_if(need > L_APP, s);
        }
        case K::Lower:
            return paren_if(need > L_APP, "lower " + print_layout_ref(e->layout, true) + " " + pe(e->args[0], L_ATOM));
        case K::Addr: return paren_if(need > L_UNARY, "addr " + e->name);
        case K::Not: return paren_if(need > L_UNARY, "not " + pe(e->args[0], L_UNARY));
        case K::BinOp: {
            int lv = op_level(e->name);
            bool cmp = lv == L_CMP;
            std::string s = pe(e->args[0], cmp ? lv + 1 : lv) + " " + e->name + " " + pe(e->args[1], lv + 1);
            return paren_if(need > lv, s);
        }
        case K::Let: {
            std::string s = "let " + e->name + " := " + pe(e->args[0], L_LOW) + " in " + pe(e->args[1], L_LOW);
            return paren_if(need > L_LOW, s);
        }
        case K::If: {
            std::string s = "if " + pe(e->args[0], L_LOW) + " then " + pe(e->args[1], L_LOW) + " else " +
                            pe(e->args[2], L_LOW);
            return paren_if(need > L_LOW, s);
        }
    }
    return "?";
}

std::string type_atom_str(const TypeExpr& t) {
    if (t.kind == TypeExpr::Kind::Fn || t.kind == TypeExpr::Kind::PtrInt) return "(" + show_type(t) + ")";
    return show_type(t);
}

std::string pattern_str(const Pattern& p) {
    if (!p.is_ctor) return p.name;
    std::string s = "(" + p.name;
    for (const auto& v : p.vars) s += " " + v;
    return s + ")";
}

std::string layout_heaplet_str(const LayoutHeaplet& h) {
    switch (h.kind) {
        case LayoutHeaplet::Kind::Emp: return "emp";
        case LayoutHeaplet::Kind::PointsTo:
            if (h.offset == 0) return h.base + " :-> " + h.payload;
            return "(" + h.base + "+" + std::to_string(h.offset) + ") :-> " + h.payload;
        case LayoutHeaplet::Kind::Apply: return h.layout + " " + h.arg;
    }
    return "?";
}

}  // namespace

std::string print_layout_ref(const LayoutRef& l, bool result_position) {
    if (l.is_fn()) {
        std::string s;
        for (size_t i = 0; i < l.fn.size(); ++i) {
            if (i) s += " -> ";
            s += print_layout_ref(l.fn[i], true);
        }
        return result_position ? "(" + s + ")" : s;
    }
    if (l.name == "Ptr Int") return result_position ? "(Ptr Int)" : "Ptr Int";
    if (l.mode_given) return l.name + (l.mode == Mode::Mutable ? "[mutable]" : "[readonly]");
    return l.name;
}

std::string print_expr(const ExprPtr& e) { return pe(e, L_LOW); }

std::string pretty_print(const SourceUnit& u) {
    std::ostringstream out;
    for (const auto& d : u.directives) {
        out << "%generate " << d.fn << " [";
        for (size_t i = 0; i < d.args.size(); ++i) out << (i ? ", " : "") << print_layout_ref(d.args[i]);
        out << "] " << print_layout_ref(d.result, true) << "\n";
    }
    if (!u.directives.empty()) out << "\n";
    for (const auto& d : u.data_defs) {
        out << "data " << d.name << " := ";
        for (size_t i = 0; i < d.alts.size(); ++i) {
            if (i) out << " | ";
            out << d.alts[i].ctor;
            for (const auto& f : d.alts[i].fields) out << " " << type_atom_str(f);
        }
        out << ";\n";
    }
    if (!u.data_defs.empty()) out << "\n";
    for (const auto& l : u.layout_defs) {
        out << l.name << " : " << l.adt << " >-> layout[";
        for (size_t i = 0; i < l.params.size(); ++i) out << (i ? ", " : "") << l.params[i];
        out << "];\n";
        for (const auto& b : l.branches) {
            out << l.name << " " << pattern_str(b.pat) << " := ";
            for (size_t i = 0; i < b.body.size(); ++i) out << (i ? ", " : "") << layout_heaplet_str(b.body[i]);
            out << ";\n";
        }
        out << "\n";
    }
    std::set<std::string> done;
    auto emit_def = [&](const FnDef& d) {
        for (const auto& c : d.cases) {
            out << c.fn;
            for (const auto& p : c.pats) out << " " << pattern_str(p);
            if (c.bodies.size() == 1 && !c.bodies[0].guard) {
                out << " := " << print_expr(c.bodies[0].body) << ";\n";
                continue;
            }
            out << "\n";
            for (const auto& g : c.bodies)
                out << "  | " << print_expr(g.guard ? g.guard : mk_bool(true)) << " := " << print_expr(g.body)
                    << ";\n";
        }
    };
    for (const auto& s : u.fn_sigs) {
        out << s.name << " : ";
        if (s.type.kind == TypeExpr::Kind::Fn) {
            for (size_t i = 0; i < s.type.parts.size(); ++i)
                out << (i ? " -> " : "") << type_atom_str(s.type.parts[i]);
        } else {
            out << type_atom_str(s.type);
        }
        out << ";\n";
        if (const FnDef* d = u.def(s.name)) {
            emit_def(*d);
            done.insert(s.name);
        }
        out << "\n";
    }
    for (const auto& d : u.fn_defs)
        if (!done.count(d.name)) {
            emit_def(d);
            out << "\n";
        }
    std::string s = out.str();
    while (!s.empty() && s.back() == '\n') s.pop_back();
    if (!s.empty()) s += "\n";
    return s;
}

// ---------------------------------------------------------------- equality

namespace {

bool same_layout(const LayoutRef& a, const LayoutRef& b) {
    if (a.name != b.name || a.mode != b.mode || a.fn.size() != b.fn.size()) return false;
    for (size_t i = 0; i < a.fn.size(); ++i)
        if (!same_layout(a.fn[i], b.fn[i])) return false;
    return true;
}

bool same_pattern(const Pattern& a, const Pattern& b) {
    return a.is_ctor == b.is_ctor && a.name == b.name && a.vars == b.vars;
}

}  // namespace

bool same_expr(const ExprPtr& a, const ExprPtr& b) {
    if (!a || !b) return a == b;
    if (a->kind != b->kind || a->ival != b->ival || a->bval != b->bval || a->name != b->name) return false;
    if (a->args.size() != b->args.size() || a->arg_layouts.size() != b->arg_layouts.size()) return false;
    if ((a->kind == Expr::Kind::Lower || a->kind == Expr::Kind::Instantiate) && !same_layout(a->layout, b->layout))
        return false;
    for (size_t i = 0; i < a->arg_layouts.size(); ++i)
        if (!same_layout(a->arg_layouts[i], b->arg_layouts[i])) return false;
    for (size_t i = 0; i < a->args.size(); ++i)
        if (!same_expr(a->args[i], b->args[i])) return false;
    return true;
}

bool same_unit(const SourceUnit& a, const SourceUnit& b) {
    if (a.data_defs.size() != b.data_defs.size() || a.layout_defs.size() != b.layout_defs.size() ||
        a.fn_sigs.size() != b.fn_sigs.size() || a.fn_defs.size() != b.fn_defs.size() ||
        a.directives.size() != b.directives.size())
        return false;
    for (size_t i = 0; i < a.data_defs.size(); ++i) {
        const auto &x = a.data_defs[i], &y = b.data_defs[i];
        if (x.name != y.name || x.alts.size() != y.alts.size()) return false;
        for (size_t j = 0; j < x.alts.size(); ++j)
            if (x.alts[j].ctor != y.alts[j].ctor || x.alts[j].fields != y.alts[j].fields) return false;
    }
    for (size_t i = 0; i < a.layout_defs.size(); ++i) {
        const auto &x = a.layout_defs[i], &y = b.layout_defs[i];
        if (x.name != y.name || x.adt != y.adt || x.params != y.params || x.branches.size() != y.branches.size())
            return false;
        for (size_t j = 0; j < x.branches.size(); ++j) {
            const auto &p = x.branches[j], &q = y.branches[j];
            if (!same_pattern(p.pat, q.pat) || p.body.size() != q.body.size()) return false;
            for (size_t k = 0; k < p.body.size(); ++k) {
                const auto &h = p.body[k], &g = q.body[k];
                if (h.kind != g.kind || h.base != g.base || h.offset != g.offset || h.payload != g.payload ||
                    h.layout != g.layout || h.arg != g.arg)
                    return false;
            }
        }
    }
    for (size_t i = 0; i < a.fn_sigs.size(); ++i)
        if (a.fn_sigs[i].name != b.fn_sigs[i].name || a.fn_sigs[i].type != b.fn_sigs[i].type) return false;
    for (size_t i = 0; i < a.fn_defs.size(); ++i) {
        const auto &x = a.fn_defs[i], &y = b.fn_defs[i];
        if (x.name != y.name || x.cases.size() != y.cases.size()) return false;
        for (size_t j = 0; j < x.cases.size(); ++j) {
            const auto &c = x.cases[j], &d = y.cases[j];
            if (c.pats.size() != d.pats.size() || c.bodies.size() != d.bodies.size()) return false;
            for (size_t k = 0; k < c.pats.size(); ++k)
                if (!same_pattern(c.pats[k], d.pats[k])) return false;
            for (size_t k = 0; k < c.bodies.size(); ++k) {
                // an explicit `true` guard prints back as a guard
                auto g1 = c.bodies[k].guard, g2 = d.bodies[k].guard;
                bool t1 = !g1 || (g1->kind == Expr::Kind::Bool && g1->bval);
                bool t2 = !g2 || (g2->kind == Expr::Kind::Bool && g2->bval);
                if (!(t1 && t2) && !same_expr(g1, g2)) return false;
                if (!same_expr(c.bodies[k].body, d.bodies[k].body)) return false;
            }
        }
    }
    for (size_t i = 0; i < a.directives.size(); ++i) {
        const auto &x = a.directives[i], &y = b.directives[i];
        if (x.fn != y.fn || x.args.size() != y.args.size() || !same_layout(x.result, y.result)) return false;
        for (size_t j = 0; j < x.args.size(); ++j)
            if (!same_layout(x.args[j], y.args[j])) return false;
    }
    return true;
}

// ---------------------------------------------------------------- size

namespace {

int count_type(const TypeExpr& t) {
    int n = 1;
    for (const auto& p : t.parts) n += count_type(p);
    return n;
}

int count_layout_ref(const LayoutRef& l) {
    int n = 1;
    for (const auto& f : l.fn) n += count_layout_ref(f);
    return n;
}

int count_expr(const ExprPtr& e) {
    if (!e) return 0;
    int n = 1;
    switch (e->kind) {
        case Expr::Kind::App:
        case Expr::Kind::Instantiate:
        case Expr::Kind::Let:
        case Expr::Kind::Ctor:
        case Expr::Kind::Addr: n += 1; break;  // the named callee / binder / target
        default: break;
    }
    if (e->kind == Expr::Kind::Ctor && e->args.empty()) n -= 1;
    for (const auto& l : e->arg_layouts) n += count_layout_ref(l);
    if (e->kind == Expr::Kind::Instantiate || e->kind == Expr::Kind::Lower) n += count_layout_ref(e->layout);
    for (const auto& a : e->args) n += count_expr(a);
    return n;
}

int count_pattern(const Pattern& p) { return 1 + static_cast<int>(p.vars.size()); }

}  // namespace

int count_nodes(const SourceUnit& u) {
    int n = 0;
    for (const auto& d : u.data_defs) {
        n += 2;  // definition + name
        for (const auto& a : d.alts) {
            n += 1;
            for (const auto& f : a.fields) n += count_type(f);
        }
    }
    for (const auto& l : u.layout_defs) {
        n += 3 + static_cast<int>(l.params.size());  // signature, name, adt
        for (const auto& b : l.branches) {
            n += 1 + count_pattern(b.pat);
            for (const auto& h : b.body) {
                switch (h.kind) {
                    case LayoutHeaplet::Kind::Emp: n += 1; break;
                    case LayoutHeaplet::Kind::PointsTo: n += h.offset ? 4 : 3; break;
                    case LayoutHeaplet::Kind::Apply: n += 3; break;
                }
            }
        }
    }
    for (const auto& s : u.fn_sigs) n += 2 + count_type(s.type);
    for (const auto& d : u.fn_defs)
        for (const auto& c : d.cases) {
            n += 1;
            for (const auto& p : c.pats) n += count_pattern(p);
            for (const auto& g : c.bodies) n += count_expr(g.guard) + count_expr(g.body);
        }
    for (const auto& d : u.directives) {
        n += 2 + count_layout_ref(d.result);
        for (const auto& a : d.args) n += count_layout_ref(a);
    }
    return n;
}

}  // namespace pika
