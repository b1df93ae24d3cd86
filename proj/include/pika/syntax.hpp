#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pika/diag.hpp"

namespace pika {

enum class Tok {
    Ident,
    Int,
    KwData,
    KwLet,
    KwIn,
    KwIf,
    KwThen,
    KwElse,
    KwNot,
    KwAddr,
    KwInstantiate,
    KwLower,
    KwTrue,
    KwFalse,
    DirectiveGenerate,
    Assign,         // :=
    PointsToArrow,  // :->
    ReadOnlyArrow,  // :=>
    LayoutArrow,    // >->
    Arrow,          // ->
    Colon,
    Semi,
    Comma,
    Bar,
    OrOr,
    AndAnd,
    EqEq,
    Less,
    Plus,
    Minus,
    Percent,
    LParen,
    RParen,
    LBracket,
    RBracket,
    End,
};

const char* tok_name(Tok t);

struct Token {
    Tok kind;
    std::string text;
    long long value = 0;
    Span span;
};

// Throws PikaError{"LexError"} on characters outside the language.
std::vector<Token> lex(const std::string& text);

enum class Mode { Readonly, Mutable };

// A layout in argument/result position: a user layout, a base type used as
// its own layout (Int, Bool, Ptr Int), or a function layout (a -> b).
struct LayoutRef {
    std::string name;
    Mode mode = Mode::Readonly;
    bool mode_given = false;
    std::vector<LayoutRef> fn;  // non-empty for function layouts: params..., result
    Span span;

    bool is_fn() const { return !fn.empty(); }
    bool is_base() const { return !is_fn() && (name == "Int" || name == "Bool" || name == "Ptr Int"); }
};

struct TypeExpr {
    enum class Kind { Int, Bool, PtrInt, Adt, Layout, Fn };
    Kind kind = Kind::Int;
    std::string name;             // Adt / Layout name
    std::vector<TypeExpr> parts;  // Fn: argument types then result type

    static TypeExpr int_() { return {Kind::Int, "", {}}; }
    static TypeExpr bool_() { return {Kind::Bool, "", {}}; }
    static TypeExpr ptr_int() { return {Kind::PtrInt, "", {}}; }
    static TypeExpr adt(std::string n) { return {Kind::Adt, std::move(n), {}}; }
    static TypeExpr layout(std::string n) { return {Kind::Layout, std::move(n), {}}; }

    bool is_base() const { return kind == Kind::Int || kind == Kind::Bool || kind == Kind::PtrInt; }
    std::vector<TypeExpr> params() const;
    TypeExpr result() const;
};

bool operator==(const TypeExpr& a, const TypeExpr& b);
inline bool operator!=(const TypeExpr& a, const TypeExpr& b) { return !(a == b); }
std::string show_type(const TypeExpr& t);

struct Expr;
using ExprPtr = std::shared_ptr<Expr>;

struct Expr {
    enum class Kind { Int, Bool, Var, App, BinOp, Not, If, Let, Instantiate, Lower, Ctor, Addr, Null };
    Kind kind = Kind::Int;
    long long ival = 0;
    bool bval = false;
    std::string name;            // var, callee, operator, let binder, constructor, addr target
    std::vector<ExprPtr> args;   // children, see kind
    std::vector<LayoutRef> arg_layouts;  // Instantiate
    LayoutRef layout;            // Instantiate result / Lower layout
    Span span;

    // filled in by elaboration
    std::string dest;
    bool recursive = false;
    TypeExpr ty;
    bool typed = false;
};

ExprPtr mk_int(long long v, Span s = {});
ExprPtr mk_bool(bool b, Span s = {});
ExprPtr mk_var(std::string n, Span s = {});
ExprPtr mk_binop(std::string op, ExprPtr l, ExprPtr r, Span s = {});
ExprPtr mk_not(ExprPtr e, Span s = {});
ExprPtr mk_ctor(std::string c, std::vector<ExprPtr> args, Span s = {});
ExprPtr mk_app(std::string f, std::vector<ExprPtr> args, Span s = {});
ExprPtr mk_lower(LayoutRef l, ExprPtr e, Span s = {});
ExprPtr mk_inst(std::vector<LayoutRef> args, LayoutRef res, std::string f, std::vector<ExprPtr> xs, Span s = {});
ExprPtr clone(const ExprPtr& e);
// Copy of e with free variables renamed (let binders shadow).
ExprPtr rename_vars(const ExprPtr& e, const std::map<std::string, std::string>& m);

struct Pattern {
    bool is_ctor = false;
    std::string name;  // variable or constructor
    std::vector<std::string> vars;
    Span span;
};

struct GuardedBody {
    ExprPtr guard;  // null for an unguarded body
    ExprPtr body;
};

struct FnCase {
    std::string fn;
    std::vector<Pattern> pats;
    std::vector<GuardedBody> bodies;
    Span span;
};

struct FnDef {
    std::string name;
    std::vector<FnCase> cases;
};

struct FnSig {
    std::string name;
    TypeExpr type;
    Span span;
};

struct DataAlt {
    std::string ctor;
    std::vector<TypeExpr> fields;
};

struct DataDef {
    std::string name;
    std::vector<DataAlt> alts;
    Span span;
};

struct LayoutHeaplet {
    enum class Kind { Emp, PointsTo, Apply };
    Kind kind = Kind::Emp;
    std::string base;     // PointsTo location variable
    int offset = 0;
    std::string payload;  // PointsTo right-hand side
    std::string layout;   // Apply
    std::string arg;      // Apply
};

struct LayoutBranch {
    Pattern pat;
    std::vector<LayoutHeaplet> body;
    bool is_emp() const;
};

struct LayoutDef {
    std::string name;
    std::string adt;
    std::vector<std::string> params;
    std::vector<LayoutBranch> branches;
    Span span;

    const LayoutBranch* branch_for(const std::string& ctor) const;
};

struct GenerateDirective {
    std::string fn;
    std::vector<LayoutRef> args;
    LayoutRef result;
    Span span;
};

struct SourceUnit {
    std::vector<DataDef> data_defs;
    std::vector<LayoutDef> layout_defs;
    std::vector<FnSig> fn_sigs;
    std::vector<FnDef> fn_defs;
    std::vector<GenerateDirective> directives;

    const FnSig* sig(const std::string& n) const;
    const FnDef* def(const std::string& n) const;
    const LayoutDef* layout(const std::string& n) const;
    const DataDef* data(const std::string& n) const;
};

// Throws PikaError{"ParseError"} naming the expected tokens.
SourceUnit parse_program(const std::vector<Token>& toks);
SourceUnit parse_program_text(const std::string& text);
ExprPtr parse_expr_text(const std::string& text);

std::string pretty_print(const SourceUnit& u);
std::string print_expr(const ExprPtr& e);
std::string print_layout_ref(const LayoutRef& l, bool result_position = false);

// Structural equality ignoring spans and elaboration annotations.
bool same_expr(const ExprPtr& a, const ExprPtr& b);
bool same_unit(const SourceUnit& a, const SourceUnit& b);

// Number of AST nodes, counting every declaration, pattern, type, heaplet,
// expression node and leaf identifier once.
int count_nodes(const SourceUnit& u);

}  // namespace pika
