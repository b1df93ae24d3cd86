#include <doctest.h>

#include "pika/syntax.hpp"
#include "support.hpp"

using namespace pika;

namespace {

std::vector<Tok> kinds(const std::string& text) {
    std::vector<Tok> out;
    for (const auto& t : lex(text))
        if (t.kind != Tok::End) out.push_back(t.kind);
    return out;
}

const char* kSll = R"(data List := Nil | Cons Int List;
Sll : List >-> layout[x];
Sll (Nil) := emp;
Sll (Cons head tail) := x :-> head, (x+1) :-> tail, Sll tail;
)";

}  // namespace

TEST_CASE("lexer") {
    CHECK(kinds("x :-> head") == std::vector<Tok>{Tok::Ident, Tok::PointsToArrow, Tok::Ident});
    CHECK(kinds("%generate even [Int] Int") ==
          std::vector<Tok>{Tok::DirectiveGenerate, Tok::Ident, Tok::LBracket, Tok::Ident, Tok::RBracket, Tok::Ident});
    CHECK(kinds("a :=> b >-> c -> d := e") ==
          std::vector<Tok>{Tok::Ident, Tok::ReadOnlyArrow, Tok::Ident, Tok::LayoutArrow, Tok::Ident, Tok::Arrow,
                           Tok::Ident, Tok::Assign, Tok::Ident});
    CHECK(kinds("x -- trailing comment\n y") == std::vector<Tok>{Tok::Ident, Tok::Ident});

    try {
        lex("§");
        FAIL("expected a lex error");
    } catch (const PikaError& e) {
        CHECK(e.kind() == "LexError");
    }
}

TEST_CASE("lexer tracks positions") {
    auto toks = lex("a\n  bb");
    REQUIRE(toks.size() >= 2);
    CHECK(toks[1].span.line == 2);
    CHECK(toks[1].span.col == 3);
}

TEST_CASE("singleton parses to one directive, signature and definition") {
    SourceUnit u = parse_program_text(
        "%generate singleton [Int] Sll\nsingleton : Int -> List;\nsingleton x := Cons x (Nil);\n");
    REQUIRE(u.directives.size() == 1);
    REQUIRE(u.fn_sigs.size() == 1);
    REQUIRE(u.fn_defs.size() == 1);
    const ExprPtr& body = u.fn_defs[0].cases.at(0).bodies.at(0).body;
    REQUIRE(body->kind == Expr::Kind::Ctor);
    CHECK(body->name == "Cons");
    REQUIRE(body->args.size() == 2);
    CHECK(body->args[0]->kind == Expr::Kind::Var);
    CHECK(body->args[1]->kind == Expr::Kind::Ctor);
    CHECK(body->args[1]->name == "Nil");
    CHECK(body->args[1]->args.empty());
    CHECK(pretty_print(u).find("singleton x := Cons x Nil;") != std::string::npos);
}

TEST_CASE("empty input") {
    SourceUnit u = parse_program_text("");
    CHECK(u.data_defs.empty());
    CHECK(u.layout_defs.empty());
    CHECK(u.fn_defs.empty());
    CHECK(u.directives.empty());
    CHECK(pretty_print(u).empty());
}

TEST_CASE("layout definition") {
    SourceUnit u = parse_program_text(kSll);
    REQUIRE(u.layout_defs.size() == 1);
    const LayoutDef& l = u.layout_defs[0];
    CHECK(l.name == "Sll");
    CHECK(l.adt == "List");
    REQUIRE(l.branches.size() == 2);
    CHECK(l.branches[0].is_emp());
    const auto& cons = l.branches[1].body;
    REQUIRE(cons.size() == 3);
    CHECK(cons[0].kind == LayoutHeaplet::Kind::PointsTo);
    CHECK(cons[0].offset == 0);
    CHECK(cons[0].payload == "head");
    CHECK(cons[1].offset == 1);
    CHECK(cons[1].payload == "tail");
    CHECK(cons[2].kind == LayoutHeaplet::Kind::Apply);
    CHECK(cons[2].layout == "Sll");
    CHECK(cons[2].arg == "tail");

    SourceUnit again = parse_program_text(pretty_print(u));
    CHECK(same_unit(u, again));
}

TEST_CASE("parse errors name what was expected") {
    try {
        parse_program_text("f : Int -> ;");
        FAIL("expected a parse error");
    } catch (const PikaError& e) {
        CHECK(e.kind() == "ParseError");
        CHECK(e.span().line == 1);
    }
}

TEST_CASE("expression forms") {
    ExprPtr e = parse_expr_text("instantiate [Sll[readonly], Int] Sll[mutable] f xs (1 + 2)");
    REQUIRE(e->kind == Expr::Kind::Instantiate);
    CHECK(e->name == "f");
    REQUIRE(e->arg_layouts.size() == 2);
    CHECK(e->arg_layouts[0].name == "Sll");
    CHECK(e->layout.mode == Mode::Mutable);
    CHECK(e->args.size() == 2);

    ExprPtr l = parse_expr_text("lower_Sll(Cons 7 (lower_Sll(Nil)))");
    REQUIRE(l->kind == Expr::Kind::Lower);
    CHECK(l->layout.name == "Sll");
    CHECK(l->args[0]->name == "Cons");
    CHECK(same_expr(l, parse_expr_text("lower Sll (Cons 7 (lower Sll Nil))")));

    ExprPtr c = parse_expr_text("if (n % 2) == 0 then 1 else 0");
    CHECK(c->kind == Expr::Kind::If);
    ExprPtr let = parse_expr_text("let i := f xs in i + 1");
    CHECK(let->kind == Expr::Kind::Let);
    CHECK(let->name == "i");
}

TEST_CASE("printing expressions reparses to the same tree") {
    for (const char* s : {"1 + 2 + 3", "1 + (2 + 3)", "not (a < b) && c == d", "f (g x) (Cons 1 Nil)",
                          "if a then b else c", "let x := 1 in x + x", "addr x", "lower Sll (Cons h t)",
                          "instantiate [Ptr Int, Int] (Ptr Int) f (addr x) y", "(a - 1) % 2"}) {
        ExprPtr e = parse_expr_text(s);
        CHECK_MESSAGE(same_expr(e, parse_expr_text(print_expr(e))), s);
    }
}

TEST_CASE("parenthesised variable pattern") {
    SourceUnit u = parse_program_text("even : Int -> Int;\neven (n) := if (n % 2) == 0 then 1 else 0;\n");
    const Pattern& p = u.fn_defs.at(0).cases.at(0).pats.at(0);
    CHECK_FALSE(p.is_ctor);
    CHECK(p.name == "n");
}

TEST_CASE("node count of even") {
    SourceUnit u = parse_program_text(support::read_file(support::test_dir() + "/bench/even.pika"));
    CHECK(count_nodes(u) == 19);
}

TEST_CASE("rename_vars respects let shadowing") {
    ExprPtr e = parse_expr_text("x + (let x := 1 in x + y)");
    ExprPtr r = rename_vars(e, {{"x", "a"}, {"y", "b"}});
    CHECK(print_expr(r) == print_expr(parse_expr_text("a + (let x := 1 in x + b)")));
}
