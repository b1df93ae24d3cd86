#include <doctest.h>

#include <functional>

#include "pika/types.hpp"
#include "support.hpp"

using namespace pika;

namespace {

SourceUnit prelude() { return parse_program_text(support::read_file(support::test_dir() + "/corpus/prelude.pika")); }

std::string error_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const PikaError& e) {
        return e.kind() + " " + e.rule();
    }
    return "none";
}

}  // namespace

TEST_CASE("prelude environment") {
    SourceUnit u = prelude();
    GlobalEnv g = build_global_env(u);
    CHECK(g.adts.size() == 4);
    CHECK(g.layouts.size() == 4);
    REQUIRE(g.ctor("Cons"));
    CHECK(g.ctor("Cons")->adt == "List");
    CHECK(g.ctor("Cons")->fields == std::vector<TypeExpr>{TypeExpr::int_(), TypeExpr::adt("List")});
    CHECK(g.ctor("ZCons")->fields.size() == 3);
    CHECK(g.layout("TreeLayout")->adt == "Tree");
    CHECK(g.ctor("Missing") == nullptr);
}

TEST_CASE("base expressions") {
    SourceUnit u = prelude();
    GlobalEnv g = build_global_env(u);
    CHECK(infer_expr(g, {}, parse_expr_text("3 + 4")) == TypeExpr::int_());
    CHECK(infer_expr(g, {}, parse_expr_text("3 < 4 && true")) == TypeExpr::bool_());
    CHECK(infer_expr(g, {{"n", TypeExpr::int_()}}, parse_expr_text("if n == 0 then 1 else n")) == TypeExpr::int_());
    CHECK(error_of([&] { infer_expr(g, {}, parse_expr_text("y + 1")); }) == "UnboundVariable T-VAR");
    CHECK(error_of([&] { infer_expr(g, {}, parse_expr_text("true + 1")); }).rfind("TypeMismatch", 0) == 0);
    CHECK(error_of([&] { infer_expr(g, {}, parse_expr_text("if 1 then 2 else 3")); }) == "TypeMismatch T-IF");
}

TEST_CASE("lowering a constructor") {
    SourceUnit u = prelude();
    GlobalEnv g = build_global_env(u);
    LocalEnv l{{"x", TypeExpr::int_()}, {"xs", TypeExpr::layout("Sll")}};
    CHECK(infer_expr(g, l, parse_expr_text("lower Sll (Cons x xs)")) == TypeExpr::layout("Sll"));
    CHECK(error_of([&] { infer_expr(g, l, parse_expr_text("lower Sll (Leaf)")); }) ==
          "LayoutAdtMismatch T-LOWER-CONSTR");
    CHECK(error_of([&] { infer_expr(g, l, parse_expr_text("lower Sll (Cons x)")); }) ==
          "ConstructorArity T-LOWER-CONSTR");
}

TEST_CASE("instantiate") {
    SourceUnit u = prelude();
    u.fn_sigs.push_back({"leftList", parse_program_text("leftList : Tree -> List;").fn_sigs.at(0).type, {}});
    GlobalEnv g = build_global_env(u);
    LocalEnv l{{"t", TypeExpr::layout("TreeLayout")}};
    CHECK(infer_expr(g, l, parse_expr_text("instantiate [TreeLayout] Sll leftList t")) == TypeExpr::layout("Sll"));
    CHECK(error_of([&] { infer_expr(g, l, parse_expr_text("instantiate [Sll] Sll leftList t")); }) ==
          "LayoutAdtMismatch T-INSTANTIATE");
    CHECK(error_of([&] { infer_expr(g, l, parse_expr_text("instantiate [TreeLayout] Sll nothere t")); }) ==
          "UnboundVariable T-FN-GLOBAL");
}

TEST_CASE("concreteness") {
    SourceUnit u = prelude();
    GlobalEnv g = build_global_env(u);
    TypeCtx ctx{&g, {{"x", TypeExpr::int_()}, {"xs", TypeExpr::layout("Sll")}, {"ys", TypeExpr::adt("List")}}, true};
    CHECK(check_concrete(ctx, parse_expr_text("lower Sll (Cons x xs)"), TypeExpr::adt("List")));
    CHECK_FALSE(check_concrete(ctx, parse_expr_text("Cons x xs"), TypeExpr::adt("List")));
    CHECK_FALSE(check_concrete(ctx, parse_expr_text("ys"), TypeExpr::adt("List")));
    ctx.strict = false;
    CHECK(check_concrete(ctx, parse_expr_text("ys"), TypeExpr::adt("List")));
}

TEST_CASE("layout definitions are checked") {
    CHECK(error_of([] {
              build_global_env(parse_program_text("L : Nope >-> layout[x];\nL (A) := emp;\n"));
          }) == "UnknownAdtInLayout G-LAYOUT");
    SourceUnit u = parse_program_text(support::read_file(support::test_dir() + "/negative/unbound_layout_var.pika"));
    CHECK(error_of([&] { elaborate(u); }) == "UnboundVariable G-LAYOUT");
}

TEST_CASE("mangled names") {
    LayoutRef sll{"Sll", Mode::Readonly, false, {}, {}};
    LayoutRef in{"Int", Mode::Readonly, false, {}, {}};
    CHECK(mangle("filterLt9", {sll}, sll) == "filterLt9__rw_Sll__ro_Sll");
    CHECK(mangle("singleton", {in}, sll) == "singleton__rw_Sll__Int");
}

TEST_CASE("elaborated directive parameters") {
    TypedProgram tp = support::load_golden("singleton");
    const ElabDirective* d = tp.directive("singleton");
    REQUIRE(d);
    CHECK(d->pred_name == "singleton__rw_Sll__Int");
    REQUIRE(d->params.size() == 1);
    CHECK(d->params[0].ssl == "__p_0");
    CHECK_FALSE(d->params[0].is_loc());
    CHECK(d->result.ssl == "__r_x");
    CHECK(d->result.is_loc());

    TypedProgram tl = support::load_golden("leftList");
    const ElabDirective* dl = tl.directive("leftList");
    REQUIRE(dl);
    CHECK(dl->params.at(0).ssl == "__p_x0");
    CHECK(dl->cases.size() == 2);
}
