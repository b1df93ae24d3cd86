#include <doctest.h>

#include "pika/diag.hpp"
#include "pika/ssl.hpp"
#include "support.hpp"

using namespace pika::ssl;

namespace {

PredicateDef singleton() {
    PredicateDef p;
    p.name = "singleton__rw_Sll__Int";
    p.params = {{"int", "__p_0"}, {"loc", "__r_x"}};
    Branch b;
    b.cond = t_bool(true);
    b.body.spatial = {h_pts("__r_x", 0, t_var("__p_0")), h_pts("__r_x", 1, t_int(0)), h_block("__r_x", 2)};
    p.branches.push_back(b);
    return p;
}

}  // namespace

TEST_CASE("separating conjunction of assertions") {
    Assertion a{{t_eq(t_var("x"), t_int(1))}, {h_pts("p", 0, t_var("x"))}};
    Assertion b{{t_and(t_eq(t_var("y"), t_int(2)), t_bool(true))}, {h_emp(), h_pts("q", 0, t_var("y"))}};
    Assertion c = conj_otimes(a, b);
    CHECK(c.pure.size() == 2);
    CHECK(c.spatial.size() == 2);
    CHECK(emit_assertion(c) == "{ x == 1 && y == 2 ; p :-> x ** q :-> y }");

    Assertion e = conj_otimes({}, {});
    CHECK(emit_assertion(e) == "{ emp }");
}

TEST_CASE("emitted text of singleton") {
    std::string want =
        "predicate singleton__rw_Sll__Int(int __p_0, loc __r_x) {\n"
        "| true => { __r_x :-> __p_0 ** (__r_x+1) :-> 0 ** [__r_x,2] }\n"
        "}\n";
    CHECK(emit_predicate(singleton()) == want);
    CHECK(structural_equiv(singleton(), support::golden_reference("singleton")));
}

TEST_CASE("term printing") {
    TermPtr t = t_not(t_eq(t_var("x"), t_int(0)));
    CHECK(print_term(t) == "(not (x == 0))");
    CHECK(print_term(t, Style::Minimal) == "not (x == 0)");
    TermPtr s = t_bin(Term::Kind::Add, t_var("a"), t_bin(Term::Kind::Add, t_var("b"), t_int(1)));
    CHECK(print_term(s, Style::Minimal) == "a + (b + 1)");
    TermPtr i = t_ite(t_eq(t_var("n"), t_int(0)), t_int(1), t_int(0));
    CHECK(print_term(i) == "((n == 0) ? 1 : 0)");
    CHECK(emit_heaplet(h_ro("Sll", {t_var("x")})) == "ro_Sll(x)");
    CHECK(emit_heaplet(h_func("Sll__copy", {t_var("a"), t_var("b")})) == "func Sll__copy(a, b)");
    CHECK(emit_heaplet(h_temp("t")) == "temploc t");
    CHECK(emit_heaplet(h_pts("x", 2, t_var("v"), true)) == "(x+2) :=> v");
}

TEST_CASE("conjuncts and substitution") {
    TermPtr c = t_conj({t_eq(t_var("a"), t_int(1)), t_bool(true), t_eq(t_var("b"), t_var("a"))});
    CHECK(conjuncts(c).size() == 2);
    CHECK(is_true(t_conj({})));
    TermPtr s = subst(c, {{"a", t_int(5)}});
    std::set<std::string> vs;
    term_vars(s, vs);
    CHECK(vs == std::set<std::string>{"b"});
    Heaplet h = subst(h_pts("x", 1, t_var("a")), {{"x", t_var("y")}, {"a", t_int(3)}});
    CHECK(emit_heaplet(h) == "(y+1) :-> 3");
}

TEST_CASE("structural equivalence") {
    PredicateDef a = singleton();
    PredicateDef b = parse_predicate(
        "predicate other(int v, loc r) {\n| true => { [r,2] ** (r+1) :-> 0 ** r :-> v }\n}\n");
    CHECK(structural_equiv(a, b));

    PredicateDef c = parse_predicate("predicate other(int v, loc r) {\n| true => { r :-> v ** (r+1) :-> 1 ** [r,2] }\n}\n");
    CHECK_FALSE(structural_equiv(a, c));

    PredicateDef d = b;
    d.branches.push_back(d.branches[0]);
    d.branches[1].cond = t_bool(false);
    CHECK_FALSE(structural_equiv(a, d));

    // renaming must be a bijection
    PredicateDef e = parse_predicate("predicate p(loc x, loc y) {\n| true => { x :-> y }\n}\n");
    PredicateDef f = parse_predicate("predicate p(loc x, loc y) {\n| true => { x :-> x }\n}\n");
    CHECK_FALSE(structural_equiv(e, f));
}

TEST_CASE("parse and emit agree") {
    for (const auto& name : support::golden_names()) {
        PredicateDef p = support::golden_reference(name);
        PredicateDef again = parse_predicate(emit_predicate(p));
        CHECK_MESSAGE(structural_equiv(p, again), name);
        CHECK_MESSAGE(emit_predicate(again) == emit_predicate(p), name);
    }
}

TEST_CASE("parse errors") {
    try {
        parse_ssl("predicate p(loc x) {\n| true => { x :-> }\n}\n");
        FAIL("expected an error");
    } catch (const pika::PikaError& e) {
        CHECK(e.kind() == "SslParseError");
    }
}

TEST_CASE("node counts") {
    CHECK(count_nodes(t_int(1)) == 1);
    CHECK(count_nodes(t_eq(t_var("a"), t_int(1))) == 3);
}
