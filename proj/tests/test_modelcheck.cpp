#include <doctest.h>

#include <functional>

#include "pika/modelcheck.hpp"
#include "support.hpp"

using namespace pika;
using namespace pika::ssl;
using namespace pika::mc;

namespace {

using Kind = SatResult::Kind;

PredicateEnv sll_env() {
    static SourceUnit u = parse_program_text(support::read_file(support::test_dir() + "/corpus/prelude.pika"));
    PredicateEnv env;
    env.add(translate_layout_predicate(*u.layout("Sll")));
    env.add(readonly_layout_predicate(*u.layout("Sll")));
    env.use_cond = true;
    return env;
}

// x holds a null-terminated list of `vals` starting at `at`, two cells per node
Model list_model(const std::vector<long long>& vals, long long at = 1) {
    Model m;
    m.store["x"] = vals.empty() ? Val::loc(0) : Val::loc(at);
    for (size_t i = 0; i < vals.size(); ++i) {
        long long here = at + 2 * static_cast<long long>(i);
        m.heap[here] = Val::int_(vals[i]);
        m.heap[here + 1] = i + 1 < vals.size() ? Val::loc(here + 2) : Val::loc(0);
    }
    return m;
}

Assertion sll_x() { return {{}, {h_pred("Sll", {t_var("x")})}}; }

std::string kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const PikaError& e) {
        return e.kind();
    }
    return "none";
}

}  // namespace

TEST_CASE("pure evaluation") {
    interp::Store s{{"a", Val::int_(3)}, {"b", Val::bool_(true)}, {"p", Val::loc(0)}};
    CHECK(eval_pure(s, t_eq(t_bin(Term::Kind::Add, t_var("a"), t_int(1)), t_int(4))));
    CHECK_FALSE(eval_pure(s, t_bin(Term::Kind::Lt, t_var("a"), t_int(3))));
    CHECK(eval_pure(s, t_and(t_var("b"), t_not(t_eq(t_var("a"), t_int(0))))));
    CHECK(eval_pure(s, t_eq(t_var("p"), t_int(0))));
    CHECK(eval_term(s, t_ite(t_var("b"), t_int(1), t_int(2))) == Val::int_(1));
    CHECK(eval_term(s, t_bin(Term::Kind::Mod, t_int(7), t_int(2))) == Val::int_(1));
    CHECK(kind_of([&] { eval_pure(s, t_var("zz")); }) == "UnboundVariable");
    CHECK(kind_of([&] { eval_pure(s, t_var("a")); }) == "SortMismatch");
    CHECK(kind_of([&] { eval_pure(s, t_and(t_var("a"), t_var("b"))); }) == "SortMismatch");
}

TEST_CASE("points-to and pure facts") {
    PredicateEnv env;
    Model m{{{"x", Val::loc(5)}, {"v", Val::int_(9)}}, {{5, Val::int_(9)}}};
    CHECK(satisfies(m, {{}, {h_pts("x", 0, t_var("v"))}}, env).sat());
    CHECK(satisfies(m, {{}, {h_pts("x", 0, t_int(9))}}, env).sat());
    CHECK(satisfies(m, {{t_eq(t_var("v"), t_int(9))}, {h_pts("x", 0, t_var("w"))}}, env).sat());
    CHECK(satisfies(m, {{}, {h_pts("x", 0, t_int(8))}}, env).kind == Kind::Unsat);
    CHECK(satisfies(m, {{}, {h_pts("x", 1, t_var("v"))}}, env).kind == Kind::Unsat);
    CHECK(satisfies(m, {{t_eq(t_var("v"), t_int(1))}, {h_pts("x", 0, t_var("v"))}}, env).kind == Kind::Unsat);
    // an existential location is found by search
    CHECK(satisfies(m, {{}, {h_pts("y", 0, t_int(9))}}, env).sat());
}

TEST_CASE("the heap must be used exactly") {
    PredicateEnv env;
    Model m{{{"x", Val::loc(5)}}, {{5, Val::int_(1)}, {6, Val::int_(2)}}};
    CHECK(satisfies(m, {{}, {h_pts("x", 0, t_int(1))}}, env).kind == Kind::Unsat);
    CHECK(satisfies(m, {{}, {h_pts("x", 0, t_int(1)), h_pts("x", 1, t_int(2))}}, env).sat());
    CHECK(satisfies(m, {{}, {h_pts("x", 0, t_int(1)), h_pts("x", 0, t_int(1))}}, env).kind == Kind::Unsat);
    CHECK(satisfies(Model{}, {{}, {}}, env).sat());
}

TEST_CASE("null-encoded lists") {
    PredicateEnv env = sll_env();
    CHECK(satisfies(list_model({}), sll_x(), env).sat());
    CHECK(satisfies(list_model({7}), sll_x(), env).sat());
    CHECK(satisfies(list_model({1, 2, 3}), sll_x(), env).sat());

    Model missing = list_model({7, 8});
    missing.heap.erase(4);
    CHECK(satisfies(missing, sll_x(), env).kind == Kind::Unsat);

    Model extra = list_model({7});
    extra.heap[40] = Val::int_(0);
    CHECK(satisfies(extra, sll_x(), env).kind == Kind::Unsat);

    // read-only applications own nothing, so the cells still need an owner
    Assertion ro{{}, {h_ro("Sll", {t_var("x")})}};
    CHECK(satisfies(list_model({4, 5}), ro, env).kind == Kind::Unsat);
    Assertion both{{}, {h_ro("Sll", {t_var("x")}), h_pred("Sll", {t_var("x")})}};
    CHECK(satisfies(list_model({4, 5}), both, env).sat());
}

TEST_CASE("depth") {
    PredicateEnv env = sll_env();
    Model m = list_model({1, 2, 3, 4, 5, 6});
    CHECK(satisfies(m, sll_x(), env, 2).kind == Kind::Unknown);
    CHECK(satisfies(m, sll_x(), env, 64).sat());
    for (int d = 1; d < 12; ++d)
        if (satisfies(m, sll_x(), env, d).sat()) CHECK(satisfies(m, sll_x(), env, d + 1).sat());
}

TEST_CASE("function predicates are opaque") {
    PredicateEnv env;
    Model m{{{"x", Val::loc(0)}, {"r", Val::int_(0)}}, {}};
    CHECK(satisfies(m, {{}, {h_func("f", {t_var("x"), t_var("r")})}}, env).kind == Kind::Unknown);
}

TEST_CASE("soundness on single expressions") {
    const CoreSignature& sig = default_core_signature();
    for (const char* e : {"7", "3 + 4", "lower Sll (Cons 7 (lower Sll Nil))", "instantiate [Sll] Sll id Nil",
                          "instantiate [Sll] Int len (Cons 1 (lower Sll (Cons 2 (lower Sll Nil))))",
                          "instantiate [TreeLayout] Sll leftList (Node 1 (lower TreeLayout Leaf) (lower TreeLayout Leaf))",
                          "instantiate [TreeLayout] TreeLayout mirror (instantiate [TreeLayout] TreeLayout mirror (lower TreeLayout Leaf))"}) {
        SoundnessReport r = check_soundness(sig, parse_expr_text(e));
        CHECK_MESSAGE(r.result.sat(), r.trace);
    }
    SoundnessReport bad = check_soundness(sig, parse_expr_text("1 + 2"), 64, true);
    CHECK(bad.result.kind == Kind::Unsat);
    CHECK(bad.trace.find("verdict: ") != std::string::npos);
}

TEST_CASE("generator") {
    const CoreSignature& sig = default_core_signature();
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        ExprPtr e = gen_core_expr(sig, seed, 1);
        CHECK(e->kind == Expr::Kind::Int);
    }
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        ExprPtr e = gen_core_expr(sig, seed, 10);
        CHECK(expr_size(e) <= 10);
        CHECK(is_core_expr(e));
        CHECK(print_expr(e) == print_expr(gen_core_expr(sig, seed, 10)));
    }
    CHECK(expr_size(parse_expr_text("1 + 2")) == 3);
}

TEST_CASE("separating conjunction of models") {
    PredicateEnv env;
    Model a{{{"p", Val::loc(1)}}, {{1, Val::int_(5)}}};
    Model b{{{"p", Val::loc(1)}, {"q", Val::loc(2)}}, {{2, Val::int_(6)}}};
    Assertion pa{{}, {h_pts("p", 0, t_int(5))}};
    Assertion pb{{}, {h_pts("q", 0, t_int(6))}};
    CHECK(check_otimes(a, b, pa, pb, env));

    Model overlap{{{"p", Val::loc(1)}, {"q", Val::loc(1)}}, {{1, Val::int_(5)}}};
    CHECK(kind_of([&] { check_otimes(a, overlap, pa, {{}, {h_pts("q", 0, t_int(5))}}, env); }) ==
          "PreconditionViolated");
    Model other{{{"p", Val::loc(9)}}, {{2, Val::int_(6)}}};
    CHECK(kind_of([&] { check_otimes(a, other, pa, pb, env); }) == "PreconditionViolated");

    OtimesReport rep = run_otimes_suite(7, 50);
    CHECK(rep.pairs == 50);
    CHECK(rep.violations.empty());
}

TEST_CASE("cond picks the constructor of every small list") {
    SourceUnit u = parse_program_text(support::read_file(support::test_dir() + "/corpus/prelude.pika"));
    GlobalEnv g = build_global_env(u);
    CondOracleReport r = run_cond_oracle(g, *u.layout("Sll"), 3, {0, 1});
    // constructor depth 3 is lists of length 0..2; over {0,1} that is 1 + 2 + 4
    CHECK(r.heaps == 7);
    CHECK(r.violations.empty());
}
