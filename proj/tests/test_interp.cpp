#include <doctest.h>

#include <functional>

#include "pika/interp.hpp"
#include "support.hpp"

using namespace pika;
using namespace pika::interp;

namespace {

struct Sig {
    SourceUnit unit;
    GlobalEnv g;
    Sig()
        : unit(parse_program_text(support::read_file(support::test_dir() + "/corpus/core_signature.pika"))),
          g(build_global_env(unit)) {}
    Outcome run(const std::string& e, State s = {}) const { return eval({&g, &unit}, parse_expr_text(e), s); }
};

std::string kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const PikaError& e) {
        return e.kind();
    }
    return "none";
}

GroundHeaplet cell(long long base, int off, std::optional<Val> v) {
    GroundHeaplet g;
    g.kind = GroundHeaplet::Kind::PointsTo;
    g.base = Val::loc(base);
    g.offset = off;
    g.value = v;
    g.var = "v";
    return g;
}

}  // namespace

TEST_CASE("writing a layout body") {
    Heap h = act_on_heap({}, {cell(1, 0, Val::int_(7)), cell(1, 1, Val::loc(0))});
    CHECK(h == Heap{{1, Val::int_(7)}, {2, Val::loc(0)}});
    CHECK(act_on_heap(h, {}) == h);
    GroundHeaplet app;
    app.kind = GroundHeaplet::Kind::Apply;
    CHECK(act_on_heap(h, {app}) == h);
    CHECK(kind_of([&] { act_on_heap(h, {cell(2, 0, Val::int_(1))}); }) == "HeapOverlap");
    CHECK(kind_of([&] { act_on_heap(h, {cell(5, 0, std::nullopt)}); }) == "UngroundedHeaplet");
}

TEST_CASE("base values") {
    Sig s;
    Outcome o = s.run("3 + 4");
    CHECK(o.value == FsVal::of(Val::int_(7)));
    CHECK(o.state.heap.empty());
    CHECK(o.state.store.at(o.var) == Val::int_(7));
    CHECK(s.run("true").value == FsVal::of(Val::bool_(true)));
    CHECK(kind_of([&] { s.run("true + 1"); }) == "SortMismatch");
}

TEST_CASE("lowering allocates cells") {
    Sig s;
    Outcome o = s.run("lower Sll (Cons 7 (lower Sll Nil))");
    CHECK(o.value.show() == "Cons 7 Nil");
    Val x = o.state.store.at(o.var);
    REQUIRE(x.kind == Val::Kind::Loc);
    REQUIRE(o.state.heap.size() == 2);
    CHECK(o.state.heap.at(x.v) == Val::int_(7));
    Val tail = o.state.heap.at(x.v + 1);
    CHECK(tail.kind == Val::Kind::Loc);
    CHECK(tail != x);
    // the empty list occupies no cells
    CHECK(o.state.heap.count(tail.v) == 0);
    REQUIRE(o.state.fs.at(tail.v));
    CHECK(o.state.fs.at(tail.v)->ctor == "Nil");
}

TEST_CASE("instantiate") {
    Sig s;
    Outcome id = s.run("instantiate [Sll] Sll id Nil");
    CHECK(id.value.show() == "Nil");
    CHECK(id.state.heap.empty());

    Outcome len = s.run("instantiate [Sll] Int len (Cons 1 (lower Sll (Cons 2 (lower Sll Nil))))");
    CHECK(len.value == FsVal::of(Val::int_(2)));

    Outcome sum = s.run("instantiate [Sll] Int sumList (Cons 5 (lower Sll (Cons 6 (lower Sll Nil))))");
    CHECK(sum.value == FsVal::of(Val::int_(11)));

    Outcome m = s.run("instantiate [Sll] Sll mapAdd1 (Cons 1 (lower Sll Nil))");
    CHECK(m.value.show() == "Cons 2 Nil");
    // the argument and the result each own two cells
    CHECK(m.state.heap.size() == 4);

    Outcome t = s.run("instantiate [TreeLayout] Int treeSum (Node 1 (lower TreeLayout (Node 2 (lower TreeLayout Leaf) (lower TreeLayout Leaf))) (lower TreeLayout Leaf))");
    CHECK(t.value == FsVal::of(Val::int_(3)));
}

TEST_CASE("variables") {
    Sig s;
    State st;
    st.store["n"] = Val::int_(4);
    CHECK(s.run("n + n", st).value == FsVal::of(Val::int_(8)));
    CHECK(kind_of([&] { s.run("m"); }) == "UnboundVariable");

    State dangling;
    dangling.store["l"] = Val::loc(9);
    CHECK(kind_of([&] { s.run("l", dangling); }) == "NotAConstructorValue");
    CHECK(kind_of([&] { s.run("instantiate [Sll] Int len n", st); }) == "NotAConstructorValue");
    CHECK(kind_of([&] { s.run("if true then 1 else 2"); }) == "UnsupportedConstruct");
    CHECK(kind_of([&] { s.run("instantiate [Sll] Int nope Nil"); }) == "UnknownFunction");
}

TEST_CASE("the heap only grows and fresh locations avoid the store") {
    Sig s;
    State st;
    st.store["keep"] = Val::loc(50);
    st.heap[3] = Val::int_(1);
    Outcome o = s.run("lower Sll (Cons 1 (lower Sll (Cons 2 (lower Sll Nil))))", st);
    CHECK(o.state.store.at("keep") == Val::loc(50));
    CHECK(o.state.heap.at(3) == Val::int_(1));
    CHECK(o.state.heap.size() == 5);
    for (const auto& [l, _] : o.state.heap)
        if (l != 3) CHECK(l > 50);
}

TEST_CASE("model printing") {
    Model m;
    CHECK(m.show() == "store: (empty)\nheap: (empty)\n");
    m.store["x"] = Val::loc(1);
    m.heap[1] = Val::int_(7);
    CHECK(m.show() == "store:\n  x = @1\nheap:\n  @1 :-> 7\n");
}
