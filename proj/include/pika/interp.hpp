#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pika/syntax.hpp"
#include "pika/types.hpp"

namespace pika::interp {

struct Val {
    enum class Kind { Int, Bool, Loc };
    Kind kind = Kind::Int;
    long long v = 0;

    static Val int_(long long n) { return {Kind::Int, n}; }
    static Val bool_(bool b) { return {Kind::Bool, b ? 1 : 0}; }
    static Val loc(long long l) { return {Kind::Loc, l}; }

    bool operator==(const Val& o) const { return kind == o.kind && v == o.v; }
    bool operator!=(const Val& o) const { return !(*this == o); }
    std::string show() const;
};

struct FsVal {
    bool is_ctor = false;
    Val base;
    std::string ctor;
    std::vector<FsVal> fields;

    static FsVal of(Val v) { return {false, v, "", {}}; }
    std::string show() const;
};
bool operator==(const FsVal& a, const FsVal& b);

using Store = std::map<std::string, Val>;
using Heap = std::map<long long, Val>;

struct Model {
    Store store;
    Heap heap;
    std::string show() const;
};

// F, plus the field values each location was built from so that
// instantiate can bind pattern variables without re-reading the heap.
struct FsStore {
    std::map<long long, FsVal> vals;
    std::map<long long, std::vector<Val>> fields;

    const FsVal* at(long long l) const;
};

// A layout body with its variables already replaced by values.
struct GroundHeaplet {
    enum class Kind { Emp, PointsTo, Apply };
    Kind kind = Kind::Emp;
    std::optional<Val> base;  // PointsTo target / Apply argument
    int offset = 0;
    std::optional<Val> value;  // unset when the right-hand side is still a variable
    std::string var;           // that variable, for the error message
    std::string layout;
};

// Throws UngroundedHeaplet / HeapOverlap.
Heap act_on_heap(const Heap& h, const std::vector<GroundHeaplet>& body);

struct State {
    Store store;
    Heap heap;
    FsStore fs;
};

struct Outcome {
    FsVal value;
    State state;
    std::string var;  // bound to the result in state.store
};

// Functions called by instantiate come from `unit`; g must be built from it.
struct Program {
    const GlobalEnv* g = nullptr;
    const SourceUnit* unit = nullptr;
};

// Throws UnboundVariable, NotAConstructorValue, HeapOverlap, NoMatchingFnCase,
// UnsupportedConstruct.
Outcome eval(const Program& p, const ExprPtr& e, State s = {});

}  // namespace pika::interp
