#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "pika/ssl.hpp"
#include "pika/syntax.hpp"
#include "pika/types.hpp"

namespace pika {

// Null-encoded branch discriminator for `ctor` in layout `l`, over variable x.
ssl::TermPtr cond(const LayoutDef& l, const std::string& ctor, const std::string& x);
ssl::TermPtr cond(const LayoutDef& l, const std::string& ctor);

// Layout as a data-structure predicate; branches are tagged with constructors.
ssl::PredicateDef translate_layout_predicate(const LayoutDef& l);
// ro_L: the same shape with read-only points-to.
ssl::PredicateDef readonly_layout_predicate(const LayoutDef& l);
// L__copy(src, dst): dst holds a fresh copy of the structure at src.
ssl::PredicateDef copy_predicate(const LayoutDef& l);

// What one arm of a directive turned into, kept per stage for dump_stages.
struct ArmTrace {
    size_t case_index = 0;
    size_t body_index = 0;
    std::vector<ssl::TermPtr> conds;
    ssl::Assertion unfold;               // stage 3: argument cells / ro_ applications
    std::vector<ssl::TermPtr> emp_result;  // stage 2: dest == 0
    std::vector<ssl::Heaplet> copies;      // stage 4
    std::vector<ssl::TermPtr> lets;        // stage 5
    ssl::Assertion body;                   // stage 6: everything
};

struct CompiledDirective {
    std::string file_stem;                  // <fn>__<tags>
    std::vector<ssl::PredicateDef> aux;     // layout, ro_ and copy predicates
    ssl::PredicateDef pred;
    ssl::GoalSpec goal;
    std::vector<ArmTrace> arms;

    std::string text(bool with_goal) const;
};

CompiledDirective compile_directive(const TypedProgram& tp, const ElabDirective& d);
std::vector<CompiledDirective> compile_program(const TypedProgram& tp);

// Seven snapshots; throws MissingGenerateDirective when fn has no directive.
std::string dump_stages(const TypedProgram& tp, const std::string& fn);

// ---------------------------------------------------------------- formal core

struct CoreResult {
    std::vector<ssl::TermPtr> pure;
    std::vector<ssl::Heaplet> spatial;
    std::set<std::string> used;
    std::string result;

    ssl::Assertion assertion() const { return {pure, spatial}; }
};

struct CoreEnv {
    const GlobalEnv* g = nullptr;
    const SourceUnit* unit = nullptr;
    bool broken_add = false;  // mutation fixture: S-ADD off by one
};

// Name of the function predicate for f instantiated at [A] B.
std::string core_pred_name(const std::string& f, const LayoutRef& a, const LayoutRef& b);

// want: the variable that must hold the result ("" to pick a fresh one).
CoreResult translate_expr_core(const CoreEnv& env, const ExprPtr& e, const std::set<std::string>& V,
                               const std::string& want = "");
ssl::Branch translate_fn_def_core(const CoreEnv& env, const FnCase& c, const LayoutRef& a, const LayoutRef& b);
ssl::PredicateDef translate_fn_core(const CoreEnv& env, const FnDef& f, const LayoutRef& a, const LayoutRef& b);

// True when e uses only the constructs the abstract machine covers.
bool is_core_expr(const ExprPtr& e, std::string* why = nullptr);

}  // namespace pika
