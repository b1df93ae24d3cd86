#pragma once

#include <map>
#include <string>
#include <vector>

#include "pika/syntax.hpp"

namespace pika {

struct CtorInfo {
    std::string name;
    std::string adt;
    std::vector<TypeExpr> fields;
};

// Σ and Δ: everything global a typing judgment may consult.
struct GlobalEnv {
    std::map<std::string, const DataDef*> adts;
    std::map<std::string, CtorInfo> ctors;
    std::map<std::string, const LayoutDef*> layouts;
    std::map<std::string, TypeExpr> fns;

    const CtorInfo* ctor(const std::string& n) const;
    const LayoutDef* layout(const std::string& n) const;
    const TypeExpr* fn(const std::string& n) const;
};

// The unit must outlive the returned environment.
GlobalEnv build_global_env(const SourceUnit& u);

using LocalEnv = std::map<std::string, TypeExpr>;

// When `strict` is false, bare ADT-typed variables count as concrete. This is
// used for functions checked outside any %generate instantiation, where
// pattern variables have not been assigned layouts yet.
struct TypeCtx {
    const GlobalEnv* g = nullptr;
    LocalEnv locals;
    bool strict = true;
};

TypeExpr infer_expr(const TypeCtx& ctx, const ExprPtr& e);
TypeExpr infer_expr(const GlobalEnv& g, const LocalEnv& l, const ExprPtr& e);
bool check_concrete(const TypeCtx& ctx, const ExprPtr& e, const TypeExpr& adt);

// Γ ⊢ e : found is acceptable where `expected` is required.
bool compatible(const GlobalEnv& g, const TypeExpr& expected, const TypeExpr& found);

struct ElabParam {
    std::string ssl;  // __p_0, __p_x1, __r, __r_x
    LayoutRef layout;
    TypeExpr type;
    bool is_loc() const;
};

struct ElabBody {
    ExprPtr guard;  // null when unguarded
    ExprPtr body;
};

struct ElabCase {
    std::vector<Pattern> pats;
    std::vector<ElabBody> bodies;
    LocalEnv env;
    // pattern variable -> (argument index, layout heaplet offset) for cells,
    // and -> layout name for fields the argument layout lowers with a LayoutApply
    std::map<std::string, std::pair<int, int>> cell_of;
    std::map<std::string, std::string> field_layout;
};

struct ElabDirective {
    GenerateDirective dir;
    std::string fn;
    TypeExpr fn_type;
    std::string pred_name;
    std::vector<ElabParam> params;
    ElabParam result;
    std::vector<ElabCase> cases;
};

struct TypedProgram {
    std::shared_ptr<SourceUnit> unit;
    GlobalEnv env;
    std::vector<ElabDirective> directives;

    const ElabDirective* directive(const std::string& fn) const;
};

std::string layout_tag(const LayoutRef& l, bool result);
std::string mangle(const std::string& fn, const std::vector<LayoutRef>& args, const LayoutRef& res);

// Type checks every definition and elaborates every %generate directive.
TypedProgram elaborate(const SourceUnit& u);
// Elaborates one function at an instantiation that need not appear as a directive.
ElabDirective elaborate_instance(const TypedProgram& tp, const GenerateDirective& d);

}  // namespace pika
