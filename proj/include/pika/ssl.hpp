#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

namespace pika::ssl {

struct Term;
using TermPtr = std::shared_ptr<const Term>;

struct Term {
    enum class Kind { Int, Bool, Var, Eq, And, Or, Not, Lt, Add, Sub, Mod, Ite };
    Kind kind = Kind::Int;
    long long ival = 0;
    bool bval = false;
    std::string name;
    std::vector<TermPtr> args;
};

TermPtr t_int(long long v);
TermPtr t_bool(bool b);
TermPtr t_var(std::string n);
TermPtr t_bin(Term::Kind k, TermPtr a, TermPtr b);
TermPtr t_eq(TermPtr a, TermPtr b);
TermPtr t_and(TermPtr a, TermPtr b);
TermPtr t_not(TermPtr a);
TermPtr t_ite(TermPtr c, TermPtr t, TermPtr e);
// Left-nested conjunction; `true` when empty.
TermPtr t_conj(const std::vector<TermPtr>& cs);
// Flattens nested && and drops literal `true`.
std::vector<TermPtr> conjuncts(const TermPtr& t);

bool is_true(const TermPtr& t);
bool same_term(const TermPtr& a, const TermPtr& b);
void term_vars(const TermPtr& t, std::set<std::string>& out);
TermPtr subst(const TermPtr& t, const std::map<std::string, TermPtr>& m);

enum class Style {
    Full,     // every compound subterm parenthesised, as the generator prints
    Minimal,  // parentheses only where precedence needs them
};
std::string print_term(const TermPtr& t, Style s = Style::Full);

struct Heaplet {
    enum class Kind { Emp, PointsTo, Block, PredApply, FuncApply, Temp, RoPredApply };
    Kind kind = Kind::Emp;
    std::string base;  // PointsTo / Block / Temp variable
    int offset = 0;
    TermPtr value;
    bool readonly = false;
    int size = 0;
    std::string name;  // RoPredApply stores the layout name without ro_
    std::vector<TermPtr> args;
};

Heaplet h_emp();
Heaplet h_pts(std::string base, int off, TermPtr v, bool readonly = false);
Heaplet h_block(std::string base, int n);
Heaplet h_pred(std::string name, std::vector<TermPtr> args);
Heaplet h_func(std::string name, std::vector<TermPtr> args);
Heaplet h_temp(std::string v);
Heaplet h_ro(std::string layout, std::vector<TermPtr> args);

Heaplet subst(const Heaplet& h, const std::map<std::string, TermPtr>& m);

struct Assertion {
    std::vector<TermPtr> pure;  // conjuncts
    std::vector<Heaplet> spatial;
};

Assertion subst(const Assertion& a, const std::map<std::string, TermPtr>& m);
Assertion conj_otimes(const Assertion& a, const Assertion& b);
std::string emit_assertion(const Assertion& a, Style s = Style::Full);
std::string emit_heaplet(const Heaplet& h, Style s = Style::Full);

struct Param {
    std::string sort;  // int | loc | bool
    std::string name;
};

struct Branch {
    TermPtr cond;
    Assertion body;
    std::string tag;  // constructor the branch describes, when known
};

struct PredicateDef {
    std::string name;
    std::vector<Param> params;
    std::vector<Branch> branches;
    bool inductive = false;  // printed with the `inductive` keyword
};

struct GoalSpec {
    std::string fn;
    std::vector<Param> params;
    Assertion pre;
    Assertion post;
};

std::string emit_predicate(const PredicateDef& p, Style s = Style::Full);
std::string emit_goal_spec(const GoalSpec& g);

struct SslFile {
    std::vector<PredicateDef> preds;
    std::vector<GoalSpec> goals;
    const PredicateDef* pred(const std::string& n) const;
};

// Throws PikaError{"SslParseError"}.
SslFile parse_ssl(const std::string& text);
PredicateDef parse_predicate(const std::string& text);

// Equal up to a bijective renaming of variables (parameters positionally),
// branch order, and the order of cond conjuncts, pure conjuncts and heaplets.
bool structural_equiv(const PredicateDef& a, const PredicateDef& b);

int count_nodes(const TermPtr& t);
int count_nodes(const Assertion& a);
int count_nodes(const PredicateDef& p);
int count_nodes(const GoalSpec& g);
int count_nodes(const SslFile& f);

}  // namespace pika::ssl
