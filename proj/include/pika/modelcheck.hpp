#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "pika/interp.hpp"
#include "pika/ssl.hpp"
#include "pika/translate.hpp"

namespace pika::mc {

using interp::Model;
using interp::Val;

struct PredicateEnv {
    std::map<std::string, ssl::PredicateDef> preds;
    const interp::FsStore* witness = nullptr;  // branch choice by constructor when set
    bool use_cond = false;                      // null-encoded models: choose by cond

    void add(const ssl::PredicateDef& p) { preds[p.name] = p; }
    const ssl::PredicateDef* find(const std::string& n) const;
};

struct SatResult {
    enum class Kind { Sat, Unsat, Unknown };
    Kind kind = Kind::Sat;
    std::string reason;

    bool sat() const { return kind == Kind::Sat; }
    static SatResult ok() { return {Kind::Sat, ""}; }
    static SatResult unsat(std::string r) { return {Kind::Unsat, std::move(r)}; }
    static SatResult unknown(std::string r) { return {Kind::Unknown, std::move(r)}; }
};
const char* show(SatResult::Kind k);

// Throws UnboundVariable / SortMismatch.
Val eval_term(const interp::Store& s, const ssl::TermPtr& t);
bool eval_pure(const interp::Store& s, const ssl::TermPtr& t);

SatResult satisfies(const Model& m, const ssl::Assertion& a, const PredicateEnv& env, int depth = 64);

// The fixed signature the property suite generates expressions over.
struct CoreSignature {
    std::shared_ptr<SourceUnit> unit;
    std::shared_ptr<GlobalEnv> env;
    PredicateEnv preds;  // layout, ro_ and function predicates; no witness

    struct Fn {
        std::string name;
        LayoutRef arg;
        LayoutRef res;
    };
    std::vector<Fn> fns;
};

const std::string& default_core_signature_text();
// Every %generate directive names one core function instance.
CoreSignature load_core_signature(const std::string& text);
const CoreSignature& default_core_signature();

struct SoundnessReport {
    SatResult result;
    std::string expr;
    std::string trace;  // model, translation and verdict
};

SoundnessReport check_soundness(const CoreSignature& sig, const ExprPtr& e, int depth = 64,
                                bool broken_add = false);

// Closed well-typed core expression of at most `budget` nodes.
ExprPtr gen_core_expr(const CoreSignature& sig, std::uint64_t seed, int budget);
int expr_size(const ExprPtr& e);

// Throws PreconditionViolated unless σa ⊆ σb and the heaps are disjoint.
bool check_otimes(const Model& a, const Model& b, const ssl::Assertion& pa, const ssl::Assertion& pb,
                  const PredicateEnv& env);

// Every constructor value of depth <= max_depth with payloads in `payloads`,
// laid out null-encoded; cond must pick exactly its own branch.
struct CondOracleReport {
    int heaps = 0;
    int checks = 0;
    std::vector<std::string> violations;
};
CondOracleReport run_cond_oracle(const GlobalEnv& g, const LayoutDef& l, int max_depth = 3,
                                 const std::vector<long long>& payloads = {0, 1, 2});

struct OtimesReport {
    int pairs = 0;
    std::vector<std::string> violations;
};
OtimesReport run_otimes_suite(std::uint64_t seed, int count);

}  // namespace pika::mc
