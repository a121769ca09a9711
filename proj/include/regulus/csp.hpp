#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace regulus {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Input data violates a documented precondition or invariant.
struct ValidationError : Error {
    using Error::Error;
};

// An enumeration budget ran out before the question was settled. Callers must
// treat this as "inconclusive", never as a yes/no answer.
struct BudgetExceeded : Error {
    using Error::Error;
};

// The randomized regularization exhausted all its trials.
struct ReductionFailure : Error {
    using Error::Error;
};

// A pluggable component (solver callback, map/instance pair) broke its contract.
struct ContractViolation : Error {
    using Error::Error;
};

// ---------------------------------------------------------------------------
// Domain model
// ---------------------------------------------------------------------------

using Tuple = std::vector<int>;

// Boolean-valued predicate on [0,q)^arity, stored extensionally as the sorted
// set of satisfying tuples. Arities in scope are small, so the extensional
// form keeps every derived quantity exact.
struct Predicate {
    std::string name;
    int arity = 0;
    std::vector<Tuple> satisfying; // sorted, deduplicated

    Predicate() = default;
    Predicate(std::string name_, int arity_, std::vector<Tuple> satisfying_);

    bool holds(const Tuple& t) const;
};

struct CspLanguage {
    int domain_size = 2;
    std::vector<Predicate> predicates;

    // Index of the named predicate, or -1.
    int find(const std::string& name) const;
    const Predicate& at(int index) const { return predicates.at(static_cast<std::size_t>(index)); }

    int add(Predicate p); // returns index; throws on duplicate name
    void check() const;   // throws ValidationError on malformed languages
};

// One constraint: a predicate applied to an ordered scope of distinct variables.
struct Constraint {
    int pred = 0;           // index into CspLanguage::predicates
    std::vector<int> scope; // pairwise distinct variable indices
};

// A CSP instance. The `weighted` flag is authoritative: unweighted instances
// never store weights (each constraint implicitly weighs 1/m), weighted ones
// carry a weight per constraint summing to 1 within 1e-9.
struct Instance {
    CspLanguage language;
    int num_variables = 0;
    std::vector<Constraint> constraints;
    bool weighted = false;
    std::vector<double> weights; // parallel to constraints iff weighted

    int num_constraints() const { return static_cast<int>(constraints.size()); }

    double weight(int r) const {
        return weighted ? weights[static_cast<std::size_t>(r)]
                        : 1.0 / static_cast<double>(constraints.size());
    }
};

using Assignment = std::vector<int>;

struct DegreeReport {
    std::vector<int> degrees;
    int min_degree = 0;
    int max_degree = 0;
    bool is_regular = false;
    std::optional<int> common_degree;
};

struct Violation {
    int constraint = -1; // -1 for instance-level problems
    std::string rule;
};

// ---------------------------------------------------------------------------
// Core operations
// ---------------------------------------------------------------------------

// Weighted fraction of satisfied constraints. For unweighted instances this is
// (satisfied count)/m computed as a single division.
double evaluate(const Instance& f, const Assignment& chi);

DegreeReport degrees(const Instance& f);

// Minimum over the language's predicates of |satisfying|/q^arity: the
// satisfaction probability of a uniform random assignment. Throws if some
// predicate is identically false; callers strip such constraints first.
double gamma_lower_bound(const CspLanguage& lang);

// Same bound restricted to predicates actually used by the instance.
double gamma_lower_bound(const Instance& f);

// Closure of a Boolean language under coordinate flips: for each predicate P
// of arity k and each mask I in {0,1}^k the result contains the predicate
// whose satisfying set is {t xor I}. Duplicates (by satisfying set) are
// merged; originals are kept under their own names.
CspLanguage close_under_shifts(const CspLanguage& lang);

// Full invariant check; violations are data, not errors.
std::vector<Violation> validate_instance(const Instance& f);

// Convenience: throw ValidationError if validate_instance is non-empty.
void require_valid(const Instance& f);

// ---------------------------------------------------------------------------
// Fast evaluation
// ---------------------------------------------------------------------------

// Flattens predicates into dense truth tables for tight evaluation loops.
// Produces bitwise-identical values to evaluate(). Assignments are not
// checked here: they must have length n with entries in [0, q).
class Evaluator {
public:
    explicit Evaluator(const Instance& f);

    double value(const Assignment& chi) const;
    bool satisfied(int r, const Assignment& chi) const;

    // Number of satisfied constraints (unweighted instances only).
    long long satisfied_count(const Assignment& chi) const;

private:
    const Instance* instance_;
    std::vector<std::vector<std::uint8_t>> tables_; // per predicate, mixed-radix indexed
    std::vector<const std::uint8_t*> table_of_;     // per constraint
    std::vector<int> scope_flat_;
    std::vector<int> scope_begin_;
    int q_ = 2;
};

// ---------------------------------------------------------------------------
// Small helpers shared across modules
// ---------------------------------------------------------------------------

// Builders used all over the tests and tools.
Instance make_unweighted(CspLanguage lang, int num_variables, std::vector<Constraint> constraints);
Instance make_weighted(CspLanguage lang, int num_variables, std::vector<Constraint> constraints,
                       std::vector<double> weights);

// Common Boolean predicates.
Predicate pred_neq();                 // x != y
Predicate pred_eq2();                 // x == y
Predicate pred_or(int k);             // x1 or ... or xk
Predicate pred_and(int k);            // x1 and ... and xk
Predicate pred_or_negated(int k, unsigned mask, const std::string& name); // clause with negation mask

} // namespace regulus
