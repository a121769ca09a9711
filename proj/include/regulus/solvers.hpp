#pragma once

#include "regulus/csp.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>

namespace regulus {

enum class Goal { max, min };

// Budgets are counted in assignment evaluations, not wall-clock, so tests are
// machine-independent. The default admits q^n up to 2^24.
struct EvalBudget {
    std::uint64_t max_assignments = std::uint64_t{1} << 24;
};

struct SolveResult {
    double value = 0.0;
    Assignment assignment;
    std::string method;
    bool exact = false;
};

// Per-variable distributions over [0, q).
struct Marginals {
    std::vector<std::vector<double>> p;

    static Marginals uniform(int n, int q);
    static Marginals point(const Assignment& chi, int q);
    void check(int n, int q) const; // rows are distributions, 1e-12 tolerance
};

// Exact optimum by lexicographic enumeration; ties resolve to the smallest
// assignment. Throws BudgetExceeded when q^n exceeds the budget.
SolveResult brute_force_opt(const Instance& f, Goal goal, EvalBudget budget = {});

// Exact expectation of Val under the product distribution, summed per
// constraint over the predicate's satisfying tuples.
double expected_value(const Instance& f, const Marginals& mu);

// Method of conditional expectations: fixes variables in index order, each to
// the value optimizing the exact conditional expectation. The returned
// assignment's value is >= (max) / <= (min) the initial expectation.
Assignment conditional_expectation_round(const Instance& f, const Marginals& mu, Goal goal);

// Derandomized uniform-random baseline. For Max without identically-false
// predicates the value is at least gamma_lower_bound.
SolveResult random_baseline(const Instance& f, Goal goal);

// One pass over variables; each is set to the value with the best signed
// weight of constraints whose status it forces (satisfied minus falsified for
// Max, the opposite for Min).
SolveResult greedy_baseline(const Instance& f, Goal goal);

// ---------------------------------------------------------------------------
// Falsifiability
// ---------------------------------------------------------------------------

// Answers "is there an assignment falsifying all listed constraints?".
// Returning nullopt means a definite no; running out of budget throws
// BudgetExceeded ("oracle inconclusive"), never a silent guess.
class FalsifiabilityOracle {
public:
    virtual ~FalsifiabilityOracle() = default;
    virtual std::optional<Assignment> find_falsifying(const Instance& f,
                                                      const std::vector<int>& constraints) = 0;
};

class BruteForceFalsifier final : public FalsifiabilityOracle {
public:
    explicit BruteForceFalsifier(EvalBudget budget = {}) : budget_(budget) {}
    std::optional<Assignment> find_falsifying(const Instance& f,
                                              const std::vector<int>& constraints) override;

private:
    EvalBudget budget_;
};

struct PrefixResult {
    int k = 1;              // largest k >= 1 with C_1..C_{k-1} falsifiable; m+1 if all are
    Assignment witness;     // falsifies C_1..C_{k-1} (empty when k == 1... the witness
                            // is still a full assignment; for k == 1 any assignment works)
};

// Constraints of f_sorted must be sorted descending by weight. Monotone binary
// search over the prefix length with oracle falsifiability checks.
PrefixResult largest_falsifiable_prefix(const Instance& f_sorted, FalsifiabilityOracle& oracle);
PrefixResult largest_falsifiable_prefix(const Instance& f_sorted, EvalBudget budget = {});

} // namespace regulus
