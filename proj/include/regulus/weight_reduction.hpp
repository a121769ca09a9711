#pragma once

#include "regulus/csp.hpp"
#include "regulus/solvers.hpp"

#include <variant>

namespace regulus {

// ---------------------------------------------------------------------------
// Weighted -> unweighted replication
// ---------------------------------------------------------------------------

struct ReplicationPlan {
    double epsilon = 0.0;
    long long q_total = 0;          // total copies, = ceil(m / epsilon)
    std::vector<long long> counts;  // copies per source constraint, sum = q_total
};

// Replicates each constraint floor(w_r * q) times, then raises counts by
// descending fractional part (ties to the lower index) until the total is q.
// Guarantees |Val_zeta(G) - Val_zeta(F)| <= epsilon for every assignment and
// |counts_r/q - w_r| < 1/q per constraint.
std::pair<Instance, ReplicationPlan> replicate_to_unweighted(const Instance& f, double epsilon);

// ---------------------------------------------------------------------------
// Min-CSP preprocessing (light/medium/heavy scaling)
// ---------------------------------------------------------------------------

enum class WeightClass { light, medium, heavy };

struct MinScalePlan {
    double delta = 0.0;
    double alpha = 1.0;
    int k = 1;           // 1-based pivot position in descending-weight order
    double w_k = 0.0;    // pivot weight
    double sigma = 1.0;  // 1 / total kept weight after heavy clamping
    std::vector<WeightClass> classes; // per original constraint
    std::vector<int> sorted_order;    // original indices, descending by weight
    std::vector<int> kept;            // original indices of F' constraints, in F' order
    Assignment prefix_witness;        // falsifies the k-1 heaviest constraints
};

// Witness that the optimum is exactly 0: an assignment falsifying every
// constraint of positive weight.
struct ZeroCertificate {
    Assignment assignment;
};

using MinPreprocessResult = std::variant<std::pair<Instance, MinScalePlan>, ZeroCertificate>;

// Sorts by descending weight (stable), finds the largest falsifiable prefix,
// drops light constraints (w <= w_k/m^2), clamps heavy ones (w >= w_k*m^2)
// down to w_k*m^2 and renormalizes by sigma. Short-circuits with a
// ZeroCertificate when the oracle falsifies everything of positive weight.
MinPreprocessResult min_preprocess_scale(const Instance& f, double delta, double alpha,
                                         FalsifiabilityOracle& oracle);
MinPreprocessResult min_preprocess_scale(const Instance& f, double delta, double alpha,
                                         EvalBudget budget = {});

// ---------------------------------------------------------------------------
// Constraint count floor
// ---------------------------------------------------------------------------

// Duplicates every constraint ceil(m_min/m) times with the weight split
// equally among the duplicates, preserving Val on every assignment.
Instance ensure_min_constraints(const Instance& f, int m_min);

} // namespace regulus
