#pragma once

#include "regulus/csp.hpp"
#include "regulus/solvers.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace regulus {

// ---------------------------------------------------------------------------
// Deterministic regularization: N stamped blocks over per-degree copies
// ---------------------------------------------------------------------------

struct BlockMap {
    int N = 0;        // block count
    int num_good = 0; // good blocks are exactly [0, num_good)
    std::vector<std::pair<int, int>> copy_of; // per output variable: (original, copy j in [1, d_i])
    std::vector<int> copy_base;               // per original variable: first output index (size n+1)
    // Per block, per original variable: 0-based copy index, or -1 in blocks
    // where occurrences of one variable may use different copies.
    std::vector<std::vector<int>> block_assignment;
    std::vector<int> good_blocks;

    int source_variables() const { return static_cast<int>(copy_base.size()) - 1; }
};

// Output has N*m constraints over sum_i d_i copy variables, each of degree
// exactly N, with N = ceil(max_degree/epsilon). Copy j of variable i serves a
// contiguous run of floor(N/d_i) good blocks; the remaining blocks are filled
// round-robin over copies with residual capacity. At least N - max_degree
// blocks are good.
std::pair<Instance, BlockMap> regularize_deterministic(const Instance& f, double epsilon);

// Reads the assignment off the best good block (largest value for max,
// smallest for min; ties to the lowest block index). The result loses at most
// epsilon against Val_zeta(G).
Assignment pullback_deterministic(const Instance& g, const BlockMap& map, const Assignment& zeta,
                                  Goal goal);

// ---------------------------------------------------------------------------
// Randomized regularization: sampling plus degree repair
// ---------------------------------------------------------------------------

struct ParamProfile {
    std::string name = "paper";
    double c1 = 64.0;
    double c2 = 1.0;
    double c3 = 22.2; // 32*ln2, rounded
};

ParamProfile paper_profile();
ParamProfile test_profile(); // c1 = 8, for CI-sized runs
ParamProfile profile_from_env(); // REGULUS_PROFILE=paper|test, default paper

struct DegreeParams {
    double epsilon = 0.0;
    double W = 0.0;      // average constraint arity
    int W_max = 1;       // maximum constraint arity
    double beta = 0.0;   // epsilon / (5 W)
    long long D = 1;     // per-constraint sample multiplier
    long long Delta = 1; // uniform target degree, coprime to W_max
    ParamProfile profile;
};

// D = max of the three lower bounds (replacement integral, arity
// concentration, value concentration); Delta = first integer >= (1+beta)*D
// with gcd(Delta, W_max) = 1.
DegreeParams target_degree_params(const Instance& f, double epsilon,
                                  const ParamProfile& profile = paper_profile());

struct CopyMap {
    long long Delta = 0;
    int num_copies = 0;  // output variables [0, num_copies) are copies
    int num_dummies = 0; // output variables [num_copies, num_copies+num_dummies)
    std::vector<std::pair<int, int>> copy_of; // copies: (original, j); dummies: (-1, dummy id)
    std::vector<int> copy_base;               // per original variable (size n+1)
    std::vector<int> constraint_origin;       // per output constraint: source index or -1 (padding)

    int source_variables() const { return static_cast<int>(copy_base.size()) - 1; }
};

struct ReductionCertificate {
    double epsilon = 0.0;
    DegreeParams params;
    int trials_attempted = 0;
    int trial_succeeded = -1;
    long long sampled_constraints = 0;
    long long replacements = 0;     // surplus occurrences moved onto dummies
    long long padding_constraints = 0;
    long long closure_constraints = 0;
    long long changed_plus_added = 0;
    double b_bound = 0.0;           // 8mW + 2*beta*m*W*D + 3*(1+beta)*D
    bool within_b = false;
    std::vector<std::string> trial_failures;
};

struct RandomizedRegularization {
    Instance instance;
    CopyMap map;
    ReductionCertificate certificate;
};

// Per trial: sample mD constraints with uniformly chosen copies, move surplus
// occurrences (degree above Delta, latest samples first) onto reusable dummy
// variables, reject the trial if replacements exceed 4mW or the sampled
// average arity drops below (1-beta)W, pad deficient copies to degree Delta
// with maximal-arity constraints, then close the dummies' degrees. Up to n
// trials; throws ReductionFailure after that.
RandomizedRegularization regularize_randomized(const Instance& f, double epsilon,
                                               std::uint64_t seed,
                                               const ParamProfile& profile = paper_profile());

// Empirical per-variable marginals over the copies of each variable feed the
// method of conditional expectations; the result dominates the expectation of
// Val(F) under those marginals.
Assignment pullback_randomized(const Instance& f, const CopyMap& map, const Assignment& zeta);
Marginals empirical_marginals(const Instance& f, const CopyMap& map, const Assignment& zeta);

} // namespace regulus
