#pragma once

#include "regulus/csp.hpp"
#include "regulus/regularity.hpp"
#include "regulus/solvers.hpp"
#include "regulus/weight_reduction.hpp"

#include "json.hpp"

#include <functional>
#include <optional>
#include <variant>

namespace regulus {

enum class RegularizeMode { det, rand };

// The pluggable regular-instance solver. Custom solvers receive the regular
// unweighted instance and nothing else; the declared alpha is metadata used
// for epsilon computation (Min) and reporting.
struct RegularSolver {
    enum class Kind { brute, random, greedy, custom };
    Kind kind = Kind::brute;
    double alpha = 1.0;
    std::function<Assignment(const Instance&)> solve; // required for custom

    static RegularSolver brute() { return {Kind::brute, 1.0, nullptr}; }
    static RegularSolver random() { return {Kind::random, 1.0, nullptr}; }
    static RegularSolver greedy() { return {Kind::greedy, 1.0, nullptr}; }
    static RegularSolver custom(double alpha, std::function<Assignment(const Instance&)> fn) {
        return {Kind::custom, alpha, std::move(fn)};
    }
};

struct StageInfo {
    std::string op;
    nlohmann::json parameters;
    int vars_in = 0, cons_in = 0;
    int vars_out = 0, cons_out = 0;
};

struct PipelineReport {
    std::string input_digest;
    std::string goal;
    double delta = 0.0;
    double alpha = 1.0;
    std::string solver;
    std::string mode;
    std::uint64_t seed = 0;
    std::vector<StageInfo> stages;
    Assignment assignment;
    double value = 0.0;
    std::optional<double> brute_opt;     // when the budget allows
    std::optional<double> achieved_ratio;
    double claimed_bound = 0.0;          // alpha - delta (max) or alpha + delta (min)
    bool zero_certificate = false;       // min: optimum 0 short-circuit
    bool guarantee_void = false;         // min: heavy-constraint audit failed
    nlohmann::json extra;                // gamma, epsilons, certificates, ...

    nlohmann::json to_json() const;
};

struct PipelineResult {
    Assignment assignment;
    PipelineReport report;
};

struct PipelineOptions {
    double delta = 0.1;
    RegularSolver solver = RegularSolver::brute();
    RegularizeMode mode = RegularizeMode::det;
    std::uint64_t seed = 0;
    ParamProfile profile = paper_profile();
    double alpha = 1.0;             // min only; must match solver.alpha
    EvalBudget oracle_budget = {};  // min preprocessing oracle
    EvalBudget report_budget = {};  // brute-force Opt(F) for the report
};

// Strip identically-false predicates, de-weight with epsilon = delta*gamma/4,
// regularize (det or rand) with the same epsilon, solve, pull back.
PipelineResult pipeline_max(const Instance& f, const PipelineOptions& opt);

// Zero-certificate short-circuit, constraint-count floor, light/heavy scaling,
// de-weight with epsilon = delta*w_k*sigma/(4 alpha), deterministic
// regularization with epsilon = delta/m', solve, pull back, heavy audit.
PipelineResult pipeline_min(const Instance& f, const PipelineOptions& opt);

// ---------------------------------------------------------------------------
// Verification
// ---------------------------------------------------------------------------

struct CheckResult {
    std::string name;
    bool pass = false;
    bool skipped = false;
    std::string details;
};

struct VerifyReport {
    std::vector<CheckResult> checks;
    bool all_passed() const;
    nlohmann::json to_json() const;
};

using ReductionMap = std::variant<BlockMap, CopyMap>;

struct VerifyOptions {
    int samples = 100;
    std::uint64_t seed = 0;
    double epsilon = 0.25;       // pull-back tolerance to check against
    Goal goal = Goal::max;
    EvalBudget budget = {};      // for the Opt sandwich
    double min_value_pass_rate = 0.95;
};

// Structural invariants exactly, value statements by sampling; failures are
// report entries, never exceptions.
VerifyReport verify(const Instance& f, const Instance& g, const ReductionMap& map,
                    const ReductionCertificate* cert, const VerifyOptions& opt);

// ---------------------------------------------------------------------------
// JSON round-trips for the CLI artifacts
// ---------------------------------------------------------------------------

nlohmann::json to_json(const ReplicationPlan& plan);
nlohmann::json to_json(const MinScalePlan& plan);
nlohmann::json to_json(const BlockMap& map);
nlohmann::json to_json(const CopyMap& map);
nlohmann::json to_json(const DegreeParams& params);
nlohmann::json to_json(const ReductionCertificate& cert);

BlockMap block_map_from_json(const nlohmann::json& j);
CopyMap copy_map_from_json(const nlohmann::json& j);
ReductionCertificate certificate_from_json(const nlohmann::json& j);

} // namespace regulus
