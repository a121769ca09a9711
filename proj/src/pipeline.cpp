#include "regulus/pipeline.hpp"

#include "regulus/formats.hpp"
#include "regulus/rng.hpp"

#include <algorithm>
#include <cmath>

namespace regulus {

using nlohmann::json;

namespace {

StageInfo stage(const std::string& op, const Instance& in, const Instance& out, json params) {
    StageInfo s;
    s.op = op;
    s.parameters = std::move(params);
    s.vars_in = in.num_variables;
    s.cons_in = in.num_constraints();
    s.vars_out = out.num_variables;
    s.cons_out = out.num_constraints();
    return s;
}

// Remove constraints that can never be satisfied (identically-false
// predicates) and, for weighted instances, constraints of weight zero; then
// renormalize. Ratios between assignment values are unchanged.
struct Stripped {
    Instance instance;
    int removed = 0;
};

Stripped strip_falsum(const Instance& f) {
    Stripped out;
    out.instance.language = f.language;
    out.instance.num_variables = f.num_variables;
    out.instance.weighted = f.weighted;
    double kept_weight = 0.0;
    for (int r = 0; r < f.num_constraints(); ++r) {
        const Constraint& c = f.constraints[static_cast<std::size_t>(r)];
        const bool falsum = f.language.at(c.pred).satisfying.empty();
        const bool zero_weight = f.weighted && f.weights[static_cast<std::size_t>(r)] == 0.0;
        if (falsum || zero_weight) {
            ++out.removed;
            continue;
        }
        out.instance.constraints.push_back(c);
        if (f.weighted) {
            out.instance.weights.push_back(f.weights[static_cast<std::size_t>(r)]);
            kept_weight += f.weights[static_cast<std::size_t>(r)];
        }
    }
    if (f.weighted && out.removed > 0 && !out.instance.weights.empty())
        for (double& w : out.instance.weights)
            w /= kept_weight;
    return out;
}

// Restriction to variables of positive degree, with the inverse mapping.
struct Condensed {
    Instance instance;
    std::vector<int> kept;  // condensed index -> original variable
    bool identity = true;
};

Condensed drop_isolated(const Instance& f) {
    const DegreeReport deg = degrees(f);
    Condensed out;
    std::vector<int> to_new(static_cast<std::size_t>(f.num_variables), -1);
    for (int i = 0; i < f.num_variables; ++i) {
        if (deg.degrees[static_cast<std::size_t>(i)] > 0) {
            to_new[static_cast<std::size_t>(i)] = static_cast<int>(out.kept.size());
            out.kept.push_back(i);
        }
    }
    out.identity = static_cast<int>(out.kept.size()) == f.num_variables;
    out.instance = f;
    if (out.identity)
        return out;
    out.instance.num_variables = static_cast<int>(out.kept.size());
    for (Constraint& c : out.instance.constraints)
        for (int& var : c.scope)
            var = to_new[static_cast<std::size_t>(var)];
    return out;
}

Assignment expand(const Condensed& sub, const Assignment& chi_sub, int original_n) {
    if (sub.identity)
        return chi_sub;
    Assignment chi(static_cast<std::size_t>(original_n), 0); // isolated variables get 0
    for (std::size_t i = 0; i < sub.kept.size(); ++i)
        chi[static_cast<std::size_t>(sub.kept[i])] = chi_sub[i];
    return chi;
}

void enforce_solver_boundary(const Instance& g) {
    if (g.weighted)
        throw ContractViolation("regular solver fed a weighted instance");
    if (!degrees(g).is_regular)
        throw ContractViolation("regular solver fed an irregular instance");
}

Assignment checked_solution(const Instance& g, Assignment zeta) {
    if (static_cast<int>(zeta.size()) != g.num_variables)
        throw ContractViolation("solver returned an assignment of wrong length");
    for (int v : zeta)
        if (v < 0 || v >= g.language.domain_size)
            throw ContractViolation("solver returned an out-of-range value");
    return zeta;
}

std::string solver_name(const RegularSolver& solver, RegularizeMode mode) {
    switch (solver.kind) {
    case RegularSolver::Kind::brute:
        return mode == RegularizeMode::det ? "brute (block-consistent enumeration)"
                                           : "brute (copy-consistent enumeration)";
    case RegularSolver::Kind::random:
        return "random";
    case RegularSolver::Kind::greedy:
        return "greedy";
    case RegularSolver::Kind::custom:
        return "custom";
    }
    return "?";
}

// The built-in exact solver enumerates assignments that are constant on the
// copy classes of the reduction. Full enumeration over the reduced instance
// is hopeless (its variable count is the de-weighted instance's scope total),
// while the consistent subspace carries the same end-to-end guarantee: every
// lift evaluates each block to the preimage's value.
Assignment consistent_brute_det(const Instance& g1, const BlockMap& map, Goal goal,
                                EvalBudget budget) {
    const SolveResult best = brute_force_opt(g1, goal, budget);
    Assignment zeta(map.copy_of.size());
    for (std::size_t v = 0; v < map.copy_of.size(); ++v)
        zeta[v] = best.assignment[static_cast<std::size_t>(map.copy_of[v].first)];
    return zeta;
}

Assignment consistent_brute_rand(const Instance& g1, const Instance& g2, const CopyMap& map,
                                 EvalBudget budget) {
    const int q = g1.language.domain_size;
    const int n = g1.num_variables;
    double space = 1.0;
    for (int i = 0; i < n; ++i) {
        space *= q;
        if (space > static_cast<double>(budget.max_assignments))
            throw BudgetExceeded("consistent enumeration budget exceeded");
    }

    Evaluator ev(g2);
    Assignment chi(static_cast<std::size_t>(n), 0);
    Assignment zeta(static_cast<std::size_t>(g2.num_variables), 0);
    Assignment best;
    double best_value = -1.0;
    bool done = false;
    while (!done) {
        for (int v = 0; v < map.num_copies; ++v)
            zeta[static_cast<std::size_t>(v)] =
                chi[static_cast<std::size_t>(map.copy_of[static_cast<std::size_t>(v)].first)];
        for (int dummy_val = 0; dummy_val < q; ++dummy_val) {
            for (int d = 0; d < map.num_dummies; ++d)
                zeta[static_cast<std::size_t>(map.num_copies + d)] = dummy_val;
            const double value = ev.value(zeta);
            if (value > best_value) {
                best_value = value;
                best = zeta;
            }
        }
        done = true;
        for (int i = 0; i < n; ++i) {
            if (++chi[static_cast<std::size_t>(i)] < q) {
                done = false;
                break;
            }
            chi[static_cast<std::size_t>(i)] = 0;
        }
    }
    return best;
}

Assignment run_solver(const RegularSolver& solver, const Instance& g2, Goal goal) {
    enforce_solver_boundary(g2);
    switch (solver.kind) {
    case RegularSolver::Kind::random:
        return checked_solution(g2, random_baseline(g2, goal).assignment);
    case RegularSolver::Kind::greedy:
        return checked_solution(g2, greedy_baseline(g2, goal).assignment);
    case RegularSolver::Kind::custom:
        if (!solver.solve)
            throw ContractViolation("custom solver without a callback");
        return checked_solution(g2, solver.solve(g2));
    case RegularSolver::Kind::brute:
        throw ContractViolation("built-in brute solver is dispatched by the pipeline");
    }
    throw Error("unreachable");
}

void fill_opt_and_ratio(const Instance& f, Goal goal, const PipelineOptions& opt,
                        PipelineReport& report) {
    try {
        const SolveResult exact = brute_force_opt(f, goal, opt.report_budget);
        report.brute_opt = exact.value;
        if (exact.value > 0.0)
            report.achieved_ratio = report.value / exact.value;
        else if (report.value == 0.0)
            report.achieved_ratio = 1.0;
    } catch (const BudgetExceeded&) {
        // Opt stays unknown; the report still records value and bound.
    }
}

} // namespace

PipelineResult pipeline_max(const Instance& f, const PipelineOptions& opt) {
    if (opt.delta <= 0.0 || opt.delta >= 1.0)
        throw ValidationError("pipeline needs delta in (0,1)");
    require_valid(f);

    PipelineReport report;
    report.input_digest = instance_digest(f);
    report.goal = "max";
    report.delta = opt.delta;
    report.alpha = opt.solver.alpha;
    report.solver = solver_name(opt.solver, opt.mode);
    report.mode = opt.mode == RegularizeMode::det ? "det" : "rand";
    report.seed = opt.seed;
    report.claimed_bound = opt.solver.alpha - opt.delta;

    const Stripped stripped = strip_falsum(f);
    if (stripped.instance.constraints.empty()) {
        // Nothing can ever be satisfied: any assignment is optimal.
        report.assignment.assign(static_cast<std::size_t>(f.num_variables), 0);
        report.value = 0.0;
        report.brute_opt = 0.0;
        report.achieved_ratio = 1.0;
        report.extra["degenerate"] = "all constraints identically false or weightless";
        return {report.assignment, report};
    }
    report.stages.push_back(stage("strip", f, stripped.instance,
                                  json{{"removed", stripped.removed}}));

    const double gamma = gamma_lower_bound(stripped.instance);
    const double epsilon = opt.delta * gamma / 4.0;
    report.extra["gamma"] = gamma;
    report.extra["epsilon_per_stage"] = epsilon;

    // De-weighting (skipped for unweighted inputs; replication is only
    // defined on weighted instances).
    Instance g1;
    if (stripped.instance.weighted) {
        auto [g, plan] = replicate_to_unweighted(stripped.instance, epsilon);
        report.stages.push_back(stage("replicate_to_unweighted", stripped.instance, g,
                                      json{{"epsilon", epsilon}, {"q_total", plan.q_total}}));
        g1 = std::move(g);
    } else {
        g1 = stripped.instance;
    }

    const Condensed sub = drop_isolated(g1);
    if (!sub.identity)
        report.stages.push_back(stage("drop_isolated", g1, sub.instance, json::object()));

    Assignment chi_sub;
    if (opt.mode == RegularizeMode::det) {
        auto [g2, map] = regularize_deterministic(sub.instance, epsilon);
        report.stages.push_back(stage("regularize_deterministic", sub.instance, g2,
                                      json{{"epsilon", epsilon},
                                           {"N", map.N},
                                           {"good_blocks", map.num_good}}));
        enforce_solver_boundary(g2);
        Assignment zeta = opt.solver.kind == RegularSolver::Kind::brute
                              ? checked_solution(g2, consistent_brute_det(sub.instance, map,
                                                                          Goal::max, opt.report_budget))
                              : run_solver(opt.solver, g2, Goal::max);
        chi_sub = pullback_deterministic(g2, map, zeta, Goal::max);
    } else {
        RandomizedRegularization reg = regularize_randomized(sub.instance, epsilon, opt.seed,
                                                             opt.profile);
        report.stages.push_back(stage("regularize_randomized", sub.instance, reg.instance,
                                      json{{"epsilon", epsilon},
                                           {"certificate", to_json(reg.certificate)}}));
        enforce_solver_boundary(reg.instance);
        Assignment zeta = opt.solver.kind == RegularSolver::Kind::brute
                              ? checked_solution(reg.instance,
                                                 consistent_brute_rand(sub.instance, reg.instance,
                                                                       reg.map, opt.report_budget))
                              : run_solver(opt.solver, reg.instance, Goal::max);
        chi_sub = pullback_randomized(sub.instance, reg.map, zeta);
    }

    report.assignment = expand(sub, chi_sub, f.num_variables);
    report.value = evaluate(f, report.assignment);
    fill_opt_and_ratio(f, Goal::max, opt, report);
    return {report.assignment, report};
}

PipelineResult pipeline_min(const Instance& f, const PipelineOptions& opt) {
    if (opt.delta <= 0.0 || opt.delta >= 1.0)
        throw ValidationError("pipeline needs delta in (0,1)");
    if (opt.alpha < 1.0)
        throw ValidationError("pipeline min needs alpha >= 1");
    require_valid(f);

    PipelineReport report;
    report.input_digest = instance_digest(f);
    report.goal = "min";
    report.delta = opt.delta;
    report.alpha = opt.alpha;
    report.solver = solver_name(opt.solver, RegularizeMode::det);
    report.mode = "det";
    report.seed = opt.seed;
    report.claimed_bound = opt.alpha + opt.delta;

    // Weighted view of the input; unweighted instances get uniform weights.
    Instance fw = f;
    if (!fw.weighted) {
        fw.weighted = true;
        fw.weights.assign(static_cast<std::size_t>(f.num_constraints()),
                          1.0 / static_cast<double>(f.num_constraints()));
    }

    const int m_floor = static_cast<int>(std::ceil(2.0 / opt.delta));
    const Instance f1 = ensure_min_constraints(fw, std::max(m_floor, fw.num_constraints()));
    if (f1.num_constraints() != fw.num_constraints())
        report.stages.push_back(stage("ensure_min_constraints", fw, f1,
                                      json{{"m_min", m_floor}}));

    BruteForceFalsifier oracle(opt.oracle_budget);
    MinPreprocessResult pre = min_preprocess_scale(f1, opt.delta, opt.alpha, oracle);
    if (std::holds_alternative<ZeroCertificate>(pre)) {
        const ZeroCertificate& zero = std::get<ZeroCertificate>(pre);
        report.zero_certificate = true;
        report.assignment = zero.assignment;
        report.value = evaluate(f, zero.assignment);
        report.brute_opt = 0.0;
        report.achieved_ratio = 1.0;
        report.extra["zero_certificate"] = true;
        return {report.assignment, report};
    }

    auto& [fprime, plan] = std::get<std::pair<Instance, MinScalePlan>>(pre);
    report.stages.push_back(stage("min_preprocess_scale", f1, fprime,
                                  json{{"k", plan.k},
                                       {"w_k", plan.w_k},
                                       {"sigma", plan.sigma}}));
    report.extra["w_k_sigma"] = plan.w_k * plan.sigma;

    const double eps_weights = opt.delta * plan.w_k * plan.sigma / (4.0 * opt.alpha);
    auto [g1, rplan] = replicate_to_unweighted(fprime, eps_weights);
    report.stages.push_back(stage("replicate_to_unweighted", fprime, g1,
                                  json{{"epsilon", eps_weights}, {"q_total", rplan.q_total}}));

    const Condensed sub = drop_isolated(g1);
    if (!sub.identity)
        report.stages.push_back(stage("drop_isolated", g1, sub.instance, json::object()));

    const double eps_regular = opt.delta / static_cast<double>(sub.instance.num_constraints());
    auto [g2, map] = regularize_deterministic(sub.instance, eps_regular);
    report.stages.push_back(stage("regularize_deterministic", sub.instance, g2,
                                  json{{"epsilon", eps_regular},
                                       {"N", map.N},
                                       {"good_blocks", map.num_good}}));

    enforce_solver_boundary(g2);
    Assignment zeta = opt.solver.kind == RegularSolver::Kind::brute
                          ? checked_solution(g2, consistent_brute_det(sub.instance, map, Goal::min,
                                                                      opt.report_budget))
                          : run_solver(opt.solver, g2, Goal::min);
    const Assignment chi_sub = pullback_deterministic(g2, map, zeta, Goal::min);
    report.assignment = expand(sub, chi_sub, f.num_variables);

    // A sound approximation of F' never satisfies a heavy constraint; if this
    // one does, the bound no longer follows and the report says so.
    Tuple point;
    for (int r = 0; r < f1.num_constraints(); ++r) {
        if (plan.classes[static_cast<std::size_t>(r)] != WeightClass::heavy)
            continue;
        const Constraint& c = f1.constraints[static_cast<std::size_t>(r)];
        point.resize(c.scope.size());
        for (std::size_t j = 0; j < c.scope.size(); ++j)
            point[j] = report.assignment[static_cast<std::size_t>(c.scope[j])];
        if (f1.language.at(c.pred).holds(point)) {
            report.guarantee_void = true;
            report.extra["heavy_audit"] = "assignment satisfies heavy constraint " +
                                          std::to_string(r);
            break;
        }
    }

    report.value = evaluate(f, report.assignment);
    fill_opt_and_ratio(f, Goal::min, opt, report);
    return {report.assignment, report};
}

// ---------------------------------------------------------------------------
// Report serialization
// ---------------------------------------------------------------------------

json PipelineReport::to_json() const {
    json stages_json = json::array();
    for (const StageInfo& s : stages)
        stages_json.push_back(json{{"op", s.op},
                                   {"parameters", s.parameters},
                                   {"in", json{{"variables", s.vars_in}, {"constraints", s.cons_in}}},
                                   {"out", json{{"variables", s.vars_out}, {"constraints", s.cons_out}}}});
    json j{{"version", 1},
           {"input_digest", input_digest},
           {"goal", goal},
           {"delta", delta},
           {"alpha", alpha},
           {"solver", solver},
           {"mode", mode},
           {"seed", seed},
           {"stages", stages_json},
           {"assignment", assignment},
           {"value", value},
           {"claimed_bound", claimed_bound},
           {"zero_certificate", zero_certificate},
           {"guarantee_void", guarantee_void},
           {"extra", extra}};
    j["brute_opt"] = brute_opt ? json(*brute_opt) : json(nullptr);
    j["achieved_ratio"] = achieved_ratio ? json(*achieved_ratio) : json(nullptr);
    return j;
}

} // namespace regulus
