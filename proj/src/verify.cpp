#include "regulus/pipeline.hpp"

#include "regulus/rng.hpp"

#include <algorithm>
#include <cmath>

namespace regulus {

using nlohmann::json;

namespace {

void add(VerifyReport& rep, const std::string& name, bool pass, const std::string& details = "") {
    rep.checks.push_back({name, pass, false, details});
}

void skip(VerifyReport& rep, const std::string& name, const std::string& why) {
    rep.checks.push_back({name, false, true, why});
}

bool fits_budget(const Instance& f, const EvalBudget& budget) {
    double space = 1.0;
    for (int i = 0; i < f.num_variables; ++i) {
        space *= f.language.domain_size;
        if (space > static_cast<double>(budget.max_assignments))
            return false;
    }
    return true;
}

Assignment random_assignment(Rng& rng, int n, int q) {
    Assignment chi(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        chi[static_cast<std::size_t>(i)] = rng.below_int(q);
    return chi;
}

} // namespace

bool VerifyReport::all_passed() const {
    return std::all_of(checks.begin(), checks.end(),
                       [](const CheckResult& c) { return c.pass || c.skipped; });
}

json VerifyReport::to_json() const {
    json arr = json::array();
    for (const CheckResult& c : checks)
        arr.push_back(json{{"check", c.name},
                           {"status", c.skipped ? "skipped" : (c.pass ? "pass" : "fail")},
                           {"details", c.details}});
    return json{{"version", 1}, {"checks", arr}, {"all_passed", all_passed()}};
}

VerifyReport verify(const Instance& f, const Instance& g, const ReductionMap& map,
                    const ReductionCertificate* cert, const VerifyOptions& opt) {
    VerifyReport rep;

    add(rep, "reduced instance validates", validate_instance(g).empty());
    add(rep, "reduced instance unweighted", !g.weighted);

    const DegreeReport deg = degrees(g);
    add(rep, "reduced instance regular", deg.is_regular);

    const bool det = std::holds_alternative<BlockMap>(map);
    const long long target_degree =
        det ? std::get<BlockMap>(map).N : std::get<CopyMap>(map).Delta;
    add(rep, "common degree matches certificate",
        deg.is_regular && deg.common_degree && *deg.common_degree == target_degree,
        "expected " + std::to_string(target_degree));

    if (det) {
        const BlockMap& bm = std::get<BlockMap>(map);
        const int n = bm.source_variables();
        bool shape_ok = n == f.num_variables &&
                        static_cast<int>(bm.copy_of.size()) == g.num_variables &&
                        g.num_constraints() == bm.N * f.num_constraints();
        add(rep, "block map shape", shape_ok);
        if (!shape_ok)
            return rep;

        // Every copy used exactly N times across the blocks.
        std::vector<long long> usage(static_cast<std::size_t>(g.num_variables), 0);
        for (const Constraint& c : g.constraints)
            for (int var : c.scope)
                ++usage[static_cast<std::size_t>(var)];
        bool usage_ok = true;
        for (long long u : usage)
            usage_ok = usage_ok && u == bm.N;
        add(rep, "each copy used exactly N times", usage_ok);

        const DegreeReport fdeg = degrees(f);
        add(rep, "good block count >= N - D", bm.num_good >= bm.N - fdeg.max_degree,
            std::to_string(bm.num_good) + " of " + std::to_string(bm.N));

        // Good blocks are stamped copies of F through block_assignment.
        bool blocks_ok = static_cast<int>(bm.good_blocks.size()) == bm.num_good;
        const int m = f.num_constraints();
        for (int b = 0; blocks_ok && b < bm.num_good; ++b) {
            for (int r = 0; blocks_ok && r < m; ++r) {
                const Constraint& src = f.constraints[static_cast<std::size_t>(r)];
                const Constraint& dst = g.constraints[static_cast<std::size_t>(b * m + r)];
                if (dst.pred != src.pred || dst.scope.size() != src.scope.size()) {
                    blocks_ok = false;
                    break;
                }
                for (std::size_t pos = 0; pos < src.scope.size(); ++pos) {
                    const int orig = src.scope[pos];
                    const int copy =
                        bm.block_assignment[static_cast<std::size_t>(b)][static_cast<std::size_t>(orig)];
                    if (copy < 0 ||
                        dst.scope[pos] != bm.copy_base[static_cast<std::size_t>(orig)] + copy) {
                        blocks_ok = false;
                        break;
                    }
                }
            }
        }
        add(rep, "good blocks are consistent stamps of the source", blocks_ok);
    } else {
        const CopyMap& cm = std::get<CopyMap>(map);
        bool shape_ok = cm.source_variables() == f.num_variables &&
                        static_cast<int>(cm.copy_of.size()) == g.num_variables &&
                        static_cast<int>(cm.constraint_origin.size()) == g.num_constraints();
        add(rep, "copy map shape", shape_ok);
        if (!shape_ok)
            return rep;

        bool origin_ok = true;
        for (int r = 0; r < g.num_constraints() && origin_ok; ++r) {
            const int src_idx = cm.constraint_origin[static_cast<std::size_t>(r)];
            if (src_idx < 0)
                continue; // padding/closure
            const Constraint& src = f.constraints[static_cast<std::size_t>(src_idx)];
            const Constraint& dst = g.constraints[static_cast<std::size_t>(r)];
            if (dst.pred != src.pred || dst.scope.size() != src.scope.size()) {
                origin_ok = false;
                break;
            }
            for (std::size_t pos = 0; pos < src.scope.size(); ++pos) {
                const int out_var = dst.scope[pos];
                const auto [orig, j] = cm.copy_of[static_cast<std::size_t>(out_var)];
                // Dummies (orig < 0) appear where repair replaced a surplus copy.
                if (orig >= 0 && orig != src.scope[pos]) {
                    origin_ok = false;
                    break;
                }
            }
        }
        add(rep, "sampled constraints trace back to their source", origin_ok);

        if (cert) {
            add(rep, "changed plus added within B",
                static_cast<double>(cert->changed_plus_added) <= cert->b_bound,
                std::to_string(cert->changed_plus_added) + " vs B = " +
                    std::to_string(cert->b_bound));
            add(rep, "replacements within 4mW",
                static_cast<double>(cert->replacements) <=
                    4.0 * f.num_constraints() * cert->params.W);
        } else {
            skip(rep, "changed plus added within B", "no certificate supplied");
        }
    }

    // Value statements. Exact optima when enumeration fits the budget. The
    // deterministic construction never loses value (one-sided exact); the
    // randomized one is epsilon-accurate in both directions.
    if (fits_budget(f, opt.budget) && fits_budget(g, opt.budget)) {
        const SolveResult opt_f = brute_force_opt(f, opt.goal, opt.budget);
        const SolveResult opt_g = brute_force_opt(g, opt.goal, opt.budget);
        const double slack = det ? 0.0 : opt.epsilon;
        const bool lower = opt.goal == Goal::max ? opt_f.value <= opt_g.value + slack + 1e-12
                                                 : opt_f.value >= opt_g.value - slack - 1e-12;
        add(rep, "optimum preserved (source vs reduced)", lower,
            "Opt(F) = " + std::to_string(opt_f.value) + ", Opt(G) = " + std::to_string(opt_g.value));
        const bool upper = opt.goal == Goal::max
                               ? opt_g.value <= opt_f.value + opt.epsilon + 1e-12
                               : opt_g.value >= opt_f.value - opt.epsilon - 1e-12;
        add(rep, "optimum within epsilon (reduced vs source)", upper);
    } else {
        skip(rep, "optimum preserved (source vs reduced)", "enumeration exceeds budget");
    }

    // Sampled pull-back inequality.
    Rng rng(opt.seed);
    const int q = g.language.domain_size;
    int passed = 0;
    Evaluator gev(g);
    for (int s = 0; s < opt.samples; ++s) {
        const Assignment zeta = random_assignment(rng, g.num_variables, q);
        Assignment chi;
        if (det)
            chi = pullback_deterministic(g, std::get<BlockMap>(map), zeta, opt.goal);
        else
            chi = pullback_randomized(f, std::get<CopyMap>(map), zeta);
        const double val_f = evaluate(f, chi);
        const double val_g = gev.value(zeta);
        const bool ok = opt.goal == Goal::max ? val_f >= val_g - opt.epsilon - 1e-12
                                              : val_f <= val_g + opt.epsilon + 1e-12;
        passed += ok ? 1 : 0;
    }
    const double rate = opt.samples > 0 ? static_cast<double>(passed) / opt.samples : 1.0;
    add(rep, "sampled pull-back inequality", rate >= opt.min_value_pass_rate,
        std::to_string(passed) + "/" + std::to_string(opt.samples));

    return rep;
}

// ---------------------------------------------------------------------------
// JSON round-trips
// ---------------------------------------------------------------------------

json to_json(const ReplicationPlan& plan) {
    return json{{"type", "replication"},
                {"epsilon", plan.epsilon},
                {"q_total", plan.q_total},
                {"counts", plan.counts}};
}

json to_json(const MinScalePlan& plan) {
    json classes = json::array();
    for (WeightClass c : plan.classes)
        classes.push_back(c == WeightClass::light ? "light"
                                                  : (c == WeightClass::heavy ? "heavy" : "medium"));
    return json{{"type", "min_scale"},   {"delta", plan.delta},
                {"alpha", plan.alpha},   {"k", plan.k},
                {"w_k", plan.w_k},       {"sigma", plan.sigma},
                {"classes", classes},    {"sorted_order", plan.sorted_order},
                {"kept", plan.kept},     {"prefix_witness", plan.prefix_witness}};
}

json to_json(const BlockMap& map) {
    return json{{"type", "block"},
                {"N", map.N},
                {"num_good", map.num_good},
                {"good_blocks", map.good_blocks},
                {"copy_of", map.copy_of},
                {"copy_base", map.copy_base},
                {"block_assignment", map.block_assignment}};
}

json to_json(const CopyMap& map) {
    return json{{"type", "copy"},
                {"Delta", map.Delta},
                {"num_copies", map.num_copies},
                {"num_dummies", map.num_dummies},
                {"copy_of", map.copy_of},
                {"copy_base", map.copy_base},
                {"constraint_origin", map.constraint_origin}};
}

json to_json(const DegreeParams& params) {
    return json{{"epsilon", params.epsilon},
                {"W", params.W},
                {"W_max", params.W_max},
                {"beta", params.beta},
                {"D", params.D},
                {"Delta", params.Delta},
                {"profile", params.profile.name},
                {"c1", params.profile.c1},
                {"c2", params.profile.c2},
                {"c3", params.profile.c3}};
}

json to_json(const ReductionCertificate& cert) {
    return json{{"type", "randomized_regularization"},
                {"epsilon", cert.epsilon},
                {"params", to_json(cert.params)},
                {"trials_attempted", cert.trials_attempted},
                {"trial_succeeded", cert.trial_succeeded},
                {"sampled_constraints", cert.sampled_constraints},
                {"replacements", cert.replacements},
                {"padding_constraints", cert.padding_constraints},
                {"closure_constraints", cert.closure_constraints},
                {"changed_plus_added", cert.changed_plus_added},
                {"b_bound", cert.b_bound},
                {"within_b", cert.within_b},
                {"trial_failures", cert.trial_failures}};
}

BlockMap block_map_from_json(const json& j) {
    BlockMap map;
    map.N = j.at("N").get<int>();
    map.num_good = j.at("num_good").get<int>();
    map.good_blocks = j.at("good_blocks").get<std::vector<int>>();
    map.copy_of = j.at("copy_of").get<std::vector<std::pair<int, int>>>();
    map.copy_base = j.at("copy_base").get<std::vector<int>>();
    map.block_assignment = j.at("block_assignment").get<std::vector<std::vector<int>>>();
    return map;
}

CopyMap copy_map_from_json(const json& j) {
    CopyMap map;
    map.Delta = j.at("Delta").get<long long>();
    map.num_copies = j.at("num_copies").get<int>();
    map.num_dummies = j.at("num_dummies").get<int>();
    map.copy_of = j.at("copy_of").get<std::vector<std::pair<int, int>>>();
    map.copy_base = j.at("copy_base").get<std::vector<int>>();
    map.constraint_origin = j.at("constraint_origin").get<std::vector<int>>();
    return map;
}

ReductionCertificate certificate_from_json(const json& j) {
    ReductionCertificate cert;
    cert.epsilon = j.at("epsilon").get<double>();
    const json& p = j.at("params");
    cert.params.epsilon = p.at("epsilon").get<double>();
    cert.params.W = p.at("W").get<double>();
    cert.params.W_max = p.at("W_max").get<int>();
    cert.params.beta = p.at("beta").get<double>();
    cert.params.D = p.at("D").get<long long>();
    cert.params.Delta = p.at("Delta").get<long long>();
    cert.params.profile.name = p.at("profile").get<std::string>();
    cert.params.profile.c1 = p.at("c1").get<double>();
    cert.params.profile.c2 = p.at("c2").get<double>();
    cert.params.profile.c3 = p.at("c3").get<double>();
    cert.trials_attempted = j.at("trials_attempted").get<int>();
    cert.trial_succeeded = j.at("trial_succeeded").get<int>();
    cert.sampled_constraints = j.at("sampled_constraints").get<long long>();
    cert.replacements = j.at("replacements").get<long long>();
    cert.padding_constraints = j.at("padding_constraints").get<long long>();
    cert.closure_constraints = j.at("closure_constraints").get<long long>();
    cert.changed_plus_added = j.at("changed_plus_added").get<long long>();
    cert.b_bound = j.at("b_bound").get<double>();
    cert.within_b = j.at("within_b").get<bool>();
    cert.trial_failures = j.at("trial_failures").get<std::vector<std::string>>();
    return cert;
}

} // namespace regulus
