#include "regulus/regularity.hpp"

#include "regulus/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <queue>

namespace regulus {

ParamProfile paper_profile() { return ParamProfile{"paper", 64.0, 1.0, 22.2}; }

ParamProfile test_profile() { return ParamProfile{"test", 8.0, 1.0, 22.2}; }

ParamProfile profile_from_env() {
    const char* env = std::getenv("REGULUS_PROFILE");
    if (env && std::string(env) == "test")
        return test_profile();
    return paper_profile();
}

DegreeParams target_degree_params(const Instance& f, double epsilon, const ParamProfile& profile) {
    if (epsilon <= 0.0 || epsilon >= 1.0)
        throw ValidationError("degree parameters need epsilon in (0,1)");
    const int m = f.num_constraints();
    if (m < 1)
        throw ValidationError("degree parameters need at least one constraint");

    DegreeParams params;
    params.epsilon = epsilon;
    params.profile = profile;
    long long arity_total = 0;
    int w_max = 1;
    for (const Constraint& c : f.constraints) {
        arity_total += static_cast<long long>(c.scope.size());
        w_max = std::max(w_max, static_cast<int>(c.scope.size()));
    }
    params.W = static_cast<double>(arity_total) / static_cast<double>(m);
    params.W_max = w_max;
    params.beta = epsilon / (5.0 * params.W);

    const double b2 = params.beta * params.beta;
    const double term1 = profile.c1 * std::log(2.0 / params.beta) / b2;
    const double term2 = profile.c2 * static_cast<double>(w_max) * static_cast<double>(w_max) *
                         std::log(8.0) / (b2 * static_cast<double>(m) * params.W * params.W);
    const double term3 = profile.c3 * params.W / (epsilon * epsilon);
    params.D = static_cast<long long>(
        std::max({std::ceil(term1), std::ceil(term2), std::ceil(term3), 1.0}));

    long long delta = static_cast<long long>(std::ceil((1.0 + params.beta) * static_cast<double>(params.D)));
    while (std::gcd(delta, static_cast<long long>(w_max)) != 1)
        ++delta;
    params.Delta = delta;
    return params;
}

namespace {

struct TrialFailed {
    std::string reason;
};

// One randomized construction attempt. Throws TrialFailed on the two
// rejection conditions; anything else indicates a bug and surfaces as Error.
RandomizedRegularization run_trial(const Instance& f, const DegreeParams& params, Rng rng) {
    const int n = f.num_variables;
    const int m = f.num_constraints();
    const long long Delta = params.Delta;
    const DegreeReport deg = degrees(f);
    for (int i = 0; i < n; ++i)
        if (deg.degrees[static_cast<std::size_t>(i)] == 0)
            throw ValidationError("variable " + std::to_string(i) +
                                  " has degree 0; drop isolated variables first");

    RandomizedRegularization out;
    CopyMap& map = out.map;
    map.Delta = Delta;
    map.copy_base.resize(static_cast<std::size_t>(n) + 1, 0);
    for (int i = 0; i < n; ++i)
        map.copy_base[static_cast<std::size_t>(i) + 1] =
            map.copy_base[static_cast<std::size_t>(i)] + deg.degrees[static_cast<std::size_t>(i)];
    map.num_copies = map.copy_base[static_cast<std::size_t>(n)];
    for (int i = 0; i < n; ++i)
        for (int j = 1; j <= deg.degrees[static_cast<std::size_t>(i)]; ++j)
            map.copy_of.emplace_back(i, j);

    Instance& g = out.instance;
    g.language = f.language;
    g.weighted = false;

    const long long samples = static_cast<long long>(m) * params.D;
    g.constraints.reserve(static_cast<std::size_t>(samples));
    map.constraint_origin.reserve(static_cast<std::size_t>(samples));

    std::vector<long long> degree(static_cast<std::size_t>(map.num_copies), 0);
    long long arity_sum = 0;
    for (long long s = 0; s < samples; ++s) {
        const int r = static_cast<int>(rng.below(static_cast<std::uint64_t>(m)));
        const Constraint& src = f.constraints[static_cast<std::size_t>(r)];
        Constraint c;
        c.pred = src.pred;
        c.scope.reserve(src.scope.size());
        for (int var : src.scope) {
            const int d = deg.degrees[static_cast<std::size_t>(var)];
            const int copy = static_cast<int>(rng.below(static_cast<std::uint64_t>(d)));
            const int out_var = map.copy_base[static_cast<std::size_t>(var)] + copy;
            ++degree[static_cast<std::size_t>(out_var)];
            c.scope.push_back(out_var);
        }
        arity_sum += static_cast<long long>(c.scope.size());
        g.constraints.push_back(std::move(c));
        map.constraint_origin.push_back(r);
    }

    // Dummy pool. Dummies are reused until they reach degree Delta; at most
    // about W_max of them are open at any time.
    std::vector<long long> dummy_degree;
    auto dummy_var = [&](int id) { return map.num_copies + id; };
    auto take_dummy = [&](const std::vector<int>& scope) {
        for (std::size_t d = 0; d < dummy_degree.size(); ++d) {
            if (dummy_degree[d] >= Delta)
                continue;
            const int candidate = dummy_var(static_cast<int>(d));
            if (std::find(scope.begin(), scope.end(), candidate) == scope.end())
                return static_cast<int>(d);
        }
        dummy_degree.push_back(0);
        return static_cast<int>(dummy_degree.size()) - 1;
    };

    // Surplus repair: per copy, keep the first Delta occurrences and move the
    // later ones onto dummies.
    std::vector<std::vector<std::pair<int, int>>> occurrences(
        static_cast<std::size_t>(map.num_copies));
    for (int ci = 0; ci < static_cast<int>(g.constraints.size()); ++ci) {
        const Constraint& c = g.constraints[static_cast<std::size_t>(ci)];
        for (int pos = 0; pos < static_cast<int>(c.scope.size()); ++pos)
            occurrences[static_cast<std::size_t>(c.scope[static_cast<std::size_t>(pos)])]
                .emplace_back(ci, pos);
    }
    long long replacements = 0;
    for (int v = 0; v < map.num_copies; ++v) {
        const auto& occ = occurrences[static_cast<std::size_t>(v)];
        if (static_cast<long long>(occ.size()) <= Delta)
            continue;
        for (std::size_t o = static_cast<std::size_t>(Delta); o < occ.size(); ++o) {
            auto [ci, pos] = occ[o];
            Constraint& c = g.constraints[static_cast<std::size_t>(ci)];
            const int dummy = take_dummy(c.scope);
            c.scope[static_cast<std::size_t>(pos)] = dummy_var(dummy);
            ++dummy_degree[static_cast<std::size_t>(dummy)];
            --degree[static_cast<std::size_t>(v)];
            ++replacements;
        }
    }
    out.certificate.replacements = replacements;
    const double four_mw = 4.0 * static_cast<double>(m) * params.W;
    if (static_cast<double>(replacements) > four_mw)
        throw TrialFailed{"replacements " + std::to_string(replacements) + " exceed 4mW"};

    const double avg_arity = static_cast<double>(arity_sum) / static_cast<double>(samples);
    if (avg_arity < (1.0 - params.beta) * params.W)
        throw TrialFailed{"sampled average arity below (1-beta)W"};

    // Deficit padding: maximal-arity constraints over the lowest-degree
    // deficient copies and dummies until every copy reaches Delta.
    int pad_pred = -1;
    for (std::size_t p = 0; p < f.language.predicates.size(); ++p) {
        const Predicate& pred = f.language.predicates[p];
        if (pred.arity != params.W_max)
            continue;
        if (pad_pred < 0 || pred.name < f.language.predicates[static_cast<std::size_t>(pad_pred)].name)
            pad_pred = static_cast<int>(p);
    }
    if (pad_pred < 0)
        throw Error("language has no predicate of maximal arity");

    auto degree_of = [&](int var) {
        return var < map.num_copies
                   ? degree[static_cast<std::size_t>(var)]
                   : dummy_degree[static_cast<std::size_t>(var - map.num_copies)];
    };
    auto bump = [&](int var) {
        if (var < map.num_copies)
            ++degree[static_cast<std::size_t>(var)];
        else
            ++dummy_degree[static_cast<std::size_t>(var - map.num_copies)];
    };

    using Entry = std::pair<long long, int>; // (degree, variable), min-heap
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
    for (int v = 0; v < map.num_copies; ++v)
        if (degree[static_cast<std::size_t>(v)] < Delta)
            heap.emplace(degree[static_cast<std::size_t>(v)], v);
    for (std::size_t d = 0; d < dummy_degree.size(); ++d)
        if (dummy_degree[d] < Delta)
            heap.emplace(dummy_degree[d], dummy_var(static_cast<int>(d)));

    long long deficient_copies = 0;
    for (int v = 0; v < map.num_copies; ++v)
        if (degree[static_cast<std::size_t>(v)] < Delta)
            ++deficient_copies;

    long long padding = 0;
    std::vector<int> scope;
    while (deficient_copies > 0) {
        scope.clear();
        while (static_cast<int>(scope.size()) < params.W_max) {
            if (heap.empty()) {
                dummy_degree.push_back(0);
                heap.emplace(0, dummy_var(static_cast<int>(dummy_degree.size()) - 1));
            }
            auto [d, v] = heap.top();
            heap.pop();
            if (d != degree_of(v))
                continue; // stale entry
            scope.push_back(v);
        }
        for (int v : scope) {
            if (v < map.num_copies && degree_of(v) + 1 == Delta)
                --deficient_copies;
            bump(v);
            if (degree_of(v) < Delta)
                heap.emplace(degree_of(v), v);
        }
        Constraint c;
        c.pred = pad_pred;
        c.scope = scope;
        g.constraints.push_back(std::move(c));
        map.constraint_origin.push_back(-1);
        ++padding;
    }
    out.certificate.padding_constraints = padding;

    // Dummy closure: add k fresh dummies, W_max <= k < 2 W_max with
    // W_max | k*Delta + t, then fill smallest-degree-first until every dummy
    // sits at Delta. gcd(Delta, W_max) = 1 guarantees such a k exists.
    long long t = 0;
    for (long long dd : dummy_degree)
        t += Delta - dd;
    long long closure = 0;
    if (t > 0) {
        int k = params.W_max;
        while ((static_cast<long long>(k) * Delta + t) % params.W_max != 0)
            ++k;
        if (k >= 2 * params.W_max)
            throw Error("no closure dummy count in [W_max, 2W_max)");
        for (int d = 0; d < k; ++d)
            dummy_degree.push_back(0);
        const long long rounds = (static_cast<long long>(k) * Delta + t) / params.W_max;

        std::priority_queue<Entry, std::vector<Entry>, std::greater<>> dheap;
        for (std::size_t d = 0; d < dummy_degree.size(); ++d)
            if (dummy_degree[d] < Delta)
                dheap.emplace(dummy_degree[d], dummy_var(static_cast<int>(d)));
        for (long long round = 0; round < rounds; ++round) {
            scope.clear();
            while (static_cast<int>(scope.size()) < params.W_max) {
                if (dheap.empty())
                    throw Error("dummy closure ran out of deficient dummies");
                auto [d, v] = dheap.top();
                dheap.pop();
                if (d != degree_of(v))
                    continue;
                scope.push_back(v);
            }
            for (int v : scope) {
                bump(v);
                if (degree_of(v) < Delta)
                    dheap.emplace(degree_of(v), v);
            }
            Constraint c;
            c.pred = pad_pred;
            c.scope = scope;
            g.constraints.push_back(std::move(c));
            map.constraint_origin.push_back(-1);
            ++closure;
        }
        for (long long dd : dummy_degree)
            if (dd != Delta)
                throw Error("dummy closure left a dummy off the target degree");
    }
    out.certificate.closure_constraints = closure;

    map.num_dummies = static_cast<int>(dummy_degree.size());
    for (int d = 0; d < map.num_dummies; ++d)
        map.copy_of.emplace_back(-1, d);
    g.num_variables = map.num_copies + map.num_dummies;

    out.certificate.sampled_constraints = samples;
    out.certificate.changed_plus_added = replacements + padding + closure;
    return out;
}

} // namespace

RandomizedRegularization regularize_randomized(const Instance& f, double epsilon,
                                               std::uint64_t seed, const ParamProfile& profile) {
    if (f.weighted)
        throw ValidationError("randomized regularization expects an unweighted instance");
    require_valid(f);
    const DegreeParams params = target_degree_params(f, epsilon, profile);
    const int m = f.num_constraints();
    const int max_trials = std::max(1, f.num_variables);

    Rng root(seed);
    std::vector<std::string> failures;
    for (int trial = 0; trial < max_trials; ++trial) {
        try {
            RandomizedRegularization out = run_trial(f, params, root.split(static_cast<std::uint64_t>(trial)));
            out.certificate.epsilon = epsilon;
            out.certificate.params = params;
            out.certificate.trials_attempted = trial + 1;
            out.certificate.trial_succeeded = trial;
            out.certificate.trial_failures = failures;
            out.certificate.b_bound = 8.0 * m * params.W +
                                      2.0 * params.beta * m * params.W * static_cast<double>(params.D) +
                                      3.0 * (1.0 + params.beta) * static_cast<double>(params.D);
            out.certificate.within_b =
                static_cast<double>(out.certificate.changed_plus_added) <= out.certificate.b_bound;
            return out;
        } catch (const TrialFailed& fail) {
            failures.push_back("trial " + std::to_string(trial) + ": " + fail.reason);
        }
    }
    std::string msg = "randomized regularization failed after " + std::to_string(max_trials) +
                      " trials:";
    for (const std::string& reason : failures)
        msg += " [" + reason + "]";
    throw ReductionFailure(msg);
}

Marginals empirical_marginals(const Instance& f, const CopyMap& map, const Assignment& zeta) {
    const int n = f.num_variables;
    if (map.source_variables() != n)
        throw ContractViolation("copy map does not match the source instance");
    if (static_cast<int>(zeta.size()) != map.num_copies + map.num_dummies)
        throw ContractViolation("assignment length does not match the regular instance");
    const int q = f.language.domain_size;
    for (int v : zeta)
        if (v < 0 || v >= q)
            throw ContractViolation("assignment value out of domain range");
    Marginals mu;
    mu.p.assign(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(q), 0.0));
    for (int i = 0; i < n; ++i) {
        const int begin = map.copy_base[static_cast<std::size_t>(i)];
        const int end = map.copy_base[static_cast<std::size_t>(i) + 1];
        for (int v = begin; v < end; ++v)
            mu.p[static_cast<std::size_t>(i)][static_cast<std::size_t>(zeta[static_cast<std::size_t>(v)])] +=
                1.0 / static_cast<double>(end - begin);
    }
    return mu;
}

Assignment pullback_randomized(const Instance& f, const CopyMap& map, const Assignment& zeta) {
    const Marginals mu = empirical_marginals(f, map, zeta);
    return conditional_expectation_round(f, mu, Goal::max);
}

} // namespace regulus
