#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "helpers.hpp"

#include "regulus/weight_reduction.hpp"

#include <algorithm>
#include <cmath>

using namespace regulus;
using namespace regulus::testing;

namespace {

Instance two_constraint(double w0, double w1) {
    CspLanguage lang;
    lang.domain_size = 2;
    const int or2 = lang.add(pred_or(2));
    return make_weighted(lang, 3, {{or2, {0, 1}}, {or2, {1, 2}}}, {w0, w1});
}

// k = 2 by construction: the heaviest constraint (NEQ) is falsifiable alone,
// but NEQ and EQ on the same pair cannot both be false.
Instance pivot_two_instance(const std::vector<double>& weights) {
    CspLanguage lang;
    lang.domain_size = 2;
    const int neq = lang.add(pred_neq());
    const int eq = lang.add(pred_eq2());
    const int or2 = lang.add(pred_or(2));
    std::vector<Constraint> cons = {{neq, {0, 1}}, {eq, {0, 1}}};
    for (std::size_t r = 2; r < weights.size(); ++r)
        cons.push_back({or2, {static_cast<int>(r % 4), static_cast<int>((r + 1) % 4)}});
    return make_weighted(lang, 4, std::move(cons), weights);
}

} // namespace

TEST_CASE("replicate: forced counts at epsilon 0.5") {
    {
        auto [g, plan] = replicate_to_unweighted(two_constraint(0.5, 0.5), 0.5);
        CHECK(plan.q_total == 4);
        CHECK(plan.counts == std::vector<long long>{2, 2});
        CHECK(g.num_constraints() == 4);
        CHECK_FALSE(g.weighted);
    }
    {
        // Floors (2,1); one increment goes to the larger fraction 0.6.
        auto [g, plan] = replicate_to_unweighted(two_constraint(0.6, 0.4), 0.5);
        CHECK(plan.q_total == 4);
        CHECK(plan.counts == std::vector<long long>{2, 2});
    }
}

TEST_CASE("replicate: errors") {
    CHECK_THROWS_AS(replicate_to_unweighted(two_constraint(0.5, 0.5), 0.0), ValidationError);
    CHECK_THROWS_AS(replicate_to_unweighted(load("triangle.csp"), 0.1), ValidationError);
}

TEST_CASE("replicate: per-assignment deviation bounded by epsilon, exhaustively") {
    for (std::uint64_t seed = 0; seed < 12; ++seed) {
        GeneratorSpec spec;
        spec.family = GeneratorFamily::random_mixed;
        spec.n = 6;
        spec.m = 8;
        spec.seed = 400 + seed;
        spec.weight_mode = WeightMode::dirichlet;
        const Instance f = generate(spec);
        for (double eps : {0.5, 0.1, 0.01}) {
            auto [g, plan] = replicate_to_unweighted(f, eps);

            CHECK(plan.q_total == static_cast<long long>(std::ceil(f.num_constraints() / eps)));
            long long total = 0;
            for (int r = 0; r < f.num_constraints(); ++r) {
                const long long count = plan.counts[static_cast<std::size_t>(r)];
                total += count;
                const double ratio = static_cast<double>(count) / plan.q_total;
                CHECK(std::abs(ratio - f.weights[static_cast<std::size_t>(r)]) <
                      1.0 / plan.q_total);
            }
            CHECK(total == plan.q_total);

            for_each_assignment(6, 2, [&, eps](const Assignment& chi) {
                CHECK(std::abs(naive_value(g, chi) - naive_value(f, chi)) <= eps);
            });
        }
    }
}

TEST_CASE("min scale: frozen example with light drop") {
    const Instance f = pivot_two_instance({0.6, 0.2, 0.152, 0.04, 0.008});
    const auto result = min_preprocess_scale(f, 0.5, 1.0);
    REQUIRE(std::holds_alternative<std::pair<Instance, MinScalePlan>>(result));
    const auto& [fprime, plan] = std::get<std::pair<Instance, MinScalePlan>>(result);

    CHECK(plan.k == 2);
    CHECK(plan.w_k == 0.2);
    // Light threshold 0.2/25 = 0.008, boundary inclusive: the last constraint
    // drops. Heavy threshold 5.0: nothing. sigma = 1/0.992.
    CHECK(plan.classes == std::vector<WeightClass>{WeightClass::medium, WeightClass::medium,
                                                   WeightClass::medium, WeightClass::medium,
                                                   WeightClass::light});
    CHECK(fprime.num_constraints() == 4);
    CHECK(plan.sigma == doctest::Approx(1.0 / 0.992).epsilon(1e-12));
}

TEST_CASE("min scale: frozen example with heavy clamp") {
    const Instance f = pivot_two_instance({0.9, 0.06, 0.04});
    const auto result = min_preprocess_scale(f, 0.5, 1.0);
    REQUIRE(std::holds_alternative<std::pair<Instance, MinScalePlan>>(result));
    const auto& [fprime, plan] = std::get<std::pair<Instance, MinScalePlan>>(result);

    CHECK(plan.k == 2);
    CHECK(plan.w_k == 0.06);
    // Heavy threshold 0.06*9 = 0.54 clamps the 0.9 constraint; kept weights
    // are proportional to (0.54, 0.06, 0.04), sigma = 1/0.64.
    CHECK(plan.classes[0] == WeightClass::heavy);
    CHECK(plan.sigma == doctest::Approx(1.5625).epsilon(1e-12));
    CHECK(fprime.num_constraints() == 3);
    CHECK(fprime.weights[0] == doctest::Approx(0.54 * 1.5625).epsilon(1e-12));
    double total = 0.0;
    for (double w : fprime.weights)
        total += w;
    CHECK(std::abs(total - 1.0) <= 1e-12);
}

TEST_CASE("min scale: bipartite instance short-circuits with a zero certificate") {
    const Instance f = load("bipartite_neq.csp");
    const auto result = min_preprocess_scale(f, 0.5, 1.0);
    REQUIRE(std::holds_alternative<ZeroCertificate>(result));
    const ZeroCertificate& zero = std::get<ZeroCertificate>(result);
    CHECK(evaluate(f, zero.assignment) == 0.0);
}

TEST_CASE("min scale: pivot and optimum bounds on small instances") {
    for (std::uint64_t seed = 0; seed < 12; ++seed) {
        GeneratorSpec spec;
        spec.family = GeneratorFamily::random_mixed;
        spec.n = 5;
        spec.m = 6;
        spec.seed = 1200 + seed;
        spec.weight_mode = WeightMode::dirichlet;
        Instance f = generate(spec);
        // Adding an EQ/NEQ contradiction keeps the optimum positive.
        const int neq = f.language.find("NEQ");
        const int eq = f.language.add(pred_eq2());
        f.constraints.push_back({neq, {0, 1}});
        f.constraints.push_back({eq, {0, 1}});
        f.weights.push_back(0.5);
        f.weights.push_back(0.5);
        double total = 0.0;
        for (double w : f.weights)
            total += w;
        for (double& w : f.weights)
            w /= total;

        const auto result = min_preprocess_scale(f, 0.5, 1.0);
        REQUIRE(std::holds_alternative<std::pair<Instance, MinScalePlan>>(result));
        const auto& [fprime, plan] = std::get<std::pair<Instance, MinScalePlan>>(result);
        const int m = f.num_constraints();

        const double opt_f = exhaustive_opt(f, Goal::min);
        CHECK(opt_f >= plan.w_k - 1e-12);

        double tail = 0.0;
        for (int pos = plan.k - 1; pos < m; ++pos)
            tail += f.weights[static_cast<std::size_t>(
                plan.sorted_order[static_cast<std::size_t>(pos)])];
        CHECK(opt_f <= tail + 1e-12);

        double light_total = 0.0;
        for (int r = 0; r < m; ++r)
            if (plan.classes[static_cast<std::size_t>(r)] == WeightClass::light)
                light_total += f.weights[static_cast<std::size_t>(r)];
        CHECK(light_total <= plan.w_k / m + 1e-12);

        // Property A: Opt(F) >= Opt(F')/sigma.
        const double opt_fprime = exhaustive_opt(fprime, Goal::min);
        CHECK(opt_f >= opt_fprime / plan.sigma - 1e-12);

        // Property B: assignments avoiding heavy constraints satisfy
        // Val(F) <= Val(F')/sigma + w_k/m.
        for_each_assignment(5, 2, [&](const Assignment& chi) {
            for (int r = 0; r < m; ++r) {
                if (plan.classes[static_cast<std::size_t>(r)] != WeightClass::heavy)
                    continue;
                const Constraint& c = f.constraints[static_cast<std::size_t>(r)];
                Tuple point(c.scope.size());
                for (std::size_t j = 0; j < c.scope.size(); ++j)
                    point[j] = chi[static_cast<std::size_t>(c.scope[j])];
                if (f.language.at(c.pred).holds(point))
                    return; // chi satisfies a heavy constraint; property B does not apply
            }
            CHECK(naive_value(f, chi) <=
                  naive_value(fprime, chi) / plan.sigma + plan.w_k / m + 1e-12);
        });

        // Recorded empirically, not relied on: w_k * sigma >= 1/m^3.
        CHECK(plan.w_k * plan.sigma >= 1.0 / std::pow(m, 3));
    }
}

TEST_CASE("min scale: inconclusive oracle budget becomes an error") {
    const Instance f = pivot_two_instance({0.6, 0.2, 0.152, 0.04, 0.008});
    EvalBudget tiny;
    tiny.max_assignments = 2;
    CHECK_THROWS_AS(min_preprocess_scale(f, 0.5, 1.0, tiny), BudgetExceeded);
}

TEST_CASE("ensure_min_constraints: split examples") {
    {
        const Instance f = pivot_two_instance({0.5, 0.3, 0.2});
        const Instance out = ensure_min_constraints(f, 6);
        CHECK(out.num_constraints() == 6);
        CHECK(out.weights[0] == 0.25);
        for_each_assignment(4, 2, [&](const Assignment& chi) {
            CHECK(naive_value(out, chi) == naive_value(f, chi)); // halving is exact
        });
    }
    {
        const Instance f = pivot_two_instance({0.4, 0.3, 0.1, 0.1, 0.1});
        CHECK(ensure_min_constraints(f, 5).num_constraints() == 5); // identity
    }
    {
        GeneratorSpec spec;
        spec.family = GeneratorFamily::random_mixed;
        spec.n = 5;
        spec.m = 4;
        spec.seed = 77;
        spec.weight_mode = WeightMode::dirichlet;
        const Instance f = generate(spec);
        const Instance out = ensure_min_constraints(f, 11);
        CHECK(out.num_constraints() == 12);
        CHECK(validate_instance(out).empty());
        for_each_assignment(5, 2, [&](const Assignment& chi) {
            CHECK(naive_value(out, chi) == doctest::Approx(naive_value(f, chi)).epsilon(1e-12));
        });
    }
}
