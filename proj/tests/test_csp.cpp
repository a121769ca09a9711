#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "helpers.hpp"

#include "regulus/csp.hpp"
#include "regulus/formats.hpp"

using namespace regulus;
using namespace regulus::testing;

namespace {

Instance triangle_maxcut() {
    CspLanguage lang;
    lang.domain_size = 2;
    const int neq = lang.add(pred_neq());
    return make_unweighted(lang, 3, {{neq, {0, 1}}, {neq, {1, 2}}, {neq, {0, 2}}});
}

} // namespace

TEST_CASE("evaluate: triangle examples") {
    const Instance f = triangle_maxcut();
    CHECK(evaluate(f, {0, 1, 0}) == 2.0 / 3.0);

    Instance w = f;
    w.weighted = true;
    w.weights = {0.5, 0.3, 0.2};
    CHECK(evaluate(w, {0, 1, 0}) == 0.8); // 0.5 + 0.3 is exact in binary64
}

TEST_CASE("evaluate: agrees with the independent oracle on all assignments") {
    GeneratorSpec spec;
    spec.family = GeneratorFamily::random_mixed;
    spec.n = 6;
    spec.m = 12;
    spec.seed = 42;
    const Instance f = generate(spec);
    const Evaluator ev(f);
    for_each_assignment(6, 2, [&](const Assignment& chi) {
        const double reference = naive_value(f, chi);
        CHECK(evaluate(f, chi) == reference);
        CHECK(ev.value(chi) == reference);
    });
}

TEST_CASE("evaluate: value in [0,1] and integral numerator when unweighted") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        GeneratorSpec spec;
        spec.family = GeneratorFamily::random_mixed;
        spec.n = 5;
        spec.m = 7;
        spec.seed = seed;
        spec.weight_mode = seed % 2 ? WeightMode::dirichlet : WeightMode::uniform;
        const Instance f = generate(spec);
        for_each_assignment(5, 2, [&](const Assignment& chi) {
            const double v = evaluate(f, chi);
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
            if (!f.weighted) {
                const double scaled = v * f.num_constraints();
                CHECK(std::abs(scaled - std::round(scaled)) < 1e-9);
                CHECK(std::round(scaled) >= 0);
                CHECK(std::round(scaled) <= f.num_constraints());
            }
        });
    }
}

TEST_CASE("evaluate: errors on malformed input") {
    const Instance f = triangle_maxcut();
    CHECK_THROWS_AS(evaluate(f, {0, 1}), ValidationError);

    Instance broken = f;
    broken.constraints[0].scope = {0, 7};
    CHECK_THROWS_AS(evaluate(broken, {0, 1, 0}), ValidationError);
}

TEST_CASE("degrees: path and triangle") {
    const Instance path = load("path_or2.csp");
    const DegreeReport rep = degrees(path);
    CHECK(rep.degrees == std::vector<int>{1, 2, 1});
    CHECK_FALSE(rep.is_regular);
    CHECK(rep.min_degree == 1);
    CHECK(rep.max_degree == 2);

    const DegreeReport tri = degrees(triangle_maxcut());
    CHECK(tri.is_regular);
    CHECK(tri.common_degree == 2);
}

TEST_CASE("degrees: sum equals total arity") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        GeneratorSpec spec;
        spec.family = GeneratorFamily::random_mixed;
        spec.n = 6;
        spec.m = 9;
        spec.seed = seed;
        const Instance f = generate(spec);
        const DegreeReport rep = degrees(f);
        long long total_degree = 0;
        for (int d : rep.degrees)
            total_degree += d;
        long long total_arity = 0;
        for (const Constraint& c : f.constraints)
            total_arity += static_cast<long long>(c.scope.size());
        CHECK(total_degree == total_arity);
    }
}

TEST_CASE("gamma_lower_bound: frozen values") {
    CspLanguage neq_only;
    neq_only.domain_size = 2;
    neq_only.add(pred_neq());
    CHECK(gamma_lower_bound(neq_only) == 0.5);

    CspLanguage or3_only;
    or3_only.domain_size = 2;
    or3_only.add(pred_or(3));
    CHECK(gamma_lower_bound(or3_only) == 7.0 / 8.0);

    CspLanguage eq3_neq;
    eq3_neq.domain_size = 2;
    eq3_neq.add(Predicate("EQ3", 3, {{0, 0, 0}, {1, 1, 1}}));
    eq3_neq.add(pred_neq());
    CHECK(gamma_lower_bound(eq3_neq) == 0.25);
}

TEST_CASE("gamma_lower_bound: identically-false predicate is an error") {
    CspLanguage lang;
    lang.domain_size = 2;
    lang.add(Predicate("FALSE2", 2, {}));
    CHECK_THROWS_AS(gamma_lower_bound(lang), ValidationError);
}

TEST_CASE("gamma_lower_bound: uniform satisfaction probability is at least gamma") {
    const CspLanguage lang = mixed_language();
    const double gamma = gamma_lower_bound(lang);
    CHECK(gamma > 0.0);
    for (const Predicate& p : lang.predicates) {
        double count = 0;
        double total = 0;
        Tuple t(static_cast<std::size_t>(p.arity), 0);
        while (true) {
            total += 1;
            count += p.holds(t) ? 1 : 0;
            int i = 0;
            while (i < p.arity && ++t[static_cast<std::size_t>(i)] == 2) {
                t[static_cast<std::size_t>(i)] = 0;
                ++i;
            }
            if (i == p.arity)
                break;
        }
        CHECK(count / total >= gamma);
    }
}

TEST_CASE("close_under_shifts: identity shift keeps the original predicate") {
    CspLanguage lang;
    lang.domain_size = 2;
    lang.add(pred_or(2));
    const CspLanguage closed = close_under_shifts(lang);
    const int idx = closed.find("OR2");
    REQUIRE(idx >= 0);
    CHECK(closed.at(idx).satisfying == pred_or(2).satisfying);
}

TEST_CASE("close_under_shifts: AND2 yields all four conjunctions of literals") {
    CspLanguage lang;
    lang.domain_size = 2;
    lang.add(pred_and(2));
    const CspLanguage closed = close_under_shifts(lang);
    REQUIRE(closed.predicates.size() == 4);
    std::set<std::vector<Tuple>> sets;
    for (const Predicate& p : closed.predicates) {
        CHECK(p.satisfying.size() == 1);
        sets.insert(p.satisfying);
    }
    CHECK(sets == std::set<std::vector<Tuple>>{{{1, 1}}, {{0, 1}}, {{1, 0}}, {{0, 0}}});
}

TEST_CASE("close_under_shifts: size bound and idempotence") {
    const CspLanguage lang = mixed_language();
    const CspLanguage closed = close_under_shifts(lang);

    std::size_t bound = 0;
    for (const Predicate& p : lang.predicates)
        bound += std::size_t{1} << p.arity;
    CHECK(closed.predicates.size() <= bound);

    const CspLanguage twice = close_under_shifts(closed);
    auto key_set = [](const CspLanguage& l) {
        std::set<std::pair<int, std::vector<Tuple>>> keys;
        for (const Predicate& p : l.predicates)
            keys.insert({p.arity, p.satisfying});
        return keys;
    };
    CHECK(key_set(twice) == key_set(closed));
}

TEST_CASE("close_under_shifts: rejects non-Boolean domains") {
    CspLanguage lang;
    lang.domain_size = 3;
    lang.add(Predicate("P", 1, {{1}}));
    CHECK_THROWS_AS(close_under_shifts(lang), ValidationError);
}

TEST_CASE("validate_instance: named violations") {
    Instance f = triangle_maxcut();
    f.constraints[0].scope = {0, 0};
    bool found = false;
    for (const Violation& v : validate_instance(f))
        if (v.constraint == 0 && v.rule == "scope not distinct")
            found = true;
    CHECK(found);

    Instance w = triangle_maxcut();
    w.weighted = true;
    w.weights = {0.5, 0.3, 0.1};
    found = false;
    for (const Violation& v : validate_instance(w))
        if (v.rule == "weights not normalized")
            found = true;
    CHECK(found);
}

TEST_CASE("validate_instance: golden corpus is clean") {
    for (const char* name : {"triangle.csp", "triangle_weighted.csp", "path_or2.csp",
                             "bipartite_neq.csp", "mixed_small.csp", "eq_neq_min.csp"}) {
        const Instance f = load(name);
        CHECK(validate_instance(f).empty());
    }
}
