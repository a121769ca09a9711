#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "helpers.hpp"

#include "regulus/regularity.hpp"
#include "regulus/rng.hpp"

#include <cmath>
#include <numeric>

using namespace regulus;
using namespace regulus::testing;

namespace {

// Small-D profile: lots of surplus repair, dummies, and closure activity.
ParamProfile stress_profile() { return ParamProfile{"stress", 0.005, 0.005, 1.5}; }

void check_structure(const Instance& f, const RandomizedRegularization& out) {
    const Instance& g = out.instance;
    const CopyMap& map = out.map;

    CHECK(validate_instance(g).empty());
    const DegreeReport deg = degrees(g);
    CHECK(deg.is_regular);
    CHECK(deg.common_degree == map.Delta);

    // Sampled constraints trace back to their source through the copies.
    for (int r = 0; r < g.num_constraints(); ++r) {
        const int origin = map.constraint_origin[static_cast<std::size_t>(r)];
        if (origin < 0)
            continue;
        const Constraint& src = f.constraints[static_cast<std::size_t>(origin)];
        const Constraint& dst = g.constraints[static_cast<std::size_t>(r)];
        CHECK(dst.pred == src.pred);
        REQUIRE(dst.scope.size() == src.scope.size());
        for (std::size_t pos = 0; pos < src.scope.size(); ++pos) {
            const auto [orig, j] = map.copy_of[static_cast<std::size_t>(dst.scope[pos])];
            if (orig >= 0) // dummies mark repaired occurrences
                CHECK(orig == src.scope[pos]);
        }
    }

    CHECK(out.certificate.within_b);
    CHECK(static_cast<double>(out.certificate.changed_plus_added) <= out.certificate.b_bound);
}

} // namespace

TEST_CASE("degree params: frozen values at epsilon 0.25, W = W_max = 2, m = 100") {
    GeneratorSpec spec;
    spec.family = GeneratorFamily::random_maxcut;
    spec.n = 6;
    spec.m = 100;
    spec.seed = 5;
    const Instance f = generate(spec);

    const DegreeParams params = target_degree_params(f, 0.25, paper_profile());
    CHECK(params.W == 2.0);
    CHECK(params.W_max == 2);
    CHECK(params.beta == 0.025);
    // 64 ln(80) / 0.025^2 = 448719.53 dominates the other two terms.
    CHECK(params.D == 448720);
    // ceil(1.025 * D) = 459938 is even; the next integer is coprime to 2.
    CHECK(params.Delta == 459939);
}

TEST_CASE("degree params: W_max = 1 needs no coprimality bump") {
    CspLanguage lang;
    lang.domain_size = 2;
    const int one = lang.add(Predicate("IS1", 1, {{1}}));
    const Instance f = make_unweighted(lang, 2, {{one, {0}}, {one, {1}}});
    const DegreeParams params = target_degree_params(f, 0.5, test_profile());
    CHECK(params.W_max == 1);
    CHECK(params.Delta ==
          static_cast<long long>(std::ceil((1.0 + params.beta) * static_cast<double>(params.D))));
}

TEST_CASE("degree params: D scales like log(1/eps)/eps^2") {
    GeneratorSpec spec;
    spec.family = GeneratorFamily::random_maxcut;
    spec.n = 6;
    spec.m = 100;
    spec.seed = 5;
    const Instance f = generate(spec);

    std::vector<double> ratios;
    std::vector<double> xs, ys; // y = D * eps^2 against x = log(1/eps)
    for (double eps : {0.5, 0.25, 0.1}) {
        const DegreeParams params = target_degree_params(f, eps, paper_profile());
        ratios.push_back(static_cast<double>(params.D) / (std::log(1.0 / eps) / (eps * eps)));
        xs.push_back(std::log(1.0 / eps));
        ys.push_back(static_cast<double>(params.D) * eps * eps);
    }
    double geomean = 1.0;
    for (double r : ratios)
        geomean *= r;
    geomean = std::cbrt(geomean);
    for (double r : ratios) {
        CHECK(r / geomean <= 2.0);
        CHECK(geomean / r <= 2.0);
    }

    // Least-squares line through the three sweep points: the scaled degree is
    // affine in log(1/eps), so every residual stays within 20%.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    const double slope = (3 * sxy - sx * sy) / (3 * sxx - sx * sx);
    const double intercept = (sy - slope * sx) / 3;
    CHECK(slope > 0.0);
    for (std::size_t i = 0; i < xs.size(); ++i)
        CHECK(std::abs(ys[i] - (slope * xs[i] + intercept)) / ys[i] <= 0.2);
}

TEST_CASE("randomized: regular at the target degree across 50 seeds") {
    const Instance f = load("path_or2.csp");
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const RandomizedRegularization out =
            regularize_randomized(f, 0.5, seed, stress_profile());
        check_structure(f, out);
    }
}

TEST_CASE("randomized: mixed-arity instance across seeds, with dummies in play") {
    const Instance f = load("mixed_small.csp");
    long long total_replacements = 0;
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
        const RandomizedRegularization out =
            regularize_randomized(f, 0.5, seed, stress_profile());
        check_structure(f, out);
        total_replacements += out.certificate.replacements;
        CHECK(static_cast<double>(out.certificate.replacements) <=
              4.0 * f.num_constraints() * out.certificate.params.W);
    }
    CHECK(total_replacements > 0); // the stress profile actually exercises repair
}

TEST_CASE("randomized: one run at the official test profile") {
    const Instance f = load("mixed_small.csp");
    const RandomizedRegularization out = regularize_randomized(f, 0.25, 7, test_profile());
    check_structure(f, out);
    CHECK(out.certificate.sampled_constraints ==
          static_cast<long long>(f.num_constraints()) * out.certificate.params.D);
}

TEST_CASE("randomized: single-constraint degenerate case") {
    CspLanguage lang;
    lang.domain_size = 2;
    const int or2 = lang.add(pred_or(2));
    const Instance f = make_unweighted(lang, 2, {{or2, {0, 1}}});
    const RandomizedRegularization out = regularize_randomized(f, 0.5, 3, stress_profile());
    check_structure(f, out);
    // Sampling repeats the only constraint D times over the only copies.
    const DegreeParams& params = out.certificate.params;
    for (long long s = 0; s < params.D; ++s) {
        CHECK(out.map.constraint_origin[static_cast<std::size_t>(s)] == 0);
        CHECK(out.instance.constraints[static_cast<std::size_t>(s)].pred == or2);
    }
}

TEST_CASE("randomized: reproducible for a fixed seed, different across seeds") {
    const Instance f = load("mixed_small.csp");
    const RandomizedRegularization a = regularize_randomized(f, 0.5, 11, stress_profile());
    const RandomizedRegularization b = regularize_randomized(f, 0.5, 11, stress_profile());
    CHECK(serialize_instance(a.instance) == serialize_instance(b.instance));
    const RandomizedRegularization c = regularize_randomized(f, 0.5, 12, stress_profile());
    CHECK(serialize_instance(a.instance) != serialize_instance(c.instance));
}

TEST_CASE("randomized: exhausted trials raise a reduction failure") {
    // Two samples of average arity 2.5 fail the (1-beta)W gate whenever both
    // draws pick the binary constraint; with three trials a seed where every
    // trial does so exists nearby.
    CspLanguage lang;
    lang.domain_size = 2;
    const int neq = lang.add(pred_neq());
    const int or3 = lang.add(pred_or(3));
    const Instance f = make_unweighted(lang, 3, {{neq, {0, 1}}, {or3, {0, 1, 2}}});
    const ParamProfile tiny{"tiny", 1e-9, 1e-9, 1e-9};

    bool found = false;
    for (std::uint64_t seed = 0; seed < 2000 && !found; ++seed) {
        try {
            regularize_randomized(f, 0.01, seed, tiny);
        } catch (const ReductionFailure& e) {
            found = true;
            CHECK(std::string(e.what()).find("trials") != std::string::npos);
        }
    }
    CHECK(found);
}

TEST_CASE("pullback randomized: consistent assignments give point marginals") {
    const Instance f = load("mixed_small.csp");
    const RandomizedRegularization out = regularize_randomized(f, 0.5, 21, stress_profile());
    for_each_assignment(5, 2, [&](const Assignment& chi) {
        Assignment zeta(static_cast<std::size_t>(out.instance.num_variables), 0);
        for (int v = 0; v < out.map.num_copies; ++v)
            zeta[static_cast<std::size_t>(v)] =
                chi[static_cast<std::size_t>(out.map.copy_of[static_cast<std::size_t>(v)].first)];
        const Marginals mu = empirical_marginals(f, out.map, zeta);
        for (int i = 0; i < 5; ++i)
            CHECK(mu.p[static_cast<std::size_t>(i)][static_cast<std::size_t>(chi[i])] == 1.0);
        CHECK(pullback_randomized(f, out.map, zeta) == chi);
    });
}

TEST_CASE("pullback randomized: dominates the marginal expectation exactly") {
    const Instance f = parse_instance(read_file(data_path("mixed_small.csp")));
    const RandomizedRegularization out = regularize_randomized(f, 0.5, 33, stress_profile());
    Rng rng(4);
    for (int s = 0; s < 50; ++s) {
        Assignment zeta(static_cast<std::size_t>(out.instance.num_variables));
        for (auto& v : zeta)
            v = rng.below_int(2);
        const Marginals mu = empirical_marginals(f, out.map, zeta);
        const Assignment chi = pullback_randomized(f, out.map, zeta);
        CHECK(evaluate(f, chi) >= expected_value(f, mu));
    }
}

TEST_CASE("pullback randomized: beats the exhaustive product-distribution mean") {
    CspLanguage lang;
    lang.domain_size = 2;
    const int or2 = lang.add(pred_or(2));
    const int neq = lang.add(pred_neq());
    const Instance f = make_unweighted(
        lang, 4, {{or2, {0, 1}}, {neq, {1, 2}}, {or2, {2, 3}}, {neq, {0, 3}}, {or2, {1, 3}}});
    const RandomizedRegularization out = regularize_randomized(f, 0.5, 9, stress_profile());

    Rng rng(10);
    for (int s = 0; s < 20; ++s) {
        Assignment zeta(static_cast<std::size_t>(out.instance.num_variables));
        for (auto& v : zeta)
            v = rng.below_int(2);
        const Marginals mu = empirical_marginals(f, out.map, zeta);
        double mean = 0.0;
        for_each_assignment(4, 2, [&](const Assignment& chi) {
            double prob = 1.0;
            for (int i = 0; i < 4; ++i)
                prob *= mu.p[static_cast<std::size_t>(i)][static_cast<std::size_t>(chi[i])];
            mean += prob * naive_value(f, chi);
        });
        const Assignment chi = pullback_randomized(f, out.map, zeta);
        CHECK(evaluate(f, chi) >= mean - 1e-12);
    }
}

TEST_CASE("pullback randomized: map/instance mismatch is rejected") {
    const Instance f = load("mixed_small.csp");
    const RandomizedRegularization out = regularize_randomized(f, 0.5, 2, stress_profile());
    Assignment wrong(static_cast<std::size_t>(out.instance.num_variables + 1), 0);
    CHECK_THROWS_AS(pullback_randomized(f, out.map, wrong), ContractViolation);
    const Instance other = load("triangle.csp");
    Assignment zeta(static_cast<std::size_t>(out.instance.num_variables), 0);
    CHECK_THROWS_AS(pullback_randomized(other, out.map, zeta), ContractViolation);
}
