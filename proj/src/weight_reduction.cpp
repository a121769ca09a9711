#include "regulus/weight_reduction.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace regulus {

std::pair<Instance, ReplicationPlan> replicate_to_unweighted(const Instance& f, double epsilon) {
    if (epsilon <= 0.0)
        throw ValidationError("replication needs epsilon > 0");
    if (!f.weighted)
        throw ValidationError("replication expects a weighted instance");
    require_valid(f);

    const int m = f.num_constraints();
    const long long q = static_cast<long long>(std::ceil(static_cast<double>(m) / epsilon));

    ReplicationPlan plan;
    plan.epsilon = epsilon;
    plan.q_total = q;
    plan.counts.resize(static_cast<std::size_t>(m));

    std::vector<double> fraction(static_cast<std::size_t>(m));
    long long assigned = 0;
    for (int r = 0; r < m; ++r) {
        const double scaled = f.weights[static_cast<std::size_t>(r)] * static_cast<double>(q);
        const long long floor_r = static_cast<long long>(std::floor(scaled));
        plan.counts[static_cast<std::size_t>(r)] = floor_r;
        fraction[static_cast<std::size_t>(r)] = scaled - static_cast<double>(floor_r);
        assigned += floor_r;
    }

    // Largest fractional part first, ties to the lower constraint index; this
    // keeps every |counts_r/q - w_r| strictly below 1/q.
    std::vector<int> order(static_cast<std::size_t>(m));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return fraction[static_cast<std::size_t>(a)] > fraction[static_cast<std::size_t>(b)];
    });
    long long deficit = q - assigned;
    for (int idx = 0; deficit > 0; ++idx, --deficit)
        ++plan.counts[static_cast<std::size_t>(order[static_cast<std::size_t>(idx % m)])];

    Instance g;
    g.language = f.language;
    g.num_variables = f.num_variables;
    g.weighted = false;
    g.constraints.reserve(static_cast<std::size_t>(q));
    for (int r = 0; r < m; ++r)
        for (long long c = 0; c < plan.counts[static_cast<std::size_t>(r)]; ++c)
            g.constraints.push_back(f.constraints[static_cast<std::size_t>(r)]);
    return {std::move(g), std::move(plan)};
}

MinPreprocessResult min_preprocess_scale(const Instance& f, double delta, double alpha,
                                         FalsifiabilityOracle& oracle) {
    if (delta <= 0.0 || delta >= 1.0)
        throw ValidationError("min preprocessing needs delta in (0,1)");
    if (alpha < 1.0)
        throw ValidationError("min preprocessing needs alpha >= 1");
    if (!f.weighted)
        throw ValidationError("min preprocessing expects a weighted instance");
    require_valid(f);

    const int m = f.num_constraints();

    // Opt(F) = 0 iff some assignment falsifies every constraint of positive
    // weight (zero-weight constraints can be satisfied at no cost).
    std::vector<int> positive;
    for (int r = 0; r < m; ++r)
        if (f.weights[static_cast<std::size_t>(r)] > 0.0)
            positive.push_back(r);
    if (auto witness = oracle.find_falsifying(f, positive))
        return ZeroCertificate{std::move(*witness)};

    MinScalePlan plan;
    plan.delta = delta;
    plan.alpha = alpha;
    plan.sorted_order.resize(static_cast<std::size_t>(m));
    std::iota(plan.sorted_order.begin(), plan.sorted_order.end(), 0);
    std::stable_sort(plan.sorted_order.begin(), plan.sorted_order.end(), [&](int a, int b) {
        return f.weights[static_cast<std::size_t>(a)] > f.weights[static_cast<std::size_t>(b)];
    });

    Instance sorted;
    sorted.language = f.language;
    sorted.num_variables = f.num_variables;
    sorted.weighted = true;
    for (int idx : plan.sorted_order) {
        sorted.constraints.push_back(f.constraints[static_cast<std::size_t>(idx)]);
        sorted.weights.push_back(f.weights[static_cast<std::size_t>(idx)]);
    }

    PrefixResult prefix = largest_falsifiable_prefix(sorted, oracle);
    if (prefix.k > m)
        throw Error("all constraints falsifiable after the zero check; inconsistent oracle");
    plan.k = prefix.k;
    plan.w_k = sorted.weights[static_cast<std::size_t>(plan.k - 1)];
    plan.prefix_witness = std::move(prefix.witness);

    const double m2 = static_cast<double>(m) * static_cast<double>(m);
    const double light_cap = plan.w_k / m2;
    const double heavy_cap = plan.w_k * m2;

    plan.classes.assign(static_cast<std::size_t>(m), WeightClass::medium);
    Instance fprime;
    fprime.language = f.language;
    fprime.num_variables = f.num_variables;
    fprime.weighted = true;
    double kept_total = 0.0;
    for (int pos = 0; pos < m; ++pos) {
        const int orig = plan.sorted_order[static_cast<std::size_t>(pos)];
        const double w = sorted.weights[static_cast<std::size_t>(pos)];
        WeightClass cls = WeightClass::medium;
        if (w <= light_cap)
            cls = WeightClass::light;
        else if (w >= heavy_cap)
            cls = WeightClass::heavy;
        plan.classes[static_cast<std::size_t>(orig)] = cls;
        if (cls == WeightClass::light)
            continue;
        const double scaled = cls == WeightClass::heavy ? heavy_cap : w;
        fprime.constraints.push_back(sorted.constraints[static_cast<std::size_t>(pos)]);
        fprime.weights.push_back(scaled);
        plan.kept.push_back(orig);
        kept_total += scaled;
    }
    if (fprime.constraints.empty())
        throw Error("scaling dropped every constraint; instance degenerate");

    plan.sigma = 1.0 / kept_total;
    for (double& w : fprime.weights)
        w *= plan.sigma;
    return std::make_pair(std::move(fprime), std::move(plan));
}

MinPreprocessResult min_preprocess_scale(const Instance& f, double delta, double alpha,
                                         EvalBudget budget) {
    BruteForceFalsifier oracle(budget);
    return min_preprocess_scale(f, delta, alpha, oracle);
}

Instance ensure_min_constraints(const Instance& f, int m_min) {
    if (!f.weighted)
        throw ValidationError("constraint floor expects a weighted instance");
    require_valid(f);
    const int m = f.num_constraints();
    if (m_min < m)
        throw ValidationError("m_min must be at least the current constraint count");
    if (m_min == m)
        return f;

    const int copies = (m_min + m - 1) / m;
    Instance out;
    out.language = f.language;
    out.num_variables = f.num_variables;
    out.weighted = true;
    out.constraints.reserve(static_cast<std::size_t>(m) * static_cast<std::size_t>(copies));
    for (int r = 0; r < m; ++r) {
        const double w = f.weights[static_cast<std::size_t>(r)] / static_cast<double>(copies);
        for (int c = 0; c < copies; ++c) {
            out.constraints.push_back(f.constraints[static_cast<std::size_t>(r)]);
            out.weights.push_back(w);
        }
    }
    return out;
}

} // namespace regulus
