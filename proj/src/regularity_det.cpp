#include "regulus/regularity.hpp"

#include <algorithm>
#include <cmath>

namespace regulus {

std::pair<Instance, BlockMap> regularize_deterministic(const Instance& f, double epsilon) {
    if (epsilon <= 0.0)
        throw ValidationError("regularization needs epsilon > 0");
    if (f.weighted)
        throw ValidationError("deterministic regularization expects an unweighted instance");
    require_valid(f);

    const int n = f.num_variables;
    const int m = f.num_constraints();
    const DegreeReport deg = degrees(f);
    for (int i = 0; i < n; ++i)
        if (deg.degrees[static_cast<std::size_t>(i)] == 0)
            throw ValidationError("variable " + std::to_string(i) +
                                  " has degree 0; drop isolated variables first");

    const int D = deg.max_degree;
    const int N = static_cast<int>(std::ceil(static_cast<double>(D) / epsilon));

    BlockMap map;
    map.N = N;
    map.copy_base.resize(static_cast<std::size_t>(n) + 1, 0);
    for (int i = 0; i < n; ++i)
        map.copy_base[static_cast<std::size_t>(i) + 1] =
            map.copy_base[static_cast<std::size_t>(i)] + deg.degrees[static_cast<std::size_t>(i)];
    const int num_copies = map.copy_base[static_cast<std::size_t>(n)];
    map.copy_of.reserve(static_cast<std::size_t>(num_copies));
    for (int i = 0; i < n; ++i)
        for (int j = 1; j <= deg.degrees[static_cast<std::size_t>(i)]; ++j)
            map.copy_of.emplace_back(i, j);

    // Copy j of variable i serves the contiguous run of floor(N/d_i) blocks
    // starting at (j-1)*floor(N/d_i); a block is good while every variable
    // still has a scheduled copy.
    std::vector<int> run(static_cast<std::size_t>(n));
    int num_good = N;
    for (int i = 0; i < n; ++i) {
        const int d = deg.degrees[static_cast<std::size_t>(i)];
        run[static_cast<std::size_t>(i)] = N / d;
        num_good = std::min(num_good, d * (N / d));
    }
    map.num_good = num_good;
    if (num_good < N - D)
        throw Error("good block schedule fell short of N - D");
    map.good_blocks.resize(static_cast<std::size_t>(num_good));
    for (int b = 0; b < num_good; ++b)
        map.good_blocks[static_cast<std::size_t>(b)] = b;

    Instance g;
    g.language = f.language;
    g.num_variables = num_copies;
    g.weighted = false;
    g.constraints.reserve(static_cast<std::size_t>(N) * static_cast<std::size_t>(m));

    map.block_assignment.assign(static_cast<std::size_t>(N),
                                std::vector<int>(static_cast<std::size_t>(n), -1));

    std::vector<int> usage(static_cast<std::size_t>(num_copies), 0);
    std::vector<int> rr(static_cast<std::size_t>(n), 0); // round-robin cursor per variable

    for (int b = 0; b < N; ++b) {
        const bool good = b < num_good;
        if (good)
            for (int i = 0; i < n; ++i)
                map.block_assignment[static_cast<std::size_t>(b)][static_cast<std::size_t>(i)] =
                    b / run[static_cast<std::size_t>(i)];
        for (int r = 0; r < m; ++r) {
            const Constraint& src = f.constraints[static_cast<std::size_t>(r)];
            Constraint c;
            c.pred = src.pred;
            c.scope.reserve(src.scope.size());
            for (int var : src.scope) {
                int copy;
                if (good) {
                    copy = b / run[static_cast<std::size_t>(var)];
                } else {
                    const int d = deg.degrees[static_cast<std::size_t>(var)];
                    copy = rr[static_cast<std::size_t>(var)];
                    while (usage[static_cast<std::size_t>(
                               map.copy_base[static_cast<std::size_t>(var)] + copy)] >= N)
                        copy = (copy + 1) % d;
                    rr[static_cast<std::size_t>(var)] = (copy + 1) % d;
                }
                const int out_var = map.copy_base[static_cast<std::size_t>(var)] + copy;
                ++usage[static_cast<std::size_t>(out_var)];
                c.scope.push_back(out_var);
            }
            g.constraints.push_back(std::move(c));
        }
    }

    for (int v = 0; v < num_copies; ++v)
        if (usage[static_cast<std::size_t>(v)] != N)
            throw Error("copy saturation mismatch in deterministic regularization");
    return {std::move(g), std::move(map)};
}

Assignment pullback_deterministic(const Instance& g, const BlockMap& map, const Assignment& zeta,
                                  Goal goal) {
    if (static_cast<int>(zeta.size()) != g.num_variables)
        throw ValidationError("assignment length does not match the regular instance");
    for (int v : zeta)
        if (v < 0 || v >= g.language.domain_size)
            throw ValidationError("assignment value out of domain range");
    if (map.num_good <= 0)
        throw Error("no good blocks to read the assignment from");

    const int n = map.source_variables();
    const int m = g.num_constraints() / map.N;

    Evaluator ev(g);
    int best_block = -1;
    long long best_sat = 0;
    for (int b = 0; b < map.num_good; ++b) {
        long long sat = 0;
        for (int r = 0; r < m; ++r)
            sat += ev.satisfied(b * m + r, zeta) ? 1 : 0;
        const bool better = goal == Goal::max ? sat > best_sat : sat < best_sat;
        if (best_block < 0 || better) {
            best_block = b;
            best_sat = sat;
        }
    }

    Assignment chi(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const int copy =
            map.block_assignment[static_cast<std::size_t>(best_block)][static_cast<std::size_t>(i)];
        chi[static_cast<std::size_t>(i)] =
            zeta[static_cast<std::size_t>(map.copy_base[static_cast<std::size_t>(i)] + copy)];
    }
    return chi;
}

} // namespace regulus
