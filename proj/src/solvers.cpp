#include "regulus/solvers.hpp"

#include <algorithm>
#include <cmath>

namespace regulus {

namespace {

bool improves(Goal goal, double candidate, double best) {
    return goal == Goal::max ? candidate > best : candidate < best;
}

// Odometer step in lexicographic order (variable 0 most significant), so the
// first strict improvement is the lexicographically smallest optimum.
// Returns false after the last assignment.
bool advance(Assignment& chi, int q) {
    for (std::size_t i = chi.size(); i-- > 0;) {
        if (++chi[i] < q)
            return true;
        chi[i] = 0;
    }
    return false;
}

} // namespace

Marginals Marginals::uniform(int n, int q) {
    Marginals mu;
    mu.p.assign(static_cast<std::size_t>(n),
                std::vector<double>(static_cast<std::size_t>(q), 1.0 / q));
    return mu;
}

Marginals Marginals::point(const Assignment& chi, int q) {
    Marginals mu;
    mu.p.assign(chi.size(), std::vector<double>(static_cast<std::size_t>(q), 0.0));
    for (std::size_t i = 0; i < chi.size(); ++i)
        mu.p[i][static_cast<std::size_t>(chi[i])] = 1.0;
    return mu;
}

void Marginals::check(int n, int q) const {
    if (static_cast<int>(p.size()) != n)
        throw ValidationError("marginals row count does not match variable count");
    for (const auto& row : p) {
        if (static_cast<int>(row.size()) != q)
            throw ValidationError("marginal row length does not match domain size");
        double total = 0.0;
        for (double v : row) {
            if (v < 0.0)
                throw ValidationError("negative marginal probability");
            total += v;
        }
        if (std::abs(total - 1.0) > 1e-12)
            throw ValidationError("marginal row does not sum to 1");
    }
}

SolveResult brute_force_opt(const Instance& f, Goal goal, EvalBudget budget) {
    require_valid(f);
    const int q = f.language.domain_size;
    const int n = f.num_variables;
    double count = 1.0;
    for (int i = 0; i < n; ++i) {
        count *= q;
        if (count > static_cast<double>(budget.max_assignments))
            throw BudgetExceeded("brute force budget exceeded: q^n > " +
                                 std::to_string(budget.max_assignments));
    }

    Evaluator ev(f);
    Assignment chi(static_cast<std::size_t>(n), 0);
    Assignment best_chi = chi;
    double best = ev.value(chi);
    while (advance(chi, q)) {
        const double v = ev.value(chi);
        if (improves(goal, v, best)) {
            best = v;
            best_chi = chi;
        }
    }
    SolveResult res;
    res.assignment = std::move(best_chi);
    res.value = evaluate(f, res.assignment);
    res.method = "brute";
    res.exact = true;
    return res;
}

namespace {

// Expectation of one constraint under mu, optionally overriding one variable
// with a point mass.
double constraint_expectation(const Instance& f, const Marginals& mu, const Constraint& c,
                              int override_var, int override_val) {
    const Predicate& p = f.language.at(c.pred);
    double sum = 0.0;
    for (const Tuple& t : p.satisfying) {
        double prod = 1.0;
        for (std::size_t j = 0; j < c.scope.size(); ++j) {
            const int var = c.scope[j];
            if (var == override_var)
                prod *= t[j] == override_val ? 1.0 : 0.0;
            else
                prod *= mu.p[static_cast<std::size_t>(var)][static_cast<std::size_t>(t[j])];
        }
        sum += prod;
    }
    return sum;
}

} // namespace

double expected_value(const Instance& f, const Marginals& mu) {
    mu.check(f.num_variables, f.language.domain_size);
    const int m = f.num_constraints();
    if (!f.weighted) {
        double total = 0.0;
        for (int r = 0; r < m; ++r)
            total += constraint_expectation(f, mu, f.constraints[static_cast<std::size_t>(r)], -1, 0);
        return total / static_cast<double>(m);
    }
    double total = 0.0;
    for (int r = 0; r < m; ++r)
        total += f.weights[static_cast<std::size_t>(r)] *
                 constraint_expectation(f, mu, f.constraints[static_cast<std::size_t>(r)], -1, 0);
    return total;
}

Assignment conditional_expectation_round(const Instance& f, const Marginals& mu_in, Goal goal) {
    mu_in.check(f.num_variables, f.language.domain_size);
    const int n = f.num_variables;
    const int q = f.language.domain_size;

    Marginals mu = mu_in;
    std::vector<std::vector<int>> incident(static_cast<std::size_t>(n));
    for (int r = 0; r < f.num_constraints(); ++r)
        for (int var : f.constraints[static_cast<std::size_t>(r)].scope)
            incident[static_cast<std::size_t>(var)].push_back(r);

    Assignment chi(static_cast<std::size_t>(n), 0);
    for (int i = 0; i < n; ++i) {
        int best_val = 0;
        double best_delta = 0.0;
        bool first = true;
        for (int v = 0; v < q; ++v) {
            // Conditioning is only defined on the marginal's support; this
            // also makes point-mass marginals round to exactly themselves.
            if (mu.p[static_cast<std::size_t>(i)][static_cast<std::size_t>(v)] <= 0.0)
                continue;
            double delta = 0.0;
            for (int r : incident[static_cast<std::size_t>(i)]) {
                const Constraint& c = f.constraints[static_cast<std::size_t>(r)];
                const double before = constraint_expectation(f, mu, c, -1, 0);
                const double after = constraint_expectation(f, mu, c, i, v);
                delta += f.weight(r) * (after - before);
            }
            if (first || improves(goal, delta, best_delta)) {
                best_delta = delta;
                best_val = v;
                first = false;
            }
        }
        // Fixing to the argmax can never move against the goal: the old
        // expectation is the marginal mix of the candidate expectations.
        // (1e-12 absorbs float noise on exact ties.)
        if (goal == Goal::max ? best_delta < -1e-12 : best_delta > 1e-12)
            throw Error("conditional expectation step moved against the goal");
        chi[static_cast<std::size_t>(i)] = best_val;
        std::fill(mu.p[static_cast<std::size_t>(i)].begin(),
                  mu.p[static_cast<std::size_t>(i)].end(), 0.0);
        mu.p[static_cast<std::size_t>(i)][static_cast<std::size_t>(best_val)] = 1.0;
    }
    return chi;
}

SolveResult random_baseline(const Instance& f, Goal goal) {
    const Marginals mu = Marginals::uniform(f.num_variables, f.language.domain_size);
    SolveResult res;
    res.assignment = conditional_expectation_round(f, mu, goal);
    res.value = evaluate(f, res.assignment);
    res.method = "random";
    res.exact = false;
    return res;
}

SolveResult greedy_baseline(const Instance& f, Goal goal) {
    require_valid(f);
    const int n = f.num_variables;
    const int q = f.language.domain_size;

    std::vector<std::vector<int>> incident(static_cast<std::size_t>(n));
    for (int r = 0; r < f.num_constraints(); ++r)
        for (int var : f.constraints[static_cast<std::size_t>(r)].scope)
            incident[static_cast<std::size_t>(var)].push_back(r);

    enum class Status { open, forced_sat, forced_unsat };
    std::vector<Status> status(static_cast<std::size_t>(f.num_constraints()), Status::open);
    std::vector<int> partial(static_cast<std::size_t>(n), -1);

    // Status of constraint r under `partial` with variable i tentatively = v.
    auto forced = [&](int r, int i, int v) -> Status {
        const Constraint& c = f.constraints[static_cast<std::size_t>(r)];
        const Predicate& p = f.language.at(c.pred);
        long long completions = 1;
        for (int var : c.scope)
            if (partial[static_cast<std::size_t>(var)] < 0 && var != i)
                completions *= q;
        long long consistent = 0;
        for (const Tuple& t : p.satisfying) {
            bool ok = true;
            for (std::size_t j = 0; j < c.scope.size(); ++j) {
                const int var = c.scope[j];
                const int fixed = var == i ? v : partial[static_cast<std::size_t>(var)];
                if (fixed >= 0 && t[j] != fixed) {
                    ok = false;
                    break;
                }
            }
            if (ok)
                ++consistent;
        }
        if (consistent == 0)
            return Status::forced_unsat;
        if (consistent == completions)
            return Status::forced_sat;
        return Status::open;
    };

    for (int i = 0; i < n; ++i) {
        int best_val = 0;
        double best_score = 0.0;
        for (int v = 0; v < q; ++v) {
            double score = 0.0;
            for (int r : incident[static_cast<std::size_t>(i)]) {
                if (status[static_cast<std::size_t>(r)] != Status::open)
                    continue;
                const Status s = forced(r, i, v);
                if (s == Status::forced_sat)
                    score += f.weight(r);
                else if (s == Status::forced_unsat)
                    score -= f.weight(r);
            }
            if (v == 0 || improves(goal, score, best_score)) {
                best_score = score;
                best_val = v;
            }
        }
        partial[static_cast<std::size_t>(i)] = best_val;
        for (int r : incident[static_cast<std::size_t>(i)])
            if (status[static_cast<std::size_t>(r)] == Status::open)
                status[static_cast<std::size_t>(r)] = forced(r, -1, 0);
    }

    SolveResult res;
    res.assignment = Assignment(partial.begin(), partial.end());
    res.value = evaluate(f, res.assignment);
    res.method = "greedy";
    res.exact = false;
    return res;
}

std::optional<Assignment> BruteForceFalsifier::find_falsifying(const Instance& f,
                                                               const std::vector<int>& constraints) {
    const int q = f.language.domain_size;
    const int n = f.num_variables;
    double space = 1.0;
    for (int i = 0; i < n; ++i)
        space *= q;

    Evaluator ev(f);
    Assignment chi(static_cast<std::size_t>(n), 0);
    std::uint64_t used = 0;
    while (true) {
        if (++used > budget_.max_assignments)
            throw BudgetExceeded("oracle inconclusive: falsifiability budget exceeded");
        bool all_false = true;
        for (int r : constraints) {
            if (ev.satisfied(r, chi)) {
                all_false = false;
                break;
            }
        }
        if (all_false)
            return chi;
        if (!advance(chi, q))
            return std::nullopt;
    }
}

PrefixResult largest_falsifiable_prefix(const Instance& f_sorted, FalsifiabilityOracle& oracle) {
    const int m = f_sorted.num_constraints();
    if (f_sorted.weighted)
        for (int r = 0; r + 1 < m; ++r)
            if (f_sorted.weights[static_cast<std::size_t>(r)] <
                f_sorted.weights[static_cast<std::size_t>(r) + 1])
                throw ValidationError("constraints must be sorted descending by weight");
    auto prefix = [&](int len) {
        std::vector<int> ids(static_cast<std::size_t>(len));
        for (int i = 0; i < len; ++i)
            ids[static_cast<std::size_t>(i)] = i;
        return ids;
    };

    // f(len) = "C_1..C_len falsifiable" is monotone decreasing in len:
    // binary search for the largest true prefix. f(0) is vacuously true.
    int lo = 0, hi = m;
    Assignment witness(static_cast<std::size_t>(f_sorted.num_variables), 0);
    while (lo < hi) {
        const int mid = lo + (hi - lo + 1) / 2;
        const auto found = oracle.find_falsifying(f_sorted, prefix(mid));
        if (found) {
            witness = *found;
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    return PrefixResult{lo + 1, std::move(witness)};
}

PrefixResult largest_falsifiable_prefix(const Instance& f_sorted, EvalBudget budget) {
    BruteForceFalsifier oracle(budget);
    return largest_falsifiable_prefix(f_sorted, oracle);
}

} // namespace regulus
