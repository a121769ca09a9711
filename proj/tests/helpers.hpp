#pragma once

#include "regulus/csp.hpp"
#include "regulus/formats.hpp"
#include "regulus/solvers.hpp"

#include <cmath>
#include <functional>
#include <string>
#include <vector>

namespace regulus::testing {

inline std::string data_path(const std::string& name) {
    return std::string(REGULUS_DATA_DIR) + "/" + name;
}

inline Instance load(const std::string& name) {
    return parse_instance(read_file(data_path(name)));
}

// Independent re-evaluation oracle: linear tuple scan, no table, no binary
// search, weights accumulated from the back.
inline double naive_value(const Instance& f, const Assignment& chi) {
    double total = 0.0;
    long long count = 0;
    for (int r = f.num_constraints() - 1; r >= 0; --r) {
        const Constraint& c = f.constraints[static_cast<std::size_t>(r)];
        const Predicate& p = f.language.at(c.pred);
        bool sat = false;
        for (const Tuple& t : p.satisfying) {
            bool match = true;
            for (std::size_t j = 0; j < c.scope.size(); ++j)
                if (t[j] != chi[static_cast<std::size_t>(c.scope[j])]) {
                    match = false;
                    break;
                }
            if (match) {
                sat = true;
                break;
            }
        }
        if (sat) {
            total += f.weight(r);
            ++count;
        }
    }
    return f.weighted ? total : static_cast<double>(count) / f.num_constraints();
}

// Visit every assignment of [0,q)^n, most-significant variable first (the
// opposite order from the library's enumeration).
inline void for_each_assignment(int n, int q, const std::function<void(const Assignment&)>& fn) {
    Assignment chi(static_cast<std::size_t>(n), 0);
    while (true) {
        fn(chi);
        int i = 0;
        while (i < n && ++chi[static_cast<std::size_t>(i)] == q) {
            chi[static_cast<std::size_t>(i)] = 0;
            ++i;
        }
        if (i == n)
            return;
    }
}

inline double exhaustive_opt(const Instance& f, Goal goal) {
    double best = goal == Goal::max ? -1.0 : 2.0;
    for_each_assignment(f.num_variables, f.language.domain_size, [&](const Assignment& chi) {
        const double v = naive_value(f, chi);
        if (goal == Goal::max ? v > best : v < best)
            best = v;
    });
    return best;
}

inline CspLanguage mixed_language() {
    CspLanguage lang;
    lang.domain_size = 2;
    lang.add(pred_neq());
    lang.add(pred_or(2));
    lang.add(pred_or(3));
    return lang;
}

} // namespace regulus::testing
