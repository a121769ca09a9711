#include "regulus/csp.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_set>

namespace regulus {

namespace {

long long pow_ll(int base, int exp) {
    long long v = 1;
    for (int i = 0; i < exp; ++i)
        v *= base;
    return v;
}

} // namespace

Predicate::Predicate(std::string name_, int arity_, std::vector<Tuple> satisfying_)
    : name(std::move(name_)), arity(arity_), satisfying(std::move(satisfying_)) {
    std::sort(satisfying.begin(), satisfying.end());
    satisfying.erase(std::unique(satisfying.begin(), satisfying.end()), satisfying.end());
}

bool Predicate::holds(const Tuple& t) const {
    return std::binary_search(satisfying.begin(), satisfying.end(), t);
}

int CspLanguage::find(const std::string& name) const {
    for (std::size_t i = 0; i < predicates.size(); ++i)
        if (predicates[i].name == name)
            return static_cast<int>(i);
    return -1;
}

int CspLanguage::add(Predicate p) {
    if (find(p.name) >= 0)
        throw ValidationError("duplicate predicate '" + p.name + "'");
    predicates.push_back(std::move(p));
    return static_cast<int>(predicates.size()) - 1;
}

void CspLanguage::check() const {
    if (domain_size < 2)
        throw ValidationError("domain_size must be at least 2");
    std::unordered_set<std::string> names;
    for (const Predicate& p : predicates) {
        if (p.name.empty())
            throw ValidationError("predicate with empty name");
        if (!names.insert(p.name).second)
            throw ValidationError("duplicate predicate '" + p.name + "'");
        if (p.arity < 1)
            throw ValidationError("predicate '" + p.name + "' has arity < 1");
        for (const Tuple& t : p.satisfying) {
            if (static_cast<int>(t.size()) != p.arity)
                throw ValidationError("predicate '" + p.name + "' has a tuple of wrong length");
            for (int v : t)
                if (v < 0 || v >= domain_size)
                    throw ValidationError("predicate '" + p.name + "' has a tuple value out of range");
        }
    }
}

double evaluate(const Instance& f, const Assignment& chi) {
    if (static_cast<int>(chi.size()) != f.num_variables)
        throw ValidationError("assignment length does not match variable count");
    const int m = f.num_constraints();
    Tuple point;
    long long satisfied = 0;
    double weighted_sum = 0.0;
    for (int r = 0; r < m; ++r) {
        const Constraint& c = f.constraints[static_cast<std::size_t>(r)];
        const Predicate& p = f.language.at(c.pred);
        point.resize(c.scope.size());
        for (std::size_t j = 0; j < c.scope.size(); ++j) {
            const int var = c.scope[j];
            if (var < 0 || var >= f.num_variables)
                throw ValidationError("scope index out of range (malformed instance)");
            point[j] = chi[static_cast<std::size_t>(var)];
        }
        if (p.holds(point)) {
            if (f.weighted)
                weighted_sum += f.weights[static_cast<std::size_t>(r)];
            else
                ++satisfied;
        }
    }
    if (f.weighted)
        return weighted_sum;
    return static_cast<double>(satisfied) / static_cast<double>(m);
}

DegreeReport degrees(const Instance& f) {
    DegreeReport rep;
    rep.degrees.assign(static_cast<std::size_t>(f.num_variables), 0);
    for (const Constraint& c : f.constraints)
        for (int var : c.scope)
            ++rep.degrees[static_cast<std::size_t>(var)];
    if (rep.degrees.empty()) {
        rep.is_regular = true;
        return rep;
    }
    rep.min_degree = *std::min_element(rep.degrees.begin(), rep.degrees.end());
    rep.max_degree = *std::max_element(rep.degrees.begin(), rep.degrees.end());
    rep.is_regular = rep.min_degree == rep.max_degree;
    if (rep.is_regular)
        rep.common_degree = rep.min_degree;
    return rep;
}

double gamma_lower_bound(const CspLanguage& lang) {
    if (lang.predicates.empty())
        throw ValidationError("gamma is undefined for an empty language");
    double gamma = 1.0;
    for (const Predicate& p : lang.predicates) {
        if (p.satisfying.empty())
            throw ValidationError("predicate '" + p.name +
                                  "' is identically false; strip its constraints first");
        const double frac = static_cast<double>(p.satisfying.size()) /
                            static_cast<double>(pow_ll(lang.domain_size, p.arity));
        gamma = std::min(gamma, frac);
    }
    return gamma;
}

double gamma_lower_bound(const Instance& f) {
    std::set<int> used;
    for (const Constraint& c : f.constraints)
        used.insert(c.pred);
    if (used.empty())
        throw ValidationError("gamma is undefined for an instance without constraints");
    CspLanguage sub;
    sub.domain_size = f.language.domain_size;
    for (int idx : used)
        sub.predicates.push_back(f.language.at(idx));
    return gamma_lower_bound(sub);
}

CspLanguage close_under_shifts(const CspLanguage& lang) {
    if (lang.domain_size != 2)
        throw ValidationError("shift closure is defined for domain_size 2 only");
    lang.check();

    CspLanguage out;
    out.domain_size = 2;
    std::set<std::pair<int, std::vector<Tuple>>> seen;
    for (const Predicate& p : lang.predicates) {
        out.predicates.push_back(p);
        seen.insert({p.arity, p.satisfying});
    }
    for (const Predicate& p : lang.predicates) {
        const unsigned masks = 1u << p.arity;
        for (unsigned mask = 1; mask < masks; ++mask) {
            std::vector<Tuple> shifted;
            shifted.reserve(p.satisfying.size());
            for (const Tuple& t : p.satisfying) {
                Tuple s(t);
                for (int j = 0; j < p.arity; ++j)
                    s[static_cast<std::size_t>(j)] ^= static_cast<int>((mask >> j) & 1u);
                shifted.push_back(std::move(s));
            }
            std::sort(shifted.begin(), shifted.end());
            if (!seen.insert({p.arity, shifted}).second)
                continue;
            std::string bits(static_cast<std::size_t>(p.arity), '0');
            for (int j = 0; j < p.arity; ++j)
                if ((mask >> j) & 1u)
                    bits[static_cast<std::size_t>(j)] = '1';
            Predicate shifted_pred;
            shifted_pred.name = p.name + "~" + bits;
            shifted_pred.arity = p.arity;
            shifted_pred.satisfying = std::move(shifted);
            while (out.find(shifted_pred.name) >= 0)
                shifted_pred.name += "'";
            out.predicates.push_back(std::move(shifted_pred));
        }
    }
    return out;
}

std::vector<Violation> validate_instance(const Instance& f) {
    std::vector<Violation> out;
    try {
        f.language.check();
    } catch (const ValidationError& e) {
        out.push_back({-1, e.what()});
    }
    if (f.num_variables < 1)
        out.push_back({-1, "instance has no variables"});
    if (f.constraints.empty())
        out.push_back({-1, "instance has no constraints"});
    if (f.weighted) {
        if (f.weights.size() != f.constraints.size())
            out.push_back({-1, "weight list length differs from constraint count"});
    } else if (!f.weights.empty()) {
        out.push_back({-1, "unweighted instance stores weights"});
    }

    const int num_preds = static_cast<int>(f.language.predicates.size());
    for (int r = 0; r < f.num_constraints(); ++r) {
        const Constraint& c = f.constraints[static_cast<std::size_t>(r)];
        if (c.pred < 0 || c.pred >= num_preds) {
            out.push_back({r, "predicate index out of range"});
            continue;
        }
        const Predicate& p = f.language.at(c.pred);
        if (static_cast<int>(c.scope.size()) != p.arity)
            out.push_back({r, "scope length differs from predicate arity"});
        std::set<int> distinct(c.scope.begin(), c.scope.end());
        if (distinct.size() != c.scope.size())
            out.push_back({r, "scope not distinct"});
        for (int var : c.scope)
            if (var < 0 || var >= f.num_variables)
                out.push_back({r, "scope index out of range"});
        if (f.weighted && r < static_cast<int>(f.weights.size()) &&
            f.weights[static_cast<std::size_t>(r)] < 0.0)
            out.push_back({r, "negative weight"});
    }

    if (f.weighted && f.weights.size() == f.constraints.size()) {
        double total = 0.0;
        for (double w : f.weights)
            total += w;
        if (std::abs(total - 1.0) > 1e-9)
            out.push_back({-1, "weights not normalized"});
    }
    return out;
}

void require_valid(const Instance& f) {
    const auto violations = validate_instance(f);
    if (violations.empty())
        return;
    std::string msg = "invalid instance:";
    for (const Violation& v : violations) {
        msg += " [";
        if (v.constraint >= 0)
            msg += "constraint " + std::to_string(v.constraint) + ": ";
        msg += v.rule + "]";
    }
    throw ValidationError(msg);
}

Evaluator::Evaluator(const Instance& f) : instance_(&f), q_(f.language.domain_size) {
    tables_.resize(f.language.predicates.size());
    for (std::size_t p = 0; p < f.language.predicates.size(); ++p) {
        const Predicate& pred = f.language.predicates[p];
        tables_[p].assign(static_cast<std::size_t>(pow_ll(q_, pred.arity)), 0);
        for (const Tuple& t : pred.satisfying) {
            long long idx = 0;
            long long stride = 1;
            for (int j = 0; j < pred.arity; ++j) {
                idx += t[static_cast<std::size_t>(j)] * stride;
                stride *= q_;
            }
            tables_[p][static_cast<std::size_t>(idx)] = 1;
        }
    }
    table_of_.reserve(f.constraints.size());
    scope_begin_.reserve(f.constraints.size() + 1);
    scope_begin_.push_back(0);
    for (const Constraint& c : f.constraints) {
        table_of_.push_back(tables_[static_cast<std::size_t>(c.pred)].data());
        scope_flat_.insert(scope_flat_.end(), c.scope.begin(), c.scope.end());
        scope_begin_.push_back(static_cast<int>(scope_flat_.size()));
    }
}

bool Evaluator::satisfied(int r, const Assignment& chi) const {
    const int begin = scope_begin_[static_cast<std::size_t>(r)];
    const int end = scope_begin_[static_cast<std::size_t>(r) + 1];
    long long idx = 0;
    long long stride = 1;
    for (int j = begin; j < end; ++j) {
        idx += chi[static_cast<std::size_t>(scope_flat_[static_cast<std::size_t>(j)])] * stride;
        stride *= q_;
    }
    return table_of_[static_cast<std::size_t>(r)][idx] != 0;
}

long long Evaluator::satisfied_count(const Assignment& chi) const {
    long long count = 0;
    const int m = instance_->num_constraints();
    for (int r = 0; r < m; ++r)
        count += satisfied(r, chi) ? 1 : 0;
    return count;
}

double Evaluator::value(const Assignment& chi) const {
    const int m = instance_->num_constraints();
    if (!instance_->weighted)
        return static_cast<double>(satisfied_count(chi)) / static_cast<double>(m);
    double sum = 0.0;
    for (int r = 0; r < m; ++r)
        if (satisfied(r, chi))
            sum += instance_->weights[static_cast<std::size_t>(r)];
    return sum;
}

Instance make_unweighted(CspLanguage lang, int num_variables, std::vector<Constraint> constraints) {
    Instance f;
    f.language = std::move(lang);
    f.num_variables = num_variables;
    f.constraints = std::move(constraints);
    f.weighted = false;
    return f;
}

Instance make_weighted(CspLanguage lang, int num_variables, std::vector<Constraint> constraints,
                       std::vector<double> weights) {
    Instance f;
    f.language = std::move(lang);
    f.num_variables = num_variables;
    f.constraints = std::move(constraints);
    f.weighted = true;
    f.weights = std::move(weights);
    return f;
}

Predicate pred_neq() {
    return Predicate("NEQ", 2, {{0, 1}, {1, 0}});
}

Predicate pred_eq2() {
    return Predicate("EQ2", 2, {{0, 0}, {1, 1}});
}

Predicate pred_or(int k) {
    std::vector<Tuple> sat;
    for (long long v = 1; v < (1LL << k); ++v) {
        Tuple t(static_cast<std::size_t>(k));
        for (int j = 0; j < k; ++j)
            t[static_cast<std::size_t>(j)] = static_cast<int>((v >> j) & 1);
        sat.push_back(std::move(t));
    }
    return Predicate("OR" + std::to_string(k), k, std::move(sat));
}

Predicate pred_and(int k) {
    return Predicate("AND" + std::to_string(k), k, {Tuple(static_cast<std::size_t>(k), 1)});
}

Predicate pred_or_negated(int k, unsigned mask, const std::string& name) {
    // Clause over k variables where bit j of mask negates position j; the
    // unique falsifying tuple is the mask itself.
    std::vector<Tuple> sat;
    for (long long v = 0; v < (1LL << k); ++v) {
        if (static_cast<unsigned>(v) == mask)
            continue;
        Tuple t(static_cast<std::size_t>(k));
        for (int j = 0; j < k; ++j)
            t[static_cast<std::size_t>(j)] = static_cast<int>((v >> j) & 1);
        sat.push_back(std::move(t));
    }
    return Predicate(name, k, std::move(sat));
}

} // namespace regulus
