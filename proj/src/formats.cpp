#include "regulus/formats.hpp"

#include "regulus/rng.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace regulus {

namespace {

using nlohmann::json;

// DOM parser that additionally rejects duplicate keys anywhere in the
// document (nlohmann's default silently keeps the last occurrence).
class CheckedSax : public nlohmann::detail::json_sax_dom_parser<json> {
public:
    explicit CheckedSax(json& j) : nlohmann::detail::json_sax_dom_parser<json>(j, true) {}

    bool start_object(std::size_t len) {
        keys_.emplace_back();
        return nlohmann::detail::json_sax_dom_parser<json>::start_object(len);
    }
    bool end_object() {
        keys_.pop_back();
        return nlohmann::detail::json_sax_dom_parser<json>::end_object();
    }
    bool key(json::string_t& val) {
        if (!keys_.empty() && !keys_.back().insert(val).second)
            throw ParseError("duplicate predicate or key '" + val + "'");
        return nlohmann::detail::json_sax_dom_parser<json>::key(val);
    }

private:
    std::vector<std::set<std::string>> keys_;
};

int line_of_offset(const std::string& text, std::size_t offset) {
    int line = 1;
    for (std::size_t i = 0; i < offset && i < text.size(); ++i)
        if (text[i] == '\n')
            ++line;
    return line;
}

json parse_json_strict(const std::string& text) {
    json doc;
    CheckedSax sax(doc);
    try {
        json::sax_parse(text, &sax);
    } catch (const json::parse_error& e) {
        throw ParseError("syntax error at line " + std::to_string(line_of_offset(text, e.byte)) +
                         ": " + e.what());
    }
    return doc;
}

std::string format_weight(double w) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", w);
    return buf;
}

int require_int(const json& j, const std::string& what) {
    if (!j.is_number_integer())
        throw ParseError(what + " must be an integer");
    return j.get<int>();
}

} // namespace

Instance parse_instance(const std::string& text) {
    const json doc = parse_json_strict(text);
    if (!doc.is_object())
        throw ParseError("instance document must be a JSON object");
    for (const std::string key : {"domain", "variables", "predicates", "constraints"})
        if (!doc.contains(key))
            throw ParseError("missing key '" + key + "'");

    Instance f;
    f.language.domain_size = require_int(doc["domain"], "domain");
    f.num_variables = require_int(doc["variables"], "variables");

    if (!doc["predicates"].is_object())
        throw ParseError("'predicates' must be an object");
    for (const auto& [name, body] : doc["predicates"].items()) {
        if (!body.is_object() || !body.contains("arity") || !body.contains("satisfying"))
            throw ParseError("predicate '" + name + "' needs arity and satisfying");
        Predicate p;
        p.name = name;
        p.arity = require_int(body["arity"], "arity of '" + name + "'");
        if (!body["satisfying"].is_array())
            throw ParseError("satisfying set of '" + name + "' must be an array");
        for (const json& jt : body["satisfying"]) {
            if (!jt.is_array())
                throw ParseError("satisfying tuple of '" + name + "' must be an array");
            Tuple t;
            for (const json& v : jt)
                t.push_back(require_int(v, "tuple entry of '" + name + "'"));
            p.satisfying.push_back(std::move(t));
        }
        std::sort(p.satisfying.begin(), p.satisfying.end());
        p.satisfying.erase(std::unique(p.satisfying.begin(), p.satisfying.end()),
                           p.satisfying.end());
        f.language.predicates.push_back(std::move(p));
    }

    if (!doc["constraints"].is_array())
        throw ParseError("'constraints' must be an array");
    int with_weight = 0;
    for (const json& jc : doc["constraints"]) {
        if (!jc.is_object() || !jc.contains("pred") || !jc.contains("scope"))
            throw ParseError("constraint needs pred and scope");
        Constraint c;
        const std::string pname = jc["pred"].get<std::string>();
        c.pred = f.language.find(pname);
        if (c.pred < 0)
            throw ParseError("constraint references unknown predicate '" + pname + "'");
        for (const json& v : jc["scope"])
            c.scope.push_back(require_int(v, "scope entry"));
        f.constraints.push_back(std::move(c));
        if (jc.contains("weight")) {
            ++with_weight;
            f.weights.push_back(jc["weight"].get<double>());
        }
    }
    if (with_weight != 0 && with_weight != f.num_constraints())
        throw ParseError("either all constraints carry a weight or none does");
    f.weighted = with_weight > 0;
    if (!f.weighted)
        f.weights.clear();

    const auto violations = validate_instance(f);
    if (!violations.empty()) {
        std::string msg = "semantic violations:";
        for (const Violation& v : violations) {
            msg += " [";
            if (v.constraint >= 0)
                msg += "constraint " + std::to_string(v.constraint) + ": ";
            msg += v.rule + "]";
        }
        throw ParseError(msg);
    }
    return f;
}

std::string serialize_instance(const Instance& f) {
    // Canonical writer: fixed key order (alphabetical), one constraint per
    // line, tuples sorted by the Predicate constructor at load time.
    std::ostringstream out;
    out << "{\n";
    out << "  \"constraints\": [\n";
    for (int r = 0; r < f.num_constraints(); ++r) {
        const Constraint& c = f.constraints[static_cast<std::size_t>(r)];
        out << "    {\"pred\": \"" << f.language.at(c.pred).name << "\", \"scope\": [";
        for (std::size_t j = 0; j < c.scope.size(); ++j)
            out << (j ? ", " : "") << c.scope[j];
        out << "]";
        if (f.weighted)
            out << ", \"weight\": " << format_weight(f.weights[static_cast<std::size_t>(r)]);
        out << "}" << (r + 1 < f.num_constraints() ? "," : "") << "\n";
    }
    out << "  ],\n";
    out << "  \"domain\": " << f.language.domain_size << ",\n";
    out << "  \"predicates\": {\n";
    std::map<std::string, const Predicate*> sorted;
    for (const Predicate& p : f.language.predicates)
        sorted[p.name] = &p;
    std::size_t written = 0;
    for (const auto& [name, p] : sorted) {
        std::vector<Tuple> tuples = p->satisfying;
        std::sort(tuples.begin(), tuples.end());
        out << "    \"" << name << "\": {\"arity\": " << p->arity << ", \"satisfying\": [";
        for (std::size_t t = 0; t < tuples.size(); ++t) {
            out << (t ? ", " : "") << "[";
            for (std::size_t j = 0; j < tuples[t].size(); ++j)
                out << (j ? ", " : "") << tuples[t][j];
            out << "]";
        }
        out << "]}" << (++written < sorted.size() ? "," : "") << "\n";
    }
    out << "  },\n";
    out << "  \"variables\": " << f.num_variables << "\n";
    out << "}\n";
    return out.str();
}

Assignment parse_assignment(const std::string& text) {
    Assignment chi;
    std::istringstream in(text);
    int v = 0;
    while (in >> v)
        chi.push_back(v);
    if (chi.empty())
        throw ParseError("empty assignment file");
    return chi;
}

std::string serialize_assignment(const Assignment& chi) {
    std::ostringstream out;
    for (std::size_t i = 0; i < chi.size(); ++i)
        out << (i ? " " : "") << chi[i];
    out << "\n";
    return out.str();
}

Instance parse_dimacs(const std::string& text) {
    std::istringstream in(text);
    std::string tok;
    int n = -1, m = -1;
    std::vector<std::vector<int>> clauses;
    std::vector<int> current;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == 'c' || line[0] == '%')
            continue;
        std::istringstream ls(line);
        if (line[0] == 'p') {
            std::string p, cnf;
            ls >> p >> cnf >> n >> m;
            if (cnf != "cnf")
                throw ParseError("expected 'p cnf <vars> <clauses>' header");
            continue;
        }
        long long lit = 0;
        while (ls >> lit) {
            if (lit == 0) {
                if (!current.empty())
                    clauses.push_back(current);
                current.clear();
            } else {
                current.push_back(static_cast<int>(lit));
            }
        }
    }
    if (!current.empty())
        clauses.push_back(current);
    if (n <= 0)
        throw ParseError("missing or invalid DIMACS header");

    CspLanguage lang;
    lang.domain_size = 2;
    std::map<std::pair<int, unsigned>, int> pred_index; // (width, mask) -> index
    Instance f;
    f.num_variables = n;
    f.weighted = false;

    for (std::size_t ci = 0; ci < clauses.size(); ++ci) {
        // Collapse duplicate literals; x and -x in one clause has no predicate
        // over distinct variables, so it is rejected.
        std::map<int, int> sign_of; // var (1-based) -> +1/-1
        for (int lit : clauses[ci]) {
            const int var = std::abs(lit);
            const int sign = lit > 0 ? 1 : -1;
            if (var > n)
                throw ParseError("literal exceeds declared variable count");
            auto [it, inserted] = sign_of.try_emplace(var, sign);
            if (!inserted && it->second != sign)
                throw ParseError("tautological clause " + std::to_string(ci + 1) +
                                 " (x and -x) not representable");
        }
        Constraint c;
        unsigned mask = 0;
        int pos = 0;
        for (const auto& [var, sign] : sign_of) {
            c.scope.push_back(var - 1);
            if (sign < 0)
                mask |= 1u << pos;
            ++pos;
        }
        const int width = static_cast<int>(c.scope.size());
        auto key = std::make_pair(width, mask);
        auto it = pred_index.find(key);
        if (it == pred_index.end()) {
            std::string bits(static_cast<std::size_t>(width), '0');
            for (int j = 0; j < width; ++j)
                if ((mask >> j) & 1u)
                    bits[static_cast<std::size_t>(j)] = '1';
            const std::string name = "OR" + std::to_string(width) + "~" + bits;
            it = pred_index.emplace(key, lang.add(pred_or_negated(width, mask, name))).first;
        }
        c.pred = it->second;
        f.constraints.push_back(std::move(c));
    }
    if (f.constraints.empty())
        throw ParseError("DIMACS file contains no clauses");
    f.language = std::move(lang);
    require_valid(f);
    return f;
}

Instance generate(const GeneratorSpec& spec) {
    if (spec.m < 1)
        throw ValidationError("generator needs m >= 1");
    Rng rng(spec.seed);

    CspLanguage lang;
    lang.domain_size = 2;
    Instance f;
    f.num_variables = spec.n;

    auto distinct_scope = [&](int width) {
        // Partial Fisher-Yates over [0, n).
        std::vector<int> pool(static_cast<std::size_t>(spec.n));
        for (int i = 0; i < spec.n; ++i)
            pool[static_cast<std::size_t>(i)] = i;
        std::vector<int> scope;
        for (int j = 0; j < width; ++j) {
            const int pick = j + rng.below_int(spec.n - j);
            std::swap(pool[static_cast<std::size_t>(j)], pool[static_cast<std::size_t>(pick)]);
            scope.push_back(pool[static_cast<std::size_t>(j)]);
        }
        return scope;
    };

    switch (spec.family) {
    case GeneratorFamily::random_maxcut: {
        if (spec.n < 2)
            throw ValidationError("random-maxcut needs n >= 2");
        const int neq = lang.add(pred_neq());
        for (int r = 0; r < spec.m; ++r)
            f.constraints.push_back({neq, distinct_scope(2)});
        break;
    }
    case GeneratorFamily::random_ksat: {
        if (spec.n < spec.k)
            throw ValidationError("random-ksat needs n >= k");
        for (unsigned mask = 0; mask < (1u << spec.k); ++mask) {
            std::string bits(static_cast<std::size_t>(spec.k), '0');
            for (int j = 0; j < spec.k; ++j)
                if ((mask >> j) & 1u)
                    bits[static_cast<std::size_t>(j)] = '1';
            lang.add(pred_or_negated(spec.k, mask, "OR" + std::to_string(spec.k) + "~" + bits));
        }
        for (int r = 0; r < spec.m; ++r) {
            const int pred = rng.below_int(1 << spec.k);
            f.constraints.push_back({pred, distinct_scope(spec.k)});
        }
        break;
    }
    case GeneratorFamily::random_mixed: {
        if (spec.n < 3)
            throw ValidationError("random-mixed needs n >= 3");
        const int neq = lang.add(pred_neq());
        const int or2 = lang.add(pred_or(2));
        const int or3 = lang.add(pred_or(3));
        for (int r = 0; r < spec.m; ++r) {
            const int which = rng.below_int(3);
            const int pred = which == 0 ? neq : which == 1 ? or2 : or3;
            f.constraints.push_back({pred, distinct_scope(which == 2 ? 3 : 2)});
        }
        break;
    }
    }
    f.language = std::move(lang);

    if (spec.weight_mode == WeightMode::dirichlet) {
        f.weighted = true;
        double total = 0.0;
        for (int r = 0; r < spec.m; ++r) {
            const double e = -std::log(1.0 - rng.unit()); // Exp(1)
            f.weights.push_back(e);
            total += e;
        }
        for (double& w : f.weights)
            w /= total;
    }
    require_valid(f);
    return f;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error("cannot write '" + path + "'");
    out << content;
}

std::string instance_digest(const Instance& f) {
    const std::string text = serialize_instance(f);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace regulus
