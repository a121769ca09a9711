#pragma once

#include "regulus/csp.hpp"

#include <cstdint>
#include <string>

namespace regulus {

// Structured-text instance format (.csp): a JSON document with keys
//   domain      - integer q >= 2
//   variables   - integer n >= 1
//   predicates  - name -> { arity, satisfying: [[..], ..] }
//   constraints - [ { pred, scope, weight? }, .. ]
// Either every constraint carries a weight or none does. Canonical form has
// alphabetically sorted keys, sorted satisfying tuples, and weights printed
// with 12 significant digits, so golden files compare byte-for-byte.

struct ParseError : Error {
    using Error::Error;
};

Instance parse_instance(const std::string& text);
std::string serialize_instance(const Instance& f);

// Assignment files (.asn): one line of space-separated values, length n.
Assignment parse_assignment(const std::string& text);
std::string serialize_assignment(const Assignment& chi);

// DIMACS CNF import shim: clauses become negated-OR predicates over distinct
// variables. Duplicate literals are collapsed; tautological clauses are
// rejected. The result is an unweighted Max-SAT style instance.
Instance parse_dimacs(const std::string& text);

// ---------------------------------------------------------------------------
// Seeded generators
// ---------------------------------------------------------------------------

enum class GeneratorFamily { random_ksat, random_maxcut, random_mixed };
enum class WeightMode { uniform, dirichlet }; // uniform -> unweighted instance

struct GeneratorSpec {
    GeneratorFamily family = GeneratorFamily::random_mixed;
    int n = 4;
    int m = 4;
    int k = 3; // clause width for random_ksat
    std::uint64_t seed = 0;
    WeightMode weight_mode = WeightMode::uniform;
};

// Deterministic for a fixed spec; output always passes validate_instance.
Instance generate(const GeneratorSpec& spec);

// File helpers shared by tools and tests.
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

// FNV-1a digest of the canonical serialization, as fixed-width hex.
std::string instance_digest(const Instance& f);

} // namespace regulus
