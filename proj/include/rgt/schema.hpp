#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rgt/json.hpp"
#include "rgt/rng.hpp"

namespace rgt {

/// One samplable value domain. Kinds:
///   int     — integer range [min_int, max_int]
///   float   — real interval [min_real, max_real]
///   bool    — {false, true}
///   enum    — fixed token list
///   string  — strings over `alphabet` with length in [0, max_len]
///   list    — fixed-length list of `element`
struct Domain {
    enum class Kind { Int, Float, Bool, Enum, String, List };

    Kind kind = Kind::Int;
    std::int64_t min_int = 0, max_int = 0;
    double min_real = 0.0, max_real = 0.0;
    std::vector<std::string> tokens;
    std::string alphabet;
    std::size_t max_len = 0;
    std::size_t length = 0;
    std::shared_ptr<Domain> element;

    /// Number of distinct values, when finite and representable; nullopt for
    /// float domains and anything that overflows.
    std::optional<std::uint64_t> cardinality() const;

    /// k-th value in canonical enumeration order (ints ascending, bools
    /// false/true, enums in declared order, strings by length then
    /// lexicographic in alphabet order, lists as an odometer with the last
    /// element fastest).
    Json nth(std::uint64_t k) const;

    Json sample(SplitMix64& rng, double boundary_bias) const;

    /// The boundary set favored by the bias knob: endpoints plus the
    /// 0/+1/-1 analogs that fall inside the domain.
    std::vector<Json> corner_values() const;
};

struct Parameter {
    std::string name;
    Domain domain;
};

/// Ordered parameter list describing the input record of a program under
/// test. A one-parameter schema produces the bare value; otherwise inputs
/// are objects keyed by parameter name.
struct InputSchema {
    std::vector<Parameter> parameters;

    std::optional<std::uint64_t> cardinality() const;
    Json nth(std::uint64_t k) const;
    Json sample(SplitMix64& rng, double boundary_bias) const;

    /// All inputs in canonical order. Throws DomainTooLargeError above
    /// `cap` (default 10^6) or when the domain is infinite.
    std::vector<Json> enumerate(std::uint64_t cap = 1000000) const;
};

InputSchema schema_from_json(const Json& spec);
Json schema_to_json(const InputSchema& schema);

}  // namespace rgt
