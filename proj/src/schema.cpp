#include "rgt/schema.hpp"

#include <algorithm>

#include "rgt/errors.hpp"

namespace rgt {

namespace {

std::optional<std::uint64_t> checked_mul(std::uint64_t a, std::uint64_t b) {
    if (a == 0 || b == 0) return 0;
    if (a > UINT64_MAX / b) return std::nullopt;
    return a * b;
}

std::optional<std::uint64_t> checked_add(std::uint64_t a, std::uint64_t b) {
    if (a > UINT64_MAX - b) return std::nullopt;
    return a + b;
}

std::uint64_t span_of(std::int64_t min, std::int64_t max) {
    return static_cast<std::uint64_t>(max) - static_cast<std::uint64_t>(min);
}

void dedup_values(std::vector<Json>& values) {
    std::vector<Json> unique;
    for (auto& v : values)
        if (std::find(unique.begin(), unique.end(), v) == unique.end())
            unique.push_back(std::move(v));
    values = std::move(unique);
}

}  // namespace

std::optional<std::uint64_t> Domain::cardinality() const {
    switch (kind) {
        case Kind::Int: {
            const std::uint64_t span = span_of(min_int, max_int);
            if (span == UINT64_MAX) return std::nullopt;
            return span + 1;
        }
        case Kind::Float:
            return std::nullopt;
        case Kind::Bool:
            return 2;
        case Kind::Enum:
            return tokens.size();
        case Kind::String: {
            std::uint64_t total = 0, pow = 1;
            for (std::size_t l = 0; l <= max_len; ++l) {
                auto t = checked_add(total, pow);
                if (!t) return std::nullopt;
                total = *t;
                if (l < max_len) {
                    auto p = checked_mul(pow, alphabet.size());
                    if (!p) return std::nullopt;
                    pow = *p;
                }
            }
            return total;
        }
        case Kind::List: {
            const auto elem = element->cardinality();
            if (!elem) return std::nullopt;
            std::uint64_t total = 1;
            for (std::size_t i = 0; i < length; ++i) {
                auto t = checked_mul(total, *elem);
                if (!t) return std::nullopt;
                total = *t;
            }
            return total;
        }
    }
    return std::nullopt;
}

Json Domain::nth(std::uint64_t k) const {
    switch (kind) {
        case Kind::Int:
            return static_cast<std::int64_t>(static_cast<std::uint64_t>(min_int) + k);
        case Kind::Float:
            throw DomainTooLargeError("float domains cannot be enumerated");
        case Kind::Bool:
            return k != 0;
        case Kind::Enum:
            return tokens.at(k);
        case Kind::String: {
            std::uint64_t pow = 1;
            for (std::size_t l = 0;; ++l) {
                if (k < pow) {
                    std::string s(l, alphabet.empty() ? '?' : alphabet[0]);
                    for (std::size_t i = l; i-- > 0;) {
                        s[i] = alphabet[k % alphabet.size()];
                        k /= alphabet.size();
                    }
                    return s;
                }
                k -= pow;
                pow *= alphabet.size();
            }
        }
        case Kind::List: {
            const std::uint64_t elem_card = element->cardinality().value();
            Json list = Json::array();
            std::vector<std::uint64_t> idx(length);
            for (std::size_t i = length; i-- > 0;) {
                idx[i] = k % elem_card;
                k /= elem_card;
            }
            for (std::size_t i = 0; i < length; ++i) list.push_back(element->nth(idx[i]));
            return list;
        }
    }
    throw Error("unreachable domain kind");
}

std::vector<Json> Domain::corner_values() const {
    std::vector<Json> corners;
    switch (kind) {
        case Kind::Int: {
            corners.push_back(min_int);
            corners.push_back(max_int);
            for (std::int64_t v : {std::int64_t{0}, std::int64_t{1}, std::int64_t{-1}})
                if (v >= min_int && v <= max_int) corners.push_back(v);
            break;
        }
        case Kind::Float: {
            corners.push_back(min_real);
            corners.push_back(max_real);
            for (double v : {0.0, 1.0, -1.0})
                if (v >= min_real && v <= max_real) corners.push_back(v);
            break;
        }
        case Kind::Bool:
            corners.push_back(false);
            corners.push_back(true);
            break;
        case Kind::Enum:
            if (!tokens.empty()) {
                corners.push_back(tokens.front());
                corners.push_back(tokens.back());
            }
            break;
        case Kind::String:
            corners.push_back(std::string{});
            if (!alphabet.empty() && max_len > 0)
                corners.push_back(std::string(max_len, alphabet[0]));
            break;
        case Kind::List:
            for (const Json& c : element->corner_values()) {
                Json list = Json::array();
                for (std::size_t i = 0; i < length; ++i) list.push_back(c);
                corners.push_back(std::move(list));
            }
            break;
    }
    dedup_values(corners);
    return corners;
}

// Advance rule (part of the suite format contract): each scalar draw spends
// one advance on the boundary-bias coin, then either one advance to pick a
// corner, or the uniform draw below. Lists spend no coin themselves; each
// element is drawn recursively.
Json Domain::sample(SplitMix64& rng, double boundary_bias) const {
    if (kind == Kind::List) {
        Json list = Json::array();
        for (std::size_t i = 0; i < length; ++i)
            list.push_back(element->sample(rng, boundary_bias));
        return list;
    }

    if (rng.next_chance(boundary_bias)) {
        const auto corners = corner_values();
        if (!corners.empty()) return corners[rng.next_below(corners.size())];
    }

    switch (kind) {
        case Kind::Int: {
            const std::uint64_t span = span_of(min_int, max_int);
            if (span == UINT64_MAX) return static_cast<std::int64_t>(rng.next());
            return static_cast<std::int64_t>(static_cast<std::uint64_t>(min_int) +
                                             rng.next_below(span + 1));
        }
        case Kind::Float:
            return min_real + rng.next_unit() * (max_real - min_real);
        case Kind::Bool:
            return rng.next_below(2) != 0;
        case Kind::Enum:
            return tokens.at(rng.next_below(tokens.size()));
        case Kind::String: {
            const std::size_t len = static_cast<std::size_t>(rng.next_below(max_len + 1));
            std::string s(len, '?');
            for (std::size_t i = 0; i < len; ++i)
                s[i] = alphabet[rng.next_below(alphabet.size())];
            return s;
        }
        case Kind::List:
            break;  // handled above
    }
    throw Error("unreachable domain kind");
}

std::optional<std::uint64_t> InputSchema::cardinality() const {
    std::uint64_t total = 1;
    for (const auto& p : parameters) {
        const auto c = p.domain.cardinality();
        if (!c) return std::nullopt;
        const auto t = checked_mul(total, *c);
        if (!t) return std::nullopt;
        total = *t;
    }
    return total;
}

Json InputSchema::nth(std::uint64_t k) const {
    if (parameters.size() == 1) return parameters[0].domain.nth(k);
    std::vector<std::uint64_t> idx(parameters.size());
    for (std::size_t i = parameters.size(); i-- > 0;) {
        const std::uint64_t card = parameters[i].domain.cardinality().value();
        idx[i] = k % card;
        k /= card;
    }
    Json obj = Json::object();
    for (std::size_t i = 0; i < parameters.size(); ++i)
        obj[parameters[i].name] = parameters[i].domain.nth(idx[i]);
    return obj;
}

Json InputSchema::sample(SplitMix64& rng, double boundary_bias) const {
    if (parameters.size() == 1) return parameters[0].domain.sample(rng, boundary_bias);
    Json obj = Json::object();
    for (const auto& p : parameters) obj[p.name] = p.domain.sample(rng, boundary_bias);
    return obj;
}

std::vector<Json> InputSchema::enumerate(std::uint64_t cap) const {
    const auto card = cardinality();
    if (!card)
        throw DomainTooLargeError("input domain is not finitely enumerable");
    if (*card > cap)
        throw DomainTooLargeError("input domain has " + std::to_string(*card) +
                                  " values, above the cap of " + std::to_string(cap));
    std::vector<Json> inputs;
    inputs.reserve(static_cast<std::size_t>(*card));
    for (std::uint64_t k = 0; k < *card; ++k) inputs.push_back(nth(k));
    return inputs;
}

namespace {

Domain domain_from_json(const Json& spec) {
    Domain d;
    const std::string kind = spec.at("kind").get<std::string>();
    if (kind == "int") {
        d.kind = Domain::Kind::Int;
        d.min_int = spec.at("min").get<std::int64_t>();
        d.max_int = spec.at("max").get<std::int64_t>();
        if (d.min_int > d.max_int) throw ConfigError("int domain with min > max");
    } else if (kind == "float") {
        d.kind = Domain::Kind::Float;
        d.min_real = spec.at("min").get<double>();
        d.max_real = spec.at("max").get<double>();
        if (!(d.min_real <= d.max_real)) throw ConfigError("float domain with min > max");
    } else if (kind == "bool") {
        d.kind = Domain::Kind::Bool;
    } else if (kind == "enum") {
        d.kind = Domain::Kind::Enum;
        d.tokens = spec.at("values").get<std::vector<std::string>>();
        if (d.tokens.empty()) throw ConfigError("enum domain with no values");
    } else if (kind == "string") {
        d.kind = Domain::Kind::String;
        d.alphabet = spec.at("alphabet").get<std::string>();
        d.max_len = spec.at("max_len").get<std::size_t>();
        if (d.alphabet.empty()) throw ConfigError("string domain with empty alphabet");
    } else if (kind == "list") {
        d.kind = Domain::Kind::List;
        d.length = spec.at("length").get<std::size_t>();
        d.element = std::make_shared<Domain>(domain_from_json(spec.at("element")));
    } else {
        throw ConfigError("unknown domain kind: " + kind);
    }
    return d;
}

Json domain_to_json(const Domain& d) {
    Json spec = Json::object();
    switch (d.kind) {
        case Domain::Kind::Int:
            spec["kind"] = "int";
            spec["min"] = d.min_int;
            spec["max"] = d.max_int;
            break;
        case Domain::Kind::Float:
            spec["kind"] = "float";
            spec["min"] = d.min_real;
            spec["max"] = d.max_real;
            break;
        case Domain::Kind::Bool:
            spec["kind"] = "bool";
            break;
        case Domain::Kind::Enum:
            spec["kind"] = "enum";
            spec["values"] = d.tokens;
            break;
        case Domain::Kind::String:
            spec["kind"] = "string";
            spec["alphabet"] = d.alphabet;
            spec["max_len"] = d.max_len;
            break;
        case Domain::Kind::List:
            spec["kind"] = "list";
            spec["length"] = d.length;
            spec["element"] = domain_to_json(*d.element);
            break;
    }
    return spec;
}

}  // namespace

InputSchema schema_from_json(const Json& spec) {
    InputSchema schema;
    for (const auto& p : spec.at("parameters")) {
        Parameter param;
        param.name = p.at("name").get<std::string>();
        param.domain = domain_from_json(p.at("domain"));
        schema.parameters.push_back(std::move(param));
    }
    if (schema.parameters.empty()) throw ConfigError("schema has no parameters");
    return schema;
}

Json schema_to_json(const InputSchema& schema) {
    Json params = Json::array();
    for (const auto& p : schema.parameters) {
        Json param = Json::object();
        param["name"] = p.name;
        param["domain"] = domain_to_json(p.domain);
        params.push_back(std::move(param));
    }
    Json spec = Json::object();
    spec["parameters"] = std::move(params);
    return spec;
}

}  // namespace rgt
