#pragma once

#include <optional>
#include <string>

#include "rgt/json.hpp"
#include "rgt/util.hpp"

namespace rgt {

/// Observed behavior of one program execution on one input.
struct Outcome {
    enum class Kind { Value, Exception, Timeout, Error };

    Kind kind = Kind::Error;
    Json value;                         // present iff kind == Value
    std::string exception_type;         // present iff kind == Exception
    std::optional<std::string> exception_site;
    Millis wall_time{0};
    std::string diagnostic;             // free text, mainly for kind == Error

    static Outcome make_value(Json v) {
        Outcome o;
        o.kind = Kind::Value;
        o.value = std::move(v);
        return o;
    }
    static Outcome make_exception(std::string type, std::optional<std::string> site) {
        Outcome o;
        o.kind = Kind::Exception;
        o.exception_type = std::move(type);
        o.exception_site = std::move(site);
        return o;
    }
    static Outcome make_timeout(Millis wall) {
        Outcome o;
        o.kind = Kind::Timeout;
        o.wall_time = wall;
        return o;
    }
    static Outcome make_error(std::string diagnostic) {
        Outcome o;
        o.kind = Kind::Error;
        o.diagnostic = std::move(diagnostic);
        return o;
    }
};

const char* to_string(Outcome::Kind kind);

/// JSON numbers compare numerically; everything else structurally. With
/// epsilon > 0, two numeric leaves are equal when |a-b| <= epsilon (the
/// assertion-tolerance knob; off by default).
bool values_equal(const Json& a, const Json& b, double epsilon);

/// Behavioral equality between two outcomes. Exceptions are equal when the
/// types match and the sites match (two absent sites match; absent vs
/// present does not). Timeout and Error outcomes never equal anything.
bool outcomes_equal(const Outcome& oracle, const Outcome& actual, double epsilon);

Json outcome_to_json(const Outcome& outcome);
Outcome outcome_from_json(const Json& j);

}  // namespace rgt
