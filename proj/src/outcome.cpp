#include "rgt/outcome.hpp"

#include <cmath>

#include "rgt/errors.hpp"

namespace rgt {

const char* to_string(Outcome::Kind kind) {
    switch (kind) {
        case Outcome::Kind::Value: return "value";
        case Outcome::Kind::Exception: return "exception";
        case Outcome::Kind::Timeout: return "timeout";
        case Outcome::Kind::Error: return "error";
    }
    return "error";
}

// Structural comparison: objects compare key-wise regardless of insertion
// order (ordered_json's operator== is order-sensitive), numbers compare
// numerically, and epsilon > 0 tolerates that much absolute difference on
// numeric leaves.
bool values_equal(const Json& a, const Json& b, double epsilon) {
    if (a.is_number() && b.is_number()) {
        if (a.is_number_float() || b.is_number_float()) {
            const double x = a.get<double>();
            const double y = b.get<double>();
            if (x == y) return true;
            return epsilon > 0.0 && std::fabs(x - y) <= epsilon;
        }
        return a == b;  // both integral; exact
    }
    if (a.is_array() && b.is_array()) {
        if (a.size() != b.size()) return false;
        for (std::size_t i = 0; i < a.size(); ++i)
            if (!values_equal(a[i], b[i], epsilon)) return false;
        return true;
    }
    if (a.is_object() && b.is_object()) {
        if (a.size() != b.size()) return false;
        for (auto it = a.begin(); it != a.end(); ++it) {
            if (!b.contains(it.key())) return false;
            if (!values_equal(it.value(), b.at(it.key()), epsilon)) return false;
        }
        return true;
    }
    if (a.type() != b.type()) return false;
    return a == b;
}

bool outcomes_equal(const Outcome& oracle, const Outcome& actual, double epsilon) {
    if (oracle.kind != actual.kind) return false;
    switch (oracle.kind) {
        case Outcome::Kind::Value:
            return values_equal(oracle.value, actual.value, epsilon);
        case Outcome::Kind::Exception:
            return oracle.exception_type == actual.exception_type &&
                   oracle.exception_site == actual.exception_site;
        case Outcome::Kind::Timeout:
        case Outcome::Kind::Error:
            return false;
    }
    return false;
}

Json outcome_to_json(const Outcome& outcome) {
    Json j;
    j["kind"] = to_string(outcome.kind);
    switch (outcome.kind) {
        case Outcome::Kind::Value:
            j["value"] = outcome.value;
            break;
        case Outcome::Kind::Exception:
            j["type"] = outcome.exception_type;
            if (outcome.exception_site) j["site"] = *outcome.exception_site;
            break;
        case Outcome::Kind::Timeout:
            break;
        case Outcome::Kind::Error:
            j["diagnostic"] = outcome.diagnostic;
            break;
    }
    return j;
}

Outcome outcome_from_json(const Json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "value") return Outcome::make_value(j.at("value"));
    if (kind == "exception") {
        std::optional<std::string> site;
        if (j.contains("site")) site = j.at("site").get<std::string>();
        return Outcome::make_exception(j.at("type").get<std::string>(), site);
    }
    if (kind == "timeout") return Outcome::make_timeout(Millis{0});
    if (kind == "error")
        return Outcome::make_error(j.value("diagnostic", std::string{}));
    throw Error("unknown outcome kind: " + kind);
}

}  // namespace rgt
