#include "rgt/classify.hpp"

#include <algorithm>

#include "rgt/errors.hpp"

namespace rgt {

const char* category_tag(DiffCategory c) {
    switch (c) {
        case DiffCategory::Assert: return "D_assert";
        case DiffCategory::MissingException: return "D_exc1";
        case DiffCategory::UnexpectedException: return "D_exc2";
        case DiffCategory::ExceptionType: return "D_exc_type";
        case DiffCategory::ExceptionSite: return "D_exc_loc";
        case DiffCategory::Timeout: return "D_timeout";
        case DiffCategory::Error: return "D_error";
    }
    return "D_error";
}

std::optional<DiffCategory> category_from_tag(const std::string& tag) {
    for (DiffCategory c : all_categories())
        if (tag == category_tag(c)) return c;
    return std::nullopt;
}

std::vector<DiffCategory> all_categories() {
    return {DiffCategory::Assert,          DiffCategory::MissingException,
            DiffCategory::UnexpectedException, DiffCategory::ExceptionType,
            DiffCategory::ExceptionSite,   DiffCategory::Timeout,
            DiffCategory::Error};
}

std::optional<DiffCategory> classify_pair(const Outcome& oracle, const Outcome& actual,
                                          double epsilon) {
    if (actual.kind == Outcome::Kind::Timeout) return DiffCategory::Timeout;
    if (actual.kind == Outcome::Kind::Error) return DiffCategory::Error;
    if (outcomes_equal(oracle, actual, epsilon)) return std::nullopt;

    const bool oracle_value = oracle.kind == Outcome::Kind::Value;
    const bool actual_value = actual.kind == Outcome::Kind::Value;
    if (oracle_value && actual_value) return DiffCategory::Assert;
    if (!oracle_value && actual_value) return DiffCategory::MissingException;
    if (oracle_value && !actual_value) return DiffCategory::UnexpectedException;
    if (oracle.exception_type != actual.exception_type) return DiffCategory::ExceptionType;
    return DiffCategory::ExceptionSite;
}

namespace {

std::string site_or_unknown(const std::optional<std::string>& site) {
    return site ? *site : std::string("unknown");
}

std::string render(const Json& v) { return v.dump(); }

}  // namespace

std::string format_diagnostic(const Outcome& oracle, const Outcome& actual,
                              DiffCategory category, Millis timeout) {
    switch (category) {
        case DiffCategory::Assert:
            return "ComparisonFailure: expected: " + render(oracle.value) +
                   " but was: " + render(actual.value);
        case DiffCategory::MissingException:
            return "Expecting exception: " + oracle.exception_type;
        case DiffCategory::UnexpectedException:
            return "Exception " + actual.exception_type + " at " +
                   site_or_unknown(actual.exception_site);
        case DiffCategory::ExceptionType:
            return "Expected exception of type " + oracle.exception_type +
                   " but was of type " + actual.exception_type;
        case DiffCategory::ExceptionSite:
            return "Expected exception " + site_or_unknown(oracle.exception_site) + "." +
                   oracle.exception_type + " but was " +
                   site_or_unknown(actual.exception_site) + "." + actual.exception_type;
        case DiffCategory::Timeout:
            return "Test timed out after " + std::to_string(timeout.count()) +
                   " milliseconds";
        case DiffCategory::Error:
            return "Unexpected error: " +
                   (actual.diagnostic.empty() ? std::string("(no diagnostic)")
                                              : actual.diagnostic);
    }
    return "Unexpected error: (unknown category)";
}

std::vector<DiagnosticPattern> patterns_from_json(const Json& spec) {
    if (!spec.is_array()) throw ConfigError("pattern file must hold an array");
    std::vector<DiagnosticPattern> patterns;
    for (const auto& rec : spec) {
        DiagnosticPattern p;
        const auto tag = rec.at("category").get<std::string>();
        const auto cat = category_from_tag(tag);
        if (!cat) throw ConfigError("unknown category in pattern file: " + tag);
        p.category = *cat;
        p.pattern = rec.at("regex").get<std::string>();
        p.priority = rec.at("priority").get<int>();
        try {
            p.compiled = std::regex(p.pattern, std::regex::ECMAScript);
        } catch (const std::regex_error& e) {
            throw ConfigError("bad regex for " + tag + ": " + e.what());
        }
        patterns.push_back(std::move(p));
    }
    std::stable_sort(patterns.begin(), patterns.end(),
                     [](const auto& a, const auto& b) { return a.priority > b.priority; });
    return patterns;
}

std::vector<DiagnosticPattern> load_patterns(const fs::path& file) {
    return patterns_from_json(Json::parse(read_file(file)));
}

std::vector<DiagnosticPattern> default_patterns() {
    // Keep in sync with data/patterns.json (checked by a unit test).
    static const char* kSpec = R"json([
  {"category": "D_exc_loc",  "regex": "^Expected exception [A-Za-z0-9_$.]+\\.[A-Za-z0-9_$]+ but was [A-Za-z0-9_$.]+\\.[A-Za-z0-9_$]+", "priority": 60},
  {"category": "D_exc_type", "regex": "^Expected exception of type [A-Za-z0-9_$.]+", "priority": 50},
  {"category": "D_exc1",     "regex": "^Expecting exception: [A-Za-z0-9_$.]+", "priority": 40},
  {"category": "D_exc2",     "regex": "^Exception [A-Za-z0-9_$.]+ at ", "priority": 30},
  {"category": "D_timeout",  "regex": "^Test timed out after [0-9]+ milliseconds", "priority": 20},
  {"category": "D_assert",   "regex": "^(ComparisonFailure|AssertionError): expected: .* but was: ", "priority": 10}
])json";
    return patterns_from_json(Json::parse(kSpec));
}

DiffCategory classify_diagnostic(const std::string& text,
                                 const std::vector<DiagnosticPattern>& patterns) {
    for (const auto& p : patterns)
        if (std::regex_search(text, p.compiled)) return p.category;
    return DiffCategory::Error;
}

ActiveCategories::ActiveCategories() {
    for (DiffCategory c : all_categories()) enabled_.insert(c);
}

ActiveCategories ActiveCategories::profile(const std::string& name) {
    if (name == kProfilePaperFaithful) return ActiveCategories();
    if (name == kProfileStrictFalsePositive)
        return all_except({DiffCategory::ExceptionSite});
    throw ConfigError("unknown category profile: " + name);
}

ActiveCategories ActiveCategories::all_except(const std::set<DiffCategory>& disabled) {
    ActiveCategories a;
    for (DiffCategory c : disabled) a.enabled_.erase(c);
    return a;
}

std::set<DiffCategory> ActiveCategories::disabled() const {
    std::set<DiffCategory> d;
    for (DiffCategory c : all_categories())
        if (!enabled(c)) d.insert(c);
    return d;
}

}  // namespace rgt
