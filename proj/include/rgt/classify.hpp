#pragma once

#include <optional>
#include <regex>
#include <set>
#include <string>
#include <vector>

#include "rgt/json.hpp"
#include "rgt/outcome.hpp"
#include "rgt/util.hpp"

namespace rgt {

/// The seven kinds of behavioral difference between a ground-truth oracle
/// and an observed outcome. Declaration order is the canonical total order
/// used for reporting.
enum class DiffCategory {
    Assert,             // same kind, different value
    MissingException,   // oracle raised, program returned a value
    UnexpectedException,// oracle returned a value, program raised
    ExceptionType,      // both raised, different exception types
    ExceptionSite,      // same type, raised at a different site
    Timeout,            // program exceeded the per-test deadline
    Error,              // residual: crash, protocol failure, unmatched diagnostic
};

constexpr int kCategoryCount = 7;

const char* category_tag(DiffCategory c);              // "D_assert" .. "D_error"
std::optional<DiffCategory> category_from_tag(const std::string& tag);
std::vector<DiffCategory> all_categories();

/// Decision table over (oracle, actual). The oracle must be a Value or
/// Exception outcome; equal behavior yields nullopt. Total otherwise.
std::optional<DiffCategory> classify_pair(const Outcome& oracle, const Outcome& actual,
                                          double epsilon = 0.0);

/// Renders the canonical failure diagnostic for a differing pair, in the
/// same shape the regex patterns match.
std::string format_diagnostic(const Outcome& oracle, const Outcome& actual,
                              DiffCategory category, Millis timeout);

struct DiagnosticPattern {
    DiffCategory category;
    std::string pattern;
    int priority = 0;
    std::regex compiled;
};

/// The six built-in diagnostic templates (Error has none; it is the
/// residual class). Matches the shipped data/patterns.json.
std::vector<DiagnosticPattern> default_patterns();

/// Loads `[{"category":..,"regex":..,"priority":..}, ...]`.
std::vector<DiagnosticPattern> load_patterns(const fs::path& file);
std::vector<DiagnosticPattern> patterns_from_json(const Json& spec);

/// Highest-priority matching pattern wins; no match is Error.
DiffCategory classify_diagnostic(const std::string& text,
                                 const std::vector<DiagnosticPattern>& patterns);

/// Which categories may contribute to an overfitting verdict. Differences
/// in disabled categories are still reported, as suppressed findings.
class ActiveCategories {
public:
    ActiveCategories();  // all enabled

    static ActiveCategories profile(const std::string& name);  // see kProfile* below
    static ActiveCategories all_except(const std::set<DiffCategory>& disabled);

    bool enabled(DiffCategory c) const { return enabled_.count(c) != 0; }
    std::set<DiffCategory> disabled() const;

private:
    std::set<DiffCategory> enabled_;
};

inline constexpr const char* kProfilePaperFaithful = "paper-faithful";
inline constexpr const char* kProfileStrictFalsePositive = "strict-false-positive";

}  // namespace rgt
