#include "rgt/sanity.hpp"

#include "rgt/classify.hpp"
#include "rgt/errors.hpp"
#include "rgt/parallel.hpp"
#include "rgt/rng.hpp"

namespace rgt {

std::uint64_t sanity_seed(const std::string& test_id, int round) {
    return mix64(fnv1a64(test_id) ^ fnv1a64("sanity") ^ static_cast<std::uint64_t>(round));
}

std::pair<TestSuite, FlakyReport> sanity_check_suite(const ProgramDescriptor& ground_truth_built,
                                                     const TestSuite& suite,
                                                     const SanityOptions& options) {
    if (options.rounds < 1) throw ConfigError("sanity rounds must be >= 1");

    FlakyReport report;
    report.bug_id = suite.bug_id;
    report.generator_run = suite.generator_run;
    const auto start = Clock::now();

    std::vector<const RgtTest*> remaining;
    remaining.reserve(suite.tests.size());
    for (const auto& t : suite.tests) remaining.push_back(&t);

    for (int round = 1; round <= options.rounds; ++round) {
        if (remaining.empty()) break;
        report.rounds_executed = round;

        std::vector<Outcome> outcomes(remaining.size());
        parallel_for(remaining.size(), options.workers, [&](std::size_t i) {
            RunOptions opts;
            opts.timeout = options.per_test_timeout;
            opts.exec_seed = sanity_seed(remaining[i]->test_id, round);
            outcomes[i] = run_once(ground_truth_built, remaining[i]->input, opts);
        });

        std::vector<const RgtTest*> survivors;
        survivors.reserve(remaining.size());
        for (std::size_t i = 0; i < remaining.size(); ++i) {
            const auto category = classify_pair(remaining[i]->oracle, outcomes[i]);
            if (!category) {
                survivors.push_back(remaining[i]);
                continue;
            }
            report.flaky.push_back(
                {remaining[i]->test_id, round,
                 format_diagnostic(remaining[i]->oracle, outcomes[i], *category,
                                   options.per_test_timeout)});
        }
        remaining = std::move(survivors);
    }

    TestSuite stable = suite;
    stable.sanity_rounds = options.rounds;
    stable.tests.clear();
    for (const RgtTest* t : remaining) stable.tests.push_back(*t);

    report.wall_time = since(start);
    return {std::move(stable), std::move(report)};
}

std::pair<std::vector<TestSuite>, std::vector<FlakyReport>> sanity_check(
    const ProgramDescriptor& ground_truth_built, const std::vector<TestSuite>& suites,
    const SanityOptions& options) {
    std::vector<TestSuite> stable;
    std::vector<FlakyReport> reports;
    for (const auto& suite : suites) {
        auto [s, r] = sanity_check_suite(ground_truth_built, suite, options);
        stable.push_back(std::move(s));
        reports.push_back(std::move(r));
    }
    return {std::move(stable), std::move(reports)};
}

Json flaky_report_to_json(const std::vector<FlakyReport>& reports, const std::string& bug_id) {
    Json j;
    j["format"] = "rgt-flaky";
    j["bug_id"] = bug_id;
    Json runs = Json::array();
    for (const auto& r : reports) {
        Json rec;
        rec["generator_run"] = r.generator_run;
        rec["rounds_executed"] = r.rounds_executed;
        rec["wall_time_ms"] = r.wall_time.count();
        Json flaky = Json::array();
        for (const auto& f : r.flaky) {
            Json fr;
            fr["test_id"] = f.test_id;
            fr["round"] = f.round;
            fr["diagnostic"] = f.diagnostic;
            flaky.push_back(std::move(fr));
        }
        rec["flaky"] = std::move(flaky);
        runs.push_back(std::move(rec));
    }
    j["runs"] = std::move(runs);
    return j;
}

std::vector<FlakyReport> flaky_report_from_json(const Json& j) {
    std::vector<FlakyReport> reports;
    const std::string bug_id = j.at("bug_id").get<std::string>();
    for (const auto& rec : j.at("runs")) {
        FlakyReport r;
        r.bug_id = bug_id;
        r.generator_run = rec.at("generator_run").get<int>();
        r.rounds_executed = rec.at("rounds_executed").get<int>();
        r.wall_time = Millis{rec.at("wall_time_ms").get<std::int64_t>()};
        for (const auto& f : rec.at("flaky"))
            r.flaky.push_back({f.at("test_id").get<std::string>(), f.at("round").get<int>(),
                               f.at("diagnostic").get<std::string>()});
        reports.push_back(std::move(r));
    }
    return reports;
}

}  // namespace rgt
