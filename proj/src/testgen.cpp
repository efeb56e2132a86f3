#include "rgt/testgen.hpp"

#include <set>

#include "rgt/diff.hpp"
#include "rgt/errors.hpp"
#include "rgt/rng.hpp"

namespace rgt {

namespace {
constexpr std::uint64_t kStallLimit = 4096;
}

std::uint64_t capture_seed(const std::string& bug_id, std::uint64_t seed, std::uint64_t index) {
    return mix64(mix64(fnv1a64(bug_id) ^ fnv1a64("capture") ^ seed) ^ index);
}

TestSuite generate_suite(const ProgramDescriptor& ground_truth_built, const InputSchema& schema,
                         const std::string& bug_id, std::uint64_t seed, int generator_run,
                         const GenOptions& options) {
    if (options.budget.count() <= 0) throw ConfigError("generation budget must be positive");

    TestSuite suite;
    suite.bug_id = bug_id;
    suite.seed = seed;
    suite.generator_run = generator_run;
    suite.budget = options.budget;
    suite.per_test_timeout = options.per_test_timeout;
    suite.boundary_bias = options.boundary_bias;
    suite.schema = schema;

    const auto start = Clock::now();
    const auto domain_size = schema.cardinality();

    SplitMix64 rng(seed);
    std::set<std::string> seen;
    std::uint64_t stall = 0, draw_index = 0;

    for (;;) {
        if (options.max_tests != 0 && suite.tests.size() >= options.max_tests) break;
        if (domain_size && seen.size() >= *domain_size) break;
        if (since(start) >= options.budget) break;
        if (stall >= kStallLimit) break;

        const Json input = schema.sample(rng, options.boundary_bias);
        if (!seen.insert(input.dump()).second) {
            ++stall;
            continue;
        }
        stall = 0;

        RunOptions run_opts;
        run_opts.timeout = options.per_test_timeout;
        run_opts.exec_seed = capture_seed(bug_id, seed, draw_index);
        const Outcome oracle = run_once(ground_truth_built, input, run_opts);
        if (oracle.kind == Outcome::Kind::Timeout || oracle.kind == Outcome::Kind::Error) {
            ++suite.dropped_capture_failures;
            ++draw_index;
            continue;
        }

        RgtTest test;
        test.test_id = bug_id + "-s" + std::to_string(seed) + "-d" + std::to_string(draw_index);
        test.input = input;
        test.oracle = oracle;
        test.seed = seed;
        test.generator_run = generator_run;
        suite.tests.push_back(std::move(test));
        ++draw_index;
    }

    suite.generation_wall = since(start);
    return suite;
}

std::vector<TestSuite> generate_campaign(const ProgramDescriptor& ground_truth_built,
                                         const InputSchema& schema, const std::string& bug_id,
                                         int n_runs, std::uint64_t base_seed,
                                         const GenOptions& options) {
    if (n_runs < 1) throw ConfigError("campaign needs at least one generation run");
    std::vector<TestSuite> suites;
    suites.reserve(static_cast<std::size_t>(n_runs));
    for (int run = 1; run <= n_runs; ++run)
        suites.push_back(generate_suite(ground_truth_built, schema, bug_id,
                                        base_seed + static_cast<std::uint64_t>(run), run,
                                        options));
    return suites;
}

std::string suite_to_jsonl(const TestSuite& suite) {
    Json header;
    header["format"] = "rgt-suite";
    header["tool_version"] = kToolVersion;
    header["bug_id"] = suite.bug_id;
    header["seed"] = suite.seed;
    header["generator_run"] = suite.generator_run;
    header["budget_ms"] = suite.budget.count();
    header["per_test_timeout_ms"] = suite.per_test_timeout.count();
    header["boundary_bias"] = suite.boundary_bias;
    header["schema"] = schema_to_json(suite.schema);
    header["dropped_capture_failures"] = suite.dropped_capture_failures;
    header["sanity_rounds"] = suite.sanity_rounds;

    std::string out = header.dump() + "\n";
    for (const auto& test : suite.tests) {
        Json rec;
        rec["test_id"] = test.test_id;
        rec["input"] = test.input;
        rec["oracle"] = outcome_to_json(test.oracle);
        rec["seed"] = test.seed;
        rec["generator_run"] = test.generator_run;
        out += rec.dump() + "\n";
    }
    return out;
}

TestSuite suite_from_jsonl(const std::string& content) {
    const FileLines lines = split_lines(content);
    if (lines.lines.empty()) throw Error("empty suite file");

    const Json header = Json::parse(lines.lines[0]);
    if (header.value("format", std::string{}) != "rgt-suite")
        throw Error("not a suite file (bad header)");

    TestSuite suite;
    suite.bug_id = header.at("bug_id").get<std::string>();
    suite.seed = header.at("seed").get<std::uint64_t>();
    suite.generator_run = header.at("generator_run").get<int>();
    suite.budget = Millis{header.at("budget_ms").get<std::int64_t>()};
    suite.per_test_timeout = Millis{header.at("per_test_timeout_ms").get<std::int64_t>()};
    suite.boundary_bias = header.at("boundary_bias").get<double>();
    suite.schema = schema_from_json(header.at("schema"));
    suite.dropped_capture_failures = header.at("dropped_capture_failures").get<std::uint64_t>();
    suite.sanity_rounds = header.at("sanity_rounds").get<int>();

    for (std::size_t i = 1; i < lines.lines.size(); ++i) {
        if (lines.lines[i].empty()) continue;
        const Json rec = Json::parse(lines.lines[i]);
        RgtTest test;
        test.test_id = rec.at("test_id").get<std::string>();
        test.input = rec.at("input");
        test.oracle = outcome_from_json(rec.at("oracle"));
        test.seed = rec.at("seed").get<std::uint64_t>();
        test.generator_run = rec.at("generator_run").get<int>();
        suite.tests.push_back(std::move(test));
    }
    return suite;
}

void write_suite(const TestSuite& suite, const fs::path& file) {
    write_file(file, suite_to_jsonl(suite));
}

TestSuite read_suite(const fs::path& file) { return suite_from_jsonl(read_file(file)); }

}  // namespace rgt
