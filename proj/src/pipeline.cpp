#include "rgt/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <thread>

#include "rgt/analytics.hpp"
#include "rgt/assess.hpp"
#include "rgt/corpus.hpp"
#include "rgt/errors.hpp"
#include "rgt/parallel.hpp"
#include "rgt/sanity.hpp"
#include "rgt/testgen.hpp"

namespace rgt {

Json config_to_json(const CampaignConfig& c) {
    Json j;
    j["corpus"] = c.corpus_root.string();
    j["out"] = c.out_dir.string();
    j["runs"] = c.n_runs;
    j["base_seed"] = c.base_seed;
    j["budget_ms"] = c.budget.count();
    j["per_test_timeout_ms"] = c.per_test_timeout.count();
    j["sanity_rounds"] = c.sanity_rounds;
    j["workers"] = c.workers;
    j["profile"] = c.profile;
    j["epsilon"] = c.epsilon;
    j["boundary_bias"] = c.boundary_bias;
    j["bugs"] = c.bugs;
    j["tradeoff_groups"] = c.tradeoff_groups;
    j["tradeoff_seed"] = c.tradeoff_seed;
    j["adjudication"] = c.adjudication_file.string();
    return j;
}

CampaignConfig config_from_json(const Json& j) {
    CampaignConfig c;
    if (j.contains("corpus")) c.corpus_root = j.at("corpus").get<std::string>();
    if (j.contains("out")) c.out_dir = j.at("out").get<std::string>();
    if (j.contains("runs")) c.n_runs = j.at("runs").get<int>();
    if (j.contains("base_seed")) c.base_seed = j.at("base_seed").get<std::uint64_t>();
    if (j.contains("budget_ms")) c.budget = Millis{j.at("budget_ms").get<std::int64_t>()};
    if (j.contains("per_test_timeout_ms"))
        c.per_test_timeout = Millis{j.at("per_test_timeout_ms").get<std::int64_t>()};
    if (j.contains("sanity_rounds")) c.sanity_rounds = j.at("sanity_rounds").get<int>();
    if (j.contains("workers")) c.workers = j.at("workers").get<unsigned>();
    if (j.contains("profile")) c.profile = j.at("profile").get<std::string>();
    if (j.contains("epsilon")) c.epsilon = j.at("epsilon").get<double>();
    if (j.contains("boundary_bias")) c.boundary_bias = j.at("boundary_bias").get<double>();
    if (j.contains("bugs")) c.bugs = j.at("bugs").get<std::vector<std::string>>();
    if (j.contains("tradeoff_groups")) c.tradeoff_groups = j.at("tradeoff_groups").get<long>();
    if (j.contains("tradeoff_seed"))
        c.tradeoff_seed = j.at("tradeoff_seed").get<std::uint64_t>();
    if (j.contains("adjudication"))
        c.adjudication_file = j.at("adjudication").get<std::string>();
    return c;
}

unsigned effective_workers(const CampaignConfig& config) {
    if (config.workers != 0) return config.workers;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 4 : hw;
}

namespace {

std::string run_file_name(int run) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "run%03d.jsonl", run);
    return buf;
}

LoadOptions loader_options(const CampaignConfig& config, bool gate_patches, BuildCache* cache) {
    LoadOptions opts;
    opts.work_dir = config.out_dir / "work";
    opts.gate_patches = gate_patches;
    opts.per_test_timeout = config.per_test_timeout;
    opts.bug_filter = config.bugs;
    opts.workers = effective_workers(config);
    opts.cache = cache;
    return opts;
}

/// Builds the ground truth of `bug`; on failure appends a per-bug error.
bool build_ground_truth(const BugEntry& bug, BuildCache& cache, StageStatus& status,
                        ProgramDescriptor& out) {
    const ProgramDescriptor prog = descriptor_for(bug.spec, bug.ground_truth.root);
    const BuildResult built = cache.build(prog, bug.ground_truth.content_digest, Millis{120000});
    if (!built.ok) {
        status.ok = false;
        status.errors.push_back("ground truth of " + bug.bug_id +
                                " failed to build: " + built.log.substr(0, 300));
        return false;
    }
    out = descriptor_for(bug.spec, built.built_dir);
    return true;
}

std::vector<fs::path> suite_files_in(const fs::path& dir) {
    std::vector<fs::path> files;
    if (!fs::is_directory(dir)) return files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (entry.is_regular_file() && starts_with(name, "run") &&
            name.size() > 6 && name.substr(name.size() - 6) == ".jsonl")
            files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    return files;
}

}  // namespace

StageStatus cmd_generate(const CampaignConfig& config) {
    StageStatus status;
    if (config.n_runs < 1) throw ConfigError("runs must be >= 1");

    BuildCache cache;
    const CorpusManifest manifest =
        load_corpus(config.corpus_root, loader_options(config, false, &cache));

    struct BugPlan {
        const BugEntry* bug = nullptr;
        ProgramDescriptor gt;
    };
    std::vector<BugPlan> plans;
    for (const auto& [bug_id, bug] : manifest.bugs) {
        BugPlan plan;
        plan.bug = &bug;
        if (build_ground_truth(bug, cache, status, plan.gt)) plans.push_back(std::move(plan));
    }

    GenOptions gen;
    gen.budget = config.budget;
    gen.per_test_timeout = config.per_test_timeout;
    gen.boundary_bias = config.boundary_bias;

    struct Task {
        std::size_t plan = 0;
        int run = 1;
    };
    std::vector<Task> tasks;
    for (std::size_t p = 0; p < plans.size(); ++p)
        for (int run = 1; run <= config.n_runs; ++run) tasks.push_back({p, run});

    std::vector<TestSuite> suites(tasks.size());
    parallel_for(tasks.size(), effective_workers(config), [&](std::size_t i) {
        const Task& t = tasks[i];
        const BugPlan& plan = plans[t.plan];
        suites[i] = generate_suite(plan.gt, plan.bug->spec.schema, plan.bug->bug_id,
                                   config.base_seed + static_cast<std::uint64_t>(t.run), t.run,
                                   gen);
    });

    std::map<std::string, Json> timing_by_bug;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        const TestSuite& suite = suites[i];
        write_suite(suite, config.out_dir / "suites" / suite.bug_id /
                               run_file_name(suite.generator_run));
        timing_by_bug[suite.bug_id]["generation_wall_ms"][std::to_string(suite.generator_run)] =
            suite.generation_wall.count();
        if (suite.tests.empty())
            status.warnings.push_back("suite " + suite.bug_id + "/run " +
                                      std::to_string(suite.generator_run) +
                                      " is empty (budget too small?)");
    }
    for (const auto& [bug_id, timing] : timing_by_bug)
        write_file(config.out_dir / "suites" / bug_id / "timing.json", timing.dump(2) + "\n");
    return status;
}

StageStatus cmd_sanity(const CampaignConfig& config) {
    StageStatus status;
    BuildCache cache;
    const CorpusManifest manifest =
        load_corpus(config.corpus_root, loader_options(config, false, &cache));

    SanityOptions sanity_opts;
    sanity_opts.rounds = config.sanity_rounds;
    sanity_opts.per_test_timeout = config.per_test_timeout;
    sanity_opts.workers = 1;  // parallelism lives at the (bug, suite) grid below

    struct Task {
        const BugEntry* bug = nullptr;
        ProgramDescriptor gt;
        fs::path file;
    };
    std::vector<Task> tasks;
    for (const auto& [bug_id, bug] : manifest.bugs) {
        const auto files = suite_files_in(config.out_dir / "suites" / bug_id);
        if (files.empty()) {
            status.ok = false;
            status.errors.push_back("no suites found for " + bug_id + "; run generate first");
            continue;
        }
        ProgramDescriptor gt;
        if (!build_ground_truth(bug, cache, status, gt)) continue;
        for (const auto& f : files) tasks.push_back({&bug, gt, f});
    }

    std::vector<std::pair<TestSuite, FlakyReport>> outputs(tasks.size());
    parallel_for(tasks.size(), effective_workers(config), [&](std::size_t i) {
        const TestSuite suite = read_suite(tasks[i].file);
        outputs[i] = sanity_check_suite(tasks[i].gt, suite, sanity_opts);
    });

    std::map<std::string, std::vector<FlakyReport>> reports_by_bug;
    std::map<std::string, Millis> wall_by_bug;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        const TestSuite& stable = outputs[i].first;
        write_suite(stable, config.out_dir / "stable" / stable.bug_id /
                                run_file_name(stable.generator_run));
        reports_by_bug[stable.bug_id].push_back(outputs[i].second);
        wall_by_bug[stable.bug_id] += outputs[i].second.wall_time;
    }
    for (auto& [bug_id, reports] : reports_by_bug) {
        std::sort(reports.begin(), reports.end(),
                  [](const FlakyReport& a, const FlakyReport& b) {
                      return a.generator_run < b.generator_run;
                  });
        write_file(config.out_dir / "stable" / bug_id / "flaky.json",
                   flaky_report_to_json(reports, bug_id).dump(2) + "\n");
        Json timing;
        timing["sanity_wall_ms"] = wall_by_bug[bug_id].count();
        write_file(config.out_dir / "stable" / bug_id / "timing.json", timing.dump(2) + "\n");
    }
    return status;
}

namespace {

Millis read_timing_sum(const fs::path& file, const std::string& key, bool per_run) {
    if (!fs::exists(file)) return Millis{0};
    const Json j = Json::parse(read_file(file));
    if (!j.contains(key)) return Millis{0};
    if (!per_run) return Millis{j.at(key).get<std::int64_t>()};
    Millis total{0};
    for (const auto& [run, ms] : j.at(key).items()) total += Millis{ms.get<std::int64_t>()};
    return total;
}

}  // namespace

StageStatus cmd_assess(const CampaignConfig& config) {
    StageStatus status;
    BuildCache cache;
    const CorpusManifest manifest =
        load_corpus(config.corpus_root, loader_options(config, true, &cache));

    std::map<std::string, std::vector<TestSuite>> stable;
    Millis tcgen{0}, sc{0};
    for (const auto& [bug_id, bug] : manifest.bugs) {
        for (const auto& f : suite_files_in(config.out_dir / "stable" / bug_id)) {
            TestSuite suite = read_suite(f);
            if (suite.sanity_rounds <= 0) {
                status.warnings.push_back("suite " + f.string() + " never passed sanity");
                continue;
            }
            stable[bug_id].push_back(std::move(suite));
        }
        tcgen += read_timing_sum(config.out_dir / "suites" / bug_id / "timing.json",
                                 "generation_wall_ms", true);
        sc += read_timing_sum(config.out_dir / "stable" / bug_id / "timing.json",
                              "sanity_wall_ms", false);
    }

    CorpusAssessOptions opts;
    opts.per_patch.per_test_timeout = config.per_test_timeout;
    opts.per_patch.active = ActiveCategories::profile(config.profile);
    opts.per_patch.epsilon = config.epsilon;
    opts.per_patch.workers = effective_workers(config);
    opts.cache = &cache;
    opts.tcgen = tcgen;
    opts.sc = sc;

    CampaignReport report = assess_corpus(manifest, stable, opts);
    report.config_snapshot = config_to_json(config);

    write_file(config.out_dir / "report" / "campaign.json",
               report_to_json(report).dump(2) + "\n");
    write_file(config.out_dir / "report" / "campaign.csv", report_to_csv(report));
    write_file(config.out_dir / "report" / "timing.json",
               timing_to_json(report.timing).dump(2) + "\n");

    for (const auto& u : report.unassessed) {
        status.ok = false;
        status.errors.push_back("unassessed: " + render_patch_name(u.patch) + " (" + u.reason +
                                ")");
    }
    return status;
}

StageStatus cmd_report(const CampaignConfig& config) {
    StageStatus status;
    const fs::path report_file = config.out_dir / "report" / "campaign.json";
    if (!fs::exists(report_file))
        throw ConfigError("no campaign report at " + report_file.string() +
                          "; run assess first");
    const CampaignReport report = report_from_json(Json::parse(read_file(report_file)));

    Adjudication adjudication;
    bool have_adjudication = false;
    if (!config.adjudication_file.empty()) {
        if (fs::exists(config.adjudication_file)) {
            adjudication = load_adjudication(config.adjudication_file);
            have_adjudication = true;
        } else {
            status.warnings.push_back("adjudication file missing: " +
                                      config.adjudication_file.string() +
                                      "; flagged patches stay unadjudicated");
        }
    }

    const EffectivenessSummary summary =
        summarize(report, have_adjudication ? &adjudication : nullptr);
    write_file(config.out_dir / "report" / "summary.json",
               summary_to_json(summary).dump(2) + "\n");
    write_file(config.out_dir / "report" / "summary.csv", summary_to_csv(summary));
    write_file(config.out_dir / "report" / "timing.json",
               timing_to_json(report.timing).dump(2) + "\n");

    try {
        const TradeoffCurve curve =
            tradeoff_curve(detection_matrix(report), config.tradeoff_groups, config.n_runs,
                           config.tradeoff_seed);
        write_file(config.out_dir / "report" / "tradeoff.json",
                   tradeoff_to_json(curve).dump(2) + "\n");
        write_file(config.out_dir / "report" / "tradeoff.csv", tradeoff_to_csv(curve));
    } catch (const InsufficientRunsError& e) {
        Json skipped;
        skipped["skipped"] = e.what();
        write_file(config.out_dir / "report" / "tradeoff.json", skipped.dump(2) + "\n");
        status.warnings.push_back(std::string("trade-off curve skipped: ") + e.what());
    }
    return status;
}

}  // namespace rgt
