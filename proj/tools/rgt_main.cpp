#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <string>

#include "rgt/errors.hpp"
#include "rgt/pipeline.hpp"

namespace {

struct Flags {
    std::string config_file;
    std::string corpus, out, profile, adjudication;
    int runs = -1, sanity_rounds = -1;
    long long base_seed = -1, budget_ms = -1, timeout_ms = -1, tradeoff_groups = -1,
              tradeoff_seed = -1;
    int workers = -1;
    double epsilon = -1.0, boundary_bias = -1.0;
    std::vector<std::string> bugs;
};

void add_common_flags(CLI::App* cmd, Flags& flags) {
    cmd->add_option("--config", flags.config_file, "JSON config file");
    cmd->add_option("--corpus", flags.corpus, "corpus root directory");
    cmd->add_option("--out", flags.out, "output directory");
    cmd->add_option("--runs", flags.runs, "number of generation runs");
    cmd->add_option("--base-seed", flags.base_seed, "base seed; run i uses base+i");
    cmd->add_option("--budget-ms", flags.budget_ms, "generation budget per run");
    cmd->add_option("--timeout-ms", flags.timeout_ms, "per-test execution timeout");
    cmd->add_option("--sanity-rounds", flags.sanity_rounds, "consecutive sanity rounds");
    cmd->add_option("--workers", flags.workers, "worker pool size (0 = auto)");
    cmd->add_option("--profile", flags.profile,
                    "category profile: paper-faithful | strict-false-positive");
    cmd->add_option("--epsilon", flags.epsilon, "assertion tolerance (0 = bit-exact)");
    cmd->add_option("--boundary-bias", flags.boundary_bias,
                    "probability of drawing a boundary input");
    cmd->add_option("--bugs", flags.bugs, "restrict to these bug ids")->delimiter(',');
    cmd->add_option("--adjudication", flags.adjudication,
                    "adjudication file for flagged-correct patches");
    cmd->add_option("--tradeoff-groups", flags.tradeoff_groups,
                    "random groups for the trade-off curve");
    cmd->add_option("--tradeoff-seed", flags.tradeoff_seed, "seed for the trade-off sampler");
}

// Precedence: flags > RGT_WORKERS > config file > defaults.
rgt::CampaignConfig resolve_config(const CLI::App* cmd, const Flags& flags) {
    rgt::CampaignConfig config;
    if (!flags.config_file.empty())
        config = rgt::config_from_json(rgt::Json::parse(rgt::read_file(flags.config_file)));

    if (const char* env = std::getenv("RGT_WORKERS"))
        config.workers = static_cast<unsigned>(std::strtoul(env, nullptr, 10));

    if (cmd->count("--corpus")) config.corpus_root = flags.corpus;
    if (cmd->count("--out")) config.out_dir = flags.out;
    if (cmd->count("--runs")) config.n_runs = flags.runs;
    if (cmd->count("--base-seed")) config.base_seed = static_cast<std::uint64_t>(flags.base_seed);
    if (cmd->count("--budget-ms")) config.budget = rgt::Millis{flags.budget_ms};
    if (cmd->count("--timeout-ms")) config.per_test_timeout = rgt::Millis{flags.timeout_ms};
    if (cmd->count("--sanity-rounds")) config.sanity_rounds = flags.sanity_rounds;
    if (cmd->count("--workers")) config.workers = static_cast<unsigned>(flags.workers);
    if (cmd->count("--profile")) config.profile = flags.profile;
    if (cmd->count("--epsilon")) config.epsilon = flags.epsilon;
    if (cmd->count("--boundary-bias")) config.boundary_bias = flags.boundary_bias;
    if (cmd->count("--bugs")) config.bugs = flags.bugs;
    if (cmd->count("--adjudication")) config.adjudication_file = flags.adjudication;
    if (cmd->count("--tradeoff-groups")) config.tradeoff_groups = flags.tradeoff_groups;
    if (cmd->count("--tradeoff-seed"))
        config.tradeoff_seed = static_cast<std::uint64_t>(flags.tradeoff_seed);
    return config;
}

int run_stage(const char* name, rgt::StageStatus (*stage)(const rgt::CampaignConfig&),
              const rgt::CampaignConfig& config) {
    const rgt::StageStatus status = stage(config);
    for (const auto& w : status.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
    for (const auto& e : status.errors) std::fprintf(stderr, "error: %s\n", e.c_str());
    std::printf("%s: %s\n", name, status.ok ? "ok" : "completed with errors");
    return status.ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Assesses candidate program patches against a ground truth with "
                 "randomly generated regression tests"};
    app.require_subcommand(1);

    Flags flags;
    CLI::App* generate = app.add_subcommand("generate", "generate test suites with oracles");
    CLI::App* sanity = app.add_subcommand("sanity", "quarantine flaky tests");
    CLI::App* assess = app.add_subcommand("assess", "run stable suites against every patch");
    CLI::App* report = app.add_subcommand("report", "effectiveness, timing, trade-off analytics");
    for (CLI::App* cmd : {generate, sanity, assess, report}) add_common_flags(cmd, flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (generate->parsed()) {
            const auto config = resolve_config(generate, flags);
            if (config.n_runs < 1) {
                std::fprintf(stderr, "error: --runs must be >= 1\n");
                return 2;
            }
            return run_stage("generate", rgt::cmd_generate, config);
        }
        if (sanity->parsed()) return run_stage("sanity", rgt::cmd_sanity, resolve_config(sanity, flags));
        if (assess->parsed()) return run_stage("assess", rgt::cmd_assess, resolve_config(assess, flags));
        if (report->parsed()) return run_stage("report", rgt::cmd_report, resolve_config(report, flags));
    } catch (const rgt::ConfigError& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return 2;
    } catch (const rgt::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;
}
