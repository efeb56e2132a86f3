#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rgt/json.hpp"
#include "rgt/util.hpp"

namespace rgt {

/// Campaign configuration. The defaults are the assessment parameters the
/// pipeline is calibrated for: 30 generation runs, a 100 s search budget
/// per run, a 300 s per-test timeout, and 3 sanity rounds.
struct CampaignConfig {
    fs::path corpus_root = "corpus";
    fs::path out_dir = "out";
    int n_runs = 30;
    std::uint64_t base_seed = 1;
    Millis budget{100000};
    Millis per_test_timeout{300000};
    int sanity_rounds = 3;
    unsigned workers = 0;  // 0 = hardware concurrency
    std::string profile = "paper-faithful";
    double epsilon = 0.0;          // assertion tolerance; 0 = bit-exact
    double boundary_bias = 0.1;
    std::vector<std::string> bugs;  // empty = whole corpus
    long tradeoff_groups = 1000;
    std::uint64_t tradeoff_seed = 1;
    fs::path adjudication_file;     // optional
};

Json config_to_json(const CampaignConfig& config);
CampaignConfig config_from_json(const Json& j);
unsigned effective_workers(const CampaignConfig& config);

/// Result of one pipeline stage. Errors are campaign-level problems (a bug
/// that failed to build, patches left unassessed); warnings are survivable
/// oddities (an empty suite).
struct StageStatus {
    bool ok = true;
    std::vector<std::string> errors;
    std::vector<std::string> warnings;
};

// Stages communicate only through files under config.out_dir:
//   suites/<bug>/run<NNN>.jsonl      raw suites (no wall-clock content)
//   suites/<bug>/timing.json         per-run generation wall time
//   stable/<bug>/run<NNN>.jsonl      sanity-checked suites
//   stable/<bug>/flaky.json          quarantine findings
//   stable/<bug>/timing.json         sanity wall time
//   report/campaign.{json,csv}       verdicts
//   report/timing.json               TCGen / SC / EXEC breakdown
//   report/summary.{json,csv}        effectiveness summary
//   report/tradeoff.{json,csv}       generation-count trade-off curve
StageStatus cmd_generate(const CampaignConfig& config);
StageStatus cmd_sanity(const CampaignConfig& config);
StageStatus cmd_assess(const CampaignConfig& config);
StageStatus cmd_report(const CampaignConfig& config);

}  // namespace rgt
