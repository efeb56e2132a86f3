#pragma once

#include <cstdint>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "rgt/json.hpp"
#include "rgt/outcome.hpp"
#include "rgt/util.hpp"

namespace rgt {

/// How to build and run one program under test.
///
/// run_command reads exactly one line `{"input": <value>}` on stdin and
/// writes exactly one line on stdout, either
///   {"status":"value","value":<v>}
/// or
///   {"status":"exception","type":"<t>","site":"<s>"}
/// Anything else (no reply, malformed reply, crash) is an Error outcome.
/// The exit code is ignored whenever a well-formed reply exists.
struct ProgramDescriptor {
    std::optional<std::string> build_command;
    std::string run_command;
    fs::path working_dir;
    std::map<std::string, std::string> env;
};

struct RunOptions {
    Millis timeout{300000};
    // Exported to the adapter as RGT_TEST_SEED; a pure function of the test
    // context (never of scheduling) so nondeterministic fixtures can be
    // reproduced exactly.
    std::uint64_t exec_seed = 0;
};

/// Executes the program on one input with a hard deadline. The whole child
/// process group is killed at the deadline, children included. Never
/// throws for adapter misbehavior; that becomes Kind::Error.
Outcome run_once(const ProgramDescriptor& prog, const Json& input, const RunOptions& opts);

struct BuildResult {
    bool ok = false;
    std::string log;
    // Directory holding the built artifact. Content-identical trees share
    // one build; callers must run from here rather than their own copy.
    fs::path built_dir;
};

/// Deduplicates builds by source-tree content digest. The first caller for
/// a digest performs the build; concurrent callers for the same digest wait
/// on its result.
class BuildCache {
public:
    BuildResult build(const ProgramDescriptor& prog, const std::string& tree_digest,
                      Millis timeout);

private:
    std::mutex mutex_;
    std::map<std::string, std::shared_future<BuildResult>> builds_;
};

/// One-off build without caching. Runs build_command in working_dir and
/// captures stdout+stderr into the log.
BuildResult run_build(const ProgramDescriptor& prog, Millis timeout);

}  // namespace rgt
