#include <doctest.h>

#include "helpers/test_support.hpp"
#include "rgt/parallel.hpp"
#include "rgt/runner.hpp"
#include "rgt/util.hpp"

using namespace rgt;
using rgt_test::TempDir;
using rgt_test::toy_program;

namespace {

RunOptions opts(std::int64_t timeout_ms, std::uint64_t seed = 0) {
    RunOptions o;
    o.timeout = Millis{timeout_ms};
    o.exec_seed = seed;
    return o;
}

}  // namespace

TEST_CASE("echo adapter returns the input value") {
    const Outcome out = run_once(toy_program("echo"), Json(5), opts(5000));
    REQUIRE(out.kind == Outcome::Kind::Value);
    CHECK(out.value == Json(5));
}

TEST_CASE("structured inputs survive the wire") {
    Json input = Json::object();
    input["mode"] = "mul";
    input["flag"] = false;
    input["xs"] = Json::array({1, -2, 3});
    const Outcome out = run_once(toy_program("echo"), input, opts(5000));
    REQUIRE(out.kind == Outcome::Kind::Value);
    // The adapter may re-serialize object keys in a different order; that
    // must not read as a behavioral difference.
    CHECK(values_equal(out.value, input, 0.0));
}

TEST_CASE("exception replies carry type and site") {
    const Outcome out = run_once(toy_program("raise IllegalArgument solve"), Json(1), opts(5000));
    REQUIRE(out.kind == Outcome::Kind::Exception);
    CHECK(out.exception_type == "IllegalArgument");
    CHECK(out.exception_site == std::optional<std::string>("solve"));
}

TEST_CASE("an adapter sleeping past the deadline is killed as Timeout") {
    const Millis timeout{300};
    const Outcome out = run_once(toy_program("sleep 600"), Json(1), opts(timeout.count()));
    REQUIRE(out.kind == Outcome::Kind::Timeout);
    CHECK(out.wall_time >= timeout);
    CHECK(out.wall_time < 2 * timeout);  // scheduling slack bound
}

TEST_CASE("a crash without a reply is an Error, never an Exception") {
    const Outcome out = run_once(toy_program("crash"), Json(1), opts(5000));
    REQUIRE(out.kind == Outcome::Kind::Error);
    CHECK(out.diagnostic.find("exited with status 3") != std::string::npos);
}

TEST_CASE("stderr of a crashing adapter lands in the diagnostic") {
    const Outcome out = run_once(toy_program("stderrcrash"), Json(1), opts(5000));
    REQUIRE(out.kind == Outcome::Kind::Error);
    CHECK(out.diagnostic.find("boom: invalid state") != std::string::npos);
}

TEST_CASE("a malformed reply is an Error") {
    const Outcome out = run_once(toy_program("garbage"), Json(1), opts(5000));
    REQUIRE(out.kind == Outcome::Kind::Error);
    CHECK(out.diagnostic.find("malformed") != std::string::npos);
}

TEST_CASE("a well-formed reply wins even if the adapter lingers") {
    const auto start = Clock::now();
    const Outcome out = run_once(toy_program("replyhang"), Json(42), opts(8000));
    REQUIRE(out.kind == Outcome::Kind::Value);
    CHECK(out.value == Json(42));
    CHECK(since(start) < Millis{2000});  // must not wait out the full sleep
}

TEST_CASE("missing run command is an Error") {
    ProgramDescriptor prog;
    prog.working_dir = ".";
    CHECK(run_once(prog, Json(1), opts(1000)).kind == Outcome::Kind::Error);
}

TEST_CASE("deterministic adapters reproduce bit-exactly") {
    const auto prog = toy_program("abs");
    const Outcome first = run_once(prog, Json(-3), opts(5000));
    REQUIRE(first.kind == Outcome::Kind::Value);
    CHECK(first.value == Json(3));
    for (int i = 0; i < 5; ++i) {
        const Outcome again = run_once(prog, Json(-3), opts(5000));
        REQUIRE(again.kind == Outcome::Kind::Value);
        CHECK(again.value == first.value);
    }
}

TEST_CASE("RGT_TEST_SEED reaches the adapter") {
    const Outcome out = run_once(toy_program("seedecho"), Json(0), opts(5000, 987654321));
    REQUIRE(out.kind == Outcome::Kind::Value);
    CHECK(out.value == Json("987654321"));
}

TEST_CASE("the exec seed drives the coin adapter deterministically") {
    const Outcome a1 = run_once(toy_program("coin"), Json(0), opts(5000, 11));
    const Outcome a2 = run_once(toy_program("coin"), Json(0), opts(5000, 11));
    REQUIRE(a1.kind == Outcome::Kind::Value);
    CHECK(a1.value == a2.value);
}

TEST_CASE("build runs once per content digest") {
    TempDir dir("build-cache");
    write_file(dir.path() / "src.txt", "v1\n");

    ProgramDescriptor prog;
    prog.build_command = "echo built >> build.log";
    prog.run_command = "true";
    prog.working_dir = dir.path();

    BuildCache cache;
    const std::string digest = digest_tree(dir.path());
    const BuildResult first = cache.build(prog, digest, Millis{30000});
    REQUIRE(first.ok);
    CHECK(first.built_dir == dir.path());
    const BuildResult second = cache.build(prog, digest, Millis{30000});
    REQUIRE(second.ok);

    CHECK(read_file(dir.path() / "build.log") == "built\n");  // exactly one build
}

TEST_CASE("a failing build captures its log") {
    TempDir dir("build-fail");
    ProgramDescriptor prog;
    prog.build_command = "echo compile error here; exit 1";
    prog.run_command = "true";
    prog.working_dir = dir.path();

    const BuildResult result = run_build(prog, Millis{30000});
    CHECK(!result.ok);
    CHECK(result.log.find("compile error here") != std::string::npos);
}

TEST_CASE("concurrent runs in distinct directories stay isolated") {
    TempDir a("iso-a"), b("iso-b");
    write_file(a.path() / "tag.txt", "A\n");
    write_file(b.path() / "tag.txt", "B\n");

    ProgramDescriptor pa, pb;
    pa.run_command = pb.run_command = "read line; printf '{\"status\":\"value\",\"value\":\"'$(cat tag.txt)'\"}\\n'";
    pa.working_dir = a.path();
    pb.working_dir = b.path();

    std::vector<Outcome> outs(8);
    parallel_for(8, 4, [&](std::size_t i) {
        outs[i] = run_once(i % 2 == 0 ? pa : pb, Json(0), opts(5000));
    });
    for (std::size_t i = 0; i < outs.size(); ++i) {
        REQUIRE(outs[i].kind == Outcome::Kind::Value);
        CHECK(outs[i].value == Json(i % 2 == 0 ? "A" : "B"));
    }
}
