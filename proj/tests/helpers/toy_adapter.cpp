// Multi-mode test adapter speaking the harness line protocol. The mode is
// argv[1]; every mode reads one {"input": X} line and replies (or
// misbehaves) accordingly.

#include <json.hpp>

#include <chrono>
#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <iostream>
#include <string>
#include <thread>

using Json = nlohmann::json;

namespace {

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t env_seed() {
    const char* s = std::getenv("RGT_TEST_SEED");
    return s ? std::strtoull(s, nullptr, 10) : 0;
}

void reply_value(const Json& v) {
    Json r;
    r["status"] = "value";
    r["value"] = v;
    std::puts(r.dump().c_str());
    std::fflush(stdout);
}

void reply_exception(const char* type, const char* site) {
    Json r;
    r["status"] = "exception";
    r["type"] = type;
    if (site) r["site"] = site;
    std::puts(r.dump().c_str());
    std::fflush(stdout);
}

}  // namespace

int main(int argc, char** argv) {
    const std::string mode = argc > 1 ? argv[1] : "echo";

    std::string line;
    if (!std::getline(std::cin, line)) return 1;
    Json record = Json::parse(line, nullptr, false);
    if (record.is_discarded() || !record.contains("input")) return 1;
    const Json input = record["input"];

    if (mode == "echo") {
        reply_value(input);
    } else if (mode == "abs") {
        const std::int64_t x = input.get<std::int64_t>();
        reply_value(x < 0 ? -x : x);
    } else if (mode == "ident") {
        reply_value(input.get<std::int64_t>());
    } else if (mode == "abs_raise0") {
        const std::int64_t x = input.get<std::int64_t>();
        if (x == 0)
            reply_exception("ZeroInput", "guard");
        else
            reply_value(x < 0 ? -x : x);
    } else if (mode == "raise") {
        reply_exception(argc > 2 ? argv[2] : "IllegalArgument", argc > 3 ? argv[3] : "solve");
    } else if (mode == "sleep") {
        const long ms = argc > 2 ? std::strtol(argv[2], nullptr, 10) : 2000;
        std::this_thread::sleep_for(std::chrono::milliseconds(ms));
        reply_value(1);
    } else if (mode == "crash") {
        return 3;
    } else if (mode == "crash_on") {
        const std::int64_t trigger = argc > 2 ? std::strtoll(argv[2], nullptr, 10) : 0;
        const std::int64_t x = input.get<std::int64_t>();
        if (x == trigger) return 4;
        reply_value(x);
    } else if (mode == "stderrcrash") {
        std::fputs("boom: invalid state\n", stderr);
        return 2;
    } else if (mode == "garbage") {
        std::puts("this is not a protocol reply");
    } else if (mode == "replyhang") {
        reply_value(input);
        std::this_thread::sleep_for(std::chrono::seconds(10));
    } else if (mode == "seedecho") {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%" PRIu64, env_seed());
        reply_value(std::string(buf));
    } else if (mode == "coin") {
        reply_value(static_cast<std::int64_t>(splitmix(env_seed()) & 1));
    } else if (mode == "coin_on") {
        // Flaky only for the trigger value; everything else is the identity.
        const std::int64_t trigger = argc > 2 ? std::strtoll(argv[2], nullptr, 10) : 2;
        const std::int64_t x = input.get<std::int64_t>();
        if (x == trigger)
            reply_value(static_cast<std::int64_t>(splitmix(env_seed()) & 1));
        else
            reply_value(x);
    } else if (mode == "clock_on") {
        // Time-dependent for the trigger values; identity otherwise.
        const std::int64_t x = input.get<std::int64_t>();
        bool trigger = false;
        for (int i = 2; i < argc; ++i)
            if (x == std::strtoll(argv[i], nullptr, 10)) trigger = true;
        if (trigger)
            reply_value(static_cast<std::int64_t>(
                std::chrono::steady_clock::now().time_since_epoch().count()));
        else
            reply_value(x);
    } else {
        return 1;
    }
    return 0;
}
