#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "rv64um/benchgen.hpp"
#include "rv64um/cli.hpp"
#include "rv64um/harness.hpp"
#include "test_support.hpp"

using namespace rv64um;
using harness::time_process;
namespace fs = std::filesystem;

namespace {

fs::path scratch() {
    static const fs::path dir = [] {
        auto d = fs::temp_directory_path() / ("rv64um_cli_" + std::to_string(::getpid()));
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

fs::path save(const std::string& name, std::span<const std::byte> bytes) {
    const auto path = scratch() / name;
    std::ofstream(path, std::ios::binary).write(reinterpret_cast<const char*>(bytes.data()),
                                                static_cast<std::streamsize>(bytes.size()));
    return path;
}

harness::ProcessResult tool(std::vector<std::string> args) {
    args.insert(args.begin(), RV64UM_TOOL);
    return time_process(args);
}

// stderr is inherited by time_process, so capture it through a shell.
std::string tool_stderr(const std::string& args) {
    return time_process({"sh", "-c", std::string(RV64UM_TOOL) + " " + args + " 2>&1 >/dev/null"}).stdout_bytes;
}

}  // namespace

TEST_CASE("guest exit codes propagate") {
    using M = Mnemonic;
    for (int code = 0; code < 256; ++code) {
        auto elf = test::elf_from_words({test::enc(M::ADDI, 10, 0, 0, code),
                                         test::enc(M::ADDI, 17, 0, 0, 93), test::enc(M::ECALL, 0, 0, 0)});
        const auto path = save("exit.elf", elf);
        REQUIRE(tool({"run", path.string()}).exit_code == code);
    }
}

TEST_CASE("benchgen then run") {
    const auto out = scratch() / "rb0";
    auto gen = tool({"benchgen", "--count", "0", "--out", out.string()});
    CHECK(gen.exit_code == 0);
    CHECK(gen.stdout_bytes == bench::render_dump(bench::kDefaultInit));
    auto run = tool({"run", out.string()});
    CHECK(run.exit_code == 0);
    CHECK(run.stdout_bytes == gen.stdout_bytes);
    CHECK(run.stdout_bytes.rfind("t0=00000000008571d1\n", 0) == 0);

    auto oracle = tool({"oracle", "-n", "5000", "--scheme", "1,2,3", "--ops", "sll,add,sub", "--init", "1,2,3,4"});
    bench::SchemeParams s{1, 2, 3, {bench::Op::Sll, bench::Op::Add, bench::Op::Sub}};
    CHECK(oracle.stdout_bytes == bench::render_dump(bench::oracle_simulate({5000, {1, 2, 3, 4}, s})));
}

TEST_CASE("usage errors exit 2 with help") {
    CHECK(tool({}).exit_code == cli::kExitUsage);
    CHECK(tool({"run"}).exit_code == cli::kExitUsage);
    CHECK(tool({"frobnicate"}).exit_code == cli::kExitUsage);
    CHECK(tool({"oracle", "--ops", "add,add,sub"}).exit_code == cli::kExitUsage);
    CHECK(tool({"bench", "--bin", "/bin/true", "--qemu", "x", "--no-qemu"}).exit_code == cli::kExitUsage);
    CHECK(tool_stderr("run").find("--max-steps") != std::string::npos);
}

TEST_CASE("bad guests") {
    CHECK(tool({"run", (scratch() / "missing.elf").string()}).exit_code == cli::kExitNoInput);
    const std::string junk = "\x7f" "ELG not really an executable";
    const auto bad = save("bad.elf", std::as_bytes(std::span(junk)));
    CHECK(tool({"run", bad.string()}).exit_code == cli::kExitDataErr);
    CHECK(tool_stderr("run " + bad.string()).find("BadMagic") != std::string::npos);

    auto loop = save("loop.elf", test::elf_from_words({test::enc(Mnemonic::JAL, 0, 0, 0, 0)}));
    CHECK(tool({"run", "--max-steps", "50", loop.string()}).exit_code == cli::kExitGuestFault);
    auto ill = save("ill.elf", test::elf_from_words({0xffffffffu}));
    CHECK(tool({"run", ill.string()}).exit_code == cli::kExitGuestFault);
    CHECK(tool_stderr("run " + ill.string()).find("illegal") != std::string::npos);
}

TEST_CASE("help lists every flag") {
    const std::pair<const char*, std::vector<const char*>> expected[] = {
        {"run", {"--mem-size", "--unchecked", "--max-steps", "--trace", "--fd-passthrough", "--auxv-pagesz"}},
        {"benchgen", {"--count", "--init", "--scheme", "--ops", "--out"}},
        {"oracle", {"--count", "--init", "--scheme", "--ops"}},
        {"bench", {"--bin", "--qemu", "--no-qemu", "--runs", "--format", "--out"}},
    };
    const auto top = tool({"--help"});
    CHECK(top.exit_code == 0);
    for (const auto& [cmd, flags] : expected) {
        CHECK(top.stdout_bytes.find(cmd) != std::string::npos);
        const auto help = tool({cmd, "--help"});
        CHECK(help.exit_code == 0);
        for (const char* f : flags) {
            CAPTURE(cmd);
            CAPTURE(f);
            CHECK(help.stdout_bytes.find(f) != std::string::npos);
        }
    }
}

TEST_CASE("trace goes to stderr only") {
    const auto out = scratch() / "rb3";
    tool({"benchgen", "-n", "3", "-o", out.string()});
    auto plain = tool({"run", out.string()});
    auto traced = time_process({"sh", "-c", std::string(RV64UM_TOOL) + " run --trace " + out.string() + " 2>/dev/null"});
    CHECK(plain.stdout_bytes == traced.stdout_bytes);
    CHECK(tool_stderr("run --trace " + out.string()).find("ecall") != std::string::npos);
}

TEST_CASE("bench writes a report") {
    const auto bin = scratch() / "rb1k";
    tool({"benchgen", "-n", "1000", "-o", bin.string()});
    const auto report = scratch() / "report.csv";
    auto r = time_process({"sh", "-c", std::string(RV64UM_TOOL) + " bench --no-qemu --runs 2 --format csv --bin " +
                                           bin.string() + " --out " + report.string() + " 2>/dev/null"});
    CHECK(r.exit_code == 0);
    std::ifstream in(report);
    std::string text((std::istreambuf_iterator<char>(in)), {});
    auto parsed = harness::parse_report(text, harness::ReportFormat::Csv);
    REQUIRE(parsed.emulators.size() == 1);
    CHECK(parsed.emulators[0].runs.size() == 2);
    CHECK(parsed.emulators[0].runs[0].stdout_sha ==
          harness::sha256_hex(bench::render_dump(bench::oracle_simulate({1000, bench::kDefaultInit, {}}))));
}
