#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rv64um::harness {

class SpawnError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ReportError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ProcessResult {
    double real_ms = 0;
    double user_ms = 0;
    double sys_ms = 0;
    std::string stdout_bytes;
    // Exit status, or 128 + signal number when the child was killed.
    int exit_code = 0;
};

// Spawns argv[0] (PATH lookup applies), captures stdout completely and
// measures wall-clock time plus the child's user/system CPU time from its
// resource usage. stderr is inherited. Throws SpawnError if the program
// cannot be started.
ProcessResult time_process(const std::vector<std::string>& argv);

std::string sha256_hex(std::string_view data);

// Median of a non-empty sample (mean of the two middle values for even n).
double median(std::vector<double> values);

struct RunSample {
    int run = 0;
    double real_ms = 0;
    double user_ms = 0;
    double sys_ms = 0;
    int exit = 0;
    std::string stdout_sha;
    friend bool operator==(const RunSample&, const RunSample&) = default;
};

struct EmulatorRuns {
    std::string emulator;
    std::vector<RunSample> runs;

    double median_real_ms() const;
    double median_user_ms() const;
    double median_sys_ms() const;
    friend bool operator==(const EmulatorRuns&, const EmulatorRuns&) = default;
};

struct BenchReport {
    std::vector<EmulatorRuns> emulators;
    // Baseline median user time / subject median user time.
    std::optional<double> speedup;

    const EmulatorRuns* find(std::string_view name) const;
    friend bool operator==(const BenchReport&, const BenchReport&) = default;
};

// Defined only when both medians exist and the subject's is positive.
std::optional<double> compute_speedup(double baseline_user_ms, double subject_user_ms);

enum class ReportFormat { Json, Csv };

std::optional<ReportFormat> parse_format(std::string_view name);

// Columns: emulator, run, real_ms, user_ms, sys_ms, exit, stdout_sha. CSV adds
// a speedup column and one run="median" row per emulator; JSON has a
// "summary" object holding medians and speedup. Throws ReportError for a
// report without runs.
std::string write_report(const BenchReport& report, ReportFormat format);
BenchReport parse_report(std::string_view text, ReportFormat format);
void write_report_file(const BenchReport& report, ReportFormat format, const std::filesystem::path& path);

struct EmulatorCommand {
    std::string name;
    std::vector<std::string> argv_prefix;  // the guest binary path is appended
    bool baseline = false;                 // divides into the speedup
};

struct DifferentialOptions {
    int runs = 5;
    // Optional reference the very first output must also match.
    std::optional<std::string> expected_stdout;
    std::optional<std::string> expected_sha;
};

struct Mismatch {
    std::string what;
    std::string emulator;
    int run = 0;
    std::optional<std::size_t> offset;  // first differing byte, when bytes are known
};

struct DifferentialResult {
    bool pass = false;
    BenchReport report;
    std::optional<Mismatch> mismatch;
    std::string first_stdout;
};

// Runs every emulator `runs` times, sequentially, on the same binary and
// requires identical stdout bytes and exit codes across all of them.
DifferentialResult run_differential(const std::filesystem::path& binary,
                                    const std::vector<EmulatorCommand>& emulators,
                                    const DifferentialOptions& options = {});

// Offset of the first byte where `a` and `b` differ (length mismatch counts
// at the shorter length), or nullopt when equal.
std::optional<std::size_t> first_difference(std::string_view a, std::string_view b);

inline constexpr std::string_view kQemuEnvVar = "RV64UM_QEMU";

// --qemu flag, then $RV64UM_QEMU, then `qemu-riscv64` on PATH.
std::optional<std::filesystem::path> find_qemu(const std::optional<std::filesystem::path>& flag);

}  // namespace rv64um::harness
