#include "rv64um/harness.hpp"

#include <fcntl.h>
#include <openssl/evp.h>
#include <spawn.h>
#include <sys/resource.h>
#include <sys/wait.h>
#include <unistd.h>

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

extern char** environ;

namespace rv64um::harness {

namespace {

double to_ms(const timeval& tv) {
    return static_cast<double>(tv.tv_sec) * 1000.0 + static_cast<double>(tv.tv_usec) / 1000.0;
}

class Fd {
public:
    explicit Fd(int fd = -1) : fd_(fd) {}
    Fd(const Fd&) = delete;
    Fd& operator=(const Fd&) = delete;
    ~Fd() { reset(); }
    int get() const { return fd_; }
    void reset() {
        if (fd_ >= 0) ::close(fd_);
        fd_ = -1;
    }

private:
    int fd_;
};

std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            cells.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += ch;
        }
    }
    cells.push_back(std::move(cur));
    return cells;
}

double parse_double(const std::string& s) {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw ReportError("bad number: " + s);
    return v;
}

int parse_int(const std::string& s) {
    std::size_t used = 0;
    const int v = std::stoi(s, &used);
    if (used != s.size()) throw ReportError("bad integer: " + s);
    return v;
}

void validate(const BenchReport& report) {
    if (report.emulators.empty()) throw ReportError("report has no emulators");
    for (const auto& e : report.emulators) {
        if (e.runs.empty()) throw ReportError("emulator " + e.emulator + " has no runs");
        if (e.emulator.find_first_of(",\n\"") != std::string::npos) {
            throw ReportError("emulator name not representable in CSV: " + e.emulator);
        }
    }
}

EmulatorRuns& runs_for(BenchReport& report, const std::string& name) {
    for (auto& e : report.emulators) {
        if (e.emulator == name) return e;
    }
    report.emulators.push_back({name, {}});
    return report.emulators.back();
}

constexpr std::string_view kCsvHeader = "emulator,run,real_ms,user_ms,sys_ms,exit,stdout_sha,speedup";

std::string write_csv(const BenchReport& report) {
    std::string out(kCsvHeader);
    out += '\n';
    for (const auto& e : report.emulators) {
        for (const auto& r : e.runs) {
            out += fmt::format("{},{},{},{},{},{},{},\n", e.emulator, r.run, r.real_ms, r.user_ms, r.sys_ms,
                               r.exit, r.stdout_sha);
        }
    }
    const std::string speedup = report.speedup ? fmt::format("{}", *report.speedup) : "";
    for (const auto& e : report.emulators) {
        out += fmt::format("{},median,{},{},{},,,{}\n", e.emulator, e.median_real_ms(), e.median_user_ms(),
                           e.median_sys_ms(), speedup);
    }
    return out;
}

BenchReport parse_csv(std::string_view text) {
    BenchReport report;
    std::istringstream in{std::string(text)};
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader) throw ReportError("missing CSV header");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != 8) throw ReportError("CSV row has wrong column count: " + line);
        if (cells[1] == "median") {
            if (!cells[7].empty() && !report.speedup) report.speedup = parse_double(cells[7]);
            continue;
        }
        runs_for(report, cells[0])
            .runs.push_back({parse_int(cells[1]), parse_double(cells[2]), parse_double(cells[3]),
                             parse_double(cells[4]), parse_int(cells[5]), cells[6]});
    }
    return report;
}

std::string write_json(const BenchReport& report) {
    nlohmann::ordered_json runs = nlohmann::ordered_json::array();
    nlohmann::ordered_json medians = nlohmann::ordered_json::array();
    for (const auto& e : report.emulators) {
        for (const auto& r : e.runs) {
            runs.push_back({{"emulator", e.emulator},
                            {"run", r.run},
                            {"real_ms", r.real_ms},
                            {"user_ms", r.user_ms},
                            {"sys_ms", r.sys_ms},
                            {"exit", r.exit},
                            {"stdout_sha", r.stdout_sha}});
        }
        medians.push_back({{"emulator", e.emulator},
                           {"real_ms", e.median_real_ms()},
                           {"user_ms", e.median_user_ms()},
                           {"sys_ms", e.median_sys_ms()}});
    }
    nlohmann::ordered_json summary = {{"medians", medians}};
    if (report.speedup) summary["speedup"] = *report.speedup;
    nlohmann::ordered_json doc = {{"runs", runs}, {"summary", summary}};
    return doc.dump(2) + "\n";
}

BenchReport parse_json(std::string_view text) {
    BenchReport report;
    try {
        const auto doc = nlohmann::json::parse(text);
        for (const auto& r : doc.at("runs")) {
            runs_for(report, r.at("emulator").get<std::string>())
                .runs.push_back({r.at("run").get<int>(), r.at("real_ms").get<double>(),
                                 r.at("user_ms").get<double>(), r.at("sys_ms").get<double>(),
                                 r.at("exit").get<int>(), r.at("stdout_sha").get<std::string>()});
        }
        const auto& summary = doc.at("summary");
        if (summary.contains("speedup")) report.speedup = summary.at("speedup").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw ReportError(std::string("bad JSON report: ") + e.what());
    }
    return report;
}

}  // namespace

ProcessResult time_process(const std::vector<std::string>& argv) {
    if (argv.empty()) throw SpawnError("empty command");

    int pipefd[2];
    if (::pipe2(pipefd, O_CLOEXEC) != 0) throw SpawnError(std::string("pipe: ") + std::strerror(errno));
    Fd read_end(pipefd[0]);
    Fd write_end(pipefd[1]);

    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_adddup2(&actions, write_end.get(), STDOUT_FILENO);
    struct ActionsGuard {
        posix_spawn_file_actions_t* a;
        ~ActionsGuard() { posix_spawn_file_actions_destroy(a); }
    } guard{&actions};

    std::vector<char*> cargv;
    for (const auto& a : argv) cargv.push_back(const_cast<char*>(a.c_str()));
    cargv.push_back(nullptr);

    const auto start = std::chrono::steady_clock::now();
    pid_t pid = 0;
    const int rc = ::posix_spawnp(&pid, cargv[0], &actions, nullptr, cargv.data(), environ);
    if (rc != 0) throw SpawnError(fmt::format("cannot start {}: {}", argv[0], std::strerror(rc)));
    write_end.reset();

    ProcessResult result;
    char buf[65536];
    for (;;) {
        const ssize_t n = ::read(read_end.get(), buf, sizeof buf);
        if (n > 0) {
            result.stdout_bytes.append(buf, static_cast<std::size_t>(n));
        } else if (n == 0 || errno != EINTR) {
            break;
        }
    }

    int status = 0;
    rusage usage{};
    while (::wait4(pid, &status, 0, &usage) < 0) {
        if (errno != EINTR) throw SpawnError(std::string("wait4: ") + std::strerror(errno));
    }
    const auto stop = std::chrono::steady_clock::now();

    result.real_ms = std::chrono::duration<double, std::milli>(stop - start).count();
    result.user_ms = to_ms(usage.ru_utime);
    result.sys_ms = to_ms(usage.ru_stime);
    if (WIFEXITED(status)) {
        result.exit_code = WEXITSTATUS(status);
    } else if (WIFSIGNALED(status)) {
        result.exit_code = 128 + WTERMSIG(status);
    }
    return result;
}

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("SHA-256 failed");
    }
    std::string out;
    for (unsigned i = 0; i < len; ++i) out += fmt::format("{:02x}", digest[i]);
    return out;
}

double median(std::vector<double> values) {
    if (values.empty()) throw ReportError("median of an empty sample");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 ? values[n / 2] : (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

namespace {
template <typename Field>
double median_of(const std::vector<RunSample>& runs, Field field) {
    std::vector<double> v;
    for (const auto& r : runs) v.push_back(r.*field);
    return median(std::move(v));
}
}  // namespace

double EmulatorRuns::median_real_ms() const { return median_of(runs, &RunSample::real_ms); }
double EmulatorRuns::median_user_ms() const { return median_of(runs, &RunSample::user_ms); }
double EmulatorRuns::median_sys_ms() const { return median_of(runs, &RunSample::sys_ms); }

const EmulatorRuns* BenchReport::find(std::string_view name) const {
    for (const auto& e : emulators) {
        if (e.emulator == name) return &e;
    }
    return nullptr;
}

std::optional<double> compute_speedup(double baseline_user_ms, double subject_user_ms) {
    if (!(subject_user_ms > 0)) return std::nullopt;
    return baseline_user_ms / subject_user_ms;
}

std::optional<ReportFormat> parse_format(std::string_view name) {
    if (name == "json") return ReportFormat::Json;
    if (name == "csv") return ReportFormat::Csv;
    return std::nullopt;
}

std::string write_report(const BenchReport& report, ReportFormat format) {
    validate(report);
    return format == ReportFormat::Json ? write_json(report) : write_csv(report);
}

BenchReport parse_report(std::string_view text, ReportFormat format) {
    BenchReport report = format == ReportFormat::Json ? parse_json(text) : parse_csv(text);
    validate(report);
    return report;
}

void write_report_file(const BenchReport& report, ReportFormat format, const std::filesystem::path& path) {
    const std::string text = write_report(report, format);
    std::ofstream out(path, std::ios::binary);
    if (!out || !out.write(text.data(), static_cast<std::streamsize>(text.size()))) {
        throw ReportError("cannot write " + path.string());
    }
}

std::optional<std::size_t> first_difference(std::string_view a, std::string_view b) {
    const auto [ia, ib] = std::mismatch(a.begin(), a.end(), b.begin(), b.end());
    if (ia == a.end() && ib == b.end()) return std::nullopt;
    return static_cast<std::size_t>(ia - a.begin());
}

namespace {
std::string describe_difference(std::string_view expected, std::string_view actual, std::size_t at) {
    auto byte_at = [](std::string_view s, std::size_t i) {
        return i < s.size() ? fmt::format("0x{:02x}", static_cast<unsigned char>(s[i])) : std::string("<eof>");
    };
    return fmt::format("stdout differs at byte {}: expected {}, got {} (lengths {} vs {})", at,
                       byte_at(expected, at), byte_at(actual, at), expected.size(), actual.size());
}
}  // namespace

DifferentialResult run_differential(const std::filesystem::path& binary,
                                    const std::vector<EmulatorCommand>& emulators,
                                    const DifferentialOptions& options) {
    if (emulators.empty()) throw std::invalid_argument("no emulators to compare");
    if (options.runs < 1) throw std::invalid_argument("run count must be at least 1");

    DifferentialResult result;
    std::optional<std::string> reference = options.expected_stdout;
    std::optional<int> reference_exit;
    std::string reference_from = "expected output";

    auto flag = [&](Mismatch m) {
        if (!result.mismatch) result.mismatch = std::move(m);
    };

    for (const auto& emu : emulators) {
        EmulatorRuns runs{emu.name, {}};
        for (int k = 0; k < options.runs; ++k) {
            std::vector<std::string> argv = emu.argv_prefix;
            argv.push_back(binary.string());
            const ProcessResult p = time_process(argv);
            const std::string sha = sha256_hex(p.stdout_bytes);
            runs.runs.push_back({k, p.real_ms, p.user_ms, p.sys_ms, p.exit_code, sha});
            if (k == 0 && result.report.emulators.empty()) result.first_stdout = p.stdout_bytes;

            if (options.expected_sha && sha != *options.expected_sha) {
                flag({fmt::format("stdout digest {} != expected {}", sha, *options.expected_sha), emu.name, k,
                      std::nullopt});
            }
            if (!reference) {
                reference = p.stdout_bytes;
                reference_from = fmt::format("{} run {}", emu.name, k);
            } else if (auto at = first_difference(*reference, p.stdout_bytes)) {
                flag({fmt::format("{} (vs {})", describe_difference(*reference, p.stdout_bytes, *at),
                                  reference_from),
                      emu.name, k, at});
            }
            if (!reference_exit) {
                reference_exit = p.exit_code;
            } else if (*reference_exit != p.exit_code) {
                flag({fmt::format("exit code {} != {}", p.exit_code, *reference_exit), emu.name, k, std::nullopt});
            }
        }
        result.report.emulators.push_back(std::move(runs));
    }

    const EmulatorCommand* subject = nullptr;
    const EmulatorCommand* baseline = nullptr;
    for (const auto& emu : emulators) {
        if (emu.baseline && !baseline) baseline = &emu;
        if (!emu.baseline && !subject) subject = &emu;
    }
    if (subject && baseline) {
        result.report.speedup = compute_speedup(result.report.find(baseline->name)->median_user_ms(),
                                                result.report.find(subject->name)->median_user_ms());
    }
    result.pass = !result.mismatch.has_value();
    return result;
}

std::optional<std::filesystem::path> find_qemu(const std::optional<std::filesystem::path>& flag) {
    auto executable = [](const std::filesystem::path& p) { return ::access(p.c_str(), X_OK) == 0; };
    if (flag) {
        if (executable(*flag)) return flag;
        return std::nullopt;
    }
    if (const char* env = std::getenv(std::string(kQemuEnvVar).c_str()); env && *env) {
        if (executable(env)) return std::filesystem::path(env);
        return std::nullopt;
    }
    const char* path = std::getenv("PATH");
    if (!path) return std::nullopt;
    std::string_view rest(path);
    while (!rest.empty()) {
        const auto colon = rest.find(':');
        const std::string_view dir = rest.substr(0, colon);
        if (!dir.empty()) {
            const auto candidate = std::filesystem::path(dir) / "qemu-riscv64";
            if (executable(candidate)) return candidate;
        }
        if (colon == std::string_view::npos) break;
        rest.remove_prefix(colon + 1);
    }
    return std::nullopt;
}

}  // namespace rv64um::harness
