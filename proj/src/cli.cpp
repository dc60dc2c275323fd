#include "rv64um/cli.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <fstream>
#include <iostream>
#include <optional>

#include "rv64um/benchgen.hpp"
#include "rv64um/harness.hpp"
#include "rv64um/loader.hpp"
#include "rv64um/machine.hpp"
#include "rv64um/syscall.hpp"

namespace rv64um::cli {

namespace {

struct RunFlags {
    std::uint64_t mem_mib = 256;
    bool unchecked = false;
    std::optional<std::uint64_t> max_steps;
    bool trace = false;
    bool fd_passthrough = false;
    bool auxv_pagesz = false;
    std::string binary;
    std::vector<std::string> guest_args;
};

struct BenchFlags {
    std::uint64_t count = bench::kDefaultCount;
    std::vector<std::uint64_t> init{bench::kDefaultInit.begin(), bench::kDefaultInit.end()};
    std::vector<unsigned> scheme{0, 0, 1};
    std::vector<std::string> ops{"add", "sub", "sll"};
    std::string out;
};

struct HarnessFlags {
    std::string bin;
    std::optional<std::string> qemu;
    bool no_qemu = false;
    int runs = 5;
    std::string format = "json";
    std::string out;
};

bench::BenchSpec to_spec(const BenchFlags& f) {
    bench::BenchSpec spec;
    spec.count = f.count;
    for (std::size_t i = 0; i < bench::kRegPeriod; ++i) spec.init[i] = f.init[i];
    spec.scheme.a = static_cast<std::uint8_t>(f.scheme[0]);
    spec.scheme.b = static_cast<std::uint8_t>(f.scheme[1]);
    spec.scheme.c = static_cast<std::uint8_t>(f.scheme[2]);
    for (std::size_t i = 0; i < bench::kOpPeriod; ++i) spec.scheme.op_order[i] = *bench::parse_op(f.ops[i]);
    if (!spec.scheme.valid()) throw CLI::ValidationError("--ops", "must be a permutation of add,sub,sll");
    return spec;
}

void add_spec_options(CLI::App* cmd, BenchFlags& f) {
    cmd->add_option("--count,-n", f.count, "Number of body instructions")->capture_default_str();
    cmd->add_option("--init", f.init, "Initial t0,t1,t2,t3 values")
        ->delimiter(',')
        ->expected(4)
        ->capture_default_str();
    cmd->add_option("--scheme", f.scheme, "Register offsets a,b,c (rd=reg[i+a], rs1=reg[i+b], rs2=reg[i+c])")
        ->delimiter(',')
        ->expected(3)
        ->check(CLI::Range(0u, 3u))
        ->capture_default_str();
    cmd->add_option("--ops", f.ops, "Op order, a permutation of add,sub,sll")
        ->delimiter(',')
        ->expected(3)
        ->check(CLI::IsMember({"add", "sub", "sll"}))
        ->capture_default_str();
}

std::filesystem::path self_exe(const char* argv0) {
    std::error_code ec;
    auto p = std::filesystem::read_symlink("/proc/self/exe", ec);
    return ec ? std::filesystem::path(argv0) : p;
}

int do_run(const RunFlags& f) {
    std::vector<std::byte> file;
    try {
        file = read_binary_file(f.binary);
    } catch (const std::exception& e) {
        std::cerr << "rv64um: " << e.what() << '\n';
        return kExitNoInput;
    }

    LoadConfig config;
    config.memory_size = f.mem_mib << 20;
    config.bounds = f.unchecked ? BoundsMode::Unchecked : BoundsMode::Checked;
    config.auxv_page_size = f.auxv_pagesz;

    std::vector<std::string> argv{f.binary};
    argv.insert(argv.end(), f.guest_args.begin(), f.guest_args.end());

    std::optional<LoadedImage> image;
    try {
        image.emplace(load_program(file, std::move(argv), {}, config));
    } catch (const LoadError& e) {
        std::cerr << "rv64um: " << f.binary << ": " << e.what() << '\n';
        return kExitDataErr;
    }

    PosixIo io;
    LinuxSyscalls syscalls(io, SyscallConfig{f.fd_passthrough});
    Machine machine(initial_state(*image), std::move(image->mem), syscalls);
    if (f.trace) machine.set_trace(&std::cerr);

    const RunResult result = machine.run(RunLimits{f.max_steps});
    if (const auto* exited = std::get_if<Exited>(&result.outcome)) return exited->code;
    if (const auto* trap = std::get_if<Trap>(&result.outcome)) {
        std::cerr << "rv64um: guest " << machine.describe(*trap);
        return kExitGuestFault;
    }
    std::cerr << fmt::format("rv64um: step limit exceeded after {} instructions at pc=0x{:016x}\n",
                             std::get<StepLimitExceeded>(result.outcome).steps, machine.state().pc);
    std::cerr << register_dump(machine.state());
    return kExitGuestFault;
}

int do_benchgen(const BenchFlags& f) {
    const bench::BenchSpec spec = to_spec(f);
    const auto elf = bench::generate(spec);
    std::ofstream out(f.out, std::ios::binary);
    if (!out || !out.write(reinterpret_cast<const char*>(elf.data()), static_cast<std::streamsize>(elf.size()))) {
        std::cerr << "rv64um: cannot write " << f.out << '\n';
        return kExitNoInput;
    }
    out.close();
    std::filesystem::permissions(f.out,
                                 std::filesystem::perms::owner_exec | std::filesystem::perms::group_exec |
                                     std::filesystem::perms::others_exec,
                                 std::filesystem::perm_options::add);
    std::cout << bench::render_dump(bench::oracle_simulate(spec));
    return 0;
}

int do_oracle(const BenchFlags& f) {
    std::cout << bench::render_dump(bench::oracle_simulate(to_spec(f)));
    return 0;
}

int do_bench(const HarnessFlags& f, const char* argv0) {
    using namespace harness;
    std::vector<EmulatorCommand> emulators;
    emulators.push_back({"rv64um", {self_exe(argv0).string(), "run"}, false});
    if (!f.no_qemu) {
        std::optional<std::filesystem::path> flag;
        if (f.qemu) flag = *f.qemu;
        if (auto qemu = find_qemu(flag)) {
            emulators.push_back({"qemu-riscv64", {qemu->string()}, true});
        } else {
            std::cerr << "rv64um: warning: qemu-riscv64 not found, timing this emulator only\n";
        }
    }

    const auto format = *parse_format(f.format);
    DifferentialResult result;
    try {
        result = run_differential(f.bin, emulators, DifferentialOptions{f.runs, {}, {}});
    } catch (const SpawnError& e) {
        std::cerr << "rv64um: " << e.what() << '\n';
        return kExitNoInput;
    }

    if (f.out.empty()) {
        std::cout << write_report(result.report, format);
    } else {
        write_report_file(result.report, format, f.out);
    }
    for (const auto& e : result.report.emulators) {
        std::cerr << fmt::format("{:>14}: real {:.1f} ms  user {:.1f} ms  sys {:.1f} ms  (median of {})\n",
                                 e.emulator, e.median_real_ms(), e.median_user_ms(), e.median_sys_ms(),
                                 e.runs.size());
    }
    if (result.report.speedup) std::cerr << fmt::format("user-time speedup: {:.2f}x\n", *result.report.speedup);
    if (!result.pass) {
        std::cerr << "rv64um: output mismatch: " << result.mismatch->emulator << " run " << result.mismatch->run
                  << ": " << result.mismatch->what << '\n';
        return kExitMismatch;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"User-mode RV64I emulator with a straight-line benchmark generator and timing harness", "rv64um"};
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);

    RunFlags run_flags;
    auto* run = app.add_subcommand("run", "Load a static RV64I ELF and execute it; exits with the guest's status");
    run->add_option("--mem-size", run_flags.mem_mib, "Guest memory in MiB (stack is the top 8 MiB)")
        ->check(CLI::Range(std::uint64_t{16}, std::uint64_t{1} << 20))
        ->capture_default_str();
    run->add_flag("--unchecked", run_flags.unchecked, "Skip guest memory bounds checks");
    run->add_option("--max-steps", run_flags.max_steps, "Stop with an error after this many instructions")
        ->check(CLI::PositiveNumber);
    run->add_flag("--trace", run_flags.trace, "Trace every instruction to stderr");
    run->add_flag("--fd-passthrough", run_flags.fd_passthrough, "Let the guest use host fds beyond 0-2");
    run->add_flag("--auxv-pagesz", run_flags.auxv_pagesz, "Put AT_PAGESZ in the auxiliary vector");
    run->add_option("binary", run_flags.binary, "Guest executable")->required();
    run->add_option("args", run_flags.guest_args, "Arguments passed to the guest");
    run->positionals_at_end();
    run->prefix_command();

    BenchFlags gen_flags;
    auto* gen = app.add_subcommand("benchgen", "Write the benchmark ELF and print the expected register dump");
    add_spec_options(gen, gen_flags);
    gen->add_option("--out,-o", gen_flags.out, "Output ELF path")->required();

    BenchFlags oracle_flags;
    auto* oracle = app.add_subcommand("oracle", "Print the expected register dump without generating code");
    add_spec_options(oracle, oracle_flags);

    HarnessFlags bench_flags;
    auto* bench = app.add_subcommand("bench", "Time this emulator (and qemu-riscv64 if found) on one binary");
    bench->add_option("--bin", bench_flags.bin, "Guest binary to run")->required()->check(CLI::ExistingFile);
    auto* qemu_opt = bench->add_option("--qemu", bench_flags.qemu,
                                       fmt::format("qemu-riscv64 path (default: ${}, then PATH)", harness::kQemuEnvVar));
    bench->add_flag("--no-qemu", bench_flags.no_qemu, "Do not look for qemu-riscv64")->excludes(qemu_opt);
    bench->add_option("--runs", bench_flags.runs, "Runs per emulator")->check(CLI::Range(1, 1000))->capture_default_str();
    bench->add_option("--format", bench_flags.format, "Report format")
        ->check(CLI::IsMember({"json", "csv"}))
        ->capture_default_str();
    bench->add_option("--out", bench_flags.out, "Report path (default: stdout)");

    try {
        app.parse(argc, argv);
        if (*run) {
            // prefix_command() leaves everything after the binary untouched.
            auto rest = run->remaining();
            run_flags.guest_args.insert(run_flags.guest_args.end(), rest.begin(), rest.end());
            return do_run(run_flags);
        }
        if (*gen) return do_benchgen(gen_flags);
        if (*oracle) return do_oracle(oracle_flags);
        if (*bench) return do_bench(bench_flags, argv[0]);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitUsage;
    }
    return kExitUsage;
}

}  // namespace rv64um::cli
