#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rv64um/isa.hpp"

namespace rv64um::bench {

// Straight-line integer benchmark: N instructions cycling through three
// opcodes (period 3) over four registers (period 4), followed by an
// epilogue that prints the four registers in hex and exits with status 0.

enum class Op : std::uint8_t { Add, Sub, Sll };

inline constexpr std::size_t kOpPeriod = 3;
inline constexpr std::size_t kRegPeriod = 4;

Mnemonic mnemonic_of(Op op) noexcept;
std::string_view op_name(Op op) noexcept;
std::optional<Op> parse_op(std::string_view name) noexcept;

// Instruction i is op_order[i % 3] with
//   rd = regs[(i + a) % 4], rs1 = regs[(i + b) % 4], rs2 = regs[(i + c) % 4].
struct SchemeParams {
    std::uint8_t a = 0;
    std::uint8_t b = 0;
    std::uint8_t c = 1;
    std::array<Op, kOpPeriod> op_order = {Op::Add, Op::Sub, Op::Sll};

    bool valid() const noexcept;
    std::string to_string() const;
    friend bool operator==(const SchemeParams&, const SchemeParams&) = default;
};

using RegValues = std::array<std::uint64_t, kRegPeriod>;

inline constexpr std::uint64_t kDefaultCount = 2'000'000;
inline constexpr RegValues kDefaultInit = {8745425, 2413112, 51124341, 991232131};

// Final values reported for the default count and initial values. No scheme
// among the 384 candidates reproduces them (see find_matching_scheme), so
// they are reference data only.
inline constexpr RegValues kReportedFinals = {8697740129876948287ull, 0ull, 9749003943832603329ull,
                                              18220595702735330224ull};

// t0, t1, t2, t3
inline constexpr std::array<std::uint8_t, kRegPeriod> kBenchRegs = {5, 6, 7, 28};

struct BenchSpec {
    std::uint64_t count = kDefaultCount;
    RegValues init = kDefaultInit;
    SchemeParams scheme{};
};

inline constexpr std::uint64_t kTextBase = 0x10000;

// Generated code and where the N-instruction body sits inside it.
struct BenchProgram {
    std::vector<std::uint32_t> words;
    std::size_t body_begin = 0;
    std::size_t body_end = 0;
};

// Instructions that leave `value` in register `rd`: LUI+ADDIW for values
// representable as a sign-extended 32-bit number, otherwise a recursive
// shift-and-add expansion. Only `rd` is written.
std::vector<Instr> materialize(std::uint8_t rd, std::uint64_t value);

BenchProgram assemble(const BenchSpec& spec);

// The benchmark as a static ELF64 executable loaded at kTextBase.
std::vector<std::byte> generate(const BenchSpec& spec);

// Pure 64-bit arithmetic over the same schedule, independent of instruction
// encoding and of the emulator.
RegValues oracle_simulate(const BenchSpec& spec);

// Exactly the bytes the generated epilogue writes to stdout:
// "t0=<16 hex>\n" ... "t3=<16 hex>\n".
std::string render_dump(const RegValues& values);

inline constexpr std::size_t kDumpBytes = 4 * (3 + 16 + 1);

// All 4 x 4 x 4 x 3! candidates, ordered lexicographically by
// (a, b, c, op_order) with add < sub < sll.
std::vector<SchemeParams> all_schemes();

// First candidate (in all_schemes() order) whose oracle result after `count`
// instructions from `init` equals `target`. Candidates are evaluated on
// `threads` workers (0 = hardware concurrency).
std::optional<SchemeParams> find_matching_scheme(const RegValues& target, std::uint64_t count,
                                                 const RegValues& init = kDefaultInit,
                                                 unsigned threads = 0);

}  // namespace rv64um::bench
