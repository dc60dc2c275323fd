#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "rv64um/isa.hpp"
#include "rv64um/memory.hpp"
#include "rv64um/state.hpp"
#include "rv64um/syscall.hpp"

namespace rv64um {

enum class TrapKind { IllegalInstruction, MemoryFault, MisalignedFetch, Breakpoint };

std::string_view trap_kind_name(TrapKind kind) noexcept;

struct Continue {
    friend bool operator==(const Continue&, const Continue&) = default;
};

struct Exited {
    std::uint8_t code;
    friend bool operator==(const Exited&, const Exited&) = default;
};

// `detail` is the instruction word for IllegalInstruction and the faulting
// address for MemoryFault / MisalignedFetch.
struct Trap {
    TrapKind kind;
    std::uint64_t pc;
    std::uint64_t detail;
    friend bool operator==(const Trap&, const Trap&) = default;
};

using StepOutcome = std::variant<Continue, Exited, Trap>;

struct StepLimitExceeded {
    std::uint64_t steps;
    friend bool operator==(const StepLimitExceeded&, const StepLimitExceeded&) = default;
};

struct RunResult {
    std::variant<Exited, Trap, StepLimitExceeded> outcome;
    std::uint64_t steps = 0;
};

struct RunLimits {
    std::optional<std::uint64_t> max_steps;
};

// One guest hart: registers, pc and memory. Each step fetches a 32-bit word
// at pc, decodes it through the opcode jump table and applies it.
class Machine {
public:
    Machine(GuestState state, MemoryImage mem, SyscallHandler& syscalls)
        : state_(state), mem_(std::move(mem)), syscalls_(&syscalls) {}

    StepOutcome step();
    RunResult run(RunLimits limits = {});

    // Per-instruction trace (pc, disassembly, changed registers); nullptr
    // disables it.
    void set_trace(std::ostream* out) noexcept { trace_ = out; }

    GuestState& state() noexcept { return state_; }
    const GuestState& state() const noexcept { return state_; }
    MemoryImage& memory() noexcept { return mem_; }
    const MemoryImage& memory() const noexcept { return mem_; }

    // Multi-line diagnostic: trap kind, pc, faulting word disassembly when
    // readable, and a register dump.
    std::string describe(const Trap& trap) const;

private:
    enum class Status { Continue, Exited, Trapped };

    Status execute_one();
    Status trap(TrapKind kind, std::uint64_t detail) {
        trap_ = Trap{kind, state_.pc, detail};
        return Status::Trapped;
    }
    void trace_step(const GuestState& before);

    GuestState state_;
    MemoryImage mem_;
    SyscallHandler* syscalls_;
    std::ostream* trace_ = nullptr;
    std::uint8_t exit_code_ = 0;
    Trap trap_{};
};

}  // namespace rv64um
