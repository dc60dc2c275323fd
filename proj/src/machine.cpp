#include "rv64um/machine.hpp"

#include <fmt/format.h>

#include <ostream>

namespace rv64um {

namespace {

constexpr std::uint64_t sext32(std::uint64_t v) {
    return static_cast<std::uint64_t>(static_cast<std::int64_t>(static_cast<std::int32_t>(v)));
}

constexpr std::int64_t as_signed(std::uint64_t v) { return static_cast<std::int64_t>(v); }

}  // namespace

std::string_view trap_kind_name(TrapKind kind) noexcept {
    switch (kind) {
    case TrapKind::IllegalInstruction: return "illegal instruction";
    case TrapKind::MemoryFault: return "memory fault";
    case TrapKind::MisalignedFetch: return "misaligned fetch";
    case TrapKind::Breakpoint: return "breakpoint";
    }
    return "unknown trap";
}

Machine::Status Machine::execute_one() {
    auto& x = state_.regs;
    const std::uint64_t pc = state_.pc;
    if (pc & 3) return trap(TrapKind::MisalignedFetch, pc);

    try {
        const auto word = mem_.load<std::uint32_t>(pc);
        const auto decoded = try_decode(word);
        if (!decoded) return trap(TrapKind::IllegalInstruction, word);
        const Instr& in = *decoded;

        const std::uint64_t a = x[in.rs1];
        const std::uint64_t b = x[in.rs2];
        const auto imm = static_cast<std::uint64_t>(in.imm);
        std::uint64_t next = pc + 4;
        std::uint64_t& rd = x[in.rd];

        switch (in.op) {
        using M = Mnemonic;
        case M::LUI: rd = imm; break;
        case M::AUIPC: rd = pc + imm; break;
        case M::JAL: rd = pc + 4; next = pc + imm; break;
        case M::JALR: next = (a + imm) & ~std::uint64_t{1}; rd = pc + 4; break;

        case M::BEQ: if (a == b) next = pc + imm; break;
        case M::BNE: if (a != b) next = pc + imm; break;
        case M::BLT: if (as_signed(a) < as_signed(b)) next = pc + imm; break;
        case M::BGE: if (as_signed(a) >= as_signed(b)) next = pc + imm; break;
        case M::BLTU: if (a < b) next = pc + imm; break;
        case M::BGEU: if (a >= b) next = pc + imm; break;

        case M::LB: rd = static_cast<std::uint64_t>(std::int64_t{mem_.load<std::int8_t>(a + imm)}); break;
        case M::LH: rd = static_cast<std::uint64_t>(std::int64_t{mem_.load<std::int16_t>(a + imm)}); break;
        case M::LW: rd = static_cast<std::uint64_t>(std::int64_t{mem_.load<std::int32_t>(a + imm)}); break;
        case M::LD: rd = mem_.load<std::uint64_t>(a + imm); break;
        case M::LBU: rd = mem_.load<std::uint8_t>(a + imm); break;
        case M::LHU: rd = mem_.load<std::uint16_t>(a + imm); break;
        case M::LWU: rd = mem_.load<std::uint32_t>(a + imm); break;

        case M::SB: mem_.store(a + imm, static_cast<std::uint8_t>(b)); break;
        case M::SH: mem_.store(a + imm, static_cast<std::uint16_t>(b)); break;
        case M::SW: mem_.store(a + imm, static_cast<std::uint32_t>(b)); break;
        case M::SD: mem_.store(a + imm, b); break;

        case M::ADDI: rd = a + imm; break;
        case M::SLTI: rd = as_signed(a) < in.imm; break;
        case M::SLTIU: rd = a < imm; break;
        case M::XORI: rd = a ^ imm; break;
        case M::ORI: rd = a | imm; break;
        case M::ANDI: rd = a & imm; break;
        case M::SLLI: rd = a << in.shamt(); break;
        case M::SRLI: rd = a >> in.shamt(); break;
        case M::SRAI: rd = static_cast<std::uint64_t>(as_signed(a) >> in.shamt()); break;

        case M::ADD: rd = a + b; break;
        case M::SUB: rd = a - b; break;
        case M::SLL: rd = a << (b & 63); break;
        case M::SLT: rd = as_signed(a) < as_signed(b); break;
        case M::SLTU: rd = a < b; break;
        case M::XOR: rd = a ^ b; break;
        case M::SRL: rd = a >> (b & 63); break;
        case M::SRA: rd = static_cast<std::uint64_t>(as_signed(a) >> (b & 63)); break;
        case M::OR: rd = a | b; break;
        case M::AND: rd = a & b; break;

        case M::FENCE: break;
        case M::ECALL: {
            const SyscallOutcome out = syscalls_->dispatch(state_, mem_);
            if (const auto* ex = std::get_if<SyscallExit>(&out)) {
                exit_code_ = ex->code;
                return Status::Exited;
            }
            x[reg::kA0] = static_cast<std::uint64_t>(std::get<SyscallReturn>(out).value);
            break;
        }
        case M::EBREAK: return trap(TrapKind::Breakpoint, pc);

        case M::ADDIW: rd = sext32(a + imm); break;
        case M::SLLIW: rd = sext32(static_cast<std::uint32_t>(a) << in.shamt()); break;
        case M::SRLIW: rd = sext32(static_cast<std::uint32_t>(a) >> in.shamt()); break;
        case M::SRAIW:
            rd = sext32(static_cast<std::uint32_t>(static_cast<std::int32_t>(a) >> in.shamt()));
            break;
        case M::ADDW: rd = sext32(a + b); break;
        case M::SUBW: rd = sext32(a - b); break;
        case M::SLLW: rd = sext32(static_cast<std::uint32_t>(a) << (b & 31)); break;
        case M::SRLW: rd = sext32(static_cast<std::uint32_t>(a) >> (b & 31)); break;
        case M::SRAW:
            rd = sext32(static_cast<std::uint32_t>(static_cast<std::int32_t>(a) >> (b & 31)));
            break;
        }

        x[0] = 0;
        state_.pc = next;
        return Status::Continue;
    } catch (const MemoryFault& fault) {
        x[0] = 0;
        return trap(TrapKind::MemoryFault, fault.addr());
    }
}

StepOutcome Machine::step() {
    const GuestState before = state_;
    const Status s = execute_one();
    if (trace_) trace_step(before);
    switch (s) {
    case Status::Continue: return Continue{};
    case Status::Exited: return Exited{exit_code_};
    case Status::Trapped: break;
    }
    return trap_;
}

RunResult Machine::run(RunLimits limits) {
    const std::uint64_t max = limits.max_steps.value_or(UINT64_MAX);
    std::uint64_t steps = 0;
    for (;;) {
        if (steps >= max) return {StepLimitExceeded{steps}, steps};
        Status s;
        if (trace_) {
            const GuestState before = state_;
            s = execute_one();
            trace_step(before);
        } else {
            s = execute_one();
        }
        ++steps;
        if (s == Status::Exited) return {Exited{exit_code_}, steps};
        if (s == Status::Trapped) return {trap_, steps};
    }
}

void Machine::trace_step(const GuestState& before) {
    std::string line = fmt::format("{:016x}: ", before.pc);
    const auto off = mem_.translate(before.pc, 4);
    if (before.pc % 4 == 0 && off) {
        const auto word = mem_.load<std::uint32_t>(before.pc);
        const auto in = try_decode(word);
        line += in ? disassemble(*in) : fmt::format("<illegal 0x{:08x}>", word);
    } else {
        line += "<unfetchable>";
    }
    for (unsigned i = 1; i < 32; ++i) {
        if (before.regs[i] != state_.regs[i]) {
            line += fmt::format(" {}={:016x}", abi_name(i), state_.regs[i]);
        }
    }
    line += '\n';
    *trace_ << line;
}

std::string Machine::describe(const Trap& t) const {
    std::string out = fmt::format("trap: {} at pc=0x{:016x}", trap_kind_name(t.kind), t.pc);
    if (t.kind == TrapKind::MemoryFault || t.kind == TrapKind::MisalignedFetch) {
        out += fmt::format(" (address 0x{:x})", t.detail);
    }
    out += '\n';
    if (t.pc % 4 == 0 && mem_.contains(t.pc, 4)) {
        const auto word = mem_.load<std::uint32_t>(t.pc);
        const auto in = try_decode(word);
        out += fmt::format("instruction: 0x{:08x}  {}\n", word,
                           in ? disassemble(*in) : std::string("<illegal>"));
    }
    out += register_dump(state_);
    return out;
}

}  // namespace rv64um
