#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace rv64um {

// Every RV64I instruction this emulator understands. Extensions (M, A, F, D,
// C, Zicsr, Zifencei) are not part of the set and decode as illegal.
enum class Mnemonic : std::uint8_t {
    LUI, AUIPC, JAL, JALR,
    BEQ, BNE, BLT, BGE, BLTU, BGEU,
    LB, LH, LW, LD, LBU, LHU, LWU,
    SB, SH, SW, SD,
    ADDI, SLTI, SLTIU, XORI, ORI, ANDI, SLLI, SRLI, SRAI,
    ADD, SUB, SLL, SLT, SLTU, XOR, SRL, SRA, OR, AND,
    FENCE, ECALL, EBREAK,
    ADDIW, SLLIW, SRLIW, SRAIW,
    ADDW, SUBW, SLLW, SRLW, SRAW,
};

inline constexpr int kMnemonicCount = static_cast<int>(Mnemonic::SRAW) + 1;

enum class Format : std::uint8_t { R, I, S, B, U, J, Shift, ShiftW, Fence, System };

Format format_of(Mnemonic m) noexcept;
std::string_view mnemonic_name(Mnemonic m) noexcept;

// A decoded instruction. Operand fields the format does not use are zero.
// `imm` is fully sign-extended; for shift-immediates it holds the shift
// amount, and for FENCE it holds the raw 12-bit fm/pred/succ field.
struct Instr {
    Mnemonic op = Mnemonic::ADDI;
    std::uint8_t rd = 0;
    std::uint8_t rs1 = 0;
    std::uint8_t rs2 = 0;
    std::int64_t imm = 0;

    std::uint32_t shamt() const noexcept { return static_cast<std::uint32_t>(imm); }

    friend bool operator==(const Instr&, const Instr&) = default;
};

class IllegalInstruction : public std::runtime_error {
public:
    explicit IllegalInstruction(std::uint32_t word);
    std::uint32_t word() const noexcept { return word_; }

private:
    std::uint32_t word_;
};

class ImmediateOutOfRange : public std::runtime_error {
public:
    ImmediateOutOfRange(Mnemonic op, std::int64_t imm);
};

class InvalidOperand : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Decoding dispatches on the 7-bit major opcode through a jump table, then
// on funct3/funct7 inside the per-opcode handler.
std::optional<Instr> try_decode(std::uint32_t word) noexcept;
Instr decode(std::uint32_t word);

std::uint32_t encode(const Instr& instr);

// Lowercase assembler-like text, e.g. "add x5, x6, x7" or "ld x5, 8(x2)".
std::string disassemble(const Instr& instr);

// Inclusive immediate range accepted by encode() for a mnemonic.
struct ImmRange {
    std::int64_t min;
    std::int64_t max;
    std::int64_t align;  // required divisor (2 for branches/jumps, 4096 for U)
};
ImmRange imm_range(Mnemonic m) noexcept;

}  // namespace rv64um
