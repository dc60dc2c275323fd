#include "rv64um/isa.hpp"

#include <array>
#include <fmt/format.h>

namespace rv64um {

namespace {

namespace opc {
constexpr std::uint32_t kLoad = 0x03;
constexpr std::uint32_t kMiscMem = 0x0F;
constexpr std::uint32_t kOpImm = 0x13;
constexpr std::uint32_t kAuipc = 0x17;
constexpr std::uint32_t kOpImm32 = 0x1B;
constexpr std::uint32_t kStore = 0x23;
constexpr std::uint32_t kOp = 0x33;
constexpr std::uint32_t kLui = 0x37;
constexpr std::uint32_t kOp32 = 0x3B;
constexpr std::uint32_t kBranch = 0x63;
constexpr std::uint32_t kJalr = 0x67;
constexpr std::uint32_t kJal = 0x6F;
constexpr std::uint32_t kSystem = 0x73;
}  // namespace opc

struct Fields {
    std::uint32_t w;
    constexpr std::uint8_t rd() const { return (w >> 7) & 31; }
    constexpr std::uint32_t funct3() const { return (w >> 12) & 7; }
    constexpr std::uint8_t rs1() const { return (w >> 15) & 31; }
    constexpr std::uint8_t rs2() const { return (w >> 20) & 31; }
    constexpr std::uint32_t funct7() const { return w >> 25; }
    constexpr std::int64_t sext_top() const { return static_cast<std::int32_t>(w) >> 31; }
    constexpr std::int64_t imm_i() const { return static_cast<std::int32_t>(w) >> 20; }
    constexpr std::int64_t imm_s() const {
        return static_cast<std::int64_t>(static_cast<std::int32_t>(w) >> 25) * 32 + ((w >> 7) & 0x1F);
    }
    constexpr std::int64_t imm_b() const {
        return sext_top() * 4096 + (((w >> 7) & 1) << 11) + (((w >> 25) & 0x3F) << 5) +
               (((w >> 8) & 0xF) << 1);
    }
    constexpr std::int64_t imm_u() const { return static_cast<std::int32_t>(w & 0xFFFFF000u); }
    constexpr std::int64_t imm_j() const {
        return sext_top() * (std::int64_t{1} << 20) + (w & 0xFF000) + (((w >> 20) & 1) << 11) +
               (((w >> 21) & 0x3FF) << 1);
    }
};

using Decoded = std::optional<Instr>;

Instr make_r(Mnemonic m, Fields f) { return {m, f.rd(), f.rs1(), f.rs2(), 0}; }
Instr make_i(Mnemonic m, Fields f) { return {m, f.rd(), f.rs1(), 0, f.imm_i()}; }

Decoded decode_lui(Fields f) { return Instr{Mnemonic::LUI, f.rd(), 0, 0, f.imm_u()}; }
Decoded decode_auipc(Fields f) { return Instr{Mnemonic::AUIPC, f.rd(), 0, 0, f.imm_u()}; }
Decoded decode_jal(Fields f) { return Instr{Mnemonic::JAL, f.rd(), 0, 0, f.imm_j()}; }

Decoded decode_jalr(Fields f) {
    if (f.funct3() != 0) return std::nullopt;
    return make_i(Mnemonic::JALR, f);
}

Decoded decode_branch(Fields f) {
    static constexpr std::array<std::optional<Mnemonic>, 8> kByFunct3 = {
        Mnemonic::BEQ, Mnemonic::BNE, std::nullopt, std::nullopt,
        Mnemonic::BLT, Mnemonic::BGE, Mnemonic::BLTU, Mnemonic::BGEU};
    auto m = kByFunct3[f.funct3()];
    if (!m) return std::nullopt;
    return Instr{*m, 0, f.rs1(), f.rs2(), f.imm_b()};
}

Decoded decode_load(Fields f) {
    static constexpr std::array<std::optional<Mnemonic>, 8> kByFunct3 = {
        Mnemonic::LB, Mnemonic::LH, Mnemonic::LW, Mnemonic::LD,
        Mnemonic::LBU, Mnemonic::LHU, Mnemonic::LWU, std::nullopt};
    auto m = kByFunct3[f.funct3()];
    if (!m) return std::nullopt;
    return make_i(*m, f);
}

Decoded decode_store(Fields f) {
    static constexpr std::array<std::optional<Mnemonic>, 8> kByFunct3 = {
        Mnemonic::SB, Mnemonic::SH, Mnemonic::SW, Mnemonic::SD,
        std::nullopt, std::nullopt, std::nullopt, std::nullopt};
    auto m = kByFunct3[f.funct3()];
    if (!m) return std::nullopt;
    return Instr{*m, 0, f.rs1(), f.rs2(), f.imm_s()};
}

Decoded decode_op_imm(Fields f) {
    switch (f.funct3()) {
    case 0: return make_i(Mnemonic::ADDI, f);
    case 2: return make_i(Mnemonic::SLTI, f);
    case 3: return make_i(Mnemonic::SLTIU, f);
    case 4: return make_i(Mnemonic::XORI, f);
    case 6: return make_i(Mnemonic::ORI, f);
    case 7: return make_i(Mnemonic::ANDI, f);
    default: break;
    }
    // RV64 shifts: 6-bit shamt in bits 25:20, funct6 in bits 31:26.
    const std::uint32_t funct6 = f.w >> 26;
    const std::int64_t shamt = (f.w >> 20) & 0x3F;
    if (f.funct3() == 1 && funct6 == 0x00) return Instr{Mnemonic::SLLI, f.rd(), f.rs1(), 0, shamt};
    if (f.funct3() == 5 && funct6 == 0x00) return Instr{Mnemonic::SRLI, f.rd(), f.rs1(), 0, shamt};
    if (f.funct3() == 5 && funct6 == 0x10) return Instr{Mnemonic::SRAI, f.rd(), f.rs1(), 0, shamt};
    return std::nullopt;
}

Decoded decode_op_imm32(Fields f) {
    const std::int64_t shamt = f.rs2();
    switch (f.funct3()) {
    case 0: return make_i(Mnemonic::ADDIW, f);
    case 1:
        if (f.funct7() == 0x00) return Instr{Mnemonic::SLLIW, f.rd(), f.rs1(), 0, shamt};
        return std::nullopt;
    case 5:
        if (f.funct7() == 0x00) return Instr{Mnemonic::SRLIW, f.rd(), f.rs1(), 0, shamt};
        if (f.funct7() == 0x20) return Instr{Mnemonic::SRAIW, f.rd(), f.rs1(), 0, shamt};
        return std::nullopt;
    default: return std::nullopt;
    }
}

Decoded decode_op(Fields f) {
    if (f.funct7() == 0x00) {
        static constexpr std::array<Mnemonic, 8> kByFunct3 = {
            Mnemonic::ADD, Mnemonic::SLL, Mnemonic::SLT, Mnemonic::SLTU,
            Mnemonic::XOR, Mnemonic::SRL, Mnemonic::OR, Mnemonic::AND};
        return make_r(kByFunct3[f.funct3()], f);
    }
    if (f.funct7() == 0x20) {
        if (f.funct3() == 0) return make_r(Mnemonic::SUB, f);
        if (f.funct3() == 5) return make_r(Mnemonic::SRA, f);
    }
    return std::nullopt;
}

Decoded decode_op32(Fields f) {
    if (f.funct7() == 0x00) {
        switch (f.funct3()) {
        case 0: return make_r(Mnemonic::ADDW, f);
        case 1: return make_r(Mnemonic::SLLW, f);
        case 5: return make_r(Mnemonic::SRLW, f);
        default: return std::nullopt;
        }
    }
    if (f.funct7() == 0x20) {
        if (f.funct3() == 0) return make_r(Mnemonic::SUBW, f);
        if (f.funct3() == 5) return make_r(Mnemonic::SRAW, f);
    }
    return std::nullopt;
}

Decoded decode_misc_mem(Fields f) {
    if (f.funct3() != 0) return std::nullopt;  // FENCE.I belongs to Zifencei
    return Instr{Mnemonic::FENCE, f.rd(), f.rs1(), 0, static_cast<std::int64_t>(f.w >> 20)};
}

Decoded decode_system(Fields f) {
    if (f.w == 0x00000073) return Instr{Mnemonic::ECALL, 0, 0, 0, 0};
    if (f.w == 0x00100073) return Instr{Mnemonic::EBREAK, 0, 0, 0, 0};
    return std::nullopt;
}

Decoded decode_illegal(Fields) { return std::nullopt; }

using DecodeFn = Decoded (*)(Fields);

constexpr std::array<DecodeFn, 128> make_decode_table() {
    std::array<DecodeFn, 128> t{};
    for (auto& e : t) e = decode_illegal;
    t[opc::kLoad] = decode_load;
    t[opc::kMiscMem] = decode_misc_mem;
    t[opc::kOpImm] = decode_op_imm;
    t[opc::kAuipc] = decode_auipc;
    t[opc::kOpImm32] = decode_op_imm32;
    t[opc::kStore] = decode_store;
    t[opc::kOp] = decode_op;
    t[opc::kLui] = decode_lui;
    t[opc::kOp32] = decode_op32;
    t[opc::kBranch] = decode_branch;
    t[opc::kJalr] = decode_jalr;
    t[opc::kJal] = decode_jal;
    t[opc::kSystem] = decode_system;
    return t;
}

constexpr auto kDecodeTable = make_decode_table();

struct EncodingInfo {
    std::uint32_t opcode;
    std::uint32_t funct3;
    std::uint32_t funct7;
};

EncodingInfo encoding_of(Mnemonic m) {
    using M = Mnemonic;
    switch (m) {
    case M::LUI: return {opc::kLui, 0, 0};
    case M::AUIPC: return {opc::kAuipc, 0, 0};
    case M::JAL: return {opc::kJal, 0, 0};
    case M::JALR: return {opc::kJalr, 0, 0};
    case M::BEQ: return {opc::kBranch, 0, 0};
    case M::BNE: return {opc::kBranch, 1, 0};
    case M::BLT: return {opc::kBranch, 4, 0};
    case M::BGE: return {opc::kBranch, 5, 0};
    case M::BLTU: return {opc::kBranch, 6, 0};
    case M::BGEU: return {opc::kBranch, 7, 0};
    case M::LB: return {opc::kLoad, 0, 0};
    case M::LH: return {opc::kLoad, 1, 0};
    case M::LW: return {opc::kLoad, 2, 0};
    case M::LD: return {opc::kLoad, 3, 0};
    case M::LBU: return {opc::kLoad, 4, 0};
    case M::LHU: return {opc::kLoad, 5, 0};
    case M::LWU: return {opc::kLoad, 6, 0};
    case M::SB: return {opc::kStore, 0, 0};
    case M::SH: return {opc::kStore, 1, 0};
    case M::SW: return {opc::kStore, 2, 0};
    case M::SD: return {opc::kStore, 3, 0};
    case M::ADDI: return {opc::kOpImm, 0, 0};
    case M::SLTI: return {opc::kOpImm, 2, 0};
    case M::SLTIU: return {opc::kOpImm, 3, 0};
    case M::XORI: return {opc::kOpImm, 4, 0};
    case M::ORI: return {opc::kOpImm, 6, 0};
    case M::ANDI: return {opc::kOpImm, 7, 0};
    case M::SLLI: return {opc::kOpImm, 1, 0x00};
    case M::SRLI: return {opc::kOpImm, 5, 0x00};
    case M::SRAI: return {opc::kOpImm, 5, 0x20};
    case M::ADD: return {opc::kOp, 0, 0x00};
    case M::SUB: return {opc::kOp, 0, 0x20};
    case M::SLL: return {opc::kOp, 1, 0x00};
    case M::SLT: return {opc::kOp, 2, 0x00};
    case M::SLTU: return {opc::kOp, 3, 0x00};
    case M::XOR: return {opc::kOp, 4, 0x00};
    case M::SRL: return {opc::kOp, 5, 0x00};
    case M::SRA: return {opc::kOp, 5, 0x20};
    case M::OR: return {opc::kOp, 6, 0x00};
    case M::AND: return {opc::kOp, 7, 0x00};
    case M::FENCE: return {opc::kMiscMem, 0, 0};
    case M::ECALL: return {opc::kSystem, 0, 0};
    case M::EBREAK: return {opc::kSystem, 0, 0};
    case M::ADDIW: return {opc::kOpImm32, 0, 0};
    case M::SLLIW: return {opc::kOpImm32, 1, 0x00};
    case M::SRLIW: return {opc::kOpImm32, 5, 0x00};
    case M::SRAIW: return {opc::kOpImm32, 5, 0x20};
    case M::ADDW: return {opc::kOp32, 0, 0x00};
    case M::SUBW: return {opc::kOp32, 0, 0x20};
    case M::SLLW: return {opc::kOp32, 1, 0x00};
    case M::SRLW: return {opc::kOp32, 5, 0x00};
    case M::SRAW: return {opc::kOp32, 5, 0x20};
    }
    return {0, 0, 0};
}

constexpr std::array<std::string_view, kMnemonicCount> kNames = {
    "lui", "auipc", "jal", "jalr",
    "beq", "bne", "blt", "bge", "bltu", "bgeu",
    "lb", "lh", "lw", "ld", "lbu", "lhu", "lwu",
    "sb", "sh", "sw", "sd",
    "addi", "slti", "sltiu", "xori", "ori", "andi", "slli", "srli", "srai",
    "add", "sub", "sll", "slt", "sltu", "xor", "srl", "sra", "or", "and",
    "fence", "ecall", "ebreak",
    "addiw", "slliw", "srliw", "sraiw",
    "addw", "subw", "sllw", "srlw", "sraw",
};

bool is_load(Mnemonic m) { return m >= Mnemonic::LB && m <= Mnemonic::LWU; }

std::string fence_set(std::uint32_t bits) {
    std::string s;
    if (bits & 8) s += 'i';
    if (bits & 4) s += 'o';
    if (bits & 2) s += 'r';
    if (bits & 1) s += 'w';
    return s.empty() ? "0" : s;
}

}  // namespace

IllegalInstruction::IllegalInstruction(std::uint32_t word)
    : std::runtime_error(fmt::format("illegal instruction 0x{:08x}", word)), word_(word) {}

ImmediateOutOfRange::ImmediateOutOfRange(Mnemonic op, std::int64_t imm)
    : std::runtime_error(fmt::format("immediate {} out of range for {}", imm, mnemonic_name(op))) {}

Format format_of(Mnemonic m) noexcept {
    using M = Mnemonic;
    switch (m) {
    case M::LUI: case M::AUIPC: return Format::U;
    case M::JAL: return Format::J;
    case M::BEQ: case M::BNE: case M::BLT: case M::BGE: case M::BLTU: case M::BGEU:
        return Format::B;
    case M::SB: case M::SH: case M::SW: case M::SD: return Format::S;
    case M::SLLI: case M::SRLI: case M::SRAI: return Format::Shift;
    case M::SLLIW: case M::SRLIW: case M::SRAIW: return Format::ShiftW;
    case M::ADD: case M::SUB: case M::SLL: case M::SLT: case M::SLTU:
    case M::XOR: case M::SRL: case M::SRA: case M::OR: case M::AND:
    case M::ADDW: case M::SUBW: case M::SLLW: case M::SRLW: case M::SRAW:
        return Format::R;
    case M::FENCE: return Format::Fence;
    case M::ECALL: case M::EBREAK: return Format::System;
    default: return Format::I;
    }
}

std::string_view mnemonic_name(Mnemonic m) noexcept {
    return kNames[static_cast<std::size_t>(m)];
}

ImmRange imm_range(Mnemonic m) noexcept {
    switch (format_of(m)) {
    case Format::I:
    case Format::S: return {-2048, 2047, 1};
    case Format::B: return {-4096, 4094, 2};
    case Format::U: return {-(std::int64_t{1} << 31), (std::int64_t{1} << 31) - 4096, 4096};
    case Format::J: return {-(std::int64_t{1} << 20), (std::int64_t{1} << 20) - 2, 2};
    case Format::Shift: return {0, 63, 1};
    case Format::ShiftW: return {0, 31, 1};
    case Format::Fence: return {0, 4095, 1};
    case Format::R:
    case Format::System: return {0, 0, 1};
    }
    return {0, 0, 1};
}

std::optional<Instr> try_decode(std::uint32_t word) noexcept {
    return kDecodeTable[word & 0x7F](Fields{word});
}

Instr decode(std::uint32_t word) {
    if (auto instr = try_decode(word)) return *instr;
    throw IllegalInstruction(word);
}

std::uint32_t encode(const Instr& in) {
    if (in.rd > 31 || in.rs1 > 31 || in.rs2 > 31) {
        throw InvalidOperand(fmt::format("register index out of range in {}", mnemonic_name(in.op)));
    }
    const ImmRange range = imm_range(in.op);
    if (in.imm < range.min || in.imm > range.max || in.imm % range.align != 0) {
        throw ImmediateOutOfRange(in.op, in.imm);
    }

    const EncodingInfo e = encoding_of(in.op);
    const auto rd = std::uint32_t{in.rd} << 7;
    const auto rs1 = std::uint32_t{in.rs1} << 15;
    const auto rs2 = std::uint32_t{in.rs2} << 20;
    const auto f3 = e.funct3 << 12;
    const auto imm = static_cast<std::uint32_t>(in.imm);

    switch (format_of(in.op)) {
    case Format::R:
        return e.opcode | rd | f3 | rs1 | rs2 | (e.funct7 << 25);
    case Format::I:
    case Format::Fence:
        return e.opcode | rd | f3 | rs1 | (imm << 20);
    case Format::Shift:
    case Format::ShiftW:
        return e.opcode | rd | f3 | rs1 | (imm << 20) | (e.funct7 << 25);
    case Format::S:
        return e.opcode | ((imm & 0x1F) << 7) | f3 | rs1 | rs2 | ((imm >> 5) << 25);
    case Format::B:
        return e.opcode | (((imm >> 11) & 1) << 7) | (((imm >> 1) & 0xF) << 8) | f3 | rs1 | rs2 |
               (((imm >> 5) & 0x3F) << 25) | (((imm >> 12) & 1) << 31);
    case Format::U:
        return e.opcode | rd | (imm & 0xFFFFF000u);
    case Format::J:
        return e.opcode | rd | (imm & 0xFF000) | (((imm >> 11) & 1) << 20) |
               (((imm >> 1) & 0x3FF) << 21) | (((imm >> 20) & 1) << 31);
    case Format::System:
        return in.op == Mnemonic::EBREAK ? 0x00100073u : 0x00000073u;
    }
    return 0;
}

std::string disassemble(const Instr& in) {
    const std::string_view name = mnemonic_name(in.op);
    switch (format_of(in.op)) {
    case Format::R:
        return fmt::format("{} x{}, x{}, x{}", name, in.rd, in.rs1, in.rs2);
    case Format::I:
        if (is_load(in.op) || in.op == Mnemonic::JALR) {
            return fmt::format("{} x{}, {}(x{})", name, in.rd, in.imm, in.rs1);
        }
        return fmt::format("{} x{}, x{}, {}", name, in.rd, in.rs1, in.imm);
    case Format::Shift:
    case Format::ShiftW:
        return fmt::format("{} x{}, x{}, {}", name, in.rd, in.rs1, in.imm);
    case Format::S:
        return fmt::format("{} x{}, {}(x{})", name, in.rs2, in.imm, in.rs1);
    case Format::B:
        return fmt::format("{} x{}, x{}, {}", name, in.rs1, in.rs2, in.imm);
    case Format::U:
        return fmt::format("{} x{}, 0x{:x}", name, in.rd, (in.imm >> 12) & 0xFFFFF);
    case Format::J:
        return fmt::format("{} x{}, {}", name, in.rd, in.imm);
    case Format::Fence: {
        const auto bits = static_cast<std::uint32_t>(in.imm);
        const std::string_view fence = (bits >> 8) == 8 ? "fence.tso" : "fence";
        if (bits == 0x833) return std::string(fence);
        return fmt::format("{} {}, {}", fence, fence_set((bits >> 4) & 0xF), fence_set(bits & 0xF));
    }
    case Format::System:
        return std::string(name);
    }
    return std::string(name);
}

}  // namespace rv64um
