#include <doctest.h>

#include <random>

#include "rv64um/isa.hpp"

using namespace rv64um;

namespace {

struct Golden {
    const char* text;
    Instr instr;
    std::uint32_t word;
};

const Golden kGolden[] = {
#include "isa_golden.inc"
};

std::int64_t raw_field(std::uint32_t w, Format f) {
    switch (f) {
        case Format::I: return w >> 20;
        case Format::S: return ((w >> 25) << 5) | ((w >> 7) & 0x1f);
        case Format::B:
            return (((w >> 31) & 1) << 12) | (((w >> 7) & 1) << 11) | (((w >> 25) & 0x3f) << 5) |
                   (((w >> 8) & 0xf) << 1);
        case Format::J:
            return (((w >> 31) & 1) << 20) | (((w >> 12) & 0xff) << 12) | (((w >> 20) & 1) << 11) |
                   (((w >> 21) & 0x3ff) << 1);
        default: return 0;
    }
}

int field_width(Format f) {
    switch (f) {
        case Format::I:
        case Format::S: return 12;
        case Format::B: return 13;
        case Format::J: return 21;
        default: return 0;
    }
}

}  // namespace

TEST_CASE("decode canonical nop and add") {
    CHECK(decode(0x00000013) == Instr{Mnemonic::ADDI, 0, 0, 0, 0});
    CHECK(decode(0x007302B3) == Instr{Mnemonic::ADD, 5, 6, 7, 0});
}

TEST_CASE("decode rejects unknown opcodes") {
    CHECK_THROWS_AS(decode(0xFFFFFFFF), IllegalInstruction);
    CHECK_FALSE(try_decode(0xFFFFFFFF).has_value());
    CHECK_FALSE(try_decode(0x00000000).has_value());
    // compressed encodings (low bits != 11)
    CHECK_FALSE(try_decode(0x00000001).has_value());
    // mul x5, x6, x7 is RV64M
    CHECK_FALSE(try_decode(0x027302b3).has_value());
    // csrrw x0, 0x300, x1
    CHECK_FALSE(try_decode(0x30009073).has_value());
    try {
        decode(0xFFFFFFFF);
    } catch (const IllegalInstruction& e) {
        CHECK(e.word() == 0xFFFFFFFFu);
    }
}

TEST_CASE("encode examples") {
    CHECK(encode(Instr{Mnemonic::ADDI, 0, 0, 0, 0}) == 0x00000013u);
    CHECK(encode(Instr{Mnemonic::ADD, 5, 6, 7, 0}) == 0x007302B3u);
    CHECK_THROWS_AS(encode(Instr{Mnemonic::ADDI, 1, 1, 0, 4096}), ImmediateOutOfRange);
}

TEST_CASE("encode range errors") {
    CHECK_THROWS_AS(encode(Instr{Mnemonic::ADDI, 1, 1, 0, 2048}), ImmediateOutOfRange);
    CHECK_THROWS_AS(encode(Instr{Mnemonic::ADDI, 1, 1, 0, -2049}), ImmediateOutOfRange);
    CHECK_THROWS_AS(encode(Instr{Mnemonic::BEQ, 0, 1, 2, 3}), ImmediateOutOfRange);
    CHECK_THROWS_AS(encode(Instr{Mnemonic::BEQ, 0, 1, 2, 4096}), ImmediateOutOfRange);
    CHECK_THROWS_AS(encode(Instr{Mnemonic::JAL, 1, 0, 0, 1 << 20}), ImmediateOutOfRange);
    CHECK_THROWS_AS(encode(Instr{Mnemonic::LUI, 1, 0, 0, 0x800}), ImmediateOutOfRange);
    CHECK_THROWS_AS(encode(Instr{Mnemonic::SLLI, 1, 1, 0, 64}), ImmediateOutOfRange);
    CHECK_THROWS_AS(encode(Instr{Mnemonic::SLLIW, 1, 1, 0, 32}), ImmediateOutOfRange);
    CHECK_THROWS_AS(encode(Instr{Mnemonic::ADD, 32, 1, 1, 0}), InvalidOperand);
}

TEST_CASE("disassembly") {
    CHECK(disassemble(Instr{Mnemonic::ADD, 5, 6, 7, 0}) == "add x5, x6, x7");
    CHECK(disassemble(Instr{Mnemonic::ADDI, 0, 0, 0, 0}) == "addi x0, x0, 0");
    CHECK(disassemble(Instr{Mnemonic::JAL, 1, 0, 0, -8}) == "jal x1, -8");
    CHECK(disassemble(Instr{Mnemonic::LD, 5, 2, 0, 8}) == "ld x5, 8(x2)");
    CHECK(disassemble(Instr{Mnemonic::ECALL, 0, 0, 0, 0}) == "ecall");
}

TEST_CASE("golden table from an external assembler") {
    for (const auto& g : kGolden) {
        const std::string text = g.text;
        CAPTURE(text);
        CHECK(encode(g.instr) == g.word);
        CHECK(decode(g.word) == g.instr);
        CHECK(disassemble(g.instr) == text);
    }
}

TEST_CASE("every mnemonic has a name and format") {
    for (int i = 0; i < kMnemonicCount; ++i) {
        auto m = static_cast<Mnemonic>(i);
        CHECK_FALSE(mnemonic_name(m).empty());
        auto r = imm_range(m);
        CHECK(r.min <= r.max);
        CHECK(r.align >= 1);
    }
}

TEST_CASE("random words round-trip and sign-extend") {
    std::mt19937_64 rng(12345);
    int decoded = 0;
    for (int i = 0; i < 200000; ++i) {
        const auto w = static_cast<std::uint32_t>(rng());
        auto in = try_decode(w);
        if (!in) continue;
        ++decoded;
        REQUIRE(encode(*in) == w);
        REQUIRE(decode(encode(*in)) == *in);
        const Format f = format_of(in->op);
        if (int width = field_width(f)) {
            const std::int64_t raw = raw_field(w, f);
            const std::int64_t expect = raw >= (std::int64_t{1} << (width - 1)) ? raw - (std::int64_t{1} << width) : raw;
            // shift-immediates share the I opcode but keep the raw shamt
            REQUIRE(in->imm == expect);
        }
        if (f == Format::B || f == Format::J) REQUIRE(in->imm % 2 == 0);
        if (f == Format::U) REQUIRE((in->imm & 0xfff) == 0);
    }
    CHECK(decoded > 1000);
}
