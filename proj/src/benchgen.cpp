#include "rv64um/benchgen.hpp"

#include <elf.h>
#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <thread>

#include "rv64um/elf_writer.hpp"
#include "rv64um/state.hpp"

namespace rv64um::bench {

namespace {

constexpr std::int64_t sext12(std::uint64_t v) {
    return static_cast<std::int64_t>((v & 0xFFF) ^ 0x800) - 0x800;
}

constexpr bool fits_int32(std::int64_t v) { return v >= INT32_MIN && v <= INT32_MAX; }

struct Emitter {
    std::vector<std::uint32_t>& words;
    void operator()(Mnemonic op, unsigned rd, unsigned rs1, unsigned rs2, std::int64_t imm) {
        words.push_back(encode(Instr{op, static_cast<std::uint8_t>(rd), static_cast<std::uint8_t>(rs1),
                                     static_cast<std::uint8_t>(rs2), imm}));
    }
};

// Formats the four bench registers onto a stack buffer and writes it out.
// Uses only t4/t5 as scratch so the values being printed stay intact.
void emit_epilogue(Emitter& emit) {
    using M = Mnemonic;
    constexpr unsigned kLine = 3 + 16 + 1;
    emit(M::ADDI, reg::kSp, reg::kSp, 0, -static_cast<std::int64_t>(kDumpBytes));
    for (unsigned k = 0; k < kRegPeriod; ++k) {
        const unsigned src = kBenchRegs[k];
        const auto line = static_cast<std::int64_t>(k * kLine);
        const std::string_view name = abi_name(src);
        emit(M::ADDI, reg::kT4, 0, 0, name[0]);
        emit(M::SB, 0, reg::kSp, reg::kT4, line + 0);
        emit(M::ADDI, reg::kT4, 0, 0, name[1]);
        emit(M::SB, 0, reg::kSp, reg::kT4, line + 1);
        emit(M::ADDI, reg::kT4, 0, 0, '=');
        emit(M::SB, 0, reg::kSp, reg::kT4, line + 2);
        for (unsigned j = 0; j < 16; ++j) {
            const unsigned shift = 60 - 4 * j;
            if (shift != 0) {
                emit(M::SRLI, reg::kT4, src, 0, shift);
                emit(M::ANDI, reg::kT4, reg::kT4, 0, 15);
            } else {
                emit(M::ANDI, reg::kT4, src, 0, 15);
            }
            // nibble + '0', plus ('a' - '0' - 10) when the nibble is >= 10
            emit(M::SLTIU, reg::kT5, reg::kT4, 0, 10);
            emit(M::ADDI, reg::kT5, reg::kT5, 0, -1);
            emit(M::ANDI, reg::kT5, reg::kT5, 0, 'a' - '0' - 10);
            emit(M::ADD, reg::kT4, reg::kT4, reg::kT5, 0);
            emit(M::ADDI, reg::kT4, reg::kT4, 0, '0');
            emit(M::SB, 0, reg::kSp, reg::kT4, line + 3 + j);
        }
        emit(M::ADDI, reg::kT4, 0, 0, '\n');
        emit(M::SB, 0, reg::kSp, reg::kT4, line + kLine - 1);
    }
    emit(M::ADDI, reg::kA0, 0, 0, 1);
    emit(M::ADDI, reg::kA1, reg::kSp, 0, 0);
    emit(M::ADDI, reg::kA2, 0, 0, static_cast<std::int64_t>(kDumpBytes));
    emit(M::ADDI, reg::kA7, 0, 0, 64);
    emit(M::ECALL, 0, 0, 0, 0);
    emit(M::ADDI, reg::kA0, 0, 0, 0);
    emit(M::ADDI, reg::kA7, 0, 0, 93);
    emit(M::ECALL, 0, 0, 0, 0);
}

struct ScheduleEntry {
    Op op;
    std::uint8_t rd, rs1, rs2;
};

// The op and register cycles repeat together every lcm(3, 4) = 12 steps.
constexpr std::size_t kSchedulePeriod = 12;

std::array<ScheduleEntry, kSchedulePeriod> make_schedule(const SchemeParams& s) {
    std::array<ScheduleEntry, kSchedulePeriod> out{};
    for (std::size_t i = 0; i < kSchedulePeriod; ++i) {
        out[i] = {s.op_order[i % kOpPeriod], static_cast<std::uint8_t>((i + s.a) % kRegPeriod),
                  static_cast<std::uint8_t>((i + s.b) % kRegPeriod),
                  static_cast<std::uint8_t>((i + s.c) % kRegPeriod)};
    }
    return out;
}

}  // namespace

Mnemonic mnemonic_of(Op op) noexcept {
    switch (op) {
    case Op::Add: return Mnemonic::ADD;
    case Op::Sub: return Mnemonic::SUB;
    case Op::Sll: return Mnemonic::SLL;
    }
    return Mnemonic::ADD;
}

std::string_view op_name(Op op) noexcept { return mnemonic_name(mnemonic_of(op)); }

std::optional<Op> parse_op(std::string_view name) noexcept {
    for (Op op : {Op::Add, Op::Sub, Op::Sll}) {
        if (op_name(op) == name) return op;
    }
    return std::nullopt;
}

bool SchemeParams::valid() const noexcept {
    if (a >= kRegPeriod || b >= kRegPeriod || c >= kRegPeriod) return false;
    auto sorted = op_order;
    std::sort(sorted.begin(), sorted.end());
    return sorted == std::array<Op, kOpPeriod>{Op::Add, Op::Sub, Op::Sll};
}

std::string SchemeParams::to_string() const {
    return fmt::format("a={} b={} c={} ops={},{},{}", a, b, c, op_name(op_order[0]), op_name(op_order[1]),
                       op_name(op_order[2]));
}

std::vector<Instr> materialize(std::uint8_t rd, std::uint64_t value) {
    const auto v = static_cast<std::int64_t>(value);
    if (fits_int32(v)) {
        const std::int64_t hi = (v + 0x800) >> 12;
        const std::int64_t lo = v - hi * 4096;
        const auto upper = static_cast<std::int64_t>(static_cast<std::int32_t>(static_cast<std::uint32_t>(hi << 12)));
        return {Instr{Mnemonic::LUI, rd, 0, 0, upper}, Instr{Mnemonic::ADDIW, rd, rd, 0, lo}};
    }
    // value = (hi << 12) + lo (mod 2^64)
    const std::int64_t lo = sext12(value);
    const std::uint64_t rest = value - static_cast<std::uint64_t>(lo);
    const auto hi = static_cast<std::uint64_t>(static_cast<std::int64_t>(rest) >> 12);
    std::vector<Instr> seq = materialize(rd, hi);
    seq.push_back(Instr{Mnemonic::SLLI, rd, rd, 0, 12});
    if (lo != 0) seq.push_back(Instr{Mnemonic::ADDI, rd, rd, 0, lo});
    return seq;
}

BenchProgram assemble(const BenchSpec& spec) {
    if (!spec.scheme.valid()) throw std::invalid_argument("invalid scheme: " + spec.scheme.to_string());
    BenchProgram prog;
    prog.words.reserve(spec.count + 512);
    Emitter emit{prog.words};

    for (std::size_t k = 0; k < kRegPeriod; ++k) {
        for (const Instr& in : materialize(kBenchRegs[k], spec.init[k])) prog.words.push_back(encode(in));
    }

    prog.body_begin = prog.words.size();
    const auto schedule = make_schedule(spec.scheme);
    std::array<std::uint32_t, kSchedulePeriod> encoded{};
    for (std::size_t i = 0; i < kSchedulePeriod; ++i) {
        const auto& e = schedule[i];
        encoded[i] = encode(Instr{mnemonic_of(e.op), kBenchRegs[e.rd], kBenchRegs[e.rs1], kBenchRegs[e.rs2], 0});
    }
    for (std::uint64_t i = 0; i < spec.count; ++i) prog.words.push_back(encoded[i % kSchedulePeriod]);
    prog.body_end = prog.words.size();

    emit_epilogue(emit);
    return prog;
}

std::vector<std::byte> generate(const BenchSpec& spec) {
    const BenchProgram prog = assemble(spec);
    ElfSegment text;
    text.vaddr = kTextBase;
    text.data = words_to_bytes(prog.words);
    text.mem_size = text.data.size();
    text.flags = PF_R | PF_X;
    return write_elf(std::span(&text, 1), kTextBase);
}

RegValues oracle_simulate(const BenchSpec& spec) {
    const auto schedule = make_schedule(spec.scheme);
    RegValues r = spec.init;
    std::uint64_t i = 0;
    auto apply = [&r](const ScheduleEntry& e) {
        const std::uint64_t x = r[e.rs1];
        const std::uint64_t y = r[e.rs2];
        switch (e.op) {
        case Op::Add: r[e.rd] = x + y; break;
        case Op::Sub: r[e.rd] = x - y; break;
        case Op::Sll: r[e.rd] = x << (y & 63); break;
        }
    };
    for (; i + kSchedulePeriod <= spec.count; i += kSchedulePeriod) {
        for (const auto& e : schedule) apply(e);
    }
    for (std::size_t j = 0; i < spec.count; ++i, ++j) apply(schedule[j]);
    return r;
}

std::string render_dump(const RegValues& values) {
    std::string out;
    for (std::size_t k = 0; k < kRegPeriod; ++k) out += hex_line(abi_name(kBenchRegs[k]), values[k]);
    return out;
}

std::vector<SchemeParams> all_schemes() {
    std::array<Op, kOpPeriod> order = {Op::Add, Op::Sub, Op::Sll};
    std::vector<std::array<Op, kOpPeriod>> perms;
    do {
        perms.push_back(order);
    } while (std::next_permutation(order.begin(), order.end()));

    std::vector<SchemeParams> out;
    for (std::uint8_t a = 0; a < kRegPeriod; ++a)
        for (std::uint8_t b = 0; b < kRegPeriod; ++b)
            for (std::uint8_t c = 0; c < kRegPeriod; ++c)
                for (const auto& p : perms) out.push_back(SchemeParams{a, b, c, p});
    return out;
}

std::optional<SchemeParams> find_matching_scheme(const RegValues& target, std::uint64_t count,
                                                 const RegValues& init, unsigned threads) {
    const auto candidates = all_schemes();
    std::vector<char> matched(candidates.size(), 0);
    std::atomic<std::size_t> next{0};

    auto worker = [&] {
        for (std::size_t i = next++; i < candidates.size(); i = next++) {
            matched[i] = oracle_simulate(BenchSpec{count, init, candidates[i]}) == target;
        }
    };
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(candidates.size()));
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
        worker();
    }

    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (matched[i]) return candidates[i];
    }
    return std::nullopt;
}

}  // namespace rv64um::bench
