#pragma once

#include <elf.h>

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

#include "rv64um/benchgen.hpp"
#include "rv64um/elf_writer.hpp"
#include "rv64um/isa.hpp"
#include "rv64um/loader.hpp"
#include "rv64um/machine.hpp"
#include "rv64um/syscall.hpp"

namespace rv64um::test {

inline constexpr std::uint64_t kCodeBase = 0x10000;

inline std::uint32_t enc(Mnemonic op, unsigned rd, unsigned rs1, unsigned rs2, std::int64_t imm = 0) {
    return encode(Instr{op, static_cast<std::uint8_t>(rd), static_cast<std::uint8_t>(rs1),
                        static_cast<std::uint8_t>(rs2), imm});
}

inline std::vector<std::byte> elf_from_words(const std::vector<std::uint32_t>& words,
                                             std::uint64_t vaddr = kCodeBase) {
    ElfSegment text{vaddr, words_to_bytes(words), words.size() * 4, PF_R | PF_X};
    return write_elf(std::span(&text, 1), vaddr);
}

// A small machine with `words` at kCodeBase and pc pointing at them.
struct Harness {
    BufferIo io;
    LinuxSyscalls syscalls{io};
    Machine machine;

    explicit Harness(const std::vector<std::uint32_t>& words, std::uint64_t mem_size = 1 << 20)
        : machine(GuestState{}, MemoryImage(kCodeBase, mem_size), syscalls) {
        machine.state().pc = kCodeBase;
        for (std::size_t i = 0; i < words.size(); ++i) machine.memory().store(kCodeBase + 4 * i, words[i]);
    }
    std::uint64_t& x(unsigned r) { return machine.state().regs[r]; }
};

// Loads and runs a full ELF image with in-memory stdio.
struct RunCapture {
    RunResult result;
    GuestState final_state;
    std::string out;
    std::string err;
};

inline RunCapture run_elf(std::span<const std::byte> elf, std::optional<std::uint64_t> max_steps = {},
                          SyscallHandler* wrap = nullptr, std::vector<std::string> argv = {"guest"}) {
    BufferIo io;
    LinuxSyscalls linux_calls(io);
    RecordingSyscalls recorder(linux_calls);
    LoadedImage image = load_program(elf, std::move(argv), {});
    SyscallHandler& handler = wrap ? *wrap : static_cast<SyscallHandler&>(linux_calls);
    Machine m(initial_state(image), std::move(image.mem), handler);
    RunCapture cap{m.run(RunLimits{max_steps}), {}, {}, {}};
    cap.final_state = m.state();
    cap.out = io.out;
    cap.err = io.err;
    return cap;
}

}  // namespace rv64um::test
