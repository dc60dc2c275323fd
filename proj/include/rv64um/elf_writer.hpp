#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace rv64um {

struct ElfSegment {
    std::uint64_t vaddr = 0;
    std::vector<std::byte> data;
    std::uint64_t mem_size = 0;  // >= data.size(); the excess is BSS
    std::uint32_t flags = 0;     // PF_R / PF_W / PF_X
};

// Minimal static RISC-V ELF64 executable: ELF header, one PT_LOAD program
// header per segment, no section headers. Each segment's file offset is
// congruent to its vaddr modulo the page size.
std::vector<std::byte> write_elf(std::span<const ElfSegment> segments, std::uint64_t entry);

std::vector<std::byte> words_to_bytes(std::span<const std::uint32_t> words);

}  // namespace rv64um
