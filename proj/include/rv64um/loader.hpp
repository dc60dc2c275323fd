#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rv64um/memory.hpp"
#include "rv64um/state.hpp"

namespace rv64um {

inline constexpr std::uint16_t kElfMachineRiscV = 243;

enum class LoadErrorKind {
    BadMagic,
    UnsupportedClass,
    UnsupportedArchitecture,
    UnsupportedType,
    SegmentOutOfRange,
    Malformed,
    StackOverflow,
};

std::string_view load_error_name(LoadErrorKind kind) noexcept;

class LoadError : public std::runtime_error {
public:
    LoadError(LoadErrorKind kind, const std::string& what);
    LoadErrorKind kind() const noexcept { return kind_; }

private:
    LoadErrorKind kind_;
};

struct LoadConfig {
    std::uint64_t memory_size = 256ull << 20;
    std::uint64_t stack_size = 8ull << 20;
    BoundsMode bounds = BoundsMode::Checked;
    // Adds AT_PAGESZ ahead of the AT_NULL terminator in the auxiliary vector.
    bool auxv_page_size = false;
};

struct LoadedImage {
    MemoryImage mem;
    std::uint64_t entry = 0;
    std::uint64_t initial_sp = 0;
    std::uint64_t stack_bottom = 0;
    std::vector<std::string> argv;
    std::vector<std::string> envp;
};

// Maps every PT_LOAD segment of a static RISC-V ELF64 executable into a flat
// image based at the lowest segment address (rounded down to a page). The
// top `stack_size` bytes of the image are reserved for the stack and the
// program break starts at the page-aligned end of the highest segment.
// The stack is left empty; call build_stack() before running.
LoadedImage load_elf(std::span<const std::byte> file, const LoadConfig& config = {});

// Lays out the Linux process-start block below the top of memory and returns
// the new stack pointer (also stored in image.initial_sp):
//
//   sp -> argc | argv[0..argc) | 0 | envp[..] | 0 | auxv pairs | AT_NULL 0
//         ... padding ... | argument and environment strings | top
std::uint64_t build_stack(LoadedImage& image, std::vector<std::string> argv,
                          std::vector<std::string> envp, bool auxv_page_size = false);

// load_elf() followed by build_stack().
LoadedImage load_program(std::span<const std::byte> file, std::vector<std::string> argv,
                         std::vector<std::string> envp, const LoadConfig& config = {});

// pc = entry, sp = initial_sp, everything else zero.
GuestState initial_state(const LoadedImage& image);

std::vector<std::byte> read_binary_file(const std::filesystem::path& path);

}  // namespace rv64um
