#include "rv64um/state.hpp"

#include <fmt/format.h>

namespace rv64um {

namespace {
constexpr std::array<std::string_view, 32> kAbiNames = {
    "zero", "ra", "sp", "gp", "tp", "t0", "t1", "t2",
    "s0",   "s1", "a0", "a1", "a2", "a3", "a4", "a5",
    "a6",   "a7", "s2", "s3", "s4", "s5", "s6", "s7",
    "s8",   "s9", "s10", "s11", "t3", "t4", "t5", "t6",
};
}  // namespace

std::string_view abi_name(unsigned index) { return kAbiNames.at(index); }

std::string hex_line(std::string_view name, std::uint64_t value) {
    return fmt::format("{}={:016x}\n", name, value);
}

std::string register_dump(const GuestState& state) {
    std::string out;
    for (unsigned i = 0; i < 32; ++i) out += hex_line(kAbiNames[i], state.regs[i]);
    out += hex_line("pc", state.pc);
    return out;
}

}  // namespace rv64um
