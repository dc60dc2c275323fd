#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace rv64um {

namespace reg {
inline constexpr unsigned kZero = 0;
inline constexpr unsigned kRa = 1;
inline constexpr unsigned kSp = 2;
inline constexpr unsigned kT0 = 5;
inline constexpr unsigned kT1 = 6;
inline constexpr unsigned kT2 = 7;
inline constexpr unsigned kA0 = 10;
inline constexpr unsigned kA1 = 11;
inline constexpr unsigned kA2 = 12;
inline constexpr unsigned kA3 = 13;
inline constexpr unsigned kA4 = 14;
inline constexpr unsigned kA5 = 15;
inline constexpr unsigned kA7 = 17;
inline constexpr unsigned kT3 = 28;
inline constexpr unsigned kT4 = 29;
inline constexpr unsigned kT5 = 30;
inline constexpr unsigned kT6 = 31;
}  // namespace reg

// Standard ABI name of x0..x31 ("zero", "ra", "sp", ..., "t6").
std::string_view abi_name(unsigned index);

struct GuestState {
    std::array<std::uint64_t, 32> regs{};
    std::uint64_t pc = 0;

    friend bool operator==(const GuestState&, const GuestState&) = default;
};

// "<name>=<16 lowercase hex digits>\n"
std::string hex_line(std::string_view name, std::uint64_t value);

// All 32 registers in hex_line form keyed by ABI name, followed by the pc.
// The t0..t3 lines are byte-identical to the benchmark epilogue's output.
std::string register_dump(const GuestState& state);

}  // namespace rv64um
