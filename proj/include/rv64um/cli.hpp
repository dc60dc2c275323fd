#pragma once

namespace rv64um::cli {

inline constexpr int kExitUsage = 2;
inline constexpr int kExitMismatch = 1;
inline constexpr int kExitDataErr = 65;  // unloadable guest image
inline constexpr int kExitNoInput = 66;  // guest file unreadable
inline constexpr int kExitGuestFault = 70;

// Entry point shared by the rv64um tool: subcommands run, benchgen, oracle
// and bench. Returns the process exit status.
int main(int argc, char** argv);

}  // namespace rv64um::cli
