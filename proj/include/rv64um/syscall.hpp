#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "rv64um/memory.hpp"
#include "rv64um/state.hpp"

namespace rv64um {

// Linux RISC-V syscall numbers (asm-generic table). These differ from the
// host's numbering, e.g. write is 64 here and 1 on x86-64.
namespace sysno {
inline constexpr std::uint64_t kRead = 63;
inline constexpr std::uint64_t kWrite = 64;
inline constexpr std::uint64_t kFstat = 80;
inline constexpr std::uint64_t kExit = 93;
inline constexpr std::uint64_t kExitGroup = 94;
inline constexpr std::uint64_t kSetTidAddress = 96;
inline constexpr std::uint64_t kBrk = 214;
}  // namespace sysno

// Guest errno values. Assumed numerically equal to the host's for every call
// implemented here.
namespace guest_errno {
inline constexpr std::int64_t kEBADF = 9;
inline constexpr std::int64_t kENOSYS = 38;
}  // namespace guest_errno

struct SyscallReturn {
    std::int64_t value;
    friend bool operator==(const SyscallReturn&, const SyscallReturn&) = default;
};

struct SyscallExit {
    std::uint8_t code;
    friend bool operator==(const SyscallExit&, const SyscallExit&) = default;
};

using SyscallOutcome = std::variant<SyscallReturn, SyscallExit>;

// Invoked on ECALL with the number in a7 and arguments in a0..a5. The machine
// writes a SyscallReturn value into a0 and advances pc; handlers only read
// registers. A guest buffer outside memory raises MemoryFault.
class SyscallHandler {
public:
    virtual ~SyscallHandler() = default;
    virtual SyscallOutcome dispatch(const GuestState& state, MemoryImage& mem) = 0;
};

// Host side of read/write. Returns a byte count or a negative errno.
class HostIo {
public:
    virtual ~HostIo() = default;
    virtual std::int64_t write(int fd, std::span<const std::byte> data) = 0;
    virtual std::int64_t read(int fd, std::span<std::byte> data) = 0;
};

// Guest fd n is host fd n.
class PosixIo final : public HostIo {
public:
    std::int64_t write(int fd, std::span<const std::byte> data) override;
    std::int64_t read(int fd, std::span<std::byte> data) override;
};

// In-memory stdio: fd 0 reads from `input`, fds 1 and 2 append to `out`/`err`.
class BufferIo final : public HostIo {
public:
    std::string input;
    std::string out;
    std::string err;

    std::int64_t write(int fd, std::span<const std::byte> data) override;
    std::int64_t read(int fd, std::span<std::byte> data) override;

private:
    std::size_t input_pos_ = 0;
};

struct SyscallConfig {
    // Only fds 0..2 are reachable unless passthrough is enabled.
    bool fd_passthrough = false;
};

class LinuxSyscalls final : public SyscallHandler {
public:
    static constexpr std::int64_t kGuestTid = 1;

    explicit LinuxSyscalls(HostIo& io, SyscallConfig config = {}) : io_(io), config_(config) {}

    SyscallOutcome dispatch(const GuestState& state, MemoryImage& mem) override;

private:
    bool fd_allowed(std::int64_t fd) const;
    std::int64_t sys_write(std::int64_t fd, std::uint64_t buf, std::uint64_t len, MemoryImage& mem);
    std::int64_t sys_read(std::int64_t fd, std::uint64_t buf, std::uint64_t len, MemoryImage& mem);
    std::int64_t sys_fstat(std::int64_t fd, std::uint64_t statbuf, MemoryImage& mem);
    std::int64_t sys_brk(std::uint64_t addr, MemoryImage& mem);

    HostIo& io_;
    SyscallConfig config_;
};

struct SyscallRecord {
    std::uint64_t number;
    std::array<std::uint64_t, 6> args;
    friend bool operator==(const SyscallRecord&, const SyscallRecord&) = default;
};

// Logs (number, a0..a5) of every call, then forwards to `inner`.
class RecordingSyscalls final : public SyscallHandler {
public:
    explicit RecordingSyscalls(SyscallHandler& inner) : inner_(inner) {}

    SyscallOutcome dispatch(const GuestState& state, MemoryImage& mem) override;
    const std::vector<SyscallRecord>& records() const noexcept { return records_; }

private:
    SyscallHandler& inner_;
    std::vector<SyscallRecord> records_;
};

}  // namespace rv64um
