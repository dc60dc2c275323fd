#include "rv64um/syscall.hpp"

#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>

namespace rv64um {

std::int64_t PosixIo::write(int fd, std::span<const std::byte> data) {
    std::size_t done = 0;
    while (done < data.size()) {
        const ssize_t n = ::write(fd, data.data() + done, data.size() - done);
        if (n < 0) {
            if (errno == EINTR) continue;
            return done > 0 ? static_cast<std::int64_t>(done) : -errno;
        }
        done += static_cast<std::size_t>(n);
    }
    return static_cast<std::int64_t>(done);
}

std::int64_t PosixIo::read(int fd, std::span<std::byte> data) {
    for (;;) {
        const ssize_t n = ::read(fd, data.data(), data.size());
        if (n >= 0) return n;
        if (errno != EINTR) return -errno;
    }
}

std::int64_t BufferIo::write(int fd, std::span<const std::byte> data) {
    std::string* sink = fd == 1 ? &out : fd == 2 ? &err : nullptr;
    if (!sink) return -guest_errno::kEBADF;
    sink->append(reinterpret_cast<const char*>(data.data()), data.size());
    return static_cast<std::int64_t>(data.size());
}

std::int64_t BufferIo::read(int fd, std::span<std::byte> data) {
    if (fd != 0) return -guest_errno::kEBADF;
    const std::size_t n = std::min(data.size(), input.size() - input_pos_);
    std::memcpy(data.data(), input.data() + input_pos_, n);
    input_pos_ += n;
    return static_cast<std::int64_t>(n);
}

bool LinuxSyscalls::fd_allowed(std::int64_t fd) const {
    if (fd < 0 || fd > 0x7fffffff) return false;
    return config_.fd_passthrough || fd <= 2;
}

std::int64_t LinuxSyscalls::sys_write(std::int64_t fd, std::uint64_t buf, std::uint64_t len,
                                      MemoryImage& mem) {
    if (!fd_allowed(fd)) return -guest_errno::kEBADF;
    if (len == 0) return 0;
    return io_.write(static_cast<int>(fd), mem.bytes(buf, len));
}

std::int64_t LinuxSyscalls::sys_read(std::int64_t fd, std::uint64_t buf, std::uint64_t len,
                                     MemoryImage& mem) {
    if (!fd_allowed(fd)) return -guest_errno::kEBADF;
    if (len == 0) return 0;
    return io_.read(static_cast<int>(fd), mem.bytes(buf, len));
}

// Fills a riscv64 `struct stat` (128 bytes) describing a character device.
// Enough for freestanding startup code that probes stdio; sizes and times
// are zero.
std::int64_t LinuxSyscalls::sys_fstat(std::int64_t fd, std::uint64_t statbuf, MemoryImage& mem) {
    if (!fd_allowed(fd)) return -guest_errno::kEBADF;
    constexpr std::uint64_t kStatSize = 128;
    constexpr std::uint64_t kModeOffset = 16;
    constexpr std::uint64_t kBlkSizeOffset = 56;
    constexpr std::uint32_t kCharDevice = 0020620;  // S_IFCHR | 0620
    mem.fill(statbuf, kStatSize, std::byte{0});
    mem.store<std::uint32_t>(statbuf + kModeOffset, kCharDevice);
    mem.store<std::int32_t>(statbuf + kBlkSizeOffset, 1024);
    return 0;
}

// Linux semantics: an out-of-range request leaves the break unchanged and
// returns the current value.
std::int64_t LinuxSyscalls::sys_brk(std::uint64_t addr, MemoryImage& mem) {
    if (addr >= mem.heap_start() && addr <= mem.heap_limit()) {
        const std::uint64_t old = mem.brk();
        if (addr > old) mem.fill(old, addr - old, std::byte{0});
        mem.set_brk(addr);
    }
    return static_cast<std::int64_t>(mem.brk());
}

SyscallOutcome LinuxSyscalls::dispatch(const GuestState& state, MemoryImage& mem) {
    const auto& r = state.regs;
    const auto a0 = r[reg::kA0];
    switch (r[reg::kA7]) {
    case sysno::kWrite:
        return SyscallReturn{sys_write(static_cast<std::int64_t>(a0), r[reg::kA1], r[reg::kA2], mem)};
    case sysno::kRead:
        return SyscallReturn{sys_read(static_cast<std::int64_t>(a0), r[reg::kA1], r[reg::kA2], mem)};
    case sysno::kExit:
    case sysno::kExitGroup:
        return SyscallExit{static_cast<std::uint8_t>(a0 & 0xFF)};
    case sysno::kBrk:
        return SyscallReturn{sys_brk(a0, mem)};
    case sysno::kFstat:
        return SyscallReturn{sys_fstat(static_cast<std::int64_t>(a0), r[reg::kA1], mem)};
    case sysno::kSetTidAddress:
        return SyscallReturn{kGuestTid};
    default:
        return SyscallReturn{-guest_errno::kENOSYS};
    }
}

SyscallOutcome RecordingSyscalls::dispatch(const GuestState& state, MemoryImage& mem) {
    const auto& r = state.regs;
    records_.push_back({r[reg::kA7], {r[reg::kA0], r[reg::kA1], r[reg::kA2], r[reg::kA3],
                                      r[reg::kA4], r[reg::kA5]}});
    return inner_.dispatch(state, mem);
}

}  // namespace rv64um
