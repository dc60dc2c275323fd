#include <doctest.h>

#include <unistd.h>

#include "test_support.hpp"

using namespace rv64um;

namespace {

struct Env {
    MemoryImage mem{0x10000, 0x10000};
    GuestState st;
    Env() { mem.set_heap(0x18000, 0x1c000); }
    void args(std::uint64_t n, std::initializer_list<std::uint64_t> a) {
        st.regs[reg::kA7] = n;
        unsigned i = reg::kA0;
        for (auto v : a) st.regs[i++] = v;
    }
};

}  // namespace

TEST_CASE("write hi to stdout") {
    Env e;
    e.mem.write(0x10100, std::as_bytes(std::span("hi", 2)));
    e.args(sysno::kWrite, {1, 0x10100, 2});
    BufferIo io;
    LinuxSyscalls sys(io);
    CHECK(sys.dispatch(e.st, e.mem) == SyscallOutcome{SyscallReturn{2}});
    CHECK(io.out == "hi");
}

TEST_CASE("exit, exit_group and unknown numbers") {
    Env e;
    BufferIo io;
    LinuxSyscalls sys(io);
    e.args(sysno::kExit, {0});
    CHECK(sys.dispatch(e.st, e.mem) == SyscallOutcome{SyscallExit{0}});
    e.args(sysno::kExitGroup, {300});
    CHECK(sys.dispatch(e.st, e.mem) == SyscallOutcome{SyscallExit{44}});
    e.args(9999, {});
    CHECK(sys.dispatch(e.st, e.mem) == SyscallOutcome{SyscallReturn{-38}});
    e.args(sysno::kSetTidAddress, {0});
    CHECK(sys.dispatch(e.st, e.mem) == SyscallOutcome{SyscallReturn{1}});
}

TEST_CASE("fds beyond stdio need passthrough") {
    Env e;
    BufferIo io;
    LinuxSyscalls sys(io);
    e.args(sysno::kWrite, {5, 0x10100, 1});
    CHECK(sys.dispatch(e.st, e.mem) == SyscallOutcome{SyscallReturn{-guest_errno::kEBADF}});
    e.args(sysno::kWrite, {1, 0x10100, 1});
    CHECK(sys.dispatch(e.st, e.mem) == SyscallOutcome{SyscallReturn{1}});
}

TEST_CASE("out of range buffer faults") {
    Env e;
    BufferIo io;
    LinuxSyscalls sys(io);
    e.args(sysno::kWrite, {1, 0x1fff0, 64});
    CHECK_THROWS_AS(sys.dispatch(e.st, e.mem), MemoryFault);
}

TEST_CASE("read from stdin") {
    Env e;
    BufferIo io;
    io.input = "abc";
    LinuxSyscalls sys(io);
    e.args(sysno::kRead, {0, 0x10200, 10});
    CHECK(sys.dispatch(e.st, e.mem) == SyscallOutcome{SyscallReturn{3}});
    CHECK(e.mem.load<std::uint8_t>(0x10202) == 'c');
    CHECK(sys.dispatch(e.st, e.mem) == SyscallOutcome{SyscallReturn{0}});
}

TEST_CASE("pipe loopback is byte-identical") {
    int fds[2];
    REQUIRE(pipe(fds) == 0);
    Env e;
    PosixIo io;
    LinuxSyscalls sys(io, SyscallConfig{true});
    std::string payload;
    for (int i = 0; i < 256; ++i) payload.push_back(static_cast<char>(i));
    e.mem.write(0x10000, std::as_bytes(std::span(payload)));
    e.args(sysno::kWrite, {static_cast<std::uint64_t>(fds[1]), 0x10000, 256});
    CHECK(sys.dispatch(e.st, e.mem) == SyscallOutcome{SyscallReturn{256}});
    e.args(sysno::kRead, {static_cast<std::uint64_t>(fds[0]), 0x11000, 256});
    CHECK(sys.dispatch(e.st, e.mem) == SyscallOutcome{SyscallReturn{256}});
    close(fds[0]);
    close(fds[1]);
    auto back = e.mem.bytes(0x11000, 256);
    CHECK(std::memcmp(back.data(), payload.data(), 256) == 0);
}

TEST_CASE("brk moves within the heap") {
    Env e;
    BufferIo io;
    LinuxSyscalls sys(io);
    e.args(sysno::kBrk, {0});
    CHECK(sys.dispatch(e.st, e.mem) == SyscallOutcome{SyscallReturn{0x18000}});
    e.mem.store<std::uint8_t>(0x18010, 7);
    e.args(sysno::kBrk, {0x18020});
    CHECK(sys.dispatch(e.st, e.mem) == SyscallOutcome{SyscallReturn{0x18020}});
    e.args(sysno::kBrk, {0x20000000});
    CHECK(sys.dispatch(e.st, e.mem) == SyscallOutcome{SyscallReturn{0x18020}});
    e.args(sysno::kBrk, {0x18000});
    sys.dispatch(e.st, e.mem);
    e.args(sysno::kBrk, {0x18100});
    sys.dispatch(e.st, e.mem);
    CHECK(e.mem.load<std::uint8_t>(0x18010) == 0);
}

TEST_CASE("fstat reports a character device") {
    Env e;
    BufferIo io;
    LinuxSyscalls sys(io);
    e.args(sysno::kFstat, {1, 0x10400});
    CHECK(sys.dispatch(e.st, e.mem) == SyscallOutcome{SyscallReturn{0}});
    CHECK((e.mem.load<std::uint32_t>(0x10400 + 16) & 0170000) == 0020000);
}

TEST_CASE("only a0 changes across an ecall") {
    using M = Mnemonic;
    test::Harness h({test::enc(M::ECALL, 0, 0, 0)});
    for (unsigned r = 1; r < 32; ++r) h.x(r) = 0x1000 + r;
    h.x(reg::kA7) = 9999;
    const GuestState before = h.machine.state();
    h.machine.step();
    GuestState after = h.machine.state();
    CHECK(after.regs[reg::kA0] == static_cast<std::uint64_t>(-38));
    after.regs[reg::kA0] = before.regs[reg::kA0];
    after.pc -= 4;
    CHECK(after == before);
}

TEST_CASE("benchmark syscall sequence") {
    BufferIo io;
    LinuxSyscalls linux_calls(io);
    RecordingSyscalls rec(linux_calls);
    auto cap = test::run_elf(bench::generate({1000, bench::kDefaultInit, {}}), {}, &rec);
    REQUIRE(rec.records().size() == 2);
    CHECK(rec.records()[0].number == sysno::kWrite);
    CHECK(rec.records()[0].args[0] == 1);
    CHECK(rec.records()[0].args[2] == bench::kDumpBytes);
    CHECK(rec.records()[1].number == sysno::kExit);
    CHECK(rec.records()[1].args[0] == 0);
    CHECK(io.out.size() == bench::kDumpBytes);
}
