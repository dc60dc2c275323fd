#pragma once

#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>

namespace rv64um {

class MemoryFault : public std::runtime_error {
public:
    MemoryFault(std::uint64_t addr, std::uint64_t len);
    std::uint64_t addr() const noexcept { return addr_; }
    std::uint64_t len() const noexcept { return len_; }

private:
    std::uint64_t addr_;
    std::uint64_t len_;
};

enum class BoundsMode { Checked, Unchecked };

// Flat guest memory covering [base, base + size). Guest addresses map to host
// offsets by subtracting `base`; there is no page table and no per-region
// protection.
//
// In Unchecked mode accesses skip the bounds test and an out-of-range guest
// access touches whatever host memory lies at that offset.
class MemoryImage {
public:
    static constexpr std::uint64_t kPageSize = 4096;

    MemoryImage(std::uint64_t base, std::uint64_t size, BoundsMode mode = BoundsMode::Checked);

    MemoryImage(MemoryImage&&) noexcept = default;
    MemoryImage& operator=(MemoryImage&&) noexcept = default;
    MemoryImage(const MemoryImage&) = delete;
    MemoryImage& operator=(const MemoryImage&) = delete;

    MemoryImage clone() const;

    std::uint64_t base() const noexcept { return base_; }
    std::uint64_t size() const noexcept { return size_; }
    std::uint64_t end() const noexcept { return base_ + size_; }
    BoundsMode mode() const noexcept { return mode_; }
    void set_mode(BoundsMode mode) noexcept { mode_ = mode; }

    // Program break and the range it may move within. Defaults to the whole
    // image; the loader narrows it to [end of last segment, stack bottom].
    std::uint64_t brk() const noexcept { return brk_; }
    std::uint64_t heap_start() const noexcept { return heap_start_; }
    std::uint64_t heap_limit() const noexcept { return heap_limit_; }
    void set_heap(std::uint64_t start, std::uint64_t limit);
    void set_brk(std::uint64_t brk);

    bool contains(std::uint64_t addr, std::uint64_t len) const noexcept {
        return len >= 1 && addr >= base_ && addr - base_ <= size_ && len <= size_ - (addr - base_);
    }

    // Host offset of `addr`, or nullopt when any byte of [addr, addr + len)
    // lies outside the image. Unchecked mode always succeeds.
    std::optional<std::uint64_t> translate(std::uint64_t addr, std::uint64_t len) const noexcept {
        if (mode_ == BoundsMode::Checked && !contains(addr, len)) return std::nullopt;
        return addr - base_;
    }

    template <typename T>
    T load(std::uint64_t addr) const {
        T v;
        std::memcpy(&v, data_.get() + offset_or_throw(addr, sizeof(T)), sizeof(T));
        return v;
    }

    template <typename T>
    void store(std::uint64_t addr, T v) {
        std::memcpy(data_.get() + offset_or_throw(addr, sizeof(T)), &v, sizeof(T));
    }

    std::span<std::byte> bytes(std::uint64_t addr, std::uint64_t len);
    std::span<const std::byte> bytes(std::uint64_t addr, std::uint64_t len) const;

    void write(std::uint64_t addr, std::span<const std::byte> src);
    void fill(std::uint64_t addr, std::uint64_t len, std::byte value);

    // Whole backing store, for comparisons and snapshots.
    std::span<const std::byte> raw() const noexcept { return {data_.get(), size_}; }

private:
    std::uint64_t offset_or_throw(std::uint64_t addr, std::uint64_t len) const {
        if (auto off = translate(addr, len)) return *off;
        throw MemoryFault(addr, len);
    }

    struct FreeDeleter {
        void operator()(std::byte* p) const noexcept { std::free(p); }
    };

    std::uint64_t base_;
    std::uint64_t size_;
    std::uint64_t brk_;
    std::uint64_t heap_start_;
    std::uint64_t heap_limit_;
    BoundsMode mode_;
    std::unique_ptr<std::byte[], FreeDeleter> data_;
};

}  // namespace rv64um
