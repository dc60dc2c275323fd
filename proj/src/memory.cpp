#include "rv64um/memory.hpp"

#include <fmt/format.h>

#include <new>

namespace rv64um {

MemoryFault::MemoryFault(std::uint64_t addr, std::uint64_t len)
    : std::runtime_error(fmt::format("memory fault at 0x{:x} (len {})", addr, len)),
      addr_(addr),
      len_(len) {}

MemoryImage::MemoryImage(std::uint64_t base, std::uint64_t size, BoundsMode mode)
    : base_(base), size_(size), brk_(base), heap_start_(base), heap_limit_(base + size), mode_(mode) {
    if (size == 0 || base + size < base) {
        throw std::invalid_argument("memory image must be non-empty and not wrap the address space");
    }
    // calloc hands back lazily zeroed pages for large sizes, so an untouched
    // 256 MiB image costs nothing up front.
    data_.reset(static_cast<std::byte*>(std::calloc(size, 1)));
    if (!data_) throw std::bad_alloc();
}

MemoryImage MemoryImage::clone() const {
    MemoryImage copy(base_, size_, mode_);
    std::memcpy(copy.data_.get(), data_.get(), size_);
    copy.brk_ = brk_;
    copy.heap_start_ = heap_start_;
    copy.heap_limit_ = heap_limit_;
    return copy;
}

void MemoryImage::set_heap(std::uint64_t start, std::uint64_t limit) {
    if (start < base_ || start > limit || limit > end()) {
        throw std::out_of_range(fmt::format("heap [0x{:x}, 0x{:x}] outside image", start, limit));
    }
    heap_start_ = start;
    heap_limit_ = limit;
    brk_ = start;
}

void MemoryImage::set_brk(std::uint64_t brk) {
    if (brk < heap_start_ || brk > heap_limit_) {
        throw std::out_of_range(fmt::format("program break 0x{:x} outside image", brk));
    }
    brk_ = brk;
}

std::span<std::byte> MemoryImage::bytes(std::uint64_t addr, std::uint64_t len) {
    if (len == 0) return {};
    return {data_.get() + offset_or_throw(addr, len), len};
}

std::span<const std::byte> MemoryImage::bytes(std::uint64_t addr, std::uint64_t len) const {
    if (len == 0) return {};
    return {data_.get() + offset_or_throw(addr, len), len};
}

void MemoryImage::write(std::uint64_t addr, std::span<const std::byte> src) {
    auto dst = bytes(addr, src.size());
    if (!src.empty()) std::memcpy(dst.data(), src.data(), src.size());
}

void MemoryImage::fill(std::uint64_t addr, std::uint64_t len, std::byte value) {
    auto dst = bytes(addr, len);
    if (!dst.empty()) std::memset(dst.data(), static_cast<int>(value), dst.size());
}

}  // namespace rv64um
