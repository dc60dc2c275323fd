#include "rv64um/loader.hpp"

#include <elf.h>
#include <fmt/format.h>

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>

namespace rv64um {

static_assert(std::endian::native == std::endian::little,
              "ELF parsing and guest memory assume a little-endian host");

namespace {

constexpr std::uint64_t kPage = MemoryImage::kPageSize;

constexpr std::uint64_t align_down(std::uint64_t v, std::uint64_t a) { return v & ~(a - 1); }
constexpr std::uint64_t align_up(std::uint64_t v, std::uint64_t a) { return (v + a - 1) & ~(a - 1); }

template <typename T>
T read_struct(std::span<const std::byte> file, std::uint64_t offset, const char* what) {
    if (offset > file.size() || file.size() - offset < sizeof(T)) {
        throw LoadError(LoadErrorKind::Malformed, fmt::format("truncated {}", what));
    }
    T v;
    std::memcpy(&v, file.data() + offset, sizeof(T));
    return v;
}

}  // namespace

std::string_view load_error_name(LoadErrorKind kind) noexcept {
    switch (kind) {
    case LoadErrorKind::BadMagic: return "BadMagic";
    case LoadErrorKind::UnsupportedClass: return "UnsupportedClass";
    case LoadErrorKind::UnsupportedArchitecture: return "UnsupportedArchitecture";
    case LoadErrorKind::UnsupportedType: return "UnsupportedType";
    case LoadErrorKind::SegmentOutOfRange: return "SegmentOutOfRange";
    case LoadErrorKind::Malformed: return "Malformed";
    case LoadErrorKind::StackOverflow: return "StackOverflow";
    }
    return "LoadError";
}

LoadError::LoadError(LoadErrorKind kind, const std::string& what)
    : std::runtime_error(fmt::format("{}: {}", load_error_name(kind), what)), kind_(kind) {}

LoadedImage load_elf(std::span<const std::byte> file, const LoadConfig& config) {
    if (file.size() < SELFMAG || std::memcmp(file.data(), ELFMAG, SELFMAG) != 0) {
        throw LoadError(LoadErrorKind::BadMagic, "not an ELF file");
    }
    if (file.size() < EI_NIDENT) throw LoadError(LoadErrorKind::Malformed, "truncated ELF ident");
    const auto ident_class = std::to_integer<int>(file[EI_CLASS]);
    const auto ident_data = std::to_integer<int>(file[EI_DATA]);
    if (ident_class != ELFCLASS64 || ident_data != ELFDATA2LSB) {
        throw LoadError(LoadErrorKind::UnsupportedClass, "only 64-bit little-endian ELF is supported");
    }

    const auto eh = read_struct<Elf64_Ehdr>(file, 0, "ELF header");
    if (eh.e_machine != kElfMachineRiscV) {
        throw LoadError(LoadErrorKind::UnsupportedArchitecture,
                        fmt::format("machine {} is not RISC-V ({})", eh.e_machine, kElfMachineRiscV));
    }
    if (eh.e_type != ET_EXEC) {
        throw LoadError(LoadErrorKind::UnsupportedType,
                        eh.e_type == ET_DYN ? "position-independent executables are not supported"
                                            : "not an executable");
    }
    if (eh.e_phnum > 0 && eh.e_phentsize != sizeof(Elf64_Phdr)) {
        throw LoadError(LoadErrorKind::Malformed, "unexpected program header size");
    }

    std::vector<Elf64_Phdr> loads;
    for (unsigned i = 0; i < eh.e_phnum; ++i) {
        const auto ph = read_struct<Elf64_Phdr>(file, eh.e_phoff + std::uint64_t{i} * sizeof(Elf64_Phdr),
                                                "program header");
        if (ph.p_type == PT_INTERP || ph.p_type == PT_DYNAMIC) {
            throw LoadError(LoadErrorKind::UnsupportedType, "dynamically linked executables are not supported");
        }
        if (ph.p_type != PT_LOAD || ph.p_memsz == 0) continue;
        if (ph.p_filesz > ph.p_memsz || ph.p_offset > file.size() ||
            file.size() - ph.p_offset < ph.p_filesz) {
            throw LoadError(LoadErrorKind::Malformed, fmt::format("segment {} exceeds file", i));
        }
        if (ph.p_vaddr + ph.p_memsz < ph.p_vaddr) {
            throw LoadError(LoadErrorKind::SegmentOutOfRange, fmt::format("segment {} wraps", i));
        }
        loads.push_back(ph);
    }
    if (loads.empty()) throw LoadError(LoadErrorKind::Malformed, "no loadable segments");

    if (config.stack_size >= config.memory_size) {
        throw std::invalid_argument("stack size must be smaller than memory size");
    }
    std::uint64_t lowest = UINT64_MAX;
    std::uint64_t highest = 0;
    for (const auto& ph : loads) {
        lowest = std::min(lowest, ph.p_vaddr);
        highest = std::max(highest, ph.p_vaddr + ph.p_memsz);
    }
    const std::uint64_t base = align_down(lowest, kPage);
    if (base + config.memory_size < base) {
        throw LoadError(LoadErrorKind::SegmentOutOfRange, "memory image would wrap the address space");
    }
    const std::uint64_t stack_bottom = base + config.memory_size - config.stack_size;
    if (highest > stack_bottom) {
        throw LoadError(LoadErrorKind::SegmentOutOfRange,
                        fmt::format("segments end at 0x{:x}, past usable memory 0x{:x}", highest, stack_bottom));
    }

    bool entry_ok = false;
    for (const auto& ph : loads) {
        if ((ph.p_flags & PF_X) && eh.e_entry >= ph.p_vaddr && eh.e_entry < ph.p_vaddr + ph.p_memsz) {
            entry_ok = true;
        }
    }
    if (!entry_ok) {
        throw LoadError(LoadErrorKind::Malformed,
                        fmt::format("entry 0x{:x} is not inside an executable segment", eh.e_entry));
    }

    MemoryImage mem(base, config.memory_size, config.bounds);
    for (const auto& ph : loads) {
        mem.write(ph.p_vaddr, file.subspan(ph.p_offset, ph.p_filesz));
    }
    const std::uint64_t brk = std::min(align_up(highest, kPage), stack_bottom);
    mem.set_heap(brk, stack_bottom);

    LoadedImage image{std::move(mem), eh.e_entry, 0, stack_bottom, {}, {}};
    image.initial_sp = image.mem.end();
    return image;
}

std::uint64_t build_stack(LoadedImage& image, std::vector<std::string> argv,
                          std::vector<std::string> envp, bool auxv_page_size) {
    auto& mem = image.mem;
    const std::uint64_t top = mem.end();
    const std::uint64_t capacity = top - image.stack_bottom;

    std::uint64_t strings_len = 0;
    for (const auto& s : argv) strings_len += s.size() + 1;
    for (const auto& s : envp) strings_len += s.size() + 1;

    const std::uint64_t auxv_entries = auxv_page_size ? 2 : 1;
    const std::uint64_t words = 1 + (argv.size() + 1) + (envp.size() + 1) + 2 * auxv_entries;
    if (strings_len > capacity || words * 8 > capacity) {
        throw LoadError(LoadErrorKind::StackOverflow, "arguments do not fit in the stack region");
    }
    const std::uint64_t strings_at = align_down(top - strings_len, 16);
    if (strings_at - image.stack_bottom < words * 8) {
        throw LoadError(LoadErrorKind::StackOverflow, "arguments do not fit in the stack region");
    }
    const std::uint64_t sp = align_down(strings_at - words * 8, 16);
    if (sp < image.stack_bottom) {
        throw LoadError(LoadErrorKind::StackOverflow, "arguments do not fit in the stack region");
    }

    std::uint64_t cursor = strings_at;
    auto put_string = [&](const std::string& s) {
        const std::uint64_t at = cursor;
        mem.write(at, std::as_bytes(std::span(s.data(), s.size())));
        mem.store<std::uint8_t>(at + s.size(), 0);
        cursor += s.size() + 1;
        return at;
    };

    std::uint64_t slot = sp;
    auto push = [&](std::uint64_t v) {
        mem.store<std::uint64_t>(slot, v);
        slot += 8;
    };
    push(argv.size());
    for (const auto& s : argv) push(put_string(s));
    push(0);
    for (const auto& s : envp) push(put_string(s));
    push(0);
    if (auxv_page_size) {
        push(AT_PAGESZ);
        push(kPage);
    }
    push(AT_NULL);
    push(0);

    image.argv = std::move(argv);
    image.envp = std::move(envp);
    image.initial_sp = sp;
    return sp;
}

LoadedImage load_program(std::span<const std::byte> file, std::vector<std::string> argv,
                         std::vector<std::string> envp, const LoadConfig& config) {
    LoadedImage image = load_elf(file, config);
    build_stack(image, std::move(argv), std::move(envp), config.auxv_page_size);
    return image;
}

GuestState initial_state(const LoadedImage& image) {
    GuestState s;
    s.pc = image.entry;
    s.regs[reg::kSp] = image.initial_sp;
    return s;
}

std::vector<std::byte> read_binary_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(fmt::format("cannot open {}", path.string()));
    in.seekg(0, std::ios::end);
    const auto end = in.tellg();
    if (end < 0) throw std::runtime_error(fmt::format("cannot read {}", path.string()));
    const auto size = static_cast<std::size_t>(end);
    in.seekg(0);
    std::vector<std::byte> data(size);
    if (size > 0 && !in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(size))) {
        throw std::runtime_error(fmt::format("cannot read {}", path.string()));
    }
    return data;
}

}  // namespace rv64um
