#include "rv64um/elf_writer.hpp"

#include <elf.h>

#include <cstring>
#include <stdexcept>

#include "rv64um/loader.hpp"

namespace rv64um {

namespace {
constexpr std::uint64_t kPage = 4096;

template <typename T>
void put(std::vector<std::byte>& out, std::uint64_t offset, const T& v) {
    std::memcpy(out.data() + offset, &v, sizeof(T));
}
}  // namespace

std::vector<std::byte> write_elf(std::span<const ElfSegment> segments, std::uint64_t entry) {
    const std::uint64_t phoff = sizeof(Elf64_Ehdr);
    std::uint64_t cursor = phoff + segments.size() * sizeof(Elf64_Phdr);

    std::vector<std::uint64_t> offsets;
    for (const auto& seg : segments) {
        if (seg.mem_size < seg.data.size()) throw std::invalid_argument("segment mem_size < data size");
        cursor = (cursor + kPage - 1) / kPage * kPage + seg.vaddr % kPage;
        offsets.push_back(cursor);
        cursor += seg.data.size();
    }

    std::vector<std::byte> out(cursor);

    Elf64_Ehdr eh{};
    std::memcpy(eh.e_ident, ELFMAG, SELFMAG);
    eh.e_ident[EI_CLASS] = ELFCLASS64;
    eh.e_ident[EI_DATA] = ELFDATA2LSB;
    eh.e_ident[EI_VERSION] = EV_CURRENT;
    eh.e_ident[EI_OSABI] = ELFOSABI_SYSV;
    eh.e_type = ET_EXEC;
    eh.e_machine = kElfMachineRiscV;
    eh.e_version = EV_CURRENT;
    eh.e_entry = entry;
    eh.e_phoff = phoff;
    eh.e_ehsize = sizeof(Elf64_Ehdr);
    eh.e_phentsize = sizeof(Elf64_Phdr);
    eh.e_phnum = static_cast<Elf64_Half>(segments.size());
    eh.e_shentsize = sizeof(Elf64_Shdr);
    put(out, 0, eh);

    for (std::size_t i = 0; i < segments.size(); ++i) {
        const auto& seg = segments[i];
        Elf64_Phdr ph{};
        ph.p_type = PT_LOAD;
        ph.p_flags = seg.flags;
        ph.p_offset = offsets[i];
        ph.p_vaddr = seg.vaddr;
        ph.p_paddr = seg.vaddr;
        ph.p_filesz = seg.data.size();
        ph.p_memsz = seg.mem_size;
        ph.p_align = kPage;
        put(out, phoff + i * sizeof(Elf64_Phdr), ph);
        if (!seg.data.empty()) std::memcpy(out.data() + offsets[i], seg.data.data(), seg.data.size());
    }
    return out;
}

std::vector<std::byte> words_to_bytes(std::span<const std::uint32_t> words) {
    std::vector<std::byte> out(words.size() * 4);
    if (!words.empty()) std::memcpy(out.data(), words.data(), out.size());
    return out;
}

}  // namespace rv64um
