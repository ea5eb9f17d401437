#include "clonerlab/fixtures.hpp"

#include <algorithm>

#include "clonerlab/cloner_core.hpp"
#include "clonerlab/dos_fs.hpp"

namespace clonerlab::fixtures {

namespace {

constexpr int kCatalogEntryOffset = 0x0B;
constexpr int kCatalogEntrySize = 0x23;

// Stable per-sector filler so every fixture byte is reproducible.
Sector filler_sector(std::uint32_t key)
{
    Sector s;
    std::uint32_t x = key * 2654435761u + 0x9E3779B9u;
    for (auto& b : s) {
        x = x * 1103515245u + 12345u;
        b = std::uint8_t(x >> 16);
    }
    return s;
}

std::uint8_t encode_file_type(char type, bool locked)
{
    std::uint8_t t = 0;
    switch (type) {
        case 'T': t = 0x00; break;
        case 'I': t = 0x01; break;
        case 'A': t = 0x02; break;
        case 'B': t = 0x04; break;
        default: t = 0x00; break;
    }
    return locked ? std::uint8_t(t | 0x80) : t;
}

Sector make_vtoc_sector()
{
    Sector v{};
    v[0x00] = 0x04;
    v[kVtocCatalogTrack] = 17;
    v[kVtocCatalogSector] = 15;
    v[kVtocDosVersion] = 3;
    v[0x27] = 0x7A;  // max T/S pairs per list sector
    v[0x30] = 0x12;  // last allocated track
    v[0x31] = 0x01;  // allocation direction
    v[0x34] = 35;
    v[0x35] = 16;
    v[0x36] = 0x00;  // 256 bytes per sector, little-endian
    v[0x37] = 0x01;
    for (int t = 0; t < kTracks; ++t) {
        bool reserved = t <= 2 || t == 17;  // DOS tracks and the catalog track
        v[std::size_t(kVtocBitmapBase + t * 4 + 0)] = reserved ? 0x00 : 0xFF;
        v[std::size_t(kVtocBitmapBase + t * 4 + 1)] = reserved ? 0x00 : 0xFF;
    }
    return v;
}

DiskImage make_dos33_base(const std::vector<FileSpec>& files, bool master)
{
    DiskImage image;

    // Track 0: Boot 1, Boot 2, Relocator slot, remainder of the DOS image.
    Sector boot1 = filler_sector(0x0100);
    boot1[0] = 0x01;  // stock DOS 3.3 first boot byte
    image.put_sector(TrackSector(0, 0), boot1);
    for (int s = 1; s <= 9; ++s)
        image.put_sector(TrackSector(0, s), filler_sector(std::uint32_t(0x0100 + s)));
    if (master) {
        image.put_sector(TrackSector(0, 10), filler_sector(0x0200));
        image.put_sector(TrackSector(0, 11), filler_sector(0x0201));
    }
    for (int s = 12; s <= 15; ++s)
        image.put_sector(TrackSector(0, s), filler_sector(std::uint32_t(0x0100 + s)));

    // Track 1: the DOS command handlers; stock instruction bytes at +$78.
    Sector t1s0 = filler_sector(0x0300);
    for (std::size_t i = 0; i < kHandlerContext.size(); ++i)
        t1s0[std::size_t(kHandlerContextOffset) + i] = kHandlerContext[i];
    std::copy(kCleanHandlerBytes.begin(), kCleanHandlerBytes.end(), t1s0.begin() + kHandlerOffset);
    image.put_sector(TrackSector(1, 0), t1s0);
    for (int s = 1; s <= 15; ++s)
        image.put_sector(TrackSector(1, s), filler_sector(std::uint32_t(0x0300 + s)));

    // Track 2: DOS tail in S0-S4, S5-S15 never loaded and left zero.
    for (int s = 0; s <= 4; ++s)
        image.put_sector(TrackSector(2, s), filler_sector(std::uint32_t(0x0400 + s)));

    image.put_sector(kVtocLocation, make_vtoc_sector());

    // Catalog chain T17 S15 -> S14 -> ... -> S1 -> end, all entries free.
    for (int s = 15; s >= 1; --s) {
        Sector cat{};
        if (s > 1) {
            cat[1] = 17;
            cat[2] = std::uint8_t(s - 1);
        }
        image.put_sector(TrackSector(17, s), cat);
    }

    // Files land in the first catalog sector; data tracks are not written.
    Sector first_cat = image.read_sector(TrackSector(17, 15));
    int slot = 0;
    for (const auto& file : files) {
        if (slot >= 7)
            break;
        std::size_t base = std::size_t(kCatalogEntryOffset + slot * kCatalogEntrySize);
        first_cat[base + 0] = std::uint8_t(18 + slot);  // T/S list location
        first_cat[base + 1] = 15;
        first_cat[base + 2] = encode_file_type(file.type, file.locked);
        for (int i = 0; i < 30; ++i) {
            char c = i < int(file.name.size()) ? file.name[std::size_t(i)] : ' ';
            first_cat[base + 3 + std::size_t(i)] = std::uint8_t(c) | 0x80;
        }
        first_cat[base + 0x21] = std::uint8_t(file.length_sectors & 0xFF);
        first_cat[base + 0x22] = std::uint8_t(file.length_sectors >> 8);
        ++slot;
    }
    image.put_sector(TrackSector(17, 15), first_cat);

    return image;
}

}  // namespace

DiskImage make_dos33_slave(const std::vector<FileSpec>& files)
{
    return make_dos33_base(files, false);
}

DiskImage make_dos33_master(const std::vector<FileSpec>& files)
{
    return make_dos33_base(files, true);
}

DiskImage make_prodos()
{
    DiskImage image;
    Sector boot = filler_sector(0x0500);
    const std::uint8_t prodos_boot[] = {0x01, 0x38, 0xB0, 0x03, 0x4C, 0x1C, 0x09};
    std::copy(std::begin(prodos_boot), std::end(prodos_boot), boot.begin());
    image.put_sector(TrackSector(0, 0), boot);
    return image;
}

DiskImage make_garbage(std::uint64_t seed)
{
    DiskImage image;
    for (int t = 0; t < kTracks; ++t)
        for (int s = 0; s < kSectorsPerTrack; ++s)
            image.put_sector(TrackSector(t, s),
                             filler_sector(std::uint32_t(seed * 0x10000 + std::uint32_t(t * 16 + s))));
    // Keep the first byte away from the boot-block fingerprints.
    Sector first = image.read_sector(TrackSector(0, 0));
    first[0] = 0xE7;
    image.put_sector(TrackSector(0, 0), first);
    return image;
}

}  // namespace clonerlab::fixtures
