#include "clonerlab/dos_fs.hpp"

#include <algorithm>

#include "clonerlab/cloner_core.hpp"

namespace clonerlab {

namespace {

constexpr int kCatalogEntryOffset = 0x0B;
constexpr int kCatalogEntrySize = 0x23;
constexpr int kCatalogEntriesPerSector = 7;
constexpr int kCatalogCycleGuard = 16;  // one full track of links

constexpr std::uint8_t kEntryDeleted = 0xFF;
constexpr std::uint8_t kEntryUnused = 0x00;

// First bytes of the standard ProDOS boot block at T0 S0.
constexpr std::array<std::uint8_t, 5> kProdosBootFingerprint = {0x01, 0x38, 0xB0, 0x03, 0x4C};

bool all_zero(std::span<const std::uint8_t> bytes)
{
    return std::all_of(bytes.begin(), bytes.end(), [](std::uint8_t b) { return b == 0; });
}

char decode_file_type(std::uint8_t type)
{
    switch (type & 0x7F) {
        case 0x00: return 'T';
        case 0x01: return 'I';
        case 0x02: return 'A';
        case 0x04: return 'B';
        default: return '?';
    }
}

std::string decode_name(std::span<const std::uint8_t> raw)
{
    std::string name;
    name.reserve(raw.size());
    for (std::uint8_t b : raw)
        name.push_back(char(b & 0x7F));
    while (!name.empty() && name.back() == ' ')
        name.pop_back();
    return name;
}

// Stock command-handler context match with the three handler bytes wildcarded.
bool handler_context_matches(std::span<const std::uint8_t, kSectorSize> t1s0)
{
    for (std::size_t i = 0; i < kHandlerContext.size(); ++i) {
        int off = kHandlerContextOffset + int(i);
        if (off >= kHandlerOffset && off < kHandlerOffset + 3)
            continue;
        if (t1s0[std::size_t(off)] != kHandlerContext[i])
            return false;
    }
    return true;
}

enum class HandlerBytes { Clean, Infected, Other };

HandlerBytes handler_bytes(std::span<const std::uint8_t, kSectorSize> t1s0)
{
    if (std::equal(kCleanHandlerBytes.begin(), kCleanHandlerBytes.end(),
                   t1s0.begin() + kHandlerOffset))
        return HandlerBytes::Clean;
    if (std::equal(kInfectedHandlerBytes.begin(), kInfectedHandlerBytes.end(),
                   t1s0.begin() + kHandlerOffset))
        return HandlerBytes::Infected;
    return HandlerBytes::Other;
}

}  // namespace

const char* to_string(DiskClass cls)
{
    switch (cls) {
        case DiskClass::Dos33Slave: return "Dos33Slave";
        case DiskClass::Dos33Master: return "Dos33Master";
        case DiskClass::ProDos: return "ProDos";
        case DiskClass::NonDosOrUnknown: return "NonDosOrUnknown";
    }
    return "?";
}

const char* to_string(SusceptibilityReason reason)
{
    switch (reason) {
        case SusceptibilityReason::Ok: return "Ok";
        case SusceptibilityReason::AlreadyInfected: return "AlreadyInfected";
        case SusceptibilityReason::MasterDisk: return "MasterDisk";
        case SusceptibilityReason::WrongFilesystem: return "WrongFilesystem";
    }
    return "?";
}

Sector Vtoc::serialize() const
{
    Sector out = raw;
    out[kVtocCatalogTrack] = catalog_track;
    out[kVtocCatalogSector] = catalog_sector;
    out[kVtocDosVersion] = dos_version;
    out[kVtocBootCount] = cloner_boot_count;
    out[kVtocSerial] = cloner_serial;
    out[kVtocClonerVersion] = cloner_version;
    for (int t = 0; t < kTracks; ++t)
        for (int i = 0; i < 4; ++i)
            out[std::size_t(kVtocBitmapBase + t * 4 + i)] = free_sector_bitmaps[std::size_t(t)][std::size_t(i)];
    return out;
}

Vtoc parse_vtoc(const DiskImage& image)
{
    Vtoc vtoc;
    vtoc.raw = image.read_sector(kVtocLocation);
    vtoc.catalog_track = vtoc.raw[kVtocCatalogTrack];
    vtoc.catalog_sector = vtoc.raw[kVtocCatalogSector];
    vtoc.dos_version = vtoc.raw[kVtocDosVersion];
    vtoc.cloner_boot_count = vtoc.raw[kVtocBootCount];
    vtoc.cloner_serial = vtoc.raw[kVtocSerial];
    vtoc.cloner_version = vtoc.raw[kVtocClonerVersion];
    for (int t = 0; t < kTracks; ++t)
        for (int i = 0; i < 4; ++i)
            vtoc.free_sector_bitmaps[std::size_t(t)][std::size_t(i)] =
                vtoc.raw[std::size_t(kVtocBitmapBase + t * 4 + i)];
    return vtoc;
}

std::vector<CatalogEntry> walk_catalog(const DiskImage& image)
{
    DiskClass cls = classify_disk(image);
    if (cls != DiskClass::Dos33Slave && cls != DiskClass::Dos33Master)
        throw Error(ErrorCode::NotDos, "catalog walk requires a DOS 3.3 image");

    Vtoc vtoc = parse_vtoc(image);
    std::vector<CatalogEntry> entries;

    int next_track = vtoc.catalog_track;
    int next_sector = vtoc.catalog_sector;
    int visited = 0;
    while (!(next_track == 0 && next_sector == 0) && visited < kCatalogCycleGuard) {
        if (next_track >= kTracks || next_sector >= kSectorsPerTrack)
            throw Error(ErrorCode::BrokenChain,
                        "catalog link leaves the disk: T" + std::to_string(next_track) +
                            " S" + std::to_string(next_sector));
        auto sec = image.sector(TrackSector(next_track, next_sector));
        for (int e = 0; e < kCatalogEntriesPerSector; ++e) {
            std::size_t base = std::size_t(kCatalogEntryOffset + e * kCatalogEntrySize);
            std::uint8_t tsl_track = sec[base];
            if (tsl_track == kEntryUnused)
                continue;
            CatalogEntry entry;
            if (tsl_track == kEntryDeleted) {
                entry.deleted = true;
            } else {
                std::uint8_t tsl_sector = sec[base + 1];
                if (tsl_track >= kTracks || tsl_sector >= kSectorsPerTrack)
                    continue;  // not a live entry, not a chain failure
                entry.first_tsl = TrackSector(tsl_track, tsl_sector);
            }
            std::uint8_t type = sec[base + 2];
            entry.file_type = decode_file_type(type);
            entry.locked = (type & 0x80) != 0;
            entry.name = decode_name(sec.subspan(base + 3, 30));
            entry.length_sectors = sec[base + 0x21] | (sec[base + 0x22] << 8);
            entries.push_back(std::move(entry));
        }
        next_track = sec[1];
        next_sector = sec[2];
        ++visited;
    }
    return entries;
}

DiskClass classify_disk(const DiskImage& image)
{
    auto t1s0 = image.sector(TrackSector(1, 0));
    if (handler_context_matches(t1s0) && handler_bytes(t1s0) != HandlerBytes::Other) {
        auto s10 = image.sector(kLoaderLocation);
        auto s11 = image.sector(kRelocatorSecond);
        bool s10_zero = all_zero(s10);
        bool s11_zero = all_zero(s11);
        if (s10_zero && s11_zero)
            return DiskClass::Dos33Slave;
        // The loader only ever occupies S10; Relocator code spans both
        // sectors.  A patched handler with a bare S10 is an infected slave.
        if (s11_zero && (std::equal(s10.begin(), s10.end(), loader_sector().begin()) ||
                         handler_bytes(t1s0) == HandlerBytes::Infected))
            return DiskClass::Dos33Slave;
        return DiskClass::Dos33Master;
    }

    auto t0s0 = image.sector(TrackSector(0, 0));
    if (std::equal(kProdosBootFingerprint.begin(), kProdosBootFingerprint.end(), t0s0.begin()))
        return DiskClass::ProDos;

    return DiskClass::NonDosOrUnknown;
}

Susceptibility is_susceptible(const DiskImage& image)
{
    switch (classify_disk(image)) {
        case DiskClass::ProDos:
        case DiskClass::NonDosOrUnknown:
            return {false, SusceptibilityReason::WrongFilesystem};
        case DiskClass::Dos33Master:
            return {false, SusceptibilityReason::MasterDisk};
        case DiskClass::Dos33Slave:
            break;
    }
    if (handler_bytes(image.sector(TrackSector(1, 0))) == HandlerBytes::Clean)
        return {true, SusceptibilityReason::Ok};
    return {false, SusceptibilityReason::AlreadyInfected};
}

}  // namespace clonerlab
