#ifndef CLONERLAB_DOS_FS_HPP
#define CLONERLAB_DOS_FS_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "clonerlab/disk_image.hpp"

namespace clonerlab {

// DOS 3.3 metadata locations.
constexpr TrackSector kVtocLocation{17, 0};

// VTOC byte offsets.  +1/+2/+3 and +$38 are the stock DOS 3.3 layout;
// +4/+5/+6 are the otherwise-unused bytes Elk Cloner claims for its boot
// counter, serial number and version marker.
constexpr int kVtocCatalogTrack = 0x01;
constexpr int kVtocCatalogSector = 0x02;
constexpr int kVtocDosVersion = 0x03;
constexpr int kVtocBootCount = 0x04;
constexpr int kVtocSerial = 0x05;
constexpr int kVtocClonerVersion = 0x06;
constexpr int kVtocBitmapBase = 0x38;

struct Vtoc {
    std::uint8_t catalog_track = 0;
    std::uint8_t catalog_sector = 0;
    std::uint8_t dos_version = 0;
    std::uint8_t cloner_boot_count = 0;
    std::uint8_t cloner_serial = 0;
    std::uint8_t cloner_version = 0;
    std::array<std::array<std::uint8_t, 4>, kTracks> free_sector_bitmaps{};
    Sector raw{};

    // raw with the named fields written back at their offsets; identical
    // to raw when no field was modified after parsing.
    Sector serialize() const;
};

struct CatalogEntry {
    std::string name;  // high-ASCII decoded, trailing spaces trimmed
    char file_type = '?';
    bool locked = false;
    bool deleted = false;
    TrackSector first_tsl;
    int length_sectors = 0;
};

enum class DiskClass { Dos33Slave, Dos33Master, ProDos, NonDosOrUnknown };

const char* to_string(DiskClass cls);

enum class SusceptibilityReason { Ok, AlreadyInfected, MasterDisk, WrongFilesystem };

const char* to_string(SusceptibilityReason reason);

struct Susceptibility {
    bool susceptible = false;
    SusceptibilityReason reason = SusceptibilityReason::WrongFilesystem;
};

// Total: a garbage sector still parses, validity is judged by classify_disk.
Vtoc parse_vtoc(const DiskImage& image);

// Entries in catalog link order.  Traversal stops at a zero link or after
// 16 sectors (cycle guard).  Throws NotDos when the image does not classify
// as DOS 3.3, BrokenChain when a link leaves track/sector bounds.
std::vector<CatalogEntry> walk_catalog(const DiskImage& image);

DiskClass classify_disk(const DiskImage& image);

// Infectable and not already infected: DOS 3.3 slave with the stock
// command-handler bytes still in place.
Susceptibility is_susceptible(const DiskImage& image);

}  // namespace clonerlab

#endif
