#ifndef CLONERLAB_CLONER_CORE_HPP
#define CLONERLAB_CLONER_CORE_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "clonerlab/disk_image.hpp"
#include "clonerlab/dos_fs.hpp"

namespace clonerlab {

// ---------------------------------------------------------------------------
// Byte-level signature of an Elk Cloner infection.
//
// The infection's linchpin is the first instruction of the DOS common
// command handler at offset $80 of Track 1, Sector 0 (loaded at $A180):
// a clean disk has JSR $A75B there, an infected one JMP $9B00.
// ---------------------------------------------------------------------------

constexpr int kHandlerOffset = 0x80;

constexpr std::array<std::uint8_t, 3> kCleanHandlerBytes = {0x20, 0x5B, 0xA7};     // JSR $A75B
constexpr std::array<std::uint8_t, 3> kInfectedHandlerBytes = {0x4C, 0x00, 0x9B};  // JMP $9B00

// Instructions surrounding the patch point, offsets $78..$8A of T1 S0:
//   BEQ $A116 / JSR $A180 / JMP $9F83 / <handler> / JSR $A1AE / LDA $AA5F / TAX
// Used as the DOS 3.3 fingerprint; the three handler bytes are wildcarded.
constexpr int kHandlerContextOffset = 0x78;
constexpr std::array<std::uint8_t, 18> kHandlerContext = {
    0xF0, 0x9C,        // BEQ $A116
    0x20, 0x80, 0xA1,  // JSR $A180
    0x4C, 0x83, 0x9F,  // JMP $9F83
    0x00, 0x00, 0x00,  // handler slot (not compared)
    0x20, 0xAE, 0xA1,  // JSR $A1AE
    0xAD, 0x5F, 0xAA,  // LDA $AA5F
    0xAA,              // TAX
};

constexpr TrackSector kLoaderLocation{0, 10};       // Relocator slot Boot 2 loads blindly
constexpr TrackSector kRelocatorSecond{0, 11};      // zero on slave disks
constexpr std::uint8_t kBodyTrack = 2;
constexpr std::uint8_t kBodyFirstSector = 3;
constexpr std::uint8_t kBodyLastSector = 8;         // loader copy lives here
constexpr int kLoaderPayloadSize = 51;

constexpr std::uint8_t kClonerVersion = 2;

// The 256-byte sector written to T0 S10 and T2 S8: a fixed 51-byte loader
// payload followed by zeros.
const Sector& loader_sector();

// Body payload for one of T2 S3..S7, parameterized by serial/version.
Sector body_sector(std::uint8_t index, std::uint8_t serial, std::uint8_t version);

// The nine sectors an infection touches, in (track, sector) order.
std::vector<TrackSector> infection_footprint();

// ---------------------------------------------------------------------------
// Detection / infection / disinfection
// ---------------------------------------------------------------------------

enum class HandlerState { Clean, Patched, Other };
enum class Verdict { Infected, Clean, PartialOrCorrupt, NotApplicable };

const char* to_string(HandlerState state);
const char* to_string(Verdict verdict);

struct MarkerBytes {
    std::uint8_t version = 0;
    std::uint8_t serial = 0;
    std::uint8_t boot_count = 0;
};

struct Evidence {
    std::string location;
    std::string expected;
    std::string found;
};

struct InfectionReport {
    DiskClass classification = DiskClass::NonDosOrUnknown;
    HandlerState handler_state = HandlerState::Other;
    bool loader_present = false;
    bool body_present = false;
    MarkerBytes markers;
    Verdict verdict = Verdict::NotApplicable;
    std::vector<Evidence> evidence;
};

enum class InfectWarning { BreaksMaster, OverwritesDosTail };
enum class DisinfectWarning { UnrestorableDosTail };

const char* to_string(InfectWarning w);
const char* to_string(DisinfectWarning w);

struct InfectResult {
    DiskImage image;
    std::vector<InfectWarning> warnings;
};

struct DisinfectResult {
    DiskImage image;
    std::vector<DisinfectWarning> warnings;
};

InfectionReport detect(const DiskImage& image);

// The five-step replication write sequence: mark the VTOC, write the body
// (loader copy in the final sector of the run), patch the command handler,
// drop the loader into the Relocator slot, touch nothing else.
// Throws AlreadyInfected / NotInfectable.
InfectResult infect(const DiskImage& image, std::uint8_t serial,
                    std::uint8_t version = kClonerVersion);

// Inverse transform.  T2 S3-4 are restored from reference_dos when given,
// otherwise left in place with a warning.  Throws NotInfected.
DisinfectResult disinfect(const DiskImage& image,
                          const DiskImage* reference_dos = nullptr);

}  // namespace clonerlab

#endif
