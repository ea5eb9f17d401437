#ifndef CLONERLAB_BOOT_SIM_HPP
#define CLONERLAB_BOOT_SIM_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "clonerlab/cloner_core.hpp"
#include "clonerlab/disk_image.hpp"

namespace clonerlab {

// ---------------------------------------------------------------------------
// Deterministic behavioral model of an Apple ][ session: booting disks,
// the virus's load sequence, command hooking, replication triggers, the
// USR admin interface and the boot-count-keyed behavior schedule.
// No 6502 emulation; only the state the virus touches is modeled.
// ---------------------------------------------------------------------------

enum class ResetVector { DosWarmstart, Monitor, Poem, SelfLoop };
enum class VideoMode { Normal, Inverse, Flash };
enum class UsrVector { None, ClonerAdmin };

enum class Command { Load, Bload, Catalog, Run, List, Save, PrintControlD };

const char* to_string(ResetVector v);
const char* to_string(VideoMode v);
const char* to_string(Command c);

struct CommandInvocation {
    Command cmd = Command::Catalog;
    std::string text;  // program name / DOS command for PrintControlD
};

// File-type letters as the CATALOG command prints them, in T/I/A/B order.
struct CatalogTypeMap {
    std::array<char, 4> letters = {'T', 'I', 'A', 'B'};

    bool is_identity() const { return letters == std::array<char, 4>{'T', 'I', 'A', 'B'}; }
    char apply(char type) const;

    bool operator==(const CatalogTypeMap&) const = default;
};

// Volatile-memory defaults of a freshly booted machine.
constexpr std::uint16_t kHimemDefault = 0x9600;
constexpr std::uint16_t kHimemCloner = 0x8FFF;
constexpr std::uint8_t kControlDNormal = 0x84;
constexpr std::uint8_t kControlDBrokenValue = 0x00;
constexpr std::uint8_t kCalibrationDefault = 0xD8;
// Distinct values written by the 55th/60th/70th-boot behaviors.
constexpr std::uint8_t kCalibrationAlt1 = 0x4E;
constexpr std::uint8_t kCalibrationAlt2 = 0x66;
constexpr std::uint8_t kCalibrationAlt3 = 0x72;

constexpr int kRebootChainGuard = 8;  // faithful chain needs at most 5

struct MachineState {
    std::optional<DiskImage> inserted_disk;
    bool dos_resident = false;
    bool cloner_resident = false;
    std::uint8_t resident_serial = 0;
    std::uint8_t resident_version = 0;
    std::uint16_t himem_integer_basic = kHimemDefault;  // $004C
    UsrVector usr_vector_target = UsrVector::None;      // $000A
    std::set<Command> hooked_commands;
    ResetVector reset_vector = ResetVector::DosWarmstart;
    VideoMode video_mode = VideoMode::Normal;
    CatalogTypeMap catalog_type_map;
    std::uint8_t control_d_value = kControlDNormal;     // $AAB2
    bool applesoft_protect = false;
    std::uint8_t calibration_constant = kCalibrationDefault;
    int pending_reboots = 0;
};

// One variant per row of the behavior table (boots 10..79).
enum class ManifestKind {
    ResetToMonitor,    // 10
    InverseVideo,      // 15
    SpeakerClick,      // 20
    FlashVideo,        // 25
    CatalogTypeSwap,   // 30
    ControlDBroken,    // 35
    ResetSelfLoop,     // 40
    AppleSoftProtect,  // 45
    ResetToPoem,       // 50
    Calibration1,      // 55
    Calibration2,      // 60
    BootToMonitor,     // 65
    Calibration3,      // 70
    RebootChain,       // 75-78
    CounterReset,      // 79
};

const char* to_string(ManifestKind kind);

enum class EventKind {
    Booted,
    Rebooted,
    ClonerLoaded,
    CounterIncremented,
    CounterReset,
    Manifested,
    Replicated,
    PoemDisplayed,
    EnteredMonitor,
    Hung,
    HelloSuppressed,
    SpeakerClick,
    VestigialVtocClear,
};

const char* to_string(EventKind kind);

struct BootEvent {
    EventKind kind;
    std::optional<ManifestKind> manifest;  // set for Manifested
    int value = -1;                        // new counter / replicated serial
    std::string detail;
};

std::string to_string(const BootEvent& event);

struct CommandResult {
    std::vector<BootEvent> events;
    std::vector<std::string> output;  // what the screen would show
};

// The verse the virus prints, seven lines.
const std::vector<std::string>& poem();

MachineState new_machine();

// Swapping disks does not clear memory; returns the previous disk.
std::optional<DiskImage> insert_disk(MachineState& m, DiskImage image);

// Cold boot of the inserted disk.  Volatile state resets, DOS loads; an
// infected disk also loads the virus, advances the on-disk boot counter
// and applies the count's scheduled behavior (counts 75-78 re-enter the
// boot sequence, count 79 resets the counter).  Throws NotBootable.
std::vector<BootEvent> boot(MachineState& m);

// Pure dispatch of the behavior table; counts off the schedule map to none.
std::optional<ManifestKind> manifestation(std::uint8_t boot_count);

// Runs one DOS command.  Under residency a hooked command replicates onto
// a susceptible inserted disk first, then the command takes its normal
// effect.  Throws NoDosResident.
CommandResult run_command(MachineState& m, const CommandInvocation& invocation);

// The USR administrative interface: 1 = version/serial, 2 = boot count,
// 3 = infect inserted disk, 4 = poem.  Throws NoHandler when not resident.
CommandResult usr_call(MachineState& m, std::uint8_t arg);

std::vector<BootEvent> control_reset(MachineState& m);

}  // namespace clonerlab

#endif
