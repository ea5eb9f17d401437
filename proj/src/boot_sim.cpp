#include "clonerlab/boot_sim.hpp"

#include <algorithm>
#include <cstdio>

namespace clonerlab {

namespace {

void reset_volatile(MachineState& m)
{
    m.cloner_resident = false;
    m.resident_serial = 0;
    m.resident_version = 0;
    m.himem_integer_basic = kHimemDefault;
    m.usr_vector_target = UsrVector::None;
    m.hooked_commands.clear();
    m.reset_vector = ResetVector::DosWarmstart;
    m.video_mode = VideoMode::Normal;
    m.catalog_type_map = CatalogTypeMap{};
    m.control_d_value = kControlDNormal;
    m.applesoft_protect = false;
    m.calibration_constant = kCalibrationDefault;
    m.pending_reboots = 0;
}

BootEvent event(EventKind kind, int value = -1, std::string detail = {})
{
    return BootEvent{kind, std::nullopt, value, std::move(detail)};
}

BootEvent manifested(ManifestKind kind, int count)
{
    return BootEvent{EventKind::Manifested, kind, count, {}};
}

// State mutation for the table rows that change volatile memory; the
// reboot-chain and counter-reset rows are handled inside boot().
void apply_manifestation(MachineState& m, ManifestKind kind, std::vector<BootEvent>& events)
{
    switch (kind) {
        case ManifestKind::ResetToMonitor:
            m.reset_vector = ResetVector::Monitor;
            break;
        case ManifestKind::InverseVideo:
            m.video_mode = VideoMode::Inverse;
            break;
        case ManifestKind::SpeakerClick:
            events.push_back(event(EventKind::SpeakerClick));
            break;
        case ManifestKind::FlashVideo:
            m.video_mode = VideoMode::Flash;
            break;
        case ManifestKind::CatalogTypeSwap:
            m.catalog_type_map.letters = {'I', 'T', 'B', 'A'};  // T<->I, A<->B
            break;
        case ManifestKind::ControlDBroken:
            m.control_d_value = kControlDBrokenValue;
            break;
        case ManifestKind::ResetSelfLoop:
            m.reset_vector = ResetVector::SelfLoop;
            break;
        case ManifestKind::AppleSoftProtect:
            m.applesoft_protect = true;
            break;
        case ManifestKind::ResetToPoem:
            m.reset_vector = ResetVector::Poem;
            break;
        case ManifestKind::Calibration1:
            m.calibration_constant = kCalibrationAlt1;
            break;
        case ManifestKind::Calibration2:
            m.calibration_constant = kCalibrationAlt2;
            break;
        case ManifestKind::BootToMonitor:
            events.push_back(event(EventKind::EnteredMonitor, -1, "booted into the Monitor"));
            break;
        case ManifestKind::Calibration3:
            m.calibration_constant = kCalibrationAlt3;
            break;
        case ManifestKind::RebootChain:
        case ManifestKind::CounterReset:
            break;
    }
}

// The replication gate shared by hooked commands and USR 3: infect the
// inserted disk with the resident serial unless its version marker already
// matches the resident version.
bool replicate_if_susceptible(MachineState& m, std::vector<BootEvent>& events)
{
    if (!m.inserted_disk)
        return false;
    if (!is_susceptible(*m.inserted_disk).susceptible)
        return false;
    if (parse_vtoc(*m.inserted_disk).cloner_version == m.resident_version)
        return false;
    InfectResult infected = infect(*m.inserted_disk, m.resident_serial, m.resident_version);
    m.inserted_disk = std::move(infected.image);
    events.push_back(event(EventKind::Replicated, m.resident_serial));
    return true;
}

std::vector<std::string> catalog_listing(const MachineState& m)
{
    if (!m.inserted_disk)
        return {"I/O ERROR"};
    std::vector<CatalogEntry> entries;
    try {
        entries = walk_catalog(*m.inserted_disk);
    } catch (const Error&) {
        return {"I/O ERROR"};
    }
    std::vector<std::string> lines;
    for (const auto& e : entries) {
        if (e.deleted)
            continue;
        char buf[48];
        std::snprintf(buf, sizeof buf, "%c%c %03d ", e.locked ? '*' : ' ',
                      m.catalog_type_map.apply(e.file_type), e.length_sectors);
        lines.push_back(buf + e.name);
    }
    return lines;
}

}  // namespace

const char* to_string(ResetVector v)
{
    switch (v) {
        case ResetVector::DosWarmstart: return "DosWarmstart";
        case ResetVector::Monitor: return "Monitor";
        case ResetVector::Poem: return "Poem";
        case ResetVector::SelfLoop: return "SelfLoop";
    }
    return "?";
}

const char* to_string(VideoMode v)
{
    switch (v) {
        case VideoMode::Normal: return "Normal";
        case VideoMode::Inverse: return "Inverse";
        case VideoMode::Flash: return "Flash";
    }
    return "?";
}

const char* to_string(Command c)
{
    switch (c) {
        case Command::Load: return "LOAD";
        case Command::Bload: return "BLOAD";
        case Command::Catalog: return "CATALOG";
        case Command::Run: return "RUN";
        case Command::List: return "LIST";
        case Command::Save: return "SAVE";
        case Command::PrintControlD: return "PRINT^D";
    }
    return "?";
}

const char* to_string(ManifestKind kind)
{
    switch (kind) {
        case ManifestKind::ResetToMonitor: return "ResetToMonitor";
        case ManifestKind::InverseVideo: return "InverseVideo";
        case ManifestKind::SpeakerClick: return "SpeakerClick";
        case ManifestKind::FlashVideo: return "FlashVideo";
        case ManifestKind::CatalogTypeSwap: return "CatalogTypeSwap";
        case ManifestKind::ControlDBroken: return "ControlDBroken";
        case ManifestKind::ResetSelfLoop: return "ResetSelfLoop";
        case ManifestKind::AppleSoftProtect: return "AppleSoftProtect";
        case ManifestKind::ResetToPoem: return "ResetToPoem";
        case ManifestKind::Calibration1: return "Calibration1";
        case ManifestKind::Calibration2: return "Calibration2";
        case ManifestKind::BootToMonitor: return "BootToMonitor";
        case ManifestKind::Calibration3: return "Calibration3";
        case ManifestKind::RebootChain: return "RebootChain";
        case ManifestKind::CounterReset: return "CounterReset";
    }
    return "?";
}

const char* to_string(EventKind kind)
{
    switch (kind) {
        case EventKind::Booted: return "Booted";
        case EventKind::Rebooted: return "Rebooted";
        case EventKind::ClonerLoaded: return "ClonerLoaded";
        case EventKind::CounterIncremented: return "CounterIncremented";
        case EventKind::CounterReset: return "CounterReset";
        case EventKind::Manifested: return "Manifested";
        case EventKind::Replicated: return "Replicated";
        case EventKind::PoemDisplayed: return "PoemDisplayed";
        case EventKind::EnteredMonitor: return "EnteredMonitor";
        case EventKind::Hung: return "Hung";
        case EventKind::HelloSuppressed: return "HelloSuppressed";
        case EventKind::SpeakerClick: return "SpeakerClick";
        case EventKind::VestigialVtocClear: return "VestigialVtocClear";
    }
    return "?";
}

std::string to_string(const BootEvent& e)
{
    std::string out = to_string(e.kind);
    if (e.kind == EventKind::Manifested && e.manifest)
        out += std::string("(") + to_string(*e.manifest) + ")";
    else if (e.value >= 0)
        out += "(" + std::to_string(e.value) + ")";
    if (!e.detail.empty())
        out += " [" + e.detail + "]";
    return out;
}

char CatalogTypeMap::apply(char type) const
{
    switch (type) {
        case 'T': return letters[0];
        case 'I': return letters[1];
        case 'A': return letters[2];
        case 'B': return letters[3];
        default: return type;
    }
}

const std::vector<std::string>& poem()
{
    static const std::vector<std::string> lines = {
        "ELK CLONER: THE PROGRAM WITH A PERSONALITY",
        "IT WILL GET ON ALL YOUR DISKS",
        "IT WILL INFILTRATE YOUR CHIPS",
        "YES, IT'S CLONER!",
        "IT WILL STICK TO YOU LIKE GLUE",
        "IT WILL MODIFY RAM TOO",
        "SEND IN THE CLONER!",
    };
    return lines;
}

MachineState new_machine()
{
    return MachineState{};
}

std::optional<DiskImage> insert_disk(MachineState& m, DiskImage image)
{
    std::optional<DiskImage> previous = std::move(m.inserted_disk);
    m.inserted_disk = std::move(image);
    return previous;
}

std::optional<ManifestKind> manifestation(std::uint8_t boot_count)
{
    switch (boot_count) {
        case 10: return ManifestKind::ResetToMonitor;
        case 15: return ManifestKind::InverseVideo;
        case 20: return ManifestKind::SpeakerClick;
        case 25: return ManifestKind::FlashVideo;
        case 30: return ManifestKind::CatalogTypeSwap;
        case 35: return ManifestKind::ControlDBroken;
        case 40: return ManifestKind::ResetSelfLoop;
        case 45: return ManifestKind::AppleSoftProtect;
        case 50: return ManifestKind::ResetToPoem;
        case 55: return ManifestKind::Calibration1;
        case 60: return ManifestKind::Calibration2;
        case 65: return ManifestKind::BootToMonitor;
        case 70: return ManifestKind::Calibration3;
        case 75:
        case 76:
        case 77:
        case 78: return ManifestKind::RebootChain;
        case 79: return ManifestKind::CounterReset;
        default: return std::nullopt;
    }
}

std::vector<BootEvent> boot(MachineState& m)
{
    if (!m.inserted_disk)
        throw Error(ErrorCode::NotBootable, "no disk inserted");
    DiskClass cls = classify_disk(*m.inserted_disk);
    if (cls != DiskClass::Dos33Slave && cls != DiskClass::Dos33Master)
        throw Error(ErrorCode::NotBootable,
                    std::string("cannot boot a ") + to_string(cls) + " image");

    std::vector<BootEvent> events;
    events.push_back(event(EventKind::Booted));

    for (;;) {
        reset_volatile(m);
        m.dos_resident = true;

        if (detect(*m.inserted_disk).verdict != Verdict::Infected)
            break;

        m.cloner_resident = true;
        Vtoc vtoc = parse_vtoc(*m.inserted_disk);
        m.resident_serial = vtoc.cloner_serial;
        m.resident_version = vtoc.cloner_version;
        m.himem_integer_basic = kHimemCloner;
        m.usr_vector_target = UsrVector::ClonerAdmin;
        m.hooked_commands = {Command::Load, Command::Bload, Command::Catalog};
        events.push_back(event(EventKind::ClonerLoaded, -1,
                               "hooked LOAD/BLOAD/CATALOG, USR vector claimed, "
                               "vestigial RUN repair applied"));

        std::uint8_t count = std::uint8_t(vtoc.cloner_boot_count + 1);
        vtoc.cloner_boot_count = count;
        m.inserted_disk->put_sector(kVtocLocation, vtoc.serialize());
        events.push_back(event(EventKind::CounterIncremented, count));

        std::optional<ManifestKind> kind = manifestation(count);
        if (!kind)
            break;
        if (*kind == ManifestKind::RebootChain) {
            events.push_back(manifested(*kind, count));
            events.push_back(event(EventKind::Rebooted));
            if (++m.pending_reboots <= kRebootChainGuard)
                continue;  // re-enter the boot sequence
            break;         // runaway guard, never reached by the faithful chain
        }
        if (*kind == ManifestKind::CounterReset) {
            vtoc.cloner_boot_count = 0;
            m.inserted_disk->put_sector(kVtocLocation, vtoc.serialize());
            events.push_back(event(EventKind::CounterReset));
            break;
        }
        events.push_back(manifested(*kind, count));
        apply_manifestation(m, *kind, events);
        break;
    }

    m.pending_reboots = 0;
    return events;
}

CommandResult run_command(MachineState& m, const CommandInvocation& invocation)
{
    if (!m.dos_resident)
        throw Error(ErrorCode::NoDosResident, "no DOS in memory; boot a disk first");

    CommandResult result;
    bool hooked = m.cloner_resident && m.hooked_commands.count(invocation.cmd) > 0;
    if (hooked)
        replicate_if_susceptible(m, result.events);

    // Hooked or not, the DOS command itself still runs (trampoline re-entry).
    switch (invocation.cmd) {
        case Command::Catalog:
            if (hooked)
                result.events.push_back(event(EventKind::VestigialVtocClear, -1,
                                              "VTOC buffer bytes cleared in memory only"));
            result.output = catalog_listing(m);
            break;
        case Command::Load:
        case Command::Bload:
        case Command::Run:
            break;  // no observable output modeled
        case Command::List:
            if (m.applesoft_protect)
                result.output.push_back("(program executed instead of listing)");
            break;
        case Command::Save:
            if (m.applesoft_protect)
                result.output.push_back("PROGRAM TOO LARGE");
            break;
        case Command::PrintControlD:
            if (m.control_d_value == kControlDNormal)
                break;  // command reaches DOS as usual
            result.events.push_back(
                event(EventKind::HelloSuppressed, -1, invocation.text));
            result.output.push_back(invocation.text);
            break;
    }
    return result;
}

CommandResult usr_call(MachineState& m, std::uint8_t arg)
{
    if (!m.cloner_resident)
        throw Error(ErrorCode::NoHandler, "USR vector not claimed");

    CommandResult result;
    switch (arg) {
        case 1: {
            char buf[48];
            std::snprintf(buf, sizeof buf, "ELK CLONER VERSION %d SERIAL %d",
                          m.resident_version, m.resident_serial);
            result.output.push_back(buf);
            break;
        }
        case 2:
            if (m.inserted_disk)
                result.output.push_back(
                    "BOOT COUNT " +
                    std::to_string(parse_vtoc(*m.inserted_disk).cloner_boot_count));
            else
                result.output.push_back("I/O ERROR");
            break;
        case 3:
            if (!replicate_if_susceptible(m, result.events))
                result.output.push_back("DISK NOT INFECTABLE");
            break;
        case 4:
            result.events.push_back(event(EventKind::PoemDisplayed));
            result.output = poem();
            break;
        default:
            break;  // unmapped arguments do nothing
    }
    return result;
}

std::vector<BootEvent> control_reset(MachineState& m)
{
    std::vector<BootEvent> events;
    switch (m.reset_vector) {
        case ResetVector::DosWarmstart:
            break;  // back to the prompt, nothing of note
        case ResetVector::Monitor:
            events.push_back(event(EventKind::EnteredMonitor, -1, "prompt is now *"));
            break;
        case ResetVector::Poem: {
            std::string text;
            for (const auto& line : poem())
                text += line + "\n";
            events.push_back(event(EventKind::PoemDisplayed, -1, text));
            break;
        }
        case ResetVector::SelfLoop:
            events.push_back(event(EventKind::Hung, -1, "reset vector loops to itself"));
            break;
    }
    return events;
}

}  // namespace clonerlab
