#include "clonerlab/cloner_core.hpp"

#include <algorithm>
#include <cstdio>

namespace clonerlab {

namespace {

const char kLoaderTag[] = "CLONERLAB SYNTHETIC LOADER";
const char kBodyTag[] = "CLONERLAB SYNTHETIC BODY";

bool all_zero(std::span<const std::uint8_t> bytes)
{
    return std::all_of(bytes.begin(), bytes.end(), [](std::uint8_t b) { return b == 0; });
}

std::string hex_bytes(std::span<const std::uint8_t> bytes)
{
    std::string out;
    char buf[4];
    for (std::size_t i = 0; i < bytes.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%02X", bytes[i]);
        if (i)
            out.push_back(' ');
        out += buf;
    }
    return out;
}

}  // namespace

const char* to_string(HandlerState state)
{
    switch (state) {
        case HandlerState::Clean: return "Clean";
        case HandlerState::Patched: return "Patched";
        case HandlerState::Other: return "Other";
    }
    return "?";
}

const char* to_string(Verdict verdict)
{
    switch (verdict) {
        case Verdict::Infected: return "Infected";
        case Verdict::Clean: return "Clean";
        case Verdict::PartialOrCorrupt: return "PartialOrCorrupt";
        case Verdict::NotApplicable: return "NotApplicable";
    }
    return "?";
}

const char* to_string(InfectWarning w)
{
    switch (w) {
        case InfectWarning::BreaksMaster: return "BreaksMaster";
        case InfectWarning::OverwritesDosTail: return "OverwritesDosTail";
    }
    return "?";
}

const char* to_string(DisinfectWarning w)
{
    switch (w) {
        case DisinfectWarning::UnrestorableDosTail: return "UnrestorableDosTail";
    }
    return "?";
}

const Sector& loader_sector()
{
    static const Sector sector = [] {
        Sector s{};
        std::size_t pos = 0;
        for (const char* p = kLoaderTag; *p; ++p)
            s[pos++] = std::uint8_t(*p) | 0x80;  // high-ASCII, like DOS text
        s[pos++] = kClonerVersion;
        while (pos < kLoaderPayloadSize)
            s[pos++] = 0xEA;  // 6502 NOP filler
        return s;             // bytes 51..255 stay zero
    }();
    return sector;
}

Sector body_sector(std::uint8_t index, std::uint8_t serial, std::uint8_t version)
{
    Sector s{};
    std::size_t pos = 0;
    for (const char* p = kBodyTag; *p; ++p)
        s[pos++] = std::uint8_t(*p) | 0x80;
    s[pos++] = index;
    s[pos++] = version;
    s[pos++] = serial;
    for (; pos < kSectorSize; ++pos)
        s[pos] = std::uint8_t(0xC3 ^ (index * 37 + int(pos) * 11 + serial * 3 + version));
    return s;
}

std::vector<TrackSector> infection_footprint()
{
    std::vector<TrackSector> sectors;
    sectors.push_back(kLoaderLocation);
    sectors.push_back(TrackSector(1, 0));
    for (int s = kBodyFirstSector; s <= kBodyLastSector; ++s)
        sectors.push_back(TrackSector(kBodyTrack, s));
    sectors.push_back(kVtocLocation);
    return sectors;
}

InfectionReport detect(const DiskImage& image)
{
    InfectionReport report;
    report.classification = classify_disk(image);

    auto t1s0 = image.sector(TrackSector(1, 0));
    auto handler = t1s0.subspan(kHandlerOffset, 3);
    if (std::equal(handler.begin(), handler.end(), kCleanHandlerBytes.begin()))
        report.handler_state = HandlerState::Clean;
    else if (std::equal(handler.begin(), handler.end(), kInfectedHandlerBytes.begin()))
        report.handler_state = HandlerState::Patched;
    else
        report.handler_state = HandlerState::Other;

    Vtoc vtoc = parse_vtoc(image);
    report.markers = {vtoc.cloner_version, vtoc.cloner_serial, vtoc.cloner_boot_count};

    auto s10 = image.sector(kLoaderLocation);
    auto s11 = image.sector(kRelocatorSecond);
    report.loader_present =
        std::equal(s10.begin(), s10.end(), loader_sector().begin()) ||
        (!all_zero(s10) && all_zero(s11) && report.handler_state == HandlerState::Patched);

    report.body_present = true;
    for (int s = kBodyFirstSector; s <= kBodyLastSector; ++s)
        if (all_zero(image.sector(TrackSector(kBodyTrack, s))))
            report.body_present = false;

    report.evidence.push_back({"T1 S0 +$80", hex_bytes(kCleanHandlerBytes) + " (clean) / " +
                                                hex_bytes(kInfectedHandlerBytes) + " (patched)",
                               hex_bytes(handler)});
    report.evidence.push_back({to_string(kLoaderLocation), "all zero on a clean slave",
                               all_zero(s10) ? "all zero"
                                             : (report.loader_present ? "loader code" : "other data")});
    report.evidence.push_back({"T2 S3-S8", "S5-S8 all zero on a clean disk",
                               report.body_present ? "populated" : "not fully populated"});
    char markers_found[32];
    std::snprintf(markers_found, sizeof markers_found, "%02X %02X %02X", report.markers.version,
                  report.markers.serial, report.markers.boot_count);
    report.evidence.push_back({"T17 S0 +$06/+$05/+$04 (version/serial/boots)",
                               "00 00 00 on a clean disk", markers_found});

    if (report.classification == DiskClass::ProDos ||
        report.classification == DiskClass::NonDosOrUnknown) {
        report.verdict = Verdict::NotApplicable;
        return report;
    }

    bool marker_evidence = report.markers.version != 0 || report.markers.serial != 0 ||
                           report.markers.boot_count != 0;
    if (report.handler_state == HandlerState::Patched && report.markers.version != 0)
        report.verdict = Verdict::Infected;
    else if (report.handler_state == HandlerState::Clean && !report.loader_present &&
             !report.body_present && !marker_evidence)
        report.verdict = Verdict::Clean;
    else
        report.verdict = Verdict::PartialOrCorrupt;
    return report;
}

InfectResult infect(const DiskImage& image, std::uint8_t serial, std::uint8_t version)
{
    DiskClass cls = classify_disk(image);
    if (cls == DiskClass::ProDos || cls == DiskClass::NonDosOrUnknown)
        throw Error(ErrorCode::NotInfectable,
                    std::string("cannot infect a ") + to_string(cls) + " image");

    auto handler = image.sector(TrackSector(1, 0)).subspan(kHandlerOffset, 3);
    Vtoc vtoc = parse_vtoc(image);
    if (vtoc.cloner_version == version ||
        std::equal(handler.begin(), handler.end(), kInfectedHandlerBytes.begin()))
        throw Error(ErrorCode::AlreadyInfected, "image already carries this infection");

    InfectResult result{image, {}};
    result.warnings.push_back(InfectWarning::OverwritesDosTail);  // T2 S3-4 are DOS
    if (cls == DiskClass::Dos33Master)
        result.warnings.push_back(InfectWarning::BreaksMaster);

    // 1. version and serial into the VTOC, written back
    vtoc.cloner_serial = serial;
    vtoc.cloner_version = version;
    result.image.put_sector(kVtocLocation, vtoc.serialize());

    // 2. body into T2 S3-8, loader copy in the final sector of the run
    for (int s = kBodyFirstSector; s < kBodyLastSector; ++s)
        result.image.put_sector(TrackSector(kBodyTrack, s),
                                body_sector(std::uint8_t(s - kBodyFirstSector), serial, version));
    result.image.put_sector(TrackSector(kBodyTrack, kBodyLastSector), loader_sector());

    // 3. first instruction of the command handler overwritten
    Sector t1s0 = result.image.read_sector(TrackSector(1, 0));
    std::copy(kInfectedHandlerBytes.begin(), kInfectedHandlerBytes.end(),
              t1s0.begin() + kHandlerOffset);
    result.image.put_sector(TrackSector(1, 0), t1s0);

    // 4. loader into the Relocator slot
    result.image.put_sector(kLoaderLocation, loader_sector());

    // 5. nothing else touched
    return result;
}

DisinfectResult disinfect(const DiskImage& image, const DiskImage* reference_dos)
{
    if (detect(image).verdict != Verdict::Infected)
        throw Error(ErrorCode::NotInfected, "image is not infected");

    DisinfectResult result{image, {}};

    Sector t1s0 = result.image.read_sector(TrackSector(1, 0));
    std::copy(kCleanHandlerBytes.begin(), kCleanHandlerBytes.end(), t1s0.begin() + kHandlerOffset);
    result.image.put_sector(TrackSector(1, 0), t1s0);

    const Sector zeros{};
    result.image.put_sector(kLoaderLocation, zeros);  // slave convention

    Vtoc vtoc = parse_vtoc(result.image);
    vtoc.cloner_boot_count = 0;
    vtoc.cloner_serial = 0;
    vtoc.cloner_version = 0;
    result.image.put_sector(kVtocLocation, vtoc.serialize());

    for (int s = 5; s <= kBodyLastSector; ++s)
        result.image.put_sector(TrackSector(kBodyTrack, s), zeros);

    if (reference_dos) {
        for (int s = kBodyFirstSector; s <= 4; ++s)
            result.image.put_sector(TrackSector(kBodyTrack, s),
                                    reference_dos->sector(TrackSector(kBodyTrack, s)));
    } else {
        result.warnings.push_back(DisinfectWarning::UnrestorableDosTail);
    }
    return result;
}

}  // namespace clonerlab
