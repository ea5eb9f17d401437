#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include "clonerlab/boot_sim.hpp"
#include "clonerlab/fixtures.hpp"

using namespace clonerlab;

namespace {

int count_kind(const std::vector<BootEvent>& events, EventKind kind)
{
    return int(std::count_if(events.begin(), events.end(),
                             [&](const BootEvent& e) { return e.kind == kind; }));
}

bool has_manifest(const std::vector<BootEvent>& events, ManifestKind kind)
{
    return std::any_of(events.begin(), events.end(), [&](const BootEvent& e) {
        return e.kind == EventKind::Manifested && e.manifest == kind;
    });
}

DiskImage infected_with_counter(std::uint8_t serial, std::uint8_t count)
{
    DiskImage disk = infect(fixtures::make_dos33_slave(), serial).image;
    Vtoc vtoc = parse_vtoc(disk);
    vtoc.cloner_boot_count = count;
    disk.put_sector(kVtocLocation, vtoc.serialize());
    return disk;
}

MachineState resident_machine(std::uint8_t serial = 9)
{
    MachineState m = new_machine();
    insert_disk(m, infected_with_counter(serial, 0));
    boot(m);
    return m;
}

}  // namespace

TEST_CASE("fresh machine defaults")
{
    MachineState m = new_machine();
    CHECK(!m.cloner_resident);
    CHECK(!m.dos_resident);
    CHECK(m.reset_vector == ResetVector::DosWarmstart);
    CHECK(m.video_mode == VideoMode::Normal);
    CHECK(m.catalog_type_map.is_identity());
    CHECK(!m.applesoft_protect);
    CHECK(m.himem_integer_basic == kHimemDefault);
    CHECK(m.hooked_commands.empty());
}

TEST_CASE("insert_disk swaps disks without clearing memory")
{
    MachineState m = resident_machine();
    CHECK(m.cloner_resident);

    DiskImage other = fixtures::make_dos33_slave();
    auto previous = insert_disk(m, other);
    REQUIRE(previous.has_value());
    CHECK(detect(*previous).verdict == Verdict::Infected);
    CHECK(m.cloner_resident);  // swapping disks does not reboot
    CHECK(*m.inserted_disk == other);
}

TEST_CASE("manifestation dispatch matches the schedule exactly")
{
    for (int count = 0; count < 256; ++count) {
        auto kind = manifestation(std::uint8_t(count));
        switch (count) {
            case 10: CHECK(kind == ManifestKind::ResetToMonitor); break;
            case 15: CHECK(kind == ManifestKind::InverseVideo); break;
            case 20: CHECK(kind == ManifestKind::SpeakerClick); break;
            case 25: CHECK(kind == ManifestKind::FlashVideo); break;
            case 30: CHECK(kind == ManifestKind::CatalogTypeSwap); break;
            case 35: CHECK(kind == ManifestKind::ControlDBroken); break;
            case 40: CHECK(kind == ManifestKind::ResetSelfLoop); break;
            case 45: CHECK(kind == ManifestKind::AppleSoftProtect); break;
            case 50: CHECK(kind == ManifestKind::ResetToPoem); break;
            case 55: CHECK(kind == ManifestKind::Calibration1); break;
            case 60: CHECK(kind == ManifestKind::Calibration2); break;
            case 65: CHECK(kind == ManifestKind::BootToMonitor); break;
            case 70: CHECK(kind == ManifestKind::Calibration3); break;
            case 75:
            case 76:
            case 77:
            case 78: CHECK(kind == ManifestKind::RebootChain); break;
            case 79: CHECK(kind == ManifestKind::CounterReset); break;
            default: CHECK(!kind.has_value());
        }
    }
}

TEST_CASE("booting a clean disk loads DOS only")
{
    MachineState m = new_machine();
    insert_disk(m, fixtures::make_dos33_slave());
    auto events = boot(m);
    CHECK(m.dos_resident);
    CHECK(!m.cloner_resident);
    CHECK(count_kind(events, EventKind::Booted) == 1);
    CHECK(count_kind(events, EventKind::ClonerLoaded) == 0);
    CHECK(count_kind(events, EventKind::CounterIncremented) == 0);
}

TEST_CASE("booting an infected disk loads the virus and advances the counter")
{
    MachineState m = new_machine();
    insert_disk(m, infected_with_counter(4, 0));
    auto events = boot(m);
    CHECK(m.cloner_resident);
    CHECK(m.resident_serial == 4);
    CHECK(m.resident_version == kClonerVersion);
    CHECK(m.himem_integer_basic == kHimemCloner);
    CHECK(m.usr_vector_target == UsrVector::ClonerAdmin);
    CHECK(m.hooked_commands ==
          std::set<Command>{Command::Load, Command::Bload, Command::Catalog});
    CHECK(count_kind(events, EventKind::ClonerLoaded) == 1);
    REQUIRE(count_kind(events, EventKind::CounterIncremented) == 1);
    CHECK(parse_vtoc(*m.inserted_disk).cloner_boot_count == 1);
}

TEST_CASE("the fiftieth boot arms the poem")
{
    MachineState m = new_machine();
    insert_disk(m, infected_with_counter(1, 49));
    auto events = boot(m);
    bool saw_50 = false;
    for (const auto& e : events)
        if (e.kind == EventKind::CounterIncremented && e.value == 50)
            saw_50 = true;
    CHECK(saw_50);
    CHECK(has_manifest(events, ManifestKind::ResetToPoem));
    CHECK(m.reset_vector == ResetVector::Poem);

    auto reset_events = control_reset(m);
    REQUIRE(reset_events.size() == 1);
    CHECK(reset_events[0].kind == EventKind::PoemDisplayed);
    CHECK(reset_events[0].detail.find("SEND IN THE CLONER!") != std::string::npos);
}

TEST_CASE("intervening boots do nothing")
{
    MachineState m = new_machine();
    insert_disk(m, infected_with_counter(1, 10));
    auto events = boot(m);  // counter 10 -> 11
    CHECK(count_kind(events, EventKind::Manifested) == 0);
    CHECK(parse_vtoc(*m.inserted_disk).cloner_boot_count == 11);
}

TEST_CASE("the reboot chain runs four times and resets the counter")
{
    MachineState m = new_machine();
    insert_disk(m, infected_with_counter(1, 74));
    auto events = boot(m);

    bool saw_75 = false;
    for (const auto& e : events)
        if (e.kind == EventKind::CounterIncremented && e.value == 75)
            saw_75 = true;
    CHECK(saw_75);
    CHECK(count_kind(events, EventKind::Rebooted) == 4);
    CHECK(count_kind(events, EventKind::CounterReset) == 1);
    CHECK(parse_vtoc(*m.inserted_disk).cloner_boot_count == 0);
    CHECK(m.cloner_resident);  // the machine finishes booting normally
}

TEST_CASE("non-DOS disks are not bootable")
{
    MachineState m = new_machine();
    CHECK_THROWS_AS(boot(m), Error);  // no disk at all
    insert_disk(m, fixtures::make_prodos());
    CHECK_THROWS_AS(boot(m), Error);
    insert_disk(m, fixtures::make_garbage(8));
    CHECK_THROWS_AS(boot(m), Error);
}

TEST_CASE("manifested state washes out on the next boot")
{
    MachineState m = new_machine();
    insert_disk(m, infected_with_counter(1, 14));
    boot(m);  // count 15: inverse video
    CHECK(m.video_mode == VideoMode::Inverse);
    boot(m);  // count 16: nothing
    CHECK(m.video_mode == VideoMode::Normal);
    CHECK(parse_vtoc(*m.inserted_disk).cloner_boot_count == 16);
}

TEST_CASE("run_command needs DOS in memory")
{
    MachineState m = new_machine();
    CHECK_THROWS_AS(run_command(m, {Command::Catalog, {}}), Error);
}

TEST_CASE("a hooked command under residency replicates once")
{
    MachineState m = resident_machine(9);
    insert_disk(m, fixtures::make_dos33_slave());

    auto first = run_command(m, {Command::Catalog, {}});
    CHECK(count_kind(first.events, EventKind::Replicated) == 1);
    CHECK(count_kind(first.events, EventKind::VestigialVtocClear) == 1);
    InfectionReport report = detect(*m.inserted_disk);
    CHECK(report.verdict == Verdict::Infected);
    CHECK(report.markers.serial == 9);

    auto second = run_command(m, {Command::Load, {}});
    CHECK(count_kind(second.events, EventKind::Replicated) == 0);
}

TEST_CASE("no replication without residency")
{
    MachineState m = new_machine();
    insert_disk(m, fixtures::make_dos33_slave());
    boot(m);  // clean DOS resident, no virus
    auto result = run_command(m, {Command::Catalog, {}});
    CHECK(count_kind(result.events, EventKind::Replicated) == 0);
    CHECK(count_kind(result.events, EventKind::VestigialVtocClear) == 0);
    CHECK(detect(*m.inserted_disk).verdict == Verdict::Clean);
}

TEST_CASE("replication never writes outside the footprint plus the counter byte")
{
    MachineState m = resident_machine(3);
    DiskImage target = fixtures::make_dos33_slave({{"HELLO", 'A', false, 2}});
    DiskImage before = target;
    insert_disk(m, target);
    run_command(m, {Command::Catalog, {}});

    auto diffs = diff_images(before, *m.inserted_disk);
    std::set<std::pair<int, int>> allowed = {{0, 10}, {1, 0}, {2, 3}, {2, 4}, {2, 5},
                                             {2, 6},  {2, 7}, {2, 8}, {17, 0}};
    for (const auto& d : diffs)
        CHECK(allowed.count({d.location.track, d.location.sector}) == 1);
}

TEST_CASE("catalog listing is unchanged by the trampoline")
{
    DiskImage disk = fixtures::make_dos33_slave({{"HELLO", 'A', false, 2},
                                                 {"NOTES", 'T', true, 4},
                                                 {"GAME", 'B', false, 20},
                                                 {"OLDBASIC", 'I', false, 6}});

    MachineState clean = new_machine();
    insert_disk(clean, fixtures::make_dos33_slave());
    boot(clean);
    insert_disk(clean, disk);
    auto clean_listing = run_command(clean, {Command::Catalog, {}}).output;
    REQUIRE(clean_listing.size() == 4);
    CHECK(clean_listing[0] == " A 002 HELLO");
    CHECK(clean_listing[1] == "*T 004 NOTES");

    MachineState resident = resident_machine(5);
    insert_disk(resident, disk);
    auto resident_listing = run_command(resident, {Command::Catalog, {}}).output;
    CHECK(resident_listing == clean_listing);
}

TEST_CASE("the thirtieth boot swaps catalog type letters")
{
    MachineState m = new_machine();
    insert_disk(m, infected_with_counter(1, 29));
    boot(m);  // count 30
    CHECK(!m.catalog_type_map.is_identity());
    CHECK(m.catalog_type_map.apply('A') == 'B');
    CHECK(m.catalog_type_map.apply('B') == 'A');
    CHECK(m.catalog_type_map.apply('T') == 'I');
    CHECK(m.catalog_type_map.apply('I') == 'T');

    insert_disk(m, fixtures::make_dos33_slave({{"HELLO", 'A', false, 2}}));
    auto listing = run_command(m, {Command::Catalog, {}}).output;
    REQUIRE(!listing.empty());
    CHECK(listing[0] == " B 002 HELLO");
}

TEST_CASE("usr interface")
{
    MachineState fresh = new_machine();
    CHECK_THROWS_AS(usr_call(fresh, 1), Error);

    MachineState m = resident_machine(7);

    auto version = usr_call(m, 1);
    REQUIRE(version.output.size() == 1);
    CHECK(version.output[0].find("SERIAL 7") != std::string::npos);

    auto boots = usr_call(m, 2);
    REQUIRE(boots.output.size() == 1);
    CHECK(boots.output[0] == "BOOT COUNT 1");

    insert_disk(m, fixtures::make_dos33_slave());
    auto force = usr_call(m, 3);
    CHECK(count_kind(force.events, EventKind::Replicated) == 1);
    CHECK(detect(*m.inserted_disk).verdict == Verdict::Infected);

    auto poem_call = usr_call(m, 4);
    CHECK(count_kind(poem_call.events, EventKind::PoemDisplayed) == 1);
    CHECK(poem_call.output == poem());
    CHECK(poem().size() == 7);

    auto nop = usr_call(m, 200);
    CHECK(nop.events.empty());
}

TEST_CASE("control-reset dispatch follows the reset vector")
{
    MachineState m = resident_machine();
    CHECK(control_reset(m).empty());  // warmstart

    insert_disk(m, infected_with_counter(1, 9));
    boot(m);  // count 10: monitor
    auto monitor = control_reset(m);
    REQUIRE(monitor.size() == 1);
    CHECK(monitor[0].kind == EventKind::EnteredMonitor);

    insert_disk(m, infected_with_counter(1, 39));
    boot(m);  // count 40: self-loop
    auto hang = control_reset(m);
    REQUIRE(hang.size() == 1);
    CHECK(hang[0].kind == EventKind::Hung);
}

TEST_CASE("applesoft protection changes LIST and SAVE")
{
    MachineState m = new_machine();
    insert_disk(m, infected_with_counter(1, 44));
    boot(m);  // count 45
    CHECK(m.applesoft_protect);

    auto list = run_command(m, {Command::List, {}});
    REQUIRE(list.output.size() == 1);
    CHECK(list.output[0].find("executed") != std::string::npos);

    auto save = run_command(m, {Command::Save, {}});
    REQUIRE(save.output.size() == 1);
    CHECK(save.output[0] == "PROGRAM TOO LARGE");
}

TEST_CASE("a broken control-d suppresses the hello program")
{
    MachineState m = new_machine();
    insert_disk(m, infected_with_counter(1, 34));
    boot(m);  // count 35
    CHECK(m.control_d_value == kControlDBrokenValue);

    auto result = run_command(m, {Command::PrintControlD, "RUN HELLO"});
    REQUIRE(result.events.size() == 1);
    CHECK(result.events[0].kind == EventKind::HelloSuppressed);
    CHECK(result.events[0].detail == "RUN HELLO");
    REQUIRE(result.output.size() == 1);
    CHECK(result.output[0] == "RUN HELLO");

    // with the normal value the command reaches DOS silently
    MachineState ok = new_machine();
    insert_disk(ok, fixtures::make_dos33_slave());
    boot(ok);
    CHECK(run_command(ok, {Command::PrintControlD, "RUN HELLO"}).events.empty());
}

TEST_CASE("calibration boots change the constant to distinct values")
{
    std::set<std::uint8_t> seen;
    for (std::uint8_t start : {std::uint8_t(54), std::uint8_t(59), std::uint8_t(69)}) {
        MachineState m = new_machine();
        insert_disk(m, infected_with_counter(1, start));
        boot(m);
        CHECK(m.calibration_constant != kCalibrationDefault);
        seen.insert(m.calibration_constant);
    }
    CHECK(seen.size() == 3);
}

TEST_CASE("boot 65 lands in the monitor")
{
    MachineState m = new_machine();
    insert_disk(m, infected_with_counter(1, 64));
    auto events = boot(m);
    CHECK(has_manifest(events, ManifestKind::BootToMonitor));
    CHECK(count_kind(events, EventKind::EnteredMonitor) == 1);
}
