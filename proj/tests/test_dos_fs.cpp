#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "clonerlab/cloner_core.hpp"
#include "clonerlab/dos_fs.hpp"
#include "clonerlab/fixtures.hpp"

using namespace clonerlab;

TEST_CASE("vtoc of a zero image parses with all fields zero")
{
    Vtoc vtoc = parse_vtoc(DiskImage{});
    CHECK(vtoc.catalog_track == 0);
    CHECK(vtoc.catalog_sector == 0);
    CHECK(vtoc.dos_version == 0);
    CHECK(vtoc.cloner_boot_count == 0);
    CHECK(vtoc.cloner_serial == 0);
    CHECK(vtoc.cloner_version == 0);
}

TEST_CASE("vtoc of a fresh DOS 3.3 slave")
{
    Vtoc vtoc = parse_vtoc(fixtures::make_dos33_slave());
    CHECK(vtoc.dos_version == 3);
    CHECK(vtoc.catalog_track == 17);
    CHECK(vtoc.catalog_sector == 15);
    CHECK(vtoc.cloner_boot_count == 0);
    CHECK(vtoc.cloner_version == 0);
}

TEST_CASE("vtoc re-serialization reproduces arbitrary raw sectors")
{
    std::mt19937 gen(77);
    for (int i = 0; i < 50; ++i) {
        Sector raw;
        for (auto& b : raw)
            b = std::uint8_t(gen());
        DiskImage image = write_sector(DiskImage{}, kVtocLocation, raw);
        CHECK(parse_vtoc(image).serialize() == raw);
    }
}

TEST_CASE("infection markers round-trip through the vtoc")
{
    DiskImage infected = infect(fixtures::make_dos33_slave(), 7).image;
    Vtoc vtoc = parse_vtoc(infected);
    CHECK(vtoc.cloner_serial == 7);
    CHECK(vtoc.cloner_version == kClonerVersion);
}

TEST_CASE("catalog walk finds a single HELLO entry")
{
    DiskImage disk = fixtures::make_dos33_slave({{"HELLO", 'A', false, 2}});
    auto entries = walk_catalog(disk);
    REQUIRE(entries.size() == 1);
    CHECK(entries[0].name == "HELLO");
    CHECK(entries[0].file_type == 'A');
    CHECK(!entries[0].locked);
    CHECK(!entries[0].deleted);
    CHECK(entries[0].length_sectors == 2);
}

TEST_CASE("catalog walk reports locked and typed entries")
{
    DiskImage disk = fixtures::make_dos33_slave({
        {"HELLO", 'A', false, 2},
        {"DATA", 'T', true, 5},
        {"GAME", 'B', false, 34},
    });
    auto entries = walk_catalog(disk);
    REQUIRE(entries.size() == 3);
    CHECK(entries[1].name == "DATA");
    CHECK(entries[1].file_type == 'T');
    CHECK(entries[1].locked);
    CHECK(entries[2].file_type == 'B');
    CHECK(entries[2].length_sectors == 34);
}

TEST_CASE("catalog link leaving the disk is a broken chain")
{
    DiskImage disk = fixtures::make_dos33_slave();
    Sector cat = disk.read_sector(TrackSector(17, 15));
    cat[1] = 40;  // no such track
    disk.put_sector(TrackSector(17, 15), cat);
    try {
        walk_catalog(disk);
        FAIL("expected BrokenChain");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::BrokenChain);
    }
}

TEST_CASE("catalog walk requires a DOS image")
{
    CHECK_THROWS_AS(walk_catalog(DiskImage{}), Error);
    CHECK_THROWS_AS(walk_catalog(fixtures::make_prodos()), Error);
}

TEST_CASE("a self-linking catalog terminates via the cycle guard")
{
    DiskImage disk = fixtures::make_dos33_slave();
    Sector cat = disk.read_sector(TrackSector(17, 15));
    cat[1] = 17;
    cat[2] = 15;  // points at itself
    disk.put_sector(TrackSector(17, 15), cat);
    CHECK_NOTHROW(walk_catalog(disk));
}

TEST_CASE("classification of the fixture zoo")
{
    CHECK(classify_disk(DiskImage{}) == DiskClass::NonDosOrUnknown);
    CHECK(classify_disk(fixtures::make_garbage(3)) == DiskClass::NonDosOrUnknown);
    CHECK(classify_disk(fixtures::make_dos33_slave()) == DiskClass::Dos33Slave);
    CHECK(classify_disk(fixtures::make_dos33_master()) == DiskClass::Dos33Master);
    CHECK(classify_disk(fixtures::make_prodos()) == DiskClass::ProDos);
}

TEST_CASE("random bytes in the Relocator slot turn a slave into a master")
{
    DiskImage disk = fixtures::make_dos33_slave();
    std::mt19937 gen(9);
    Sector noise;
    for (auto& b : noise)
        b = std::uint8_t(gen() | 1);
    disk.put_sector(TrackSector(0, 10), noise);
    disk.put_sector(TrackSector(0, 11), noise);
    CHECK(classify_disk(disk) == DiskClass::Dos33Master);
}

TEST_CASE("infection does not change the classification")
{
    CHECK(classify_disk(infect(fixtures::make_dos33_slave(), 1).image) == DiskClass::Dos33Slave);
    CHECK(classify_disk(infect(fixtures::make_dos33_master(), 1).image) == DiskClass::Dos33Master);
}

TEST_CASE("classification is stable under writes outside tracks 0-2 and 17")
{
    std::mt19937 gen(13);
    DiskImage disks[] = {fixtures::make_dos33_slave(), fixtures::make_dos33_master(),
                         fixtures::make_prodos(), fixtures::make_garbage(1)};
    for (DiskImage& disk : disks) {
        DiskClass before = classify_disk(disk);
        for (int i = 0; i < 40; ++i) {
            int t = int(gen() % kTracks);
            if (t <= 2 || t == 17)
                continue;
            Sector data;
            for (auto& b : data)
                b = std::uint8_t(gen());
            disk.put_sector(TrackSector(t, int(gen() % kSectorsPerTrack)), data);
        }
        CHECK(classify_disk(disk) == before);
    }
}

TEST_CASE("susceptibility")
{
    auto stock = is_susceptible(fixtures::make_dos33_slave());
    CHECK(stock.susceptible);
    CHECK(stock.reason == SusceptibilityReason::Ok);

    auto infected = is_susceptible(infect(fixtures::make_dos33_slave(), 1).image);
    CHECK(!infected.susceptible);
    CHECK(infected.reason == SusceptibilityReason::AlreadyInfected);

    auto prodos = is_susceptible(fixtures::make_prodos());
    CHECK(!prodos.susceptible);
    CHECK(prodos.reason == SusceptibilityReason::WrongFilesystem);

    auto master = is_susceptible(fixtures::make_dos33_master());
    CHECK(!master.susceptible);
    CHECK(master.reason == SusceptibilityReason::MasterDisk);
}

TEST_CASE("susceptible implies slave classification")
{
    DiskImage zoo[] = {fixtures::make_dos33_slave(), fixtures::make_dos33_master(),
                       fixtures::make_prodos(), fixtures::make_garbage(2), DiskImage{},
                       infect(fixtures::make_dos33_slave(), 9).image};
    for (const DiskImage& disk : zoo)
        if (is_susceptible(disk).susceptible)
            CHECK(classify_disk(disk) == DiskClass::Dos33Slave);
}
