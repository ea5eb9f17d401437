#ifndef CLONERLAB_FIXTURES_HPP
#define CLONERLAB_FIXTURES_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "clonerlab/disk_image.hpp"

namespace clonerlab::fixtures {

// Synthetic disk images with the structures the toolkit inspects: boot
// sectors, the command-handler fingerprint, VTOC and catalog chain.
// Deterministic; used by the spread model to mint its disk population and
// by the test corpus builders.

struct FileSpec {
    std::string name;        // up to 30 chars
    char type = 'A';         // T/I/A/B
    bool locked = false;
    int length_sectors = 2;
};

// Freshly initialized DOS 3.3 slave: Relocator slot zeroed, stock handler
// bytes at T1 S0 +$80, VTOC at T17 S0, empty catalog chain.
DiskImage make_dos33_slave(const std::vector<FileSpec>& files = {});

// Same, with non-zero Relocator code in T0 S10-11.
DiskImage make_dos33_master(const std::vector<FileSpec>& files = {});

// T0 S0 starts with the ProDOS boot-block fingerprint; nothing else parsed.
DiskImage make_prodos();

// Deterministic noise that matches no fingerprint.
DiskImage make_garbage(std::uint64_t seed = 0);

}  // namespace clonerlab::fixtures

#endif
