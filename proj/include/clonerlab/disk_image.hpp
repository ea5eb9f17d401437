#ifndef CLONERLAB_DISK_IMAGE_HPP
#define CLONERLAB_DISK_IMAGE_HPP

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "clonerlab/error.hpp"

namespace clonerlab {

// Raw-image geometry: 35 tracks x 16 logical sectors x 256 bytes.
constexpr int kTracks = 35;
constexpr int kSectorsPerTrack = 16;
constexpr int kSectorSize = 256;
constexpr std::size_t kImageSize =
    std::size_t(kTracks) * kSectorsPerTrack * kSectorSize;  // 143,360

using Sector = std::array<std::uint8_t, kSectorSize>;

struct TrackSector {
    std::uint8_t track = 0;
    std::uint8_t sector = 0;

    TrackSector() = default;
    constexpr TrackSector(int t, int s)  // throws BadTrackSector outside 35x16
    {
        if (t < 0 || t >= kTracks || s < 0 || s >= kSectorsPerTrack)
            throw Error(ErrorCode::BadTrackSector, "track/sector out of range: T" +
                                                       std::to_string(t) + " S" +
                                                       std::to_string(s));
        track = std::uint8_t(t);
        sector = std::uint8_t(s);
    }

    auto operator<=>(const TrackSector&) const = default;
};

std::string to_string(TrackSector ts);

// One differing sector between two images, with per-byte before/after.
struct ByteChange {
    std::uint8_t offset = 0;
    std::uint8_t before = 0;
    std::uint8_t after = 0;

    bool operator==(const ByteChange&) const = default;
};

struct SectorDiff {
    TrackSector location;
    std::vector<ByteChange> changes;  // sorted by offset, never empty
};

// A whole 5.25" disk held in memory in ascending (track, sector) order,
// which is exactly the on-disk layout of a raw .dsk/.do file.  Values are
// cheap to move; transforms elsewhere in the library copy rather than
// mutate their inputs.
class DiskImage {
public:
    DiskImage();  // zero-filled image

    static DiskImage load(std::span<const std::uint8_t> bytes);
    static DiskImage load_file(const std::filesystem::path& path);

    const std::vector<std::uint8_t>& bytes() const { return data_; }
    void save_file(const std::filesystem::path& path) const;

    std::span<const std::uint8_t, kSectorSize> sector(TrackSector ts) const;
    Sector read_sector(TrackSector ts) const;

    // In-place write; the functional form is the free write_sector below.
    void put_sector(TrackSector ts, std::span<const std::uint8_t> data);

    bool operator==(const DiskImage& other) const { return data_ == other.data_; }

    std::string source_name;  // optional label, not part of identity

private:
    std::vector<std::uint8_t> data_;
};

DiskImage write_sector(const DiskImage& image, TrackSector ts,
                       std::span<const std::uint8_t> data);

// Empty iff a == b; entries sorted by (track, sector).
std::vector<SectorDiff> diff_images(const DiskImage& a, const DiskImage& b);

}  // namespace clonerlab

#endif
