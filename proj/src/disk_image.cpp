#include "clonerlab/disk_image.hpp"

#include <algorithm>
#include <fstream>

namespace clonerlab {

namespace {

std::size_t sector_offset(TrackSector ts)
{
    return (std::size_t(ts.track) * kSectorsPerTrack + ts.sector) * kSectorSize;
}

}  // namespace

std::string to_string(TrackSector ts)
{
    return "T" + std::to_string(ts.track) + " S" + std::to_string(ts.sector);
}

DiskImage::DiskImage() : data_(kImageSize, 0) {}

DiskImage DiskImage::load(std::span<const std::uint8_t> bytes)
{
    if (bytes.size() != kImageSize)
        throw Error(ErrorCode::WrongLength,
                    "image is " + std::to_string(bytes.size()) + " bytes, expected " +
                        std::to_string(kImageSize));
    DiskImage image;
    std::copy(bytes.begin(), bytes.end(), image.data_.begin());
    return image;
}

DiskImage DiskImage::load_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::IoError, "cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    DiskImage image = load(bytes);
    image.source_name = path.string();
    return image;
}

void DiskImage::save_file(const std::filesystem::path& path) const
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error(ErrorCode::IoError, "cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(data_.data()), std::streamsize(data_.size()));
    if (!out)
        throw Error(ErrorCode::IoError, "short write to " + path.string());
}

std::span<const std::uint8_t, kSectorSize> DiskImage::sector(TrackSector ts) const
{
    return std::span<const std::uint8_t, kSectorSize>(data_.data() + sector_offset(ts),
                                                      kSectorSize);
}

Sector DiskImage::read_sector(TrackSector ts) const
{
    Sector out;
    auto view = sector(ts);
    std::copy(view.begin(), view.end(), out.begin());
    return out;
}

void DiskImage::put_sector(TrackSector ts, std::span<const std::uint8_t> data)
{
    if (data.size() != kSectorSize)
        throw Error(ErrorCode::WrongSectorLength,
                    "sector data is " + std::to_string(data.size()) + " bytes, expected 256");
    std::copy(data.begin(), data.end(), data_.begin() + std::ptrdiff_t(sector_offset(ts)));
}

DiskImage write_sector(const DiskImage& image, TrackSector ts,
                       std::span<const std::uint8_t> data)
{
    DiskImage out = image;
    out.put_sector(ts, data);
    return out;
}

std::vector<SectorDiff> diff_images(const DiskImage& a, const DiskImage& b)
{
    std::vector<SectorDiff> diffs;
    for (int t = 0; t < kTracks; ++t) {
        for (int s = 0; s < kSectorsPerTrack; ++s) {
            TrackSector ts(t, s);
            auto sa = a.sector(ts);
            auto sb = b.sector(ts);
            SectorDiff diff{ts, {}};
            for (int i = 0; i < kSectorSize; ++i) {
                if (sa[i] != sb[i])
                    diff.changes.push_back({std::uint8_t(i), sa[i], sb[i]});
            }
            if (!diff.changes.empty())
                diffs.push_back(std::move(diff));
        }
    }
    return diffs;
}

}  // namespace clonerlab
