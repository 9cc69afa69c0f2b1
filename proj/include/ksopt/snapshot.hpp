#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ksopt/control_field.hpp"
#include "ksopt/error.hpp"
#include "ksopt/mesh.hpp"

/**
 * @file snapshot.hpp
 * @brief Binary field snapshots.
 *
 * Layout (all little-endian, no padding):
 *
 *   offset  size  content
 *        0     4  magic "KSF1"
 *        4     4  u32 format version (1)
 *        8     4  u32 nx
 *       12     4  u32 ny
 *       16     8  f64 time
 *       24  8*nx*ny  f64 values, row-major (index j * nx + i)
 */

namespace ksopt {

inline constexpr std::uint32_t snapshot_version = 1;
inline constexpr std::size_t snapshot_header_bytes = 24;

class SnapshotError : public Error {
public:
    enum class Kind { io, bad_magic, bad_version, truncated, dimension_mismatch };

    SnapshotError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

struct Snapshot {
    std::uint32_t nx = 0;
    std::uint32_t ny = 0;
    double time = 0.0;
    std::vector<double> values;
};

std::vector<unsigned char> encode_snapshot(const Field2D& field, double time);
Snapshot decode_snapshot(const std::vector<unsigned char>& bytes, const std::string& origin = "<memory>");

void write_snapshot(const Field2D& field, double time, const std::filesystem::path& path);
Snapshot read_snapshot(const std::filesystem::path& path);
/// Reads a snapshot and checks its dimensions against `grid`.
Field2D read_snapshot(const std::filesystem::path& path, const GridSpec& grid, double* time = nullptr);

/// "<prefix>_<level, 6 digits>.ksf"
std::filesystem::path level_path(const std::filesystem::path& dir, const std::string& prefix, int level);

/// One snapshot per control level (full grid, zero off the region).
void write_control(const ControlField& control, const std::filesystem::path& dir);
ControlField read_control(const std::filesystem::path& dir, const TimeGrid& time_grid, const RegionMask& region);

} // namespace ksopt
