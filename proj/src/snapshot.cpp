#include "ksopt/snapshot.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>

namespace ksopt {

namespace {

void put_u32(std::vector<unsigned char>& out, std::uint32_t x)
{
    for (int b = 0; b < 4; ++b) out.push_back(static_cast<unsigned char>(x >> (8 * b)));
}

void put_f64(std::vector<unsigned char>& out, double x)
{
    const auto bits = std::bit_cast<std::uint64_t>(x);
    for (int b = 0; b < 8; ++b) out.push_back(static_cast<unsigned char>(bits >> (8 * b)));
}

std::uint32_t get_u32(const unsigned char* p)
{
    std::uint32_t x = 0;
    for (int b = 0; b < 4; ++b) x |= static_cast<std::uint32_t>(p[b]) << (8 * b);
    return x;
}

double get_f64(const unsigned char* p)
{
    std::uint64_t x = 0;
    for (int b = 0; b < 8; ++b) x |= static_cast<std::uint64_t>(p[b]) << (8 * b);
    return std::bit_cast<double>(x);
}

} // namespace

std::vector<unsigned char> encode_snapshot(const Field2D& field, double time)
{
    std::vector<unsigned char> out;
    out.reserve(snapshot_header_bytes + 8 * field.size());
    for (char c : {'K', 'S', 'F', '1'}) out.push_back(static_cast<unsigned char>(c));
    put_u32(out, snapshot_version);
    put_u32(out, static_cast<std::uint32_t>(field.grid().nx));
    put_u32(out, static_cast<std::uint32_t>(field.grid().ny));
    put_f64(out, time);
    for (double x : field.values()) put_f64(out, x);
    return out;
}

Snapshot decode_snapshot(const std::vector<unsigned char>& bytes, const std::string& origin)
{
    if (bytes.size() < 4 || std::memcmp(bytes.data(), "KSF1", 4) != 0) {
        throw SnapshotError(SnapshotError::Kind::bad_magic, origin + ": not a KSF1 snapshot (bad magic)");
    }
    if (bytes.size() < snapshot_header_bytes) {
        throw SnapshotError(SnapshotError::Kind::truncated, origin + ": truncated header: expected " +
                                                                std::to_string(snapshot_header_bytes) +
                                                                " bytes, got " + std::to_string(bytes.size()));
    }
    const std::uint32_t version = get_u32(bytes.data() + 4);
    if (version != snapshot_version) {
        throw SnapshotError(SnapshotError::Kind::bad_version,
                            origin + ": unsupported snapshot version " + std::to_string(version));
    }
    Snapshot s;
    s.nx = get_u32(bytes.data() + 8);
    s.ny = get_u32(bytes.data() + 12);
    s.time = get_f64(bytes.data() + 16);
    const std::size_t expected = snapshot_header_bytes + 8 * static_cast<std::size_t>(s.nx) * s.ny;
    if (bytes.size() != expected) {
        throw SnapshotError(SnapshotError::Kind::truncated, origin + ": payload size mismatch: expected " +
                                                                std::to_string(expected) + " bytes, got " +
                                                                std::to_string(bytes.size()));
    }
    s.values.resize(static_cast<std::size_t>(s.nx) * s.ny);
    for (std::size_t k = 0; k < s.values.size(); ++k) {
        s.values[k] = get_f64(bytes.data() + snapshot_header_bytes + 8 * k);
    }
    return s;
}

void write_snapshot(const Field2D& field, double time, const std::filesystem::path& path)
{
    const auto bytes = encode_snapshot(field, time);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw SnapshotError(SnapshotError::Kind::io, "cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw SnapshotError(SnapshotError::Kind::io, "failed writing " + path.string());
}

Snapshot read_snapshot(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SnapshotError(SnapshotError::Kind::io, "cannot open " + path.string());
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_snapshot(bytes, path.string());
}

Field2D read_snapshot(const std::filesystem::path& path, const GridSpec& grid, double* time)
{
    Snapshot s = read_snapshot(path);
    if (s.nx != static_cast<std::uint32_t>(grid.nx) || s.ny != static_cast<std::uint32_t>(grid.ny)) {
        throw SnapshotError(SnapshotError::Kind::dimension_mismatch,
                            path.string() + ": snapshot is " + std::to_string(s.nx) + "x" + std::to_string(s.ny) +
                                ", expected " + std::to_string(grid.nx) + "x" + std::to_string(grid.ny));
    }
    if (time) *time = s.time;
    return Field2D(grid, std::move(s.values));
}

std::filesystem::path level_path(const std::filesystem::path& dir, const std::string& prefix, int level)
{
    char name[64];
    std::snprintf(name, sizeof name, "%s_%06d.ksf", prefix.c_str(), level);
    return dir / name;
}

void write_control(const ControlField& control, const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    for (int n = 0; n < control.levels(); ++n) {
        write_snapshot(control.level_field(n), control.time_grid().time(n), level_path(dir, "control", n));
    }
}

ControlField read_control(const std::filesystem::path& dir, const TimeGrid& time_grid, const RegionMask& region)
{
    ControlField out(time_grid, region);
    for (int n = 0; n < time_grid.steps; ++n) {
        const Field2D f = read_snapshot(level_path(dir, "control", n), region.grid());
        for (std::size_t c = 0; c < region.count(); ++c) out.at(n, c) = f[region.cells()[c]];
    }
    return out;
}

} // namespace ksopt
