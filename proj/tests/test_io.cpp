#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "ksopt/config.hpp"
#include "ksopt/snapshot.hpp"

using namespace ksopt;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / ("ksopt_test_io_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

Field2D random_field(const GridSpec& g, unsigned seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist;
    Field2D f(g);
    for (auto& x : f.values()) x = dist(rng);
    return f;
}

ConfigError::Kind config_error_kind(const std::string& text)
{
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no ConfigError for: " << text;
    return ConfigError::Kind::syntax;
}

std::string config_error_key(const std::string& text)
{
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.key();
    }
    ADD_FAILURE() << "no ConfigError for: " << text;
    return {};
}

} // namespace

TEST(Snapshot, RoundTripIsBitwise)
{
    const GridSpec g(1.0, 1.0, 16, 16);
    const Field2D f = random_field(g, 1);
    const fs::path path = scratch_dir("roundtrip") / "f.ksf";
    write_snapshot(f, 0.375, path);
    EXPECT_EQ(fs::file_size(path), snapshot_header_bytes + 8 * g.cells());
    double t = 0.0;
    const Field2D back = read_snapshot(path, g, &t);
    EXPECT_TRUE(back == f);
    EXPECT_EQ(t, 0.375);
}

TEST(Snapshot, HeaderLayoutIsLittleEndian)
{
    const GridSpec g(1.0, 2.0, 3, 2);
    const auto bytes = encode_snapshot(Field2D(g, 1.0), 0.5);
    ASSERT_EQ(bytes.size(), snapshot_header_bytes + 8 * 6);
    EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "KSF1");
    EXPECT_EQ(bytes[4], 1);
    EXPECT_EQ(bytes[8], 3);
    EXPECT_EQ(bytes[12], 2);
    // 0.5 = 0x3FE0000000000000, 1.0 = 0x3FF0000000000000
    EXPECT_EQ(bytes[23], 0x3F);
    EXPECT_EQ(bytes[22], 0xE0);
    EXPECT_EQ(bytes[31], 0x3F);
    EXPECT_EQ(bytes[30], 0xF0);
    const Snapshot s = decode_snapshot(bytes);
    EXPECT_EQ(s.nx, 3u);
    EXPECT_EQ(s.ny, 2u);
    EXPECT_EQ(s.time, 0.5);
    EXPECT_EQ(s.values, std::vector<double>(6, 1.0));
}

TEST(Snapshot, BadMagicRejected)
{
    auto bytes = encode_snapshot(Field2D(GridSpec(1.0, 1.0, 4, 4), 2.0), 0.0);
    bytes[0] = 'X';
    bytes[1] = 'X';
    bytes[2] = 'X';
    bytes[3] = 'X';
    try {
        decode_snapshot(bytes);
        FAIL() << "expected SnapshotError";
    } catch (const SnapshotError& e) {
        EXPECT_EQ(e.kind(), SnapshotError::Kind::bad_magic);
    }
}

TEST(Snapshot, BadVersionRejected)
{
    auto bytes = encode_snapshot(Field2D(GridSpec(1.0, 1.0, 4, 4), 2.0), 0.0);
    bytes[4] = 7;
    try {
        decode_snapshot(bytes);
        FAIL() << "expected SnapshotError";
    } catch (const SnapshotError& e) {
        EXPECT_EQ(e.kind(), SnapshotError::Kind::bad_version);
    }
}

TEST(Snapshot, TruncatedPayloadNamesByteCounts)
{
    auto bytes = encode_snapshot(Field2D(GridSpec(1.0, 1.0, 4, 4), 2.0), 0.0);
    bytes.resize(bytes.size() - 5);
    try {
        decode_snapshot(bytes);
        FAIL() << "expected SnapshotError";
    } catch (const SnapshotError& e) {
        EXPECT_EQ(e.kind(), SnapshotError::Kind::truncated);
        const std::string msg = e.what();
        EXPECT_NE(msg.find("152"), std::string::npos) << msg;
        EXPECT_NE(msg.find("147"), std::string::npos) << msg;
    }
    EXPECT_THROW(decode_snapshot(std::vector<unsigned char>(10, 0)), SnapshotError);
}

TEST(Snapshot, DimensionMismatchRejected)
{
    const fs::path path = scratch_dir("dims") / "f.ksf";
    write_snapshot(Field2D(GridSpec(1.0, 1.0, 8, 8)), 0.0, path);
    try {
        read_snapshot(path, GridSpec(1.0, 1.0, 16, 16));
        FAIL() << "expected SnapshotError";
    } catch (const SnapshotError& e) {
        EXPECT_EQ(e.kind(), SnapshotError::Kind::dimension_mismatch);
    }
}

TEST(Snapshot, MissingFileIsIoError)
{
    try {
        read_snapshot(fs::temp_directory_path() / "ksopt_no_such_file.ksf");
        FAIL() << "expected SnapshotError";
    } catch (const SnapshotError& e) {
        EXPECT_EQ(e.kind(), SnapshotError::Kind::io);
    }
}

TEST(Snapshot, ControlRoundTrip)
{
    const GridSpec g(1.0, 1.0, 10, 10);
    const TimeGrid tg(1.0, 5);
    const RegionMask region = RegionMask::rectangle(g, 0.2, 0.3, 0.6, 0.9);
    ControlField f(tg, region);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> dist;
    for (auto& x : f.values()) x = dist(rng);
    const fs::path dir = scratch_dir("control");
    write_control(f, dir);
    EXPECT_EQ(level_path(dir, "control", 3).filename(), "control_000003.ksf");
    EXPECT_TRUE(fs::exists(level_path(dir, "control", 4)));
    EXPECT_FALSE(fs::exists(level_path(dir, "control", 5)));
    EXPECT_TRUE(read_control(dir, tg, region) == f);
}

TEST(Config, Defaults)
{
    const RunConfig c = parse_config("");
    EXPECT_EQ(c.model.p_exponent, 2.1);
    EXPECT_EQ(c.forward.scheme, FluxScheme::central);
    EXPECT_EQ(c.optimizer.vi_tol, 1e-6);
    EXPECT_EQ(c.set.kind, AdmissibleSet::Kind::unconstrained);
    EXPECT_EQ(c.nx, 32);
    EXPECT_EQ(c.steps, 100);
    EXPECT_EQ(c.gradcheck_directions, 5);
    EXPECT_EQ(c.starts, 1);
}

TEST(Config, ParsesKeysCommentsAndExpressions)
{
    const RunConfig c = parse_config("# comment\n"
                                     "grid.nx = 12   # trailing\n"
                                     "grid.ny = 6\n"
                                     "domain.Lx = 2\n"
                                     "model.kappa = -1.5\n"
                                     "forward.scheme = upwind\n"
                                     "control.kind = box\n"
                                     "control.f_min = -1\n"
                                     "control.f_max = 3\n"
                                     "control.region = 0.5, 0.25, 1.5, 0.75\n"
                                     "init.u0 = cosine(1, 0.5, 1, 0)\n"
                                     "init.v0 = gaussian(2, 1, 0.5, 0.2)\n");
    EXPECT_EQ(c.nx, 12);
    EXPECT_EQ(c.ny, 6);
    EXPECT_EQ(c.lx, 2.0);
    EXPECT_EQ(c.model.kappa, -1.5);
    EXPECT_EQ(c.forward.scheme, FluxScheme::upwind);
    EXPECT_EQ(c.set.f_min, -1.0);
    EXPECT_EQ(c.set.f_max, 3.0);
    ASSERT_TRUE(c.region.has_value());
    EXPECT_EQ(*c.region, (std::vector<double>{0.5, 0.25, 1.5, 0.75}));
    EXPECT_EQ(c.u0.kind, FieldExpr::Kind::cosine);
    EXPECT_NEAR(c.u0.evaluate(0.0, 0.3, 2.0, 1.0), 1.5, 1e-15);
    EXPECT_NEAR(c.v0.evaluate(1.0, 0.5, 2.0, 1.0), 2.0, 1e-15);
    EXPECT_EQ(make_region(c).count(), 24u); // 6 x centers in [0.5, 1.5], 4 y centers in [0.25, 0.75]
}

TEST(Config, InvariantViolationsNameTheKey)
{
    EXPECT_EQ(config_error_key("model.mu = -1\n"), "model.mu");
    EXPECT_EQ(config_error_kind("model.mu = -1\n"), ConfigError::Kind::invariant);
    EXPECT_EQ(config_error_key("cost.gamma_f = 0\n"), "cost.gamma_f");
    EXPECT_EQ(config_error_key("init.u0 = cosine(0, 1, 1, 0)\n"), "init.u0");
    EXPECT_EQ(config_error_key("model.p_exponent = 3.5\n"), "model.p_exponent");
    EXPECT_EQ(config_error_key("grid.nx = 0\n"), "grid.nx");
    EXPECT_EQ(config_error_key("control.kind = box\ncontrol.f_min = 1\ncontrol.f_max = -1\n"), "control.f_max");
    EXPECT_NO_THROW(parse_config("cost.gamma_f = 0\ncontrol.kind = box\ncontrol.f_min = -1\ncontrol.f_max = 1\n"));
}

TEST(Config, SyntaxUnknownKeyAndTypeMismatch)
{
    EXPECT_EQ(config_error_kind("grid.nx 12\n"), ConfigError::Kind::syntax);
    EXPECT_EQ(config_error_kind("grid.nz = 12\n"), ConfigError::Kind::unknown_key);
    EXPECT_EQ(config_error_key("grid.nz = 12\n"), "grid.nz");
    EXPECT_EQ(config_error_kind("grid.nx = twelve\n"), ConfigError::Kind::type_mismatch);
    EXPECT_EQ(config_error_kind("grid.nx = 1.5\n"), ConfigError::Kind::type_mismatch);
    EXPECT_EQ(config_error_kind("forward.scheme = weno\n"), ConfigError::Kind::type_mismatch);
    EXPECT_EQ(config_error_kind("init.u0 = sinc(1)\n"), ConfigError::Kind::type_mismatch);
    EXPECT_EQ(config_error_kind("time.T =\n"), ConfigError::Kind::type_mismatch);
}

TEST(Config, FileExpressionsResolveAgainstConfigDirectory)
{
    const fs::path dir = scratch_dir("config_file");
    const GridSpec g(1.0, 1.0, 6, 6);
    const Field2D target = random_field(g, 9);
    write_snapshot(target, 0.0, dir / "ud.ksf");
    std::ofstream(dir / "run.cfg") << "grid.nx = 6\ngrid.ny = 6\ntargets.u_d = file:ud.ksf\n";
    const RunConfig c = load_config(dir / "run.cfg");
    EXPECT_EQ(c.u_d.kind, FieldExpr::Kind::file);
    EXPECT_TRUE(make_field(c.u_d, g, c.base_directory) == target);
}

TEST(Config, ManufacturedTargetsFollowKnownControl)
{
    const RunConfig c = parse_config("grid.nx = 6\ngrid.ny = 6\ntime.nt = 4\n"
                                     "targets.u_d = manufactured\ntargets.v_d = manufactured\n"
                                     "targets.f_star = constant(0.5)\n");
    const Problem p = build_problem(c);
    ControlField f_star(p.time_grid, p.region);
    for (auto& x : f_star.values()) x = 0.5;
    const StateTrajectory s = solve_forward(p.u0, p.v0, f_star, p.params, p.forward);
    for (int n = 0; n <= 4; ++n) {
        EXPECT_TRUE(p.targets.u_at(n) == s.u[n]);
        EXPECT_TRUE(p.targets.v_at(n) == s.v[n]);
    }
    EXPECT_EQ(config_error_kind("targets.u_d = manufactured\n"), ConfigError::Kind::invariant);
}

TEST(Config, FixturesLoad)
{
    for (const char* name : {"logistic.cfg", "manufactured.cfg"}) {
        EXPECT_NO_THROW(load_config(fs::path(KSOPT_FIXTURE_DIR) / name)) << name;
    }
    EXPECT_THROW(load_config(fs::temp_directory_path() / "ksopt_no_such.cfg"), ConfigError);
}
