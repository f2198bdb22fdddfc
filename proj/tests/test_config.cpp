#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "vgs/io/config.hpp"

using namespace vgs;
using namespace vgs::io;
namespace fs = std::filesystem;

namespace {

int error_line(const std::string& text) {
    try {
        parse_config_text(text);
    } catch (const ConfigError& e) {
        return e.line();
    }
    return -1;
}

std::string error_text(const std::string& text) {
    try {
        parse_config_text(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

fs::path scratch(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("vgs_config_test_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

}  // namespace

TEST_SUITE("config") {

TEST_CASE("minimal config gets every default") {
    const auto c = parse_config_text("model.eps = 1e-4\n");
    ScenarioConfig expect;
    expect.model.eps = 1e-4;
    CHECK(c == expect);
    CHECK(c.model.f == 0.04);
    CHECK(c.model.k == 0.065);
    CHECK(c.model.du == 5e-4);
    CHECK(c.model.dv == 2.5e-4);
    CHECK(c.grid.n_cells == 201);
    CHECK(c.time.dt == 0.05);
    CHECK(c.time.theta == 0.5);
    CHECK(c.ic.p0 == 1.0);
    CHECK(c.y0() == 0.04);
    CHECK(c.analysis.a_threshold == 0.05);
    CHECK(c.analysis.probe_x == 0.5);
    CHECK(c.ic.kind == InitialKind::uniform);
    CHECK(c.source_text == "model.eps = 1e-4\n");
}

TEST_CASE("range errors name the key and line") {
    CHECK(error_line("# header\nmodel.eps = -1\n") == 2);
    CHECK(error_text("model.eps = -1\n").find("model.eps") != std::string::npos);
    CHECK(error_line("model.eps = 1e-2\ngrid.n_cells = 3\n") == 2);
    CHECK(error_line("model.eps = 1e-2\ntime.theta = 2\n") == 2);
    CHECK(error_line("model.eps = 1e-2\ntime.record_every = 0.01\n") == 2);
}

TEST_CASE("unknown, duplicate, malformed and missing keys") {
    CHECK(error_line("model.eps = 1e-2\n\nmodel.zeta = 3\n") == 3);
    CHECK(error_text("model.eps = 1e-2\nmodel.zeta = 3\n").find("model.zeta") != std::string::npos);
    CHECK(error_line("model.eps = 1e-2\nmodel.eps = 1e-3\n") == 2);
    CHECK(error_line("model.eps = 1e-2\ngrid.n_cells = 20.5\n") == 2);
    CHECK(error_line("model.eps = abc\n") == 1);
    CHECK(error_line("model.eps = 1e-2\njust words\n") == 2);
    CHECK(error_line("model.eps = 1e-2\nic.kind = blob\n") == 2);
    CHECK(error_text("model.f = 0.05\n").find("model.eps") != std::string::npos);
    CHECK(error_line("model.f = 0.05\n") == 0);
}

TEST_CASE("comments, blank lines and lists") {
    const auto c = parse_config_text(
        "# scenario\n\nmodel.eps = 1e-3   # small\n"
        "time.snapshot_times = 0, 10, 20.5\n"
        "analysis.sweep_eps = 1e-2,1e-3 , 1e-4\n"
        "analysis.directions = s1, mixed\n"
        "ic.kind = bumps\nic.centers = 0.25, 0.75\nic.widths = 0.02\n");
    CHECK(c.model.eps == 1e-3);
    CHECK(c.time.snapshot_times == std::vector<double>{0, 10, 20.5});
    CHECK(c.analysis.sweep_eps == std::vector<double>{1e-2, 1e-3, 1e-4});
    CHECK(c.analysis.directions == std::vector<std::string>{"s1", "mixed"});
    CHECK(c.ic.kind == InitialKind::bumps);
    CHECK(error_line("model.eps = 1e-2\nic.kind = bumps\nic.centers = 0.2, 0.4, 0.6\nic.widths = 0.01, 0.02\n") == 4);
}

TEST_CASE("round trip through the canonical text") {
    ScenarioConfig c = parse_config_text("model.eps = 1e-2\n");
    CHECK(parse_config_text(serialize(c)) == c);

    c.model.eps = 1.0 / 3.0;
    c.model.f = 0.0367;
    c.grid.n_cells = 97;
    c.time.snapshot_times = {0.1, 1.0 / 7.0};
    c.ic.kind = InitialKind::bumps;
    c.ic.centers = {0.2, 0.8};
    c.ic.widths = {0.01, 0.03};
    c.ic.y0 = 0.123456789012345678;
    c.analysis.directions = {"s2"};
    c.library.rng_seed = 1234567890123LL;
    c.output.formats = {"csv"};
    const auto again = parse_config_text(serialize(c));
    CHECK(again == c);
    CHECK(serialize(again) == serialize(c));
}

TEST_CASE("referenced files must exist at parse time") {
    const fs::path dir = scratch("files");
    {
        std::ofstream(dir / "scenario.cfg") << "model.eps = 1e-2\nic.kind = profile-file\nic.file = prof.csv\n";
    }
    CHECK_THROWS_AS(parse_config(dir / "scenario.cfg"), ConfigError);
    {
        std::ofstream(dir / "prof.csv") << "x,u,v\n";
    }
    const auto c = parse_config(dir / "scenario.cfg");
    CHECK(c.resolve(c.ic.file) == dir / "prof.csv");

    {
        std::ofstream(dir / "lib.cfg") << "model.eps = 1e-2\nic.kind = library-entry\nic.library = lib\nic.entry = 2\n";
    }
    CHECK(error_text(std::string("model.eps = 1e-2\nic.kind = library-entry\n")).find("ic.library") !=
          std::string::npos);
    CHECK_THROWS_AS(parse_config(dir / "lib.cfg"), ConfigError);
    CHECK_THROWS_AS(parse_config(dir / "missing.cfg"), ConfigError);
}

TEST_CASE("derived objects") {
    auto c = parse_config_text("model.eps = 1e-3\ngrid.n_cells = 50\ntime.dt = 0.1\nanalysis.probe_x = 0.25\n");
    CHECK(c.params().eps == 1e-3);
    CHECK(c.params(0.5).eps == 0.5);
    CHECK(c.make_grid().n_cells() == 50);
    CHECK(c.stepper().dt == 0.1);
    CHECK(c.stepper().probe_x == 0.25);
    CHECK(c.library_options(3).jobs == 3);
    CHECK(c.output.wants("csv"));
    CHECK_FALSE(c.output.wants("png"));
}

}
