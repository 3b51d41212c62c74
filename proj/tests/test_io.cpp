// NBF1/NPE1 round trips, config parsing, schema validation and the FNV-1a
// manifest hash.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"

#include "nelsonium/config.hpp"
#include "nelsonium/errors.hpp"
#include "nelsonium/fields.hpp"
#include "nelsonium/nbf.hpp"
#include "nelsonium/rng.hpp"

using namespace nelsonium;

namespace {

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

} // namespace

TEST_SUITE("io") {

TEST_CASE("real field NBF round trip") {
    const Grid g = build_grid(7.5, 16, 2);
    RngStream rng(42, 0);
    std::vector<double> values(g.size());
    for (double& v : values) v = rng.normal();
    const RealField f(g, values);
    const std::string path = temp_path("roundtrip_real.nbf");
    write_nbf(path, f);
    CHECK_FALSE(nbf_is_complex(path));
    const RealField back = read_nbf_real(path);
    REQUIRE(back.grid() == g);
    double err = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) err = std::max(err, std::abs(back[i] - f[i]));
    CHECK(err == 0.0);
    std::remove(path.c_str());
}

TEST_CASE("complex field NBF round trip") {
    const Grid g = build_grid(3.0, 8, 1);
    RngStream rng(7, 1);
    std::vector<cplx> values(g.size());
    for (cplx& v : values) v = cplx{rng.normal(), rng.normal()};
    const ComplexField f(g, values);
    const std::string path = temp_path("roundtrip_complex.nbf");
    write_nbf(path, f);
    CHECK(nbf_is_complex(path));
    const ComplexField back = read_nbf_complex(path);
    REQUIRE(back.grid() == g);
    double err = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) err = std::max(err, std::abs(back[i] - f[i]));
    CHECK(err == 0.0);
    CHECK_THROWS(read_nbf_real(path));
    std::remove(path.c_str());
}

TEST_CASE("NPE path ensemble round trip") {
    PathFrames pf;
    pf.box_length = 12.0;
    pf.n_paths = 3;
    pf.n_frames = 2;
    pf.dims = 2;
    pf.times = {0.0, 0.5};
    pf.positions.resize(2 * 3 * 2);
    for (std::size_t i = 0; i < pf.positions.size(); ++i) {
        pf.positions[i] = 0.25 * static_cast<double>(i) - 3.0;
    }
    const std::string path = temp_path("roundtrip.npe");
    write_npe(path, pf);
    const PathFrames back = read_npe(path);
    CHECK(back.box_length == pf.box_length);
    CHECK(back.n_paths == pf.n_paths);
    CHECK(back.n_frames == pf.n_frames);
    CHECK(back.dims == pf.dims);
    CHECK(back.times == pf.times);
    CHECK(back.positions == pf.positions);
    std::remove(path.c_str());
}

TEST_CASE("corrupted binary headers are rejected") {
    const std::string path = temp_path("corrupt.nbf");
    {
        std::ofstream out(path, std::ios::binary);
        out << "not a field file at all";
    }
    CHECK_THROWS(read_nbf_real(path));
    CHECK_THROWS(read_npe(path));
    std::remove(path.c_str());
}

TEST_CASE("config parsing: sections, comments, types") {
    const Config cfg = Config::parse_string("# leading comment\n"
                                            "[grid]\n"
                                            "box_length = 20.0   # trailing comment\n"
                                            "points = 256\n"
                                            "[run]\n"
                                            "seed = 12345678901234567890\n"
                                            "flag = true\n"
                                            "list = 2, 4, 8\n"
                                            "weights = 0.5, -1.25e-3\n");
    CHECK(cfg.get_double("grid.box_length") == doctest::Approx(20.0));
    CHECK(cfg.get_u32("grid.points") == 256);
    CHECK(cfg.get_u64("run.seed") == 12345678901234567890ull);
    CHECK(cfg.get_bool("run.flag", false));
    CHECK(cfg.get_bool("run.absent", true));
    CHECK(cfg.get_u32_list("run.list") == std::vector<std::uint32_t>{2, 4, 8});
    const std::vector<double> w = cfg.get_double_list("run.weights");
    REQUIRE(w.size() == 2);
    CHECK(w[0] == doctest::Approx(0.5));
    CHECK(w[1] == doctest::Approx(-1.25e-3));
    CHECK(cfg.get_string("grid.missing", "fallback") == "fallback");
    CHECK(cfg.has("grid.points"));
    CHECK_FALSE(cfg.has("grid.pints"));
}

TEST_CASE("config parsing rejects malformed input") {
    CHECK_THROWS_AS(Config::parse_string("key_without_section = 1\n"), config_error);
    CHECK_THROWS_AS(Config::parse_string("[s]\nnoequals\n"), config_error);
    CHECK_THROWS_AS(Config::parse_string("[s]\na = 1\na = 2\n"), config_error);
    CHECK_THROWS_AS(Config::parse_string("[unclosed\na = 1\n"), config_error);
    const Config cfg = Config::parse_string("[s]\na = zzz\nn = -3\n");
    CHECK_THROWS_AS(cfg.get_double("s.a"), config_error);
    CHECK_THROWS_AS(cfg.get_u32("s.n"), config_error);
    CHECK_THROWS_AS(cfg.get_double("s.missing"), config_error);
}

TEST_CASE("schema validation is strict in both directions") {
    const Config cfg = Config::parse_string("[grid]\npoints = 64\nextra = 1\n");
    CHECK_THROWS_WITH_AS(cfg.validate({"grid.points"}, {}),
                         doctest::Contains("unknown key 'grid.extra'"), config_error);
    const Config ok = Config::parse_string("[grid]\npoints = 64\n");
    CHECK_NOTHROW(ok.validate({"grid.points"}, {}));
    CHECK_THROWS_WITH_AS(ok.validate({"grid.points"}, {"grid.box_length"}),
                         doctest::Contains("missing required key"), config_error);
}

TEST_CASE("FNV-1a hash matches published vectors") {
    CHECK(fnv1a_hex("") == "cbf29ce484222325");
    CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
    CHECK(fnv1a_hex("foobar") == "85944171f73967e8");
}

TEST_CASE("raw text is preserved for hashing") {
    const std::string text = "[s]\na = 1\n";
    const Config cfg = Config::parse_string(text);
    CHECK(cfg.raw_text() == text);
    CHECK(fnv1a_hex(cfg.raw_text()) == fnv1a_hex(text));
}

} // TEST_SUITE
