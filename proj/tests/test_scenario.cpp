#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "annulus/errors.hpp"
#include "annulus/scenario.hpp"

using namespace annulus;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("annulus_test_scenario_" + name);
    fs::remove_all(p);
    return p;
}

ScenarioConfig parse(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace

TEST_CASE("config parsing") {
    const ScenarioConfig c = parse(
        "# comment\npipeline = reach\nseed = 7\n\n[map]\nfamily = rigid\nc = 0.25  # trailing\n"
        "[bricks]\ngrid_n = 8\nwindow = 32\n[rotation]\nhorizon = 500\n[dichotomy]\nmc_samples = 1000\n");
    CHECK(c.pipeline == "reach");
    CHECK(c.seed == 7);
    CHECK(c.family == "rigid");
    CHECK(c.family_params.at("c") == "0.25");
    CHECK(c.grid_n == 8);
    CHECK(c.window == 32);
    CHECK(c.horizon == 500);
    CHECK(c.mc_samples == 1000);
    CHECK(c.fixed_point_grid == 512);

    // Round trip through the writer.
    const ScenarioConfig back = parse(format_config(c));
    CHECK(format_config(back) == format_config(c));
}

TEST_CASE("config errors") {
    CHECK_THROWS_AS(parse("colour = blue\n"), ConfigError);
    CHECK_THROWS_AS(parse("[bricks]\nwidth = 3\n"), ConfigError);
    CHECK_THROWS_AS(parse("[mystery]\n"), ConfigError);
    CHECK_THROWS_AS(parse("seed = many\n"), ConfigError);
    CHECK_THROWS_AS(parse("[bricks]\ngrid_n = 8x\n"), ConfigError);
    CHECK_THROWS_AS(parse("pipeline = everything\n"), ConfigError);
    CHECK_THROWS_AS(parse("[map]\nfamily = rigid\nk = 2\n"), ConfigError);
    CHECK_THROWS_AS(parse("[map]\nfamily = hyperbolic\n"), ConfigError);
    CHECK_THROWS_AS(parse("just words\n"), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/annulus.cfg"), ConfigError);
}

TEST_CASE("fnv1a64 reference values") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("rigid dichotomy scenario") {
    ScenarioConfig c = parse("pipeline = dichotomy\n[map]\nfamily = rigid\nc = 0.3\n");
    c.out = scratch("rigid").string();
    const RunReport r = run_scenario(c);
    CHECK(r.exit_code == 0);
    CHECK(fs::exists(fs::path(c.out) / "witness.csv"));
    CHECK(slurp(fs::path(c.out) / "verdict.txt").find("alternative = 2prime") != std::string::npos);
    CHECK(slurp(fs::path(c.out) / "witness.csv").rfind("index,theta,r\n", 0) == 0);
    REQUIRE(r.timings.size() == 1);
    CHECK(r.timings[0].stage == "dichotomy");

    // Manifest lists every artefact except itself, sorted.
    std::vector<std::string> paths;
    for (const auto& e : r.manifest) paths.push_back(e.path);
    CHECK(paths == std::vector<std::string>{"config.txt", "verdict.txt", "witness.csv"});
    CHECK(r.manifest[2].hash == fnv1a64(slurp(fs::path(c.out) / "witness.csv")));
    fs::remove_all(c.out);
}

TEST_CASE("exit codes for hypothesis failures") {
    ScenarioConfig c = parse("pipeline = fixed-points\n[map]\nfamily = twist\n");
    c.out = scratch("twist").string();
    CHECK(run_scenario(c).exit_code == 2);
    CHECK(fs::exists(fs::path(c.out) / "fixed-points.error.txt"));

    c = parse("pipeline = dichotomy\n[map]\nfamily = bump\n");
    c.out = scratch("bump").string();
    const RunReport r = run_scenario(c);
    CHECK(r.exit_code == 2);
    CHECK(!fs::exists(fs::path(c.out) / "witness.csv"));
    fs::remove_all(scratch("twist"));
    fs::remove_all(c.out);
}

TEST_CASE("reach scenario is reproducible across worker counts") {
    ScenarioConfig c = parse("pipeline = reach\n[map]\nfamily = drift\n[bricks]\ngrid_n = 8\n");
    c.out = scratch("reach1").string();
    c.workers = 1;
    const RunReport a = run_scenario(c);
    c.out = scratch("reach4").string();
    c.workers = 4;
    const RunReport b = run_scenario(c);
    CHECK(a.exit_code == 0);
    std::ostringstream ma, mb;
    write_manifest(ma, a.manifest);
    write_manifest(mb, b.manifest);
    CHECK(ma.str() == mb.str());
    CHECK(mb.str() == slurp(fs::path(c.out) / "manifest.txt"));
    CHECK(slurp(fs::path(c.out) / "reach.txt").find("probe = P2-right") != std::string::npos);
    fs::remove_all(c.out);
    fs::remove_all(scratch("reach1"));
}
