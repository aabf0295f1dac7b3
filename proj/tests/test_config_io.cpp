#include "mosaic/config.hpp"
#include "mosaic/io.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace mosaic;

TEST_CASE("bundled configs") {
  SECTION("every bundled config parses") {
    for (const auto& [name, text] : bundled_configs()) {
      const RunConfig cfg = parse_config_text(text, name);
      CHECK(cfg.name == name);
    }
  }

  SECTION("table1_k2 fields") {
    const RunConfig cfg = load_config("table1_k2");
    CHECK(cfg.model.kind == ModelKind::mosaic);
    CHECK(cfg.model.sites == 12);
    CHECK(cfg.model.cell == 2);
    CHECK(cfg.model.disorder == 2.0);
    CHECK(cfg.model.phase == 0.0);
    CHECK(cfg.model.beta == golden_beta());
    CHECK(cfg.bath.coupling == 0.1);
    CHECK(cfg.bath.width == 1.0);
    CHECK(cfg.dynamics.horizon == 50.0);
    CHECK(cfg.dynamics.step == 1e-3);
    CHECK(cfg.dynamics.decimation == 10);
  }

  SECTION("gaah config uses the pi literal") {
    const RunConfig cfg = load_config("tableA2_gaah");
    CHECK(cfg.model.kind == ModelKind::gaah);
    CHECK(cfg.model.gaah_a == 0.5);
    CHECK(cfg.model.phase == std::numbers::pi);
    CHECK(cfg.model.sites == 8);
  }

  SECTION("config files on disk stay in sync with the embedded copies") {
    const std::filesystem::path dir = MOSAIC_CONFIG_DIR;
    for (const auto& [name, text] : bundled_configs()) {
      const std::filesystem::path file = dir / (name + ".cfg");
      REQUIRE(std::filesystem::exists(file));
      std::ifstream in(file);
      std::ostringstream body;
      body << in.rdbuf();
      CHECK(body.str() == text);
    }
  }
}

TEST_CASE("strict parsing") {
  const std::string base =
      "model.kind = mosaic\n"
      "model.sites = 12\n"
      "model.kappa = 2\n";

  CHECK_THROWS_AS(parse_config_text(base + "model.bogus = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text(base + "model.sites = 14\n"), ConfigError);  // duplicate
  CHECK_THROWS_AS(parse_config_text(base + "model.a = 0.5\n"), ConfigError);     // wrong kind
  CHECK_THROWS_AS(parse_config_text("model.kind = gaah\nmodel.kappa = 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("model.kind = tight\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("model.sites = twelve\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("model.sites =\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("model.sites\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("bath.eta = -0.1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("model.kind = gaah\nmodel.a = 1.5\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("dynamics.step = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("sweep.axis = pressure\n"), ConfigError);

  SECTION("comments and blank lines are fine") {
    const RunConfig cfg = parse_config_text("# heading\n\nmodel.sites = 6  # trailing\n");
    CHECK(cfg.model.sites == 6);
  }
}

TEST_CASE("selectors and overrides") {
  SECTION("level selector") {
    const RunConfig cfg = parse_config_text("analysis.initial = levels:0,3,5\n");
    REQUIRE(cfg.analysis.initial == RunConfig::Analysis::Initial::levels);
    CHECK(cfg.analysis.levels == std::vector<int>{0, 3, 5});
  }

  SECTION("explicit vector selector") {
    const RunConfig cfg = parse_config_text("analysis.initial = vector:(1,0),(0,0.5)\n");
    REQUIRE(cfg.analysis.initial == RunConfig::Analysis::Initial::vector);
    REQUIRE(cfg.analysis.state.size() == 2);
    CHECK(cfg.analysis.state[0] == Complex(1.0, 0.0));
    CHECK(cfg.analysis.state[1] == Complex(0.0, 0.5));
  }

  SECTION("bad selectors") {
    CHECK_THROWS_AS(parse_config_text("analysis.initial = levels:\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("analysis.initial = sometimes\n"), ConfigError);
  }

  SECTION("beta modes") {
    CHECK(parse_config_text("model.beta = irrational\n").model.beta == golden_beta());
    CHECK(parse_config_text("model.sites = 610\nmodel.beta = fibonacci\n").model.beta ==
          377.0 / 610.0);
    CHECK(parse_config_text("model.beta = 0.6\n").model.beta == 0.6);
  }

  SECTION("overrides rewrite and revalidate") {
    RunConfig cfg = load_config("table1_k2");
    apply_override(cfg, "model.kappa=3");
    CHECK(cfg.model.cell == 3);
    apply_override(cfg, "bath.eta=0");
    CHECK(cfg.bath.coupling == 0.0);
    CHECK_THROWS_AS(apply_override(cfg, "model.kappa=99"), ConfigError);
    CHECK_THROWS_AS(apply_override(cfg, "nonsense"), ConfigError);
  }

  SECTION("serialize/parse round trip") {
    RunConfig cfg = load_config("fig3_k3");
    apply_override(cfg, "dynamics.horizon=25.0");
    const RunConfig again = parse_config_text(serialize(cfg), cfg.name);
    CHECK(again.raw == cfg.raw);
  }
}

TEST_CASE("csv number format") {
  CHECK(format_sci(1.0) == "1.00000000000e+00");
  CHECK(format_sci(-0.5) == "-5.00000000000e-01");
  CHECK(format_sci(1.06e-16) == "1.06000000000e-16");
  CHECK(format_sci(0.0) == "0.00000000000e+00");
  // 12 significant digits: mantissa dot + 11 places
  CHECK(format_sci(std::numbers::pi) == "3.14159265359e+00");
}

TEST_CASE("run directory and manifest") {
  const std::filesystem::path dir =
      std::filesystem::temp_directory_path() / "mosaic_io_test";
  std::filesystem::remove_all(dir);
  {
    RunDirectory run(dir);
    run.write_text("data.csv", "test-csv", "a,b\n1,2\n");
    run.write_json("extra.json", "test-json", nlohmann::json{{"answer", 42}});
    run.add_timing("stage", 1.5);
    RunConfig cfg = load_config("table1_k2");
    run.finalize(cfg, "poles");
  }
  REQUIRE(std::filesystem::exists(dir / "manifest.json"));
  std::ifstream in(dir / "manifest.json");
  nlohmann::json manifest;
  in >> manifest;
  CHECK(manifest["schema_version"] == 1);
  CHECK(manifest["command"] == "poles");
  CHECK(manifest["config_name"] == "table1_k2");
  CHECK(manifest["config"]["model.kappa"] == "2");

  // the inventory matches the files on disk exactly (manifest aside)
  const auto artifacts = manifest["artifacts"];
  size_t on_disk = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name == "manifest.json") continue;
    ++on_disk;
    CHECK(artifacts.contains(name));
  }
  CHECK(artifacts.size() == on_disk);
  std::filesystem::remove_all(dir);
}
