#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "config.hpp"

using hypf::cli::ConfigError;
using hypf::cli::json;
using hypf::cli::load_config;
using hypf::cli::parse_config;
using hypf::cli::to_json;

namespace {

std::string error_of(const json& doc) {
  try {
    parse_config(doc);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Config, DefaultsResolve) {
  const auto cfg = parse_config(json::object());
  EXPECT_EQ(cfg.phase_system().well_count(), 2);
  EXPECT_EQ(cfg.stored.wells.size(), 2u);
  EXPECT_EQ(cfg.make_grid().nx(), 64);
  EXPECT_TRUE(cfg.wants("csv"));
  EXPECT_EQ(cfg.sweep.epsilons.size(), 3u);
}

TEST(Config, ResolvedConfigRoundTrips) {
  const json doc = json::parse(R"({"phases": {"family": "product-of-squares",
                                              "wells": [[1, 0], [0, 1], [0, 0]], "R": 1.5},
                                   "grid": {"nx": 10, "ny": 12, "lx": 2.0},
                                   "minimize": {"epsilon": 0.07, "seed": 5}})");
  const auto cfg = parse_config(doc);
  EXPECT_EQ(cfg.stored.wells.size(), 3u);
  EXPECT_EQ(to_json(parse_config(to_json(cfg))), to_json(cfg));
  EXPECT_EQ(to_json(cfg)["minimize"]["seed"], 5);
}

TEST(Config, UnknownKeysNameTheirPath) {
  EXPECT_NE(error_of(json::parse(R"({"grid": {"nz": 3}})")).find("grid.nz"), std::string::npos);
  EXPECT_NE(error_of(json::parse(R"({"solver": {}})")).find("solver"), std::string::npos);
}

TEST(Config, RejectsInvalidValues) {
  EXPECT_NE(error_of(json::parse(R"({"grid": {"nx": 0}})")), "");
  EXPECT_NE(error_of(json::parse(R"({"minimize": {"epsilon": -1}})")), "");
  EXPECT_NE(error_of(json::parse(R"({"sweep": {"epsilons": [0.1, 0.2]}})")), "");
  EXPECT_NE(error_of(json::parse(R"({"output": {"formats": ["xml"]}})")), "");
  EXPECT_NE(error_of(json::parse(R"({"boundary": {"type": "affine", "matrix": [[1, 0], [0, -1]]}})")), "");
  EXPECT_NE(error_of(json::parse(R"({"phases": {"wells": [[0], [1], [2]]}})")), "");
  EXPECT_NE(error_of(json::parse(R"({"phases": {"wells": [[1], [0]]},
                                     "stored_energy": {"wells": [{"mu": 1}]}})")),
            "");
  EXPECT_NE(error_of(json::parse(R"({"grid": {"nx": "many"}})")), "");
}

TEST(Config, ShearBoundary) {
  const auto cfg = parse_config(json::parse(R"({"grid": {"nx": 4, "ny": 4}, "boundary": {"type": "shear", "amount": 0.2}})"));
  const auto def = cfg.boundary_deformation();
  const auto& g = def.grid();
  EXPECT_NEAR(def[g.node(0, 4)].x(), 0.2, 1e-15);
  EXPECT_NEAR(def[g.node(2, 2)].x(), 0.5 + 0.1, 1e-15);
}

TEST(Config, LoadReportsParseErrors) {
  const auto path = std::filesystem::temp_directory_path() / "hypf_bad_config.json";
  {
    std::ofstream f(path);
    f << "{\n  \"grid\": {\"nx\": 3,}\n}\n";
  }
  try {
    load_config(path);
    FAIL() << "expected a parse error";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
  std::filesystem::remove(path);
  EXPECT_THROW(load_config(path), ConfigError);
}

TEST(Config, ShippedExamplesParse) {
  for (const auto& entry : std::filesystem::directory_iterator(HYPF_CONFIG_DIR)) {
    EXPECT_NO_THROW(load_config(entry.path())) << entry.path();
  }
}
