#include <gtest/gtest.h>

#include "hifuse/config.hpp"
#include "support/errors.hpp"
#include "support/temp_dir.hpp"

namespace hifuse {
namespace {

using nlohmann::json;
using testing::error_code_of;

TEST(RunConfig, DefaultsRoundTrip) {
  const RunConfig defaults = run_config_from_json(json::object());
  EXPECT_EQ(defaults.network.k, 16);
  EXPECT_EQ(defaults.fusion.projection, ProjectionOrder::kExact);
  EXPECT_EQ(dump_json(to_json(run_config_from_json(to_json(defaults)))), dump_json(to_json(defaults)));
}

TEST(RunConfig, ReadsSectionsAndPropagatesSeed) {
  const json j = json::parse(R"({
    "seed": 17,
    "train": {"lambda_div": 0.0, "epochs": 5},
    "fusion": {"beta": 0.5, "projection": "algorithm", "isotonic": false},
    "labels": {"t_healthy": 20, "t_faulty": 80},
    "synth": {"phase_breaks": [10, 40], "length": 60, "distortion": "identity"},
    "metrics": {"align_window": [3, 9]}
  })");
  const RunConfig c = run_config_from_json(j);
  EXPECT_EQ(c.train.seed, 17u);
  EXPECT_EQ(c.synth.synth.seed, 17u);
  EXPECT_EQ(c.train.epochs, 5);
  EXPECT_EQ(c.fusion.projection, ProjectionOrder::kAlgorithm);
  EXPECT_FALSE(c.fusion.isotonic);
  EXPECT_EQ(c.labels.train_spec(100).t_faulty, 80);
  EXPECT_EQ(c.synth.synth.phase_breaks, (std::pair{10, 40}));
  EXPECT_EQ(c.metrics.align_window.end, 9);
}

TEST(RunConfig, FaultyMarginDerivesThreshold) {
  const RunConfig c = run_config_from_json(json::parse(R"({"labels": {"faulty_margin": 30}})"));
  EXPECT_EQ(c.labels.train_spec(315).t_faulty, 285);
  EXPECT_FALSE(c.labels.test_spec().t_faulty.has_value());
}

TEST(RunConfig, RejectsUnknownKeysAndBadTypes) {
  EXPECT_EQ(error_code_of([] { run_config_from_json(json::parse(R"({"sed": 1})")); }), ErrorCode::kConfig);
  EXPECT_EQ(error_code_of([] { run_config_from_json(json::parse(R"({"train": {"learning_rate": 1}})")); }),
            ErrorCode::kConfig);
  EXPECT_EQ(error_code_of([] { run_config_from_json(json::parse(R"({"train": {"epochs": 2.5}})")); }),
            ErrorCode::kConfig);
  EXPECT_EQ(error_code_of([] { run_config_from_json(json::parse(R"({"fusion": {"beta": "big"}})")); }),
            ErrorCode::kConfig);
  EXPECT_EQ(error_code_of([] { run_config_from_json(json::parse(R"({"fusion": {"beta": -1}})")); }),
            ErrorCode::kConfig);
}

TEST(RunConfig, EnvironmentOverrides) {
  json j = json::parse(R"({"fusion": {"beta": 0.1}})");
  apply_env_overrides(j, {{"HIFUSE_FUSION_BETA", "0.25"},
                          {"HIFUSE_SEED", "9"},
                          {"HIFUSE_TRAIN_LAMBDA_DIV", "0"},
                          {"HIFUSE_FUSION_PROJECTION", "algorithm"},
                          {"OTHER", "x"}});
  const RunConfig c = run_config_from_json(j);
  EXPECT_EQ(c.fusion.beta, 0.25);
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.train.lambda_div, 0.0);
  EXPECT_EQ(c.fusion.projection, ProjectionOrder::kAlgorithm);

  json k = json::object();
  EXPECT_EQ(error_code_of([&] { apply_env_overrides(k, {{"HIFUSE_NOPE", "1"}}); }), ErrorCode::kConfig);
  apply_env_overrides(k, {{"HIFUSE_TRAIN_BOGUS", "1"}});
  EXPECT_EQ(error_code_of([&] { run_config_from_json(k); }), ErrorCode::kConfig);
}

TEST(RunConfig, LoadsFileAndWritesResolvedCopy) {
  testing::TempDir dir;
  const auto path = dir.write("c.json", R"({"seed": 4, "network": {"hidden": [8], "k": 3}})");
  const RunConfig c = load_run_config(path, {{"HIFUSE_NETWORK_K", "5"}});
  EXPECT_EQ(c.network.hidden, std::vector<int>{8});
  EXPECT_EQ(c.network.k, 5);
  write_resolved_config(dir.path() / "out", c);
  const RunConfig again = load_run_config(dir.path() / "out" / "resolved_config.json", {});
  EXPECT_EQ(dump_json(to_json(again)), dump_json(to_json(c)));
  EXPECT_EQ(error_code_of([&] { load_run_config(dir.write("bad.json", "{"), {}); }), ErrorCode::kConfig);
  EXPECT_EQ(error_code_of([&] { load_run_config(dir.path() / "none.json", {}); }), ErrorCode::kConfig);
}

}  // namespace
}  // namespace hifuse
