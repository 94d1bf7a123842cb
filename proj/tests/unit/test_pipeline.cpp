#include <gtest/gtest.h>

#include "hifuse/pipeline.hpp"
#include "hifuse/synth.hpp"
#include "support/errors.hpp"

namespace hifuse {
namespace {

using testing::error_code_of;

RunConfig quick_config(double lambda_div) {
  RunConfig c;
  c.seed = 2;
  c.train.seed = 2;
  c.train.epochs = 5;
  c.train.lambda_div = lambda_div;
  c.network.hidden = {8};
  c.network.k = 4;
  c.labels.t_healthy = 10;
  c.labels.faulty_margin = 10;
  c.fusion.iters = 50;
  c.fusion.tau = 20;
  return c;
}

std::vector<Trajectory> quick_fleet() {
  SynthConfig s;
  s.length = 60;
  s.num_features = 6;
  s.n_informative = 3;
  std::vector<Trajectory> out;
  for (auto& t : generate_fleet(s, 3)) out.push_back(t.trajectory);
  return out;
}

TEST(Method, TraitsFollowTheNamingScheme) {
  EXPECT_FALSE(traits(Method::kDeepSad).apaic);
  EXPECT_TRUE(traits(Method::kAds).apaic);
  EXPECT_FALSE(traits(Method::kAds).diversity);
  EXPECT_TRUE(traits(Method::kRads).realtime);
  EXPECT_TRUE(traits(Method::k2ds).diversity);
  EXPECT_FALSE(traits(Method::k2ds).apaic);
  EXPECT_FALSE(traits(Method::kA2ds).realtime);
  const MethodTraits ra2ds = traits(Method::kRa2ds);
  EXPECT_TRUE(ra2ds.apaic && ra2ds.realtime && ra2ds.diversity);
  for (auto name : {"deepsad", "ads", "rads", "2ds", "a2ds", "ra2ds"}) EXPECT_EQ(to_string(parse_method(name)), name);
  EXPECT_EQ(error_code_of([] { parse_method("svdd"); }), ErrorCode::kConfig);
}

TEST(MakeSplit, AppliesLabelConfig) {
  const auto fleet = quick_fleet();
  const DatasetSplit split = make_split({fleet[0], fleet[1]}, fleet[2], quick_config(0).labels);
  EXPECT_EQ(split.train[0].labels.t_faulty, 50);
  EXPECT_FALSE(split.test.labels.t_faulty.has_value());
}

TEST(RunMethod, DeepSadEqualsAnomalyScore) {
  const auto fleet = quick_fleet();
  const RunConfig c = quick_config(0.0);
  const DatasetSplit split = make_split({fleet[0], fleet[1]}, fleet[2], c.labels);
  const EmbeddingModel model = train_embedding(split, c);
  const MethodOutput out = run_method(Method::kDeepSad, model, split, c.fusion);
  EXPECT_EQ(out.test.value, anomaly_score(model, fleet[2]).value);
  EXPECT_EQ(out.train.size(), 2u);
}

TEST(RunMethod, RejectsLambdaMismatch) {
  const auto fleet = quick_fleet();
  const RunConfig c = quick_config(0.0);
  const DatasetSplit split = make_split({fleet[0], fleet[1]}, fleet[2], c.labels);
  const EmbeddingModel model = train_embedding(split, c);
  EXPECT_EQ(error_code_of([&] { run_method(Method::kA2ds, model, split, c.fusion); }), ErrorCode::kConfig);
  EXPECT_EQ(error_code_of([&] { run_method(Method::k2ds, model, split, c.fusion); }), ErrorCode::kConfig);
}

TEST(RunMethod, ApaicVariantsProduceFeasibleHis) {
  const auto fleet = quick_fleet();
  const RunConfig c = quick_config(1e-3);
  const DatasetSplit split = make_split({fleet[0], fleet[1]}, fleet[2], c.labels);
  const EmbeddingModel model = train_embedding(split, c);
  const MethodOutput offline = run_method(Method::kA2ds, model, split, c.fusion);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_TRUE(contains({split.train[i].labels.t_healthy, split.train[i].labels.t_faulty}, offline.train[i].value));
  }
  EXPECT_TRUE(contains({c.labels.t_healthy, std::nullopt}, offline.test.value));
  EXPECT_TRUE(offline.diagnostics.contains("fit"));

  const MethodOutput rt = run_method(Method::kRa2ds, model, split, c.fusion);
  EXPECT_EQ(rt.diagnostics["window_ends"].size(), 3u);
  EXPECT_EQ(rt.test.value.tail(20), offline.test.value.tail(20));
}

TEST(CrossValidate, OneFoldPerTrajectory) {
  const auto folds = cross_validate(quick_fleet(), Method::kAds, quick_config(1e-3));
  ASSERT_EQ(folds.size(), 3u);
  EXPECT_EQ(folds[1].output.test.trajectory_id, "synth_01");
}

}  // namespace
}  // namespace hifuse
