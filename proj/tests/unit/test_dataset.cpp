#include <gtest/gtest.h>

#include <vector>

#include "hifuse/dataset.hpp"
#include "hifuse/error.hpp"
#include "support/errors.hpp"
#include "support/temp_dir.hpp"

namespace hifuse {
namespace {

using testing::error_code_of;

TEST(LoadTrajectory, ParsesThreeRowCsv) {
  testing::TempDir dir;
  const auto path = dir.write("a.csv", "t,f0,f1\n0,1.5,2\n1,3,4\n2,5,6e-1\n");
  const Trajectory t = load_trajectory(path, FileFormat::kFeatureCsv);
  EXPECT_EQ(t.length(), 3);
  EXPECT_EQ(t.num_features(), 2);
  EXPECT_DOUBLE_EQ(t.features(2, 1), 0.6);
  EXPECT_DOUBLE_EQ(t.time_at(1), 1.0);
  EXPECT_EQ(t.id, "a");
}

TEST(LoadTrajectory, RejectsNaN) {
  testing::TempDir dir;
  const auto path = dir.write("a.csv", "t,f0\n0,1\n1,NaN\n");
  EXPECT_EQ(error_code_of([&] { load_trajectory(path, FileFormat::kFeatureCsv); }), ErrorCode::kNonFiniteValue);
}

TEST(LoadTrajectory, RejectsNonMonotoneTime) {
  testing::TempDir dir;
  const auto path = dir.write("a.csv", "t,f0\n0,1\n2,1\n1,1\n");
  EXPECT_EQ(error_code_of([&] { load_trajectory(path, FileFormat::kFeatureCsv); }), ErrorCode::kNonMonotoneTime);
}

TEST(LoadTrajectory, RejectsBadHeaderEmptyFileAndRaggedRows) {
  testing::TempDir dir;
  EXPECT_EQ(error_code_of([&] { load_trajectory(dir.write("h.csv", "t,x0\n0,1\n1,2\n"), FileFormat::kFeatureCsv); }),
            ErrorCode::kMalformedHeader);
  EXPECT_EQ(error_code_of([&] { load_trajectory(dir.write("e.csv", ""), FileFormat::kFeatureCsv); }), ErrorCode::kEmptyFile);
  EXPECT_EQ(error_code_of([&] { load_trajectory(dir.write("o.csv", "t,f0\n"), FileFormat::kFeatureCsv); }),
            ErrorCode::kEmptyFile);
  EXPECT_EQ(error_code_of([&] { load_trajectory(dir.write("r.csv", "t,f0\n0,1\n1,2,3\n"), FileFormat::kFeatureCsv); }),
            ErrorCode::kMalformedRow);
  EXPECT_EQ(error_code_of([&] { load_trajectory(dir.path() / "missing.csv", FileFormat::kFeatureCsv); }), ErrorCode::kIo);
}

TEST(LoadTrajectory, RawSignalBecomesSingleFeature) {
  testing::TempDir dir;
  const auto path = dir.write("ch.txt", "sample_rate_hz=4\n0.5\n1\n-2\n");
  const Trajectory t = load_trajectory(path, FileFormat::kRawSignal);
  EXPECT_EQ(t.length(), 3);
  EXPECT_EQ(t.num_features(), 1);
  EXPECT_DOUBLE_EQ(t.time_at(2), 0.5);
  EXPECT_EQ(error_code_of([&] { load_raw_signal(dir.write("bad.txt", "rate=4\n1\n")); }), ErrorCode::kMalformedHeader);
}

TEST(FeatureCsv, WriteReadRoundTripsExactly) {
  testing::TempDir dir;
  Eigen::MatrixXd f(3, 2);
  f << 0.1, 1.0 / 3.0, -2.5e-17, 1e300, 7.0, -0.0;
  const Trajectory original = make_trajectory("rt", f, {0.5, 1.25, 9.0});
  const auto path = dir.path() / "rt.csv";
  write_feature_csv(path, original);
  const Trajectory back = load_trajectory(path, FileFormat::kFeatureCsv);
  EXPECT_EQ(back.features, original.features);
  EXPECT_EQ(back.timestamps, original.timestamps);
}

TEST(MakeTrajectory, ValidatesShapeAndTime) {
  EXPECT_EQ(error_code_of([] { make_trajectory("x", Eigen::MatrixXd::Zero(1, 2)); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(error_code_of([] { make_trajectory("x", Eigen::MatrixXd::Zero(3, 1), {0, 1}); }), ErrorCode::kShapeMismatch);
  EXPECT_EQ(error_code_of([] { make_trajectory("x", Eigen::MatrixXd::Zero(2, 1), {1, 1}); }), ErrorCode::kNonMonotoneTime);
}

TEST(AssignLabels, MillingThresholds) {
  const auto labels = assign_labels(315, {50, 265});
  const LabelCounts c = count_labels(labels);
  EXPECT_EQ(c.healthy, 50);
  EXPECT_EQ(c.abnormal, 51);
  EXPECT_EQ(c.unlabeled, 214);
  EXPECT_EQ(c.labeled() + c.unlabeled, 315);
}

TEST(AssignLabels, SmallCaseAndContract) {
  const std::vector<Label> expected{Label::kHealthy, Label::kUnlabeled, Label::kUnlabeled, Label::kAbnormal};
  EXPECT_EQ(assign_labels(4, {1, 4}), expected);
  EXPECT_EQ(error_code_of([] { assign_labels(4, {3, 2}); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(error_code_of([] { assign_labels(4, {1, 5}); }), ErrorCode::kInvalidArgument);
}

TEST(AssignLabels, TestSpecHasNoAbnormalRows) {
  const LabelCounts c = count_labels(assign_labels(10, {3, std::nullopt}));
  EXPECT_EQ(c.healthy, 3);
  EXPECT_EQ(c.abnormal, 0);
}

TEST(Scaler, StandardizesSingleFeature) {
  const Trajectory t = make_trajectory("a", (Eigen::MatrixXd(2, 1) << 1, 3).finished());
  const std::vector<Trajectory> ts{t};
  const auto [out, params] = standardize(ts);
  EXPECT_DOUBLE_EQ(params.mean(0), 2.0);
  EXPECT_DOUBLE_EQ(params.scale(0), 1.0);
  EXPECT_DOUBLE_EQ(out[0].features(0, 0), -1.0);
  EXPECT_DOUBLE_EQ(out[0].features(1, 0), 1.0);
}

TEST(Scaler, ConstantFeatureMapsToZero) {
  const Trajectory t = make_trajectory("a", (Eigen::MatrixXd(3, 1) << 5, 5, 5).finished());
  const std::vector<Trajectory> ts{t};
  const auto [out, params] = standardize(ts);
  EXPECT_EQ(params.scale(0), 0.0);
  EXPECT_TRUE(out[0].features.isZero(0.0));
}

TEST(Scaler, FitOnFirstOnlyLeavesSecondOffCenter) {
  const std::vector<Eigen::MatrixXd> first{(Eigen::MatrixXd(2, 1) << 0, 2).finished()};
  const ScalerParams params = fit_scaler(first);
  const Eigen::MatrixXd second = params.transform((Eigen::MatrixXd(2, 1) << 3, 5).finished());
  EXPECT_NE(second.mean(), 0.0);
}

TEST(Scaler, InverseTransformIsIdentity) {
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(20, 4) * 7.0 + Eigen::MatrixXd::Constant(20, 4, 3.0);
  const std::vector<Eigen::MatrixXd> blocks{x};
  const ScalerParams params = fit_scaler(blocks);
  EXPECT_LE((params.inverse_transform(params.transform(x)) - x).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Scaler, SplitFitUsesTestHealthyPrefixOnly) {
  DatasetSplit split;
  split.train.push_back({make_trajectory("tr", (Eigen::MatrixXd(3, 1) << 0, 0, 0).finished()), {1, 3}});
  split.test = {make_trajectory("te", (Eigen::MatrixXd(4, 1) << 4, 100, 100, 100).finished()), {1, std::nullopt}};
  const ScalerParams params = fit_scaler(split);
  EXPECT_DOUBLE_EQ(params.mean(0), 1.0);  // (0 + 0 + 0 + 4) / 4
}

TEST(DatasetSplit, RejectsFaultyThresholdOnTest) {
  DatasetSplit split;
  split.train.push_back({make_trajectory("tr", Eigen::MatrixXd::Zero(4, 1)), {1, 3}});
  split.test = {make_trajectory("te", Eigen::MatrixXd::Zero(4, 1)), {1, 3}};
  EXPECT_EQ(error_code_of([&] { validate(split); }), ErrorCode::kInvalidArgument);
}

}  // namespace
}  // namespace hifuse
