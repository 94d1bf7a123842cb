#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace hifuse {

// One run-to-failure recording. Row t of `features` is the feature vector
// acquired at step t; rows are in acquisition order.
struct Trajectory {
  std::string id;
  Eigen::MatrixXd features;         // T x F
  std::vector<double> timestamps;   // empty, or length T and strictly increasing

  Eigen::Index length() const { return features.rows(); }
  Eigen::Index num_features() const { return features.cols(); }

  // Timestamp of row t, or t itself when the trajectory carries no timestamps.
  double time_at(Eigen::Index t) const;
};

// Validates the Trajectory invariants (T >= 2, F >= 1, finite entries,
// strictly increasing timestamps) and returns the assembled value.
Trajectory make_trajectory(std::string id, Eigen::MatrixXd features,
                           std::vector<double> timestamps = {});

enum class FileFormat { kFeatureCsv, kRawSignal };

std::optional<FileFormat> parse_file_format(std::string_view name);

struct RawSignal {
  int sample_rate_hz = 0;
  std::vector<double> samples;
};

// `sample_rate_hz=<int>` header, then one sample per line.
RawSignal load_raw_signal(const std::filesystem::path& path);

// feature-csv: header `t,f0,...,f{F-1}`, rows ordered by strictly increasing t.
// raw-signal: a single-channel trajectory with F = 1, timestamps = i / rate.
Trajectory load_trajectory(const std::filesystem::path& path, FileFormat format);

void write_feature_csv(const std::filesystem::path& path, const Trajectory& trajectory);

// Shortest round-trip decimal representation. Used for every numeric value
// this library writes so reruns are byte-identical.
std::string format_double(double value);

// --- Labels ---------------------------------------------------------------

enum class Label : std::int8_t { kAbnormal = -1, kUnlabeled = 0, kHealthy = 1 };

// Time is 1-based: steps t <= t_healthy are healthy, t >= t_faulty abnormal.
// Test trajectories carry no faulty threshold.
struct LabelSpec {
  int t_healthy = 0;
  std::optional<int> t_faulty;
};

// Throws kInvalidArgument unless 0 < T_d < T_f <= T (or 0 < T_d <= T without T_f).
void validate(const LabelSpec& spec, Eigen::Index length);

std::vector<Label> assign_labels(Eigen::Index length, const LabelSpec& spec);

struct LabelCounts {
  Eigen::Index healthy = 0;
  Eigen::Index abnormal = 0;
  Eigen::Index unlabeled = 0;

  Eigen::Index labeled() const { return healthy + abnormal; }
};

LabelCounts count_labels(std::span<const Label> labels);

struct LabeledTrajectory {
  Trajectory trajectory;
  LabelSpec labels;
};

struct DatasetSplit {
  std::vector<LabeledTrajectory> train;
  LabeledTrajectory test;
};

// Every train entry needs a faulty threshold; the test entry must not have one.
void validate(const DatasetSplit& split);

// --- Standardization ----------------------------------------------------

struct ScalerParams {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;  // population std; 0 marks a degenerate feature

  Eigen::MatrixXd transform(const Eigen::MatrixXd& features) const;
  Eigen::MatrixXd inverse_transform(const Eigen::MatrixXd& standardized) const;
  Trajectory transform(const Trajectory& trajectory) const;
};

ScalerParams fit_scaler(std::span<const Eigen::MatrixXd> blocks);

// Fit on every trajectory, then transform each of them.
std::pair<std::vector<Trajectory>, ScalerParams> standardize(std::span<const Trajectory> trajectories);

// Fit on the train trajectories plus the healthy prefix of the test trajectory.
ScalerParams fit_scaler(const DatasetSplit& split);

}  // namespace hifuse
