#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace hifuse {

// A health-index time series. `value` is the reported HI; `raw` is the
// unprojected fused signal h = Y w (equal to `value` for score-based HIs).
struct HealthIndex {
  std::string trajectory_id;
  std::string method;        // provenance: solver/method that produced it
  std::vector<double> time;  // one entry per step
  Eigen::VectorXd raw;
  Eigen::VectorXd value;

  Eigen::Index length() const { return value.size(); }
};

// File-name suffix for HI CSVs: `<trajectory id>_hi.csv`.
inline constexpr std::string_view kHiSuffix = "_hi";

// CSV with header `t,h_raw,z_hi`. Reading takes the id from the file stem,
// minus a trailing `_hi`.
void write_hi_csv(const std::filesystem::path& path, const HealthIndex& hi);
HealthIndex read_hi_csv(const std::filesystem::path& path);

// Single-column ground-truth sidecar with header `t,hi`.
void write_truth_csv(const std::filesystem::path& path, const std::vector<double>& time, const Eigen::VectorXd& truth);
Eigen::VectorXd read_truth_csv(const std::filesystem::path& path);

}  // namespace hifuse
