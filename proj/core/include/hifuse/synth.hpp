#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "hifuse/dataset.hpp"

namespace hifuse {

enum class Distortion {
  kRandom,    // each informative feature gets its own monotone warp of the HI
  kIdentity,  // informative features are exact positive multiples of the HI
};

std::string_view to_string(Distortion distortion);
Distortion parse_distortion(std::string_view name);

struct SynthConfig {
  int length = 300;
  int num_features = 20;
  int n_informative = 5;
  std::optional<std::pair<int, int>> phase_breaks;  // default (0.2 T, 0.8 T)
  double noise_sigma = 0.1;
  std::uint64_t seed = 0;
  Distortion distortion = Distortion::kRandom;
};

void validate(const SynthConfig& config);

// Breakpoints (t1, t2) in row indices, scaled from the configured length to `length`.
std::pair<int, int> phase_breaks(const SynthConfig& config, int length);

// Three-phase wear curve: convex on [0, t1], shallow linear on [t1, t2],
// steep convex on [t2, T-1]; rescaled so h_0 = 0 and h_{T-1} = 1.
Eigen::VectorXd wear_curve(int length, int t1, int t2);

struct SyntheticTrajectory {
  Trajectory trajectory;  // timestamps are pass numbers 1..T
  Eigen::VectorXd truth;
  std::vector<int> informative;  // column indices carrying the HI
};

// Trajectory 0 of the fleet defined by `config`.
SyntheticTrajectory generate(const SynthConfig& config);

// `count` trajectories with lifetimes round(T (1 + jitter u)), u ~ U(-1, 1).
// Feature semantics (weights, warps, confounder shapes) come from the seed and
// are shared; noise and confounder phases are drawn per trajectory.
std::vector<SyntheticTrajectory> generate_fleet(const SynthConfig& config, int count, double lifetime_jitter = 0.0);

}  // namespace hifuse
