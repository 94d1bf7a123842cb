#include "hifuse/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <string>

#include "hifuse/error.hpp"

namespace hifuse {
namespace {

enum class WarpKind { kIdentity, kPower, kLog, kExp };

struct Warp {
  WarpKind kind = WarpKind::kIdentity;
  double param = 1.0;

  // Monotone increasing map of [0, 1] onto [0, 1].
  double operator()(double x) const {
    switch (kind) {
      case WarpKind::kIdentity:
        return x;
      case WarpKind::kPower:
        return std::pow(std::max(x, 0.0), param);
      case WarpKind::kLog:
        return std::log1p(param * x) / std::log1p(param);
      case WarpKind::kExp:
        return std::expm1(param * x) / std::expm1(param);
    }
    return x;
  }
};

enum class ColumnKind { kInformative, kNoise, kSeasonal };

struct Column {
  ColumnKind kind = ColumnKind::kNoise;
  double a = 0.0;          // informative: linear weight; seasonal: amplitude
  double b = 0.0;          // informative: warped weight; noise: scale
  double period = 1.0;     // seasonal only, in passes
  Warp warp;
};

std::vector<Column> draw_semantics(const SynthConfig& config) {
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<int> order(static_cast<std::size_t>(config.num_features));
  for (int j = 0; j < config.num_features; ++j) order[static_cast<std::size_t>(j)] = j;
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<Column> columns(order.size());
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    Column& c = columns[static_cast<std::size_t>(order[rank])];
    if (rank < static_cast<std::size_t>(config.n_informative)) {
      c.kind = ColumnKind::kInformative;
      c.a = 0.5 + unit(rng);
      c.b = 0.2 + 0.8 * unit(rng);
      const double pick = unit(rng);
      const double shape = unit(rng);
      if (config.distortion == Distortion::kIdentity) {
        c.warp = {WarpKind::kIdentity, 1.0};
      } else if (pick < 1.0 / 3.0) {
        c.warp = {WarpKind::kPower, 0.5 + 1.5 * shape};
      } else if (pick < 2.0 / 3.0) {
        c.warp = {WarpKind::kLog, 1.0 + 9.0 * shape};
      } else {
        c.warp = {WarpKind::kExp, 1.0 + 3.0 * shape};
      }
    } else if (unit(rng) < 0.5) {
      c.kind = ColumnKind::kNoise;
      c.b = 0.5 + unit(rng);
    } else {
      c.kind = ColumnKind::kSeasonal;
      c.a = 0.5 + unit(rng);
      c.period = 20.0 + 60.0 * unit(rng);
    }
  }
  return columns;
}

SyntheticTrajectory render(const SynthConfig& config, const std::vector<Column>& columns, int length, int index) {
  const auto [t1, t2] = phase_breaks(config, length);
  SyntheticTrajectory out;
  out.truth = wear_curve(length, t1, t2);

  std::seed_seq seq{static_cast<std::uint64_t>(config.seed), static_cast<std::uint64_t>(index) + 1};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  Eigen::MatrixXd features(length, config.num_features);
  for (int j = 0; j < config.num_features; ++j) {
    const Column& c = columns[static_cast<std::size_t>(j)];
    const double phase = 2.0 * std::numbers::pi * unit(rng);
    for (int t = 0; t < length; ++t) {
      const double h = out.truth(t);
      const double noise = normal(rng);
      switch (c.kind) {
        case ColumnKind::kInformative:
          features(t, j) = c.a * h + c.b * c.warp(h) + config.noise_sigma * noise;
          break;
        case ColumnKind::kNoise:
          features(t, j) = c.b * noise;
          break;
        case ColumnKind::kSeasonal:
          features(t, j) =
              c.a * std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / c.period + phase) +
              config.noise_sigma * noise;
          break;
      }
    }
    if (c.kind == ColumnKind::kInformative) out.informative.push_back(j);
  }

  std::vector<double> timestamps(static_cast<std::size_t>(length));
  for (int t = 0; t < length; ++t) timestamps[static_cast<std::size_t>(t)] = static_cast<double>(t + 1);
  char id[32];
  std::snprintf(id, sizeof(id), "synth_%02d", index);
  out.trajectory = make_trajectory(id, std::move(features), std::move(timestamps));
  return out;
}

}  // namespace

std::string_view to_string(Distortion distortion) {
  return distortion == Distortion::kIdentity ? "identity" : "random";
}

Distortion parse_distortion(std::string_view name) {
  if (name == "random") return Distortion::kRandom;
  if (name == "identity") return Distortion::kIdentity;
  fail(ErrorCode::kConfig, "unknown distortion '" + std::string(name) + "' (expected random|identity)");
}

void validate(const SynthConfig& config) {
  require(config.length >= 3, ErrorCode::kConfig, "synth length must be at least 3");
  require(config.num_features >= 1, ErrorCode::kConfig, "synth num_features must be positive");
  require(config.n_informative >= 1 && config.n_informative <= config.num_features, ErrorCode::kConfig,
          "synth n_informative must lie in [1, num_features]");
  require(std::isfinite(config.noise_sigma) && config.noise_sigma >= 0.0, ErrorCode::kConfig,
          "synth noise_sigma must be finite and non-negative");
  if (config.phase_breaks) {
    const auto [t1, t2] = *config.phase_breaks;
    require(0 < t1 && t1 < t2 && t2 < config.length - 1, ErrorCode::kConfig,
            "synth phase breaks (" + std::to_string(t1) + ", " + std::to_string(t2) + ") need 0 < t1 < t2 < T-1");
  }
}

std::pair<int, int> phase_breaks(const SynthConfig& config, int length) {
  const double t1 = config.phase_breaks ? config.phase_breaks->first : 0.2 * config.length;
  const double t2 = config.phase_breaks ? config.phase_breaks->second : 0.8 * config.length;
  const double scale = static_cast<double>(length) / static_cast<double>(config.length);
  const int b1 = std::max(1, static_cast<int>(std::lround(t1 * scale)));
  const int b2 = std::min(length - 2, std::max(b1 + 1, static_cast<int>(std::lround(t2 * scale))));
  require(b1 < b2, ErrorCode::kConfig, "trajectory of length " + std::to_string(length) + " is too short for 3 phases");
  return {b1, b2};
}

Eigen::VectorXd wear_curve(int length, int t1, int t2) {
  require(0 < t1 && t1 < t2 && t2 < length - 1, ErrorCode::kInvalidArgument, "wear_curve: need 0 < t1 < t2 < T-1");
  // Phase levels before rescaling: 0.2 after break-in, 0.4 after steady wear.
  Eigen::VectorXd h(length);
  for (int t = 0; t < length; ++t) {
    if (t <= t1) {
      const double s = static_cast<double>(t) / t1;
      h(t) = 0.2 * s * s;
    } else if (t <= t2) {
      h(t) = 0.2 + 0.2 * static_cast<double>(t - t1) / (t2 - t1);
    } else {
      const double s = static_cast<double>(t - t2) / (length - 1 - t2);
      h(t) = 0.4 + 0.6 * s * s;
    }
  }
  return (h.array() - h(0)) / (h(length - 1) - h(0));
}

SyntheticTrajectory generate(const SynthConfig& config) {
  validate(config);
  return render(config, draw_semantics(config), config.length, 0);
}

std::vector<SyntheticTrajectory> generate_fleet(const SynthConfig& config, int count, double lifetime_jitter) {
  validate(config);
  require(count >= 1, ErrorCode::kConfig, "fleet size must be positive");
  require(lifetime_jitter >= 0.0 && lifetime_jitter < 1.0, ErrorCode::kConfig, "lifetime_jitter must lie in [0, 1)");
  const std::vector<Column> columns = draw_semantics(config);
  std::seed_seq seq{static_cast<std::uint64_t>(config.seed), std::uint64_t{0}};
  std::mt19937_64 lifetimes(seq);
  std::uniform_real_distribution<double> sym(-1.0, 1.0);
  std::vector<SyntheticTrajectory> fleet;
  fleet.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    const double u = sym(lifetimes);
    const int length = lifetime_jitter > 0.0
                           ? static_cast<int>(std::lround(config.length * (1.0 + lifetime_jitter * u)))
                           : config.length;
    fleet.push_back(render(config, columns, length, k));
  }
  return fleet;
}

}  // namespace hifuse
