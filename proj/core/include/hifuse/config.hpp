#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hifuse/dataset.hpp"
#include "hifuse/embedding.hpp"
#include "hifuse/features.hpp"
#include "hifuse/fusion.hpp"
#include "hifuse/synth.hpp"

namespace hifuse {

struct NetworkConfig {
  std::vector<int> hidden{32, 32};
  int k = 16;
};

// T_f is either fixed or derived per trajectory as T - faulty_margin.
struct LabelConfig {
  int t_healthy = 50;
  std::optional<int> t_faulty;
  int faulty_margin = 50;

  LabelSpec train_spec(Eigen::Index length) const;
  LabelSpec test_spec() const { return {t_healthy, std::nullopt}; }
};

struct FleetConfig {
  SynthConfig synth;
  int n_trajectories = 3;
  double lifetime_jitter = 0.0;
};

struct MetricsConfig {
  IndexRange align_window{100, 150};
  double delay_threshold = 1.0;
};

struct PathsConfig {
  std::string data_dir = "data";
  std::string model = "model.json";
  std::string output_dir = "out";
};

// Every tunable of a run. The top-level seed is copied into the training and
// synthesis configs so a single number pins the whole pipeline.
struct RunConfig {
  std::uint64_t seed = 0;
  MelConfig mel;
  NetworkConfig network;
  TrainConfig train;
  FusionConfig fusion;
  LabelConfig labels;
  FleetConfig synth;
  MetricsConfig metrics;
  PathsConfig paths;
};

void validate(const RunConfig& config);

nlohmann::json to_json(const RunConfig& config);

// Missing keys keep their defaults; unknown keys and type mismatches are
// config errors.
RunConfig run_config_from_json(const nlohmann::json& j);

// Applies HIFUSE_<SECTION>_<KEY> (or HIFUSE_SEED) overrides to a JSON config.
// Values are parsed as JSON, falling back to a plain string.
void apply_env_overrides(nlohmann::json& j, const std::map<std::string, std::string>& env);

// HIFUSE_* variables from the process environment.
std::map<std::string, std::string> hifuse_environment();

// Defaults, then the optional file, then environment overrides.
RunConfig load_run_config(const std::optional<std::filesystem::path>& path,
                          const std::map<std::string, std::string>& env);

// Pretty JSON with a trailing newline, byte-stable for a given config.
std::string dump_json(const nlohmann::json& j);

void write_resolved_config(const std::filesystem::path& dir, const RunConfig& config);

}  // namespace hifuse
