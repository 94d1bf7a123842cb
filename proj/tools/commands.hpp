#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace hifuse::cli {

// Config inputs shared by every subcommand: the optional file plus a JSON
// patch built from command-line flags, applied after environment overrides.
struct ConfigSource {
  std::string path;
  nlohmann::json patch = nlohmann::json::object();
};

struct SimulateArgs {
  std::string out;
};

struct ExtractArgs {
  std::vector<std::string> channels;
  std::string passes;
  int frames_per_pass = 1;
  std::string out;
};

struct TrainArgs {
  std::vector<std::string> train;
  std::string test;
  std::string model;
};

struct FuseArgs {
  std::string model;
  std::vector<std::string> train;
  std::string test;
  std::string method = "a2ds";
  bool realtime = false;
  std::string out;
};

struct EvaluateArgs {
  std::vector<std::string> hi;
  std::vector<std::string> truth;
  std::vector<long> onsets;
  std::string out;
};

struct SweepArgs {
  std::vector<double> betas;
  std::vector<int> ks;
  std::vector<double> lambdas;
  bool realtime = false;
  int seeds = 1;
  int jobs = 1;
  std::string out;
};

int run_simulate(const ConfigSource& config, const SimulateArgs& args);
int run_extract(const ConfigSource& config, const ExtractArgs& args);
int run_train(const ConfigSource& config, const TrainArgs& args);
int run_fuse(const ConfigSource& config, const FuseArgs& args);
int run_evaluate(const ConfigSource& config, const EvaluateArgs& args);
int run_sweep(const ConfigSource& config, const SweepArgs& args);

}  // namespace hifuse::cli
