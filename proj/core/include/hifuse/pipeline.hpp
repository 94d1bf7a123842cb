#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "hifuse/config.hpp"
#include "hifuse/dataset.hpp"
#include "hifuse/embedding.hpp"
#include "hifuse/fusion.hpp"
#include "hifuse/health_index.hpp"

namespace hifuse {

// HI construction variants: anomaly score or APAIC fusion of the embedding,
// offline or real time, on a plain (lambda = 0) or diversity-regularized model.
enum class Method { kDeepSad, kAds, kRads, k2ds, kA2ds, kRa2ds };

struct MethodTraits {
  bool apaic = false;
  bool realtime = false;
  bool diversity = false;
};

MethodTraits traits(Method method);
std::string_view to_string(Method method);
Method parse_method(std::string_view name);

// Train entries get T_d and T_f from the label config; the test entry only T_d.
DatasetSplit make_split(std::vector<Trajectory> train, Trajectory test, const LabelConfig& labels);

NetworkSpec network_spec(const RunConfig& config, int input_dim);

// Trains with the run's network and TrainConfig.
EmbeddingModel train_embedding(const DatasetSplit& split, const RunConfig& config);

struct MethodOutput {
  std::vector<HealthIndex> train;  // one per training trajectory, same order
  HealthIndex test;
  nlohmann::json diagnostics;
};

// Builds the HIs of `method` from a trained model. The model's lambda must
// agree with the method's diversity flag.
MethodOutput run_method(Method method, const EmbeddingModel& model, const DatasetSplit& split,
                        const FusionConfig& fusion);

struct Fold {
  std::size_t test_index = 0;
  MethodOutput output;
};

// Leave-one-out over the fleet: each trajectory is the test set once and the
// others are training data. Each fold trains its own model.
std::vector<Fold> cross_validate(const std::vector<Trajectory>& fleet, Method method, const RunConfig& config);

}  // namespace hifuse
