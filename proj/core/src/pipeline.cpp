#include "hifuse/pipeline.hpp"

#include <string>

#include "hifuse/error.hpp"

namespace hifuse {
namespace {

IdealSpaceSpec ideal_spec(const LabelSpec& labels) { return {labels.t_healthy, labels.t_faulty}; }

FusionTarget make_target(const EmbeddingModel& model, const LabeledTrajectory& entry) {
  return {entry.trajectory.id, embed(model, entry.trajectory), ideal_spec(entry.labels), entry.trajectory.timestamps};
}

nlohmann::json state_json(const FusionState& state) {
  return {{"w", std::vector<double>(state.w.data(), state.w.data() + state.w.size())},
          {"iterations", state.iterations},
          {"converged", state.converged},
          {"objective_trace", state.objective_trace},
          {"max_projection_gap", state.max_projection_gap}};
}

}  // namespace

MethodTraits traits(Method method) {
  switch (method) {
    case Method::kDeepSad:
      return {false, false, false};
    case Method::kAds:
      return {true, false, false};
    case Method::kRads:
      return {true, true, false};
    case Method::k2ds:
      return {false, false, true};
    case Method::kA2ds:
      return {true, false, true};
    case Method::kRa2ds:
      return {true, true, true};
  }
  return {};
}

std::string_view to_string(Method method) {
  switch (method) {
    case Method::kDeepSad:
      return "deepsad";
    case Method::kAds:
      return "ads";
    case Method::kRads:
      return "rads";
    case Method::k2ds:
      return "2ds";
    case Method::kA2ds:
      return "a2ds";
    case Method::kRa2ds:
      return "ra2ds";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  for (Method m : {Method::kDeepSad, Method::kAds, Method::kRads, Method::k2ds, Method::kA2ds, Method::kRa2ds}) {
    if (name == to_string(m)) return m;
  }
  fail(ErrorCode::kConfig, "unknown method '" + std::string(name) + "' (expected deepsad|ads|rads|2ds|a2ds|ra2ds)");
}

DatasetSplit make_split(std::vector<Trajectory> train, Trajectory test, const LabelConfig& labels) {
  DatasetSplit split;
  for (auto& t : train) {
    const LabelSpec spec = labels.train_spec(t.length());
    split.train.push_back({std::move(t), spec});
  }
  split.test = {std::move(test), labels.test_spec()};
  validate(split);
  return split;
}

NetworkSpec network_spec(const RunConfig& config, int input_dim) {
  return NetworkSpec::dense(input_dim, config.network.hidden, config.network.k);
}

EmbeddingModel train_embedding(const DatasetSplit& split, const RunConfig& config) {
  const auto input_dim = static_cast<int>(split.test.trajectory.num_features());
  return train(split, network_spec(config, input_dim), config.train);
}

MethodOutput run_method(Method method, const EmbeddingModel& model, const DatasetSplit& split,
                        const FusionConfig& fusion) {
  const MethodTraits t = traits(method);
  const bool model_diverse = model.config.lambda_div > 0.0;
  require(model_diverse == t.diversity, ErrorCode::kConfig,
          "method " + std::string(to_string(method)) + (t.diversity ? " needs a model trained with lambda_div > 0"
                                                                    : " needs a model trained with lambda_div = 0"));
  const std::string name(to_string(method));
  MethodOutput out;
  out.diagnostics = {{"method", name}};

  if (!t.apaic) {
    for (const auto& entry : split.train) {
      HealthIndex hi = anomaly_score(model, entry.trajectory);
      hi.method = name;
      out.train.push_back(std::move(hi));
    }
    out.test = anomaly_score(model, split.test.trajectory);
    out.test.method = name;
    return out;
  }

  std::vector<FusionTarget> train_targets;
  for (const auto& entry : split.train) train_targets.push_back(make_target(model, entry));
  const FusionTarget test_target = make_target(model, split.test);

  if (t.realtime) {
    RealtimeResult rt = fit_realtime(train_targets, test_target, fusion, name);
    const FusionState& last = rt.states.back();
    for (std::size_t i = 0; i < train_targets.size(); ++i) {
      out.train.push_back(to_health_index(last, train_targets[i], i, name));
    }
    out.test = std::move(rt.hi);
    out.diagnostics["window_ends"] = rt.window_ends;
    out.diagnostics["windows"] = nlohmann::json::array();
    for (const auto& state : rt.states) out.diagnostics["windows"].push_back(state_json(state));
    return out;
  }

  const FusionState state = fit(train_targets, test_target, fusion);
  for (std::size_t i = 0; i < train_targets.size(); ++i) {
    out.train.push_back(to_health_index(state, train_targets[i], i, name));
  }
  out.test = to_health_index(state, test_target, train_targets.size(), name);
  out.diagnostics["fit"] = state_json(state);
  return out;
}

std::vector<Fold> cross_validate(const std::vector<Trajectory>& fleet, Method method, const RunConfig& config) {
  require(fleet.size() >= 2, ErrorCode::kInvalidArgument, "cross-validation needs at least two trajectories");
  RunConfig run = config;
  if (!traits(method).diversity) run.train.lambda_div = 0.0;
  std::vector<Fold> folds;
  for (std::size_t k = 0; k < fleet.size(); ++k) {
    std::vector<Trajectory> train_set;
    for (std::size_t i = 0; i < fleet.size(); ++i) {
      if (i != k) train_set.push_back(fleet[i]);
    }
    const DatasetSplit split = make_split(std::move(train_set), fleet[k], run.labels);
    const EmbeddingModel model = train_embedding(split, run);
    folds.push_back({k, run_method(method, model, split, run.fusion)});
  }
  return folds;
}

}  // namespace hifuse
