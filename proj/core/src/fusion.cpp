#include "hifuse/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hifuse/error.hpp"

namespace hifuse {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Prefix rows [0, T_d) must be <= 0; suffix rows [T_f - 1, T) must be >= 1.
Eigen::Index prefix_end(const IdealSpaceSpec& spec) { return spec.t_healthy; }

Eigen::Index suffix_begin(const IdealSpaceSpec& spec, Eigen::Index length) {
  return spec.t_faulty ? static_cast<Eigen::Index>(*spec.t_faulty - 1) : length;
}

void clamp_bounds(Eigen::VectorXd& z, const IdealSpaceSpec& spec) {
  for (Eigen::Index t = 0; t < prefix_end(spec); ++t) z(t) = std::min(z(t), 0.0);
  for (Eigen::Index t = suffix_begin(spec, z.size()); t < z.size(); ++t) z(t) = std::max(z(t), 1.0);
}

struct Block {
  double sum;
  Eigen::Index count;
  double lower;
  double upper;

  double level() const { return std::clamp(sum / static_cast<double>(count), lower, upper); }
};

}  // namespace

void validate(const IdealSpaceSpec& spec, Eigen::Index length) {
  require(spec.t_healthy >= 0 && spec.t_healthy <= length, ErrorCode::kInvalidArgument,
          "ideal-set T_d=" + std::to_string(spec.t_healthy) + " outside [0, " + std::to_string(length) + "]");
  if (spec.t_faulty) {
    require(*spec.t_faulty > spec.t_healthy && *spec.t_faulty <= length && *spec.t_faulty >= 1,
            ErrorCode::kInvalidArgument,
            "ideal-set T_f=" + std::to_string(*spec.t_faulty) + " must satisfy T_d < T_f <= " + std::to_string(length));
  }
}

bool contains(const IdealSpaceSpec& spec, const Eigen::VectorXd& z, bool isotonic) {
  for (Eigen::Index t = 0; t < std::min<Eigen::Index>(prefix_end(spec), z.size()); ++t) {
    if (!(z(t) <= 0.0)) return false;
  }
  for (Eigen::Index t = suffix_begin(spec, z.size()); t < z.size(); ++t) {
    if (!(z(t) >= 1.0)) return false;
  }
  if (isotonic) {
    for (Eigen::Index t = 1; t < z.size(); ++t) {
      if (!(z(t) >= z(t - 1))) return false;
    }
  }
  return true;
}

std::string_view to_string(ProjectionOrder order) {
  return order == ProjectionOrder::kAlgorithm ? "algorithm" : "exact";
}

ProjectionOrder parse_projection_order(std::string_view name) {
  if (name == "algorithm") return ProjectionOrder::kAlgorithm;
  if (name == "exact") return ProjectionOrder::kExact;
  fail(ErrorCode::kConfig, "unknown projection order '" + std::string(name) + "' (expected algorithm|exact)");
}

void validate(const FusionConfig& c) {
  require(c.beta >= 0.0, ErrorCode::kInvalidArgument, "fusion.beta must be >= 0");
  require(c.iters >= 1, ErrorCode::kInvalidArgument, "fusion.iters must be >= 1");
  require(c.tol >= 0.0, ErrorCode::kInvalidArgument, "fusion.tol must be >= 0");
  require(c.tau >= 1, ErrorCode::kInvalidArgument, "fusion.tau must be >= 1");
}

Eigen::VectorXd pava(const Eigen::VectorXd& values) {
  std::vector<Block> blocks;
  blocks.reserve(static_cast<std::size_t>(values.size()));
  for (Eigen::Index t = 0; t < values.size(); ++t) {
    blocks.push_back({values(t), 1, -kInf, kInf});
    while (blocks.size() > 1 && blocks[blocks.size() - 2].level() > blocks.back().level()) {
      const Block top = blocks.back();
      blocks.pop_back();
      blocks.back().sum += top.sum;
      blocks.back().count += top.count;
    }
  }
  Eigen::VectorXd out(values.size());
  Eigen::Index t = 0;
  for (const auto& b : blocks) {
    out.segment(t, b.count).setConstant(b.level());
    t += b.count;
  }
  return out;
}

Eigen::VectorXd project_ideal(const Eigen::VectorXd& h, const IdealSpaceSpec& spec, bool isotonic) {
  validate(spec, h.size());
  Eigen::VectorXd z = h;
  clamp_bounds(z, spec);
  if (isotonic) {
    z = pava(z);
    // Pooled means of clamped values already respect both bounds; this only
    // removes last-bit rounding and cannot break monotonicity.
    clamp_bounds(z, spec);
  }
  return z;
}

Eigen::VectorXd project_ideal_exact(const Eigen::VectorXd& h, const IdealSpaceSpec& spec, bool isotonic) {
  validate(spec, h.size());
  if (!isotonic) {
    Eigen::VectorXd z = h;
    clamp_bounds(z, spec);
    return z;
  }
  const Eigen::Index first_suffix = suffix_begin(spec, h.size());
  std::vector<Block> blocks;
  blocks.reserve(static_cast<std::size_t>(h.size()));
  for (Eigen::Index t = 0; t < h.size(); ++t) {
    blocks.push_back({h(t), 1, t >= first_suffix ? 1.0 : -kInf, t < prefix_end(spec) ? 0.0 : kInf});
    while (blocks.size() > 1 && blocks[blocks.size() - 2].level() > blocks.back().level()) {
      const Block top = blocks.back();
      blocks.pop_back();
      auto& b = blocks.back();
      b.sum += top.sum;
      b.count += top.count;
      b.lower = std::max(b.lower, top.lower);
      b.upper = std::min(b.upper, top.upper);
    }
  }
  Eigen::VectorXd z(h.size());
  Eigen::Index t = 0;
  for (const auto& b : blocks) {
    z.segment(t, b.count).setConstant(b.level());
    t += b.count;
  }
  return z;
}

Eigen::VectorXd project(const Eigen::VectorXd& h, const IdealSpaceSpec& spec, const FusionConfig& config) {
  return config.projection == ProjectionOrder::kExact ? project_ideal_exact(h, spec, config.isotonic)
                                                      : project_ideal(h, spec, config.isotonic);
}

Eigen::VectorXd ridge_step(std::span<const Eigen::MatrixXd> features, std::span<const Eigen::VectorXd> targets,
                           double beta) {
  require(!features.empty(), ErrorCode::kInvalidArgument, "ridge_step needs at least one block");
  require(features.size() == targets.size(), ErrorCode::kShapeMismatch, "ridge_step: one target per feature block");
  require(beta >= 0.0, ErrorCode::kInvalidArgument, "ridge_step: beta must be >= 0");
  const Eigen::Index k = features.front().cols();
  Eigen::MatrixXd normal = Eigen::MatrixXd::Zero(k, k);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k);
  for (std::size_t i = 0; i < features.size(); ++i) {
    require(features[i].cols() == k, ErrorCode::kShapeMismatch, "ridge_step: blocks differ in column count");
    require(features[i].rows() == targets[i].size(), ErrorCode::kShapeMismatch,
            "ridge_step: block " + std::to_string(i) + " rows differ from its target length");
    normal.selfadjointView<Eigen::Lower>().rankUpdate(features[i].transpose());
    rhs.noalias() += features[i].transpose() * targets[i];
  }
  normal.triangularView<Eigen::StrictlyUpper>() = normal.transpose();
  normal.diagonal().array() += beta;

  Eigen::LLT<Eigen::MatrixXd> llt(normal);
  if (llt.info() != Eigen::Success || !(llt.rcond() > 1e-14)) {
    fail(ErrorCode::kSingularSystem, "ridge normal equations are singular (beta=" + std::to_string(beta) + ")");
  }
  return llt.solve(rhs);
}

double apaic_objective(const Eigen::VectorXd& w, std::span<const Eigen::VectorXd> targets,
                       std::span<const Eigen::MatrixXd> features, double beta) {
  require(features.size() == targets.size(), ErrorCode::kShapeMismatch, "apaic_objective: one target per block");
  double total = beta * w.squaredNorm();
  for (std::size_t i = 0; i < features.size(); ++i) total += (features[i] * w - targets[i]).squaredNorm();
  return total;
}

FusionState fit(std::span<const FusionTarget> targets, const FusionConfig& config) {
  validate(config);
  require(!targets.empty(), ErrorCode::kInvalidArgument, "fit needs at least one trajectory");
  const Eigen::Index k = targets.front().indicators.cols();
  std::vector<Eigen::MatrixXd> features;
  features.reserve(targets.size());
  for (const auto& target : targets) {
    require(target.indicators.cols() == k, ErrorCode::kShapeMismatch,
            "trajectory '" + target.id + "' has " + std::to_string(target.indicators.cols()) +
                " condition indicators, expected " + std::to_string(k));
    require(target.indicators.allFinite(), ErrorCode::kNonFiniteValue,
            "trajectory '" + target.id + "' has non-finite condition indicators");
    validate(target.spec, target.indicators.rows());
    features.push_back(target.indicators);
  }
  FusionState state;
  state.w = Eigen::VectorXd::Ones(k);
  state.h.resize(targets.size());
  state.z.resize(targets.size());

  const auto project_all = [&]() {
    for (std::size_t i = 0; i < targets.size(); ++i) {
      state.h[i] = features[i] * state.w;
      state.z[i] = project(state.h[i], targets[i].spec, config);
      if (config.projection == ProjectionOrder::kAlgorithm) {
        const Eigen::VectorXd exact = project_ideal_exact(state.h[i], targets[i].spec, config.isotonic);
        const double gap = (state.h[i] - state.z[i]).squaredNorm() - (state.h[i] - exact).squaredNorm();
        state.max_projection_gap = std::max(state.max_projection_gap, gap);
      }
    }
  };
  const auto record = [&]() {
    const double value = apaic_objective(state.w, state.z, features, config.beta);
    if (!std::isfinite(value)) {
      fail(ErrorCode::kNonFiniteObjective, "APAIC objective is not finite at iteration " +
                                               std::to_string(state.iterations));
    }
    state.objective_trace.push_back(value);
    return value;
  };

  project_all();
  double previous = record();
  for (int it = 0; it < config.iters; ++it) {
    state.w = ridge_step(features, state.z, config.beta);
    state.iterations = it + 1;
    record();
    project_all();
    const double current = record();
    if (previous - current < config.tol) {
      state.converged = true;
      break;
    }
    previous = current;
  }
  return state;
}

FusionState fit(std::span<const FusionTarget> train, const FusionTarget& test, const FusionConfig& config) {
  std::vector<FusionTarget> all(train.begin(), train.end());
  all.push_back(test);
  return fit(all, config);
}

HealthIndex to_health_index(const FusionState& state, const FusionTarget& target, std::size_t index,
                            std::string method) {
  HealthIndex hi;
  hi.trajectory_id = target.id;
  hi.method = std::move(method);
  hi.raw = state.h.at(index);
  hi.value = state.z.at(index);
  for (Eigen::Index t = 0; t < hi.value.size(); ++t) {
    hi.time.push_back(target.time.empty() ? static_cast<double>(t) : target.time[static_cast<std::size_t>(t)]);
  }
  return hi;
}

std::vector<Eigen::Index> realtime_window_ends(Eigen::Index length, int tau) {
  require(tau >= 1, ErrorCode::kInvalidArgument, "tau must be >= 1");
  require(tau <= length, ErrorCode::kInvalidArgument,
          "tau=" + std::to_string(tau) + " exceeds trajectory length " + std::to_string(length));
  std::vector<Eigen::Index> ends;
  for (Eigen::Index t = tau; t <= length; t += tau) ends.push_back(t);
  if (ends.back() != length) ends.push_back(length);
  return ends;
}

RealtimeResult fit_realtime(std::span<const FusionTarget> train, const FusionTarget& test, const FusionConfig& config,
                            std::string method) {
  validate(config);
  const Eigen::Index length = test.indicators.rows();
  require(!test.spec.t_faulty.has_value(), ErrorCode::kInvalidArgument, "real-time test target must not declare T_f");

  RealtimeResult result;
  result.window_ends = realtime_window_ends(length, config.tau);
  result.hi.trajectory_id = test.id;
  result.hi.method = std::move(method);
  result.hi.raw.resize(length);
  result.hi.value.resize(length);
  for (Eigen::Index t = 0; t < length; ++t) {
    result.hi.time.push_back(test.time.empty() ? static_cast<double>(t) : test.time[static_cast<std::size_t>(t)]);
  }

  Eigen::Index previous_end = 0;
  for (const Eigen::Index end : result.window_ends) {
    FusionTarget window;
    window.id = test.id;
    window.indicators = test.indicators.topRows(end);
    window.spec.t_healthy = static_cast<int>(std::min<Eigen::Index>(test.spec.t_healthy, end));
    FusionState state = fit(train, window, config);
    const Eigen::Index count = end - previous_end;
    result.hi.raw.segment(previous_end, count) = state.h.back().segment(previous_end, count);
    result.hi.value.segment(previous_end, count) = state.z.back().segment(previous_end, count);
    result.states.push_back(std::move(state));
    previous_end = end;
  }
  return result;
}

}  // namespace hifuse
