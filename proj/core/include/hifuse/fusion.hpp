#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "hifuse/health_index.hpp"

namespace hifuse {

// Ideal-HI set for one trajectory (1-based time): z_t <= 0 for t <= T_d,
// z_t >= 1 for t >= T_f when T_f is present, and z nondecreasing. T_d = 0
// disables the prefix constraint. Test trajectories omit T_f.
struct IdealSpaceSpec {
  int t_healthy = 0;
  std::optional<int> t_faulty;
};

void validate(const IdealSpaceSpec& spec, Eigen::Index length);

// Exact membership test (no tolerance).
bool contains(const IdealSpaceSpec& spec, const Eigen::VectorXd& z, bool isotonic = true);

enum class ProjectionOrder {
  kAlgorithm,  // clamp prefix, clamp suffix, then pool adjacent violators
  kExact,      // Euclidean projection onto the ideal set (bounded pooling)
};

std::string_view to_string(ProjectionOrder order);
ProjectionOrder parse_projection_order(std::string_view name);

struct FusionConfig {
  double beta = 0.05;
  int iters = 1000;
  double tol = 1e-9;
  int tau = 30;
  bool isotonic = true;
  ProjectionOrder projection = ProjectionOrder::kExact;
};

void validate(const FusionConfig& config);

// Nondecreasing least-squares fit of v by pooling adjacent violators, O(T).
Eigen::VectorXd pava(const Eigen::VectorXd& values);

// z <- h; z_t <- 0 on the prefix where z_t > 0; z_t <- 1 on the suffix where
// z_t < 1; then pava(z) unless `isotonic` is false.
Eigen::VectorXd project_ideal(const Eigen::VectorXd& h, const IdealSpaceSpec& spec, bool isotonic = true);

// argmin ||h - z||^2 over the ideal set: pooling where each block's level is
// its mean clamped to the tightest bounds of its members.
Eigen::VectorXd project_ideal_exact(const Eigen::VectorXd& h, const IdealSpaceSpec& spec, bool isotonic = true);

Eigen::VectorXd project(const Eigen::VectorXd& h, const IdealSpaceSpec& spec, const FusionConfig& config);

// argmin_w sum_i ||Y_i w - z_i||^2 + beta ||w||^2 via the normal equations.
Eigen::VectorXd ridge_step(std::span<const Eigen::MatrixXd> features, std::span<const Eigen::VectorXd> targets,
                           double beta);

// sum_i ||Y_i w - z_i||^2 + beta ||w||^2.
double apaic_objective(const Eigen::VectorXd& w, std::span<const Eigen::VectorXd> targets,
                       std::span<const Eigen::MatrixXd> features, double beta);

// One trajectory's condition indicators (T x K) and its ideal-set constraints.
struct FusionTarget {
  std::string id;
  Eigen::MatrixXd indicators;
  IdealSpaceSpec spec;
  std::vector<double> time;  // optional, used only for the emitted HealthIndex
};

struct FusionState {
  Eigen::VectorXd w;
  std::vector<Eigen::VectorXd> z;  // final projected HI per target
  std::vector<Eigen::VectorXd> h;  // Y_i w per target
  // Objective after initialization and then after each half-step
  // (regression, projection), so 1 + 2 * iterations entries.
  std::vector<double> objective_trace;
  int iterations = 0;
  bool converged = false;
  // Largest excess of ||h - z||^2 for the algorithm-order projection over
  // the exact projection; zero when kExact is used.
  double max_projection_gap = 0.0;
};

// APAIC: w = 1, then alternate ridge regression over all targets with a
// per-target projection onto its ideal set. Stops after `iters` iterations or
// once one iteration lowers the objective by less than `tol`.
FusionState fit(std::span<const FusionTarget> targets, const FusionConfig& config);

// Convenience form: training targets (with T_f) followed by one test target.
FusionState fit(std::span<const FusionTarget> train, const FusionTarget& test, const FusionConfig& config);

HealthIndex to_health_index(const FusionState& state, const FusionTarget& target, std::size_t index,
                            std::string method);

// Window end points tau, 2 tau, ..., with the last forced to `length`.
std::vector<Eigen::Index> realtime_window_ends(Eigen::Index length, int tau);

struct RealtimeResult {
  HealthIndex hi;
  std::vector<Eigen::Index> window_ends;
  std::vector<FusionState> states;  // one solve per window
};

// Refit on the first t test samples for each window end t; the HI over
// (previous end, t] is taken from that solve. Every window starts from w = 1.
RealtimeResult fit_realtime(std::span<const FusionTarget> train, const FusionTarget& test, const FusionConfig& config,
                            std::string method = "realtime");

}  // namespace hifuse
