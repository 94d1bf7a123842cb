#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "hifuse/features.hpp"
#include "hifuse/health_index.hpp"

namespace hifuse {

// Uncentered cosine: h_hat . h / (||h_hat|| ||h||).
double correlation(const Eigen::VectorXd& estimate, const Eigen::VectorXd& truth);

// h' = scale * h + offset, shared across every trajectory of a fleet.
struct AffineMap {
  double scale = 1.0;
  double offset = 0.0;

  Eigen::VectorXd apply(const Eigen::VectorXd& h) const { return (scale * h.array() + offset).matrix(); }
};

// Matches the pooled window mean and the fleet-wide maximum of the estimates
// to those of the ground truths. `window` is [begin, end) in row indices.
AffineMap fit_affine_alignment(std::span<const Eigen::VectorXd> estimates, std::span<const Eigen::VectorXd> truths,
                               IndexRange window);

std::vector<Eigen::VectorXd> affine_align(std::span<const Eigen::VectorXd> estimates,
                                          std::span<const Eigen::VectorXd> truths, IndexRange window);

// ||h' - h||_2 (not divided by sqrt(T)).
double adjusted_rmse(const Eigen::VectorXd& aligned, const Eigen::VectorXd& truth);

// Modified Mann-Kendall: sum sign(h_u - h_t)(u - t) / sum (u - t) over t < u.
double mk_monotonicity(const Eigen::VectorXd& h);

// Min pairwise correlation across the fleet (self-pairs included). Series of
// different lengths are linearly resampled onto the shortest length first.
double trendability(std::span<const Eigen::VectorXd> his);

// Linear resampling onto `length` points over the same normalized life span.
Eigen::VectorXd resample(const Eigen::VectorXd& h, Eigen::Index length);

// First index with h_t >= level; kDegenerate if never reached.
Eigen::Index prognosis_time(const Eigen::VectorXd& h, double level);

// exp(-std_k(h_k[t_P(k)]) / mean_k |h_k[t_P(k)] - h_k[0]|), population std.
// The reference level is the final value of `reference`, defaulting to the
// trajectory that ends lowest (the least worn).
double prognosability(std::span<const Eigen::VectorXd> his, std::optional<std::size_t> reference = std::nullopt);

// (first t with h_t >= threshold) - onset, in the units of `time` (row index
// when empty). nullopt means no alarm was raised.
std::optional<double> delay(const Eigen::VectorXd& h, Eigen::Index onset, double threshold = 1.0,
                            std::span<const double> time = {});

// Reference HI rising linearly to 1 at row `onset` then flat:
// truth_i = min((i + 1) / (onset + 1), 1).
Eigen::VectorXd ramp_truth(Eigen::Index length, Eigen::Index onset);

// sqrt(sum (min(h_t, 1) - truth_t)^2).
double rsse(const Eigen::VectorXd& h, const Eigen::VectorXd& truth);

struct TrajectoryMetrics {
  std::string id;
  std::optional<double> correlation;
  std::optional<double> adjusted_rmse;
  double mk_monotonicity = 0.0;
  std::optional<double> delay;  // set only when an onset is given and an alarm fired
  bool alarm = false;
  std::optional<double> rsse;
};

struct MetricsReport {
  std::vector<TrajectoryMetrics> trajectories;
  double trendability = 1.0;
  std::optional<double> prognosability;
  std::optional<AffineMap> alignment;
};

struct EvaluationOptions {
  std::vector<Eigen::VectorXd> truths;        // empty, or one per HI
  std::optional<IndexRange> align_window;     // needed for adjusted RMSE
  std::vector<Eigen::Index> onsets;           // empty, or one per HI (delay/RSSE)
  double delay_threshold = 1.0;
  std::optional<std::size_t> prognosability_reference;
};

MetricsReport evaluate(std::span<const HealthIndex> his, const EvaluationOptions& options);

nlohmann::json to_json(const MetricsReport& report);

// Header plus one flat row per trajectory; fleet-level scalars repeat on each row.
std::string to_csv(const MetricsReport& report);

}  // namespace hifuse
