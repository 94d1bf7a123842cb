#include "hifuse/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hifuse/dataset.hpp"
#include "hifuse/error.hpp"

namespace hifuse {
namespace {

double sign(double x) { return static_cast<double>((x > 0.0) - (x < 0.0)); }

nlohmann::json optional_json(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(); }

std::string optional_csv(const std::optional<double>& v) { return v ? format_double(*v) : "NA"; }

}  // namespace

double correlation(const Eigen::VectorXd& estimate, const Eigen::VectorXd& truth) {
  require(estimate.size() == truth.size(), ErrorCode::kShapeMismatch,
          "correlation: lengths " + std::to_string(estimate.size()) + " and " + std::to_string(truth.size()) + " differ");
  // One square root of the product keeps correlation(h, h) exactly 1.
  const double norms = std::sqrt(estimate.squaredNorm() * truth.squaredNorm());
  require(norms > 0.0, ErrorCode::kDegenerate, "correlation of a zero-norm series is undefined");
  return std::clamp(estimate.dot(truth) / norms, -1.0, 1.0);
}

AffineMap fit_affine_alignment(std::span<const Eigen::VectorXd> estimates, std::span<const Eigen::VectorXd> truths,
                               IndexRange window) {
  require(!estimates.empty() && estimates.size() == truths.size(), ErrorCode::kShapeMismatch,
          "affine alignment needs one ground truth per estimate");
  require(window.end > window.begin, ErrorCode::kInvalidArgument, "alignment window is empty");
  double est_window_sum = 0.0;
  double truth_window_sum = 0.0;
  Eigen::Index window_count = 0;
  double est_max = -std::numeric_limits<double>::infinity();
  double truth_max = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    require(estimates[i].size() == truths[i].size(), ErrorCode::kShapeMismatch,
            "estimate and truth " + std::to_string(i) + " differ in length");
    require(window.end <= estimates[i].size(), ErrorCode::kInvalidArgument,
            "alignment window [" + std::to_string(window.begin) + ", " + std::to_string(window.end) +
                ") exceeds trajectory " + std::to_string(i) + " of length " + std::to_string(estimates[i].size()));
    const Eigen::Index n = window.end - window.begin;
    est_window_sum += estimates[i].segment(window.begin, n).sum();
    truth_window_sum += truths[i].segment(window.begin, n).sum();
    window_count += n;
    est_max = std::max(est_max, estimates[i].maxCoeff());
    truth_max = std::max(truth_max, truths[i].maxCoeff());
  }
  const double est_mean = est_window_sum / static_cast<double>(window_count);
  const double truth_mean = truth_window_sum / static_cast<double>(window_count);
  require(est_max != est_mean, ErrorCode::kDegenerate,
          "affine alignment is degenerate: estimate maximum equals its window mean");
  AffineMap map;
  map.scale = (truth_max - truth_mean) / (est_max - est_mean);
  map.offset = truth_mean - est_mean * map.scale;
  return map;
}

std::vector<Eigen::VectorXd> affine_align(std::span<const Eigen::VectorXd> estimates,
                                          std::span<const Eigen::VectorXd> truths, IndexRange window) {
  const AffineMap map = fit_affine_alignment(estimates, truths, window);
  std::vector<Eigen::VectorXd> out;
  out.reserve(estimates.size());
  for (const auto& e : estimates) out.push_back(map.apply(e));
  return out;
}

double adjusted_rmse(const Eigen::VectorXd& aligned, const Eigen::VectorXd& truth) {
  require(aligned.size() == truth.size(), ErrorCode::kShapeMismatch, "adjusted_rmse: length mismatch");
  return (aligned - truth).norm();
}

double mk_monotonicity(const Eigen::VectorXd& h) {
  require(h.size() >= 2, ErrorCode::kInvalidArgument, "MK monotonicity needs at least two points");
  double numerator = 0.0;
  double denominator = 0.0;
  for (Eigen::Index t = 0; t < h.size(); ++t) {
    for (Eigen::Index u = t + 1; u < h.size(); ++u) {
      const auto gap = static_cast<double>(u - t);
      numerator += sign(h(u) - h(t)) * gap;
      denominator += gap;
    }
  }
  return numerator / denominator;
}

Eigen::VectorXd resample(const Eigen::VectorXd& h, Eigen::Index length) {
  require(h.size() >= 2 && length >= 2, ErrorCode::kInvalidArgument, "resample needs at least two points");
  if (h.size() == length) return h;
  Eigen::VectorXd out(length);
  const double step = static_cast<double>(h.size() - 1) / static_cast<double>(length - 1);
  for (Eigen::Index i = 0; i < length; ++i) {
    const double x = step * static_cast<double>(i);
    const auto lo = std::min<Eigen::Index>(static_cast<Eigen::Index>(std::floor(x)), h.size() - 2);
    const double frac = x - static_cast<double>(lo);
    out(i) = (1.0 - frac) * h(lo) + frac * h(lo + 1);
  }
  return out;
}

double trendability(std::span<const Eigen::VectorXd> his) {
  require(!his.empty(), ErrorCode::kInvalidArgument, "trendability needs at least one HI");
  Eigen::Index length = his.front().size();
  for (const auto& h : his) length = std::min(length, h.size());
  std::vector<Eigen::VectorXd> common;
  common.reserve(his.size());
  for (const auto& h : his) common.push_back(resample(h, length));
  double worst = 1.0;
  for (std::size_t a = 0; a < common.size(); ++a) {
    for (std::size_t b = a; b < common.size(); ++b) worst = std::min(worst, correlation(common[a], common[b]));
  }
  return worst;
}

Eigen::Index prognosis_time(const Eigen::VectorXd& h, double level) {
  for (Eigen::Index t = 0; t < h.size(); ++t) {
    if (h(t) >= level) return t;
  }
  fail(ErrorCode::kDegenerate, "HI never reaches the reference level " + format_double(level));
}

double prognosability(std::span<const Eigen::VectorXd> his, std::optional<std::size_t> reference) {
  require(!his.empty(), ErrorCode::kInvalidArgument, "prognosability needs at least one HI");
  std::size_t ref = 0;
  if (reference) {
    require(*reference < his.size(), ErrorCode::kInvalidArgument, "prognosability reference index out of range");
    ref = *reference;
  } else {
    for (std::size_t k = 1; k < his.size(); ++k) {
      if (his[k](his[k].size() - 1) < his[ref](his[ref].size() - 1)) ref = k;
    }
  }
  const double level = his[ref](his[ref].size() - 1);

  Eigen::VectorXd at_prognosis(static_cast<Eigen::Index>(his.size()));
  double range_sum = 0.0;
  for (std::size_t k = 0; k < his.size(); ++k) {
    const double value = his[k](prognosis_time(his[k], level));
    at_prognosis(static_cast<Eigen::Index>(k)) = value;
    range_sum += std::abs(value - his[k](0));
  }
  const double mean_range = range_sum / static_cast<double>(his.size());
  require(mean_range > 0.0, ErrorCode::kDegenerate, "prognosability undefined: HIs do not move from their start");
  const double mean = at_prognosis.mean();
  const double std_dev = std::sqrt((at_prognosis.array() - mean).square().mean());
  return std::exp(-std_dev / mean_range);
}

std::optional<double> delay(const Eigen::VectorXd& h, Eigen::Index onset, double threshold,
                            std::span<const double> time) {
  require(onset >= 0 && onset < h.size(), ErrorCode::kInvalidArgument, "fault onset outside the trajectory");
  require(time.empty() || static_cast<Eigen::Index>(time.size()) == h.size(), ErrorCode::kShapeMismatch,
          "delay: time and HI differ in length");
  for (Eigen::Index t = 0; t < h.size(); ++t) {
    if (h(t) >= threshold) {
      if (time.empty()) return static_cast<double>(t - onset);
      return time[static_cast<std::size_t>(t)] - time[static_cast<std::size_t>(onset)];
    }
  }
  return std::nullopt;
}

Eigen::VectorXd ramp_truth(Eigen::Index length, Eigen::Index onset) {
  require(length >= 1 && onset >= 0, ErrorCode::kInvalidArgument, "ramp_truth: invalid length or onset");
  Eigen::VectorXd truth(length);
  for (Eigen::Index i = 0; i < length; ++i) {
    truth(i) = std::min(static_cast<double>(i + 1) / static_cast<double>(onset + 1), 1.0);
  }
  return truth;
}

double rsse(const Eigen::VectorXd& h, const Eigen::VectorXd& truth) {
  require(h.size() == truth.size(), ErrorCode::kShapeMismatch, "rsse: length mismatch");
  return (h.cwiseMin(1.0) - truth).norm();
}

MetricsReport evaluate(std::span<const HealthIndex> his, const EvaluationOptions& options) {
  require(!his.empty(), ErrorCode::kInvalidArgument, "nothing to evaluate");
  require(options.truths.empty() || options.truths.size() == his.size(), ErrorCode::kShapeMismatch,
          "need one ground truth per HI");
  require(options.onsets.empty() || options.onsets.size() == his.size(), ErrorCode::kShapeMismatch,
          "need one fault onset per HI");

  std::vector<Eigen::VectorXd> values;
  for (const auto& hi : his) values.push_back(hi.value);

  MetricsReport report;
  std::vector<Eigen::VectorXd> aligned;
  if (!options.truths.empty() && options.align_window) {
    report.alignment = fit_affine_alignment(values, options.truths, *options.align_window);
    for (const auto& v : values) aligned.push_back(report.alignment->apply(v));
  }
  for (std::size_t i = 0; i < his.size(); ++i) {
    TrajectoryMetrics m;
    m.id = his[i].trajectory_id;
    m.mk_monotonicity = mk_monotonicity(values[i]);
    if (!options.truths.empty()) m.correlation = correlation(values[i], options.truths[i]);
    if (!aligned.empty()) m.adjusted_rmse = adjusted_rmse(aligned[i], options.truths[i]);
    if (!options.onsets.empty()) {
      m.delay = delay(values[i], options.onsets[i], options.delay_threshold, his[i].time);
      m.alarm = m.delay.has_value();
      m.rsse = rsse(values[i], ramp_truth(values[i].size(), options.onsets[i]));
    }
    report.trajectories.push_back(std::move(m));
  }
  report.trendability = trendability(values);
  try {
    report.prognosability = prognosability(values, options.prognosability_reference);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kDegenerate) throw;
  }
  return report;
}

nlohmann::json to_json(const MetricsReport& report) {
  nlohmann::json j;
  j["trajectories"] = nlohmann::json::array();
  for (const auto& m : report.trajectories) {
    j["trajectories"].push_back({{"id", m.id},
                                 {"correlation", optional_json(m.correlation)},
                                 {"adjusted_rmse", optional_json(m.adjusted_rmse)},
                                 {"mk_monotonicity", m.mk_monotonicity},
                                 {"delay", optional_json(m.delay)},
                                 {"alarm", m.alarm},
                                 {"rsse", optional_json(m.rsse)}});
  }
  j["trendability"] = report.trendability;
  j["prognosability"] = optional_json(report.prognosability);
  if (report.alignment) {
    j["alignment"] = {{"scale", report.alignment->scale}, {"offset", report.alignment->offset}};
  } else {
    j["alignment"] = nullptr;
  }
  return j;
}

std::string to_csv(const MetricsReport& report) {
  std::ostringstream out;
  out << "id,adjusted_rmse,correlation,mk_monotonicity,trendability,prognosability,delay,rsse\n";
  for (const auto& m : report.trajectories) {
    out << m.id << ',' << optional_csv(m.adjusted_rmse) << ',' << optional_csv(m.correlation) << ','
        << format_double(m.mk_monotonicity) << ',' << format_double(report.trendability) << ','
        << optional_csv(report.prognosability) << ',' << optional_csv(m.delay) << ',' << optional_csv(m.rsse)
        << '\n';
  }
  return out.str();
}

}  // namespace hifuse
