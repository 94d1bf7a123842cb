#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

#include "hifuse/config.hpp"
#include "hifuse/dataset.hpp"
#include "hifuse/embedding.hpp"
#include "hifuse/error.hpp"
#include "hifuse/features.hpp"
#include "hifuse/metrics.hpp"
#include "hifuse/pipeline.hpp"
#include "hifuse/synth.hpp"

namespace hifuse::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

void merge_patch(json& target, const json& patch) {
  for (const auto& [key, value] : patch.items()) {
    if (value.is_object() && target.contains(key) && target[key].is_object()) {
      merge_patch(target[key], value);
    } else {
      target[key] = value;
    }
  }
}

// File, then HIFUSE_* environment, then command-line flags.
RunConfig resolve(const ConfigSource& source) {
  json j = json::object();
  if (!source.path.empty()) j = to_json(load_run_config(fs::path(source.path), {}));
  apply_env_overrides(j, hifuse_environment());
  merge_patch(j, source.patch);
  return run_config_from_json(j);
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorCode::kIo, "cannot write " + path.string());
  out << text;
  require(static_cast<bool>(out), ErrorCode::kIo, "write failed for " + path.string());
}

std::vector<Trajectory> load_features(const std::vector<std::string>& paths) {
  std::vector<Trajectory> out;
  out.reserve(paths.size());
  for (const auto& p : paths) out.push_back(load_trajectory(p, FileFormat::kFeatureCsv));
  return out;
}

fs::path parent_or_cwd(const fs::path& file) { return file.has_parent_path() ? file.parent_path() : fs::path("."); }

std::vector<IndexRange> read_pass_ranges(const fs::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCode::kIo, "cannot open " + path.string());
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorCode::kEmptyFile, path.string() + " is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  require(line == "begin,end", ErrorCode::kMalformedHeader, path.string() + ": header must be begin,end");
  std::vector<IndexRange> ranges;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    std::istringstream row(line);
    IndexRange r;
    char comma = 0;
    if (!(row >> r.begin >> comma >> r.end) || comma != ',') {
      fail(ErrorCode::kMalformedRow, path.string() + ":" + std::to_string(line_no) + ": expected begin,end");
    }
    ranges.push_back(r);
  }
  require(!ranges.empty(), ErrorCode::kEmptyFile, path.string() + " lists no passes");
  return ranges;
}

Method resolve_method(const std::string& name, bool realtime) {
  const Method m = parse_method(name);
  if (!realtime) return m;
  switch (m) {
    case Method::kAds:
    case Method::kRads:
      return Method::kRads;
    case Method::kA2ds:
    case Method::kRa2ds:
      return Method::kRa2ds;
    default:
      fail(ErrorCode::kConfig, "--realtime needs an APAIC method (ads, a2ds, rads or ra2ds), got " + name);
  }
}

void warn_if_unregularized(const FusionConfig& fusion) {
  if (fusion.beta == 0.0) {
    std::cerr << "warning: fusion.beta = 0 leaves the ridge step unregularized; collinear indicators will make it "
                 "singular\n";
  }
}

// Population mean and standard deviation.
std::pair<double, double> mean_std(const std::vector<double>& xs) {
  if (xs.empty()) return {std::nan(""), std::nan("")};
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  return {mean, std::sqrt(var / static_cast<double>(xs.size()))};
}

std::string csv_number(double x) { return std::isnan(x) ? "NA" : format_double(x); }

}  // namespace

int run_simulate(const ConfigSource& source, const SimulateArgs& args) {
  const RunConfig config = resolve(source);
  const fs::path out = args.out.empty() ? fs::path(config.paths.data_dir) : fs::path(args.out);
  fs::create_directories(out);
  const auto fleet = generate_fleet(config.synth.synth, config.synth.n_trajectories, config.synth.lifetime_jitter);
  for (const auto& s : fleet) {
    const fs::path features = out / (s.trajectory.id + ".csv");
    write_feature_csv(features, s.trajectory);
    write_truth_csv(out / (s.trajectory.id + "_truth.csv"), s.trajectory.timestamps, s.truth);
    std::cout << features.string() << '\n';
  }
  write_resolved_config(out, config);
  return 0;
}

int run_extract(const ConfigSource& source, const ExtractArgs& args) {
  const RunConfig config = resolve(source);
  std::vector<Eigen::MatrixXd> per_channel;
  int rate = 0;
  for (const auto& path : args.channels) {
    const RawSignal signal = load_raw_signal(path);
    if (rate == 0) rate = signal.sample_rate_hz;
    require(signal.sample_rate_hz == rate, ErrorCode::kShapeMismatch,
            path + " has sample rate " + std::to_string(signal.sample_rate_hz) + ", expected " + std::to_string(rate));
    MelConfig mel = config.mel;
    require(mel.sample_rate_hz == 0 || mel.sample_rate_hz == rate, ErrorCode::kConfig,
            "mel.sample_rate_hz=" + std::to_string(mel.sample_rate_hz) + " disagrees with " + path);
    mel.sample_rate_hz = rate;
    per_channel.push_back(mel_spectrogram(signal.samples, mel));
  }
  const Eigen::MatrixXd frames = fuse_channels(per_channel);

  std::vector<IndexRange> ranges;
  if (!args.passes.empty()) {
    ranges = read_pass_ranges(args.passes);
  } else {
    for (Eigen::Index b = 0; b + args.frames_per_pass <= frames.rows(); b += args.frames_per_pass) {
      ranges.push_back({b, b + args.frames_per_pass});
    }
  }
  require(!ranges.empty(), ErrorCode::kInvalidArgument, "signal holds fewer frames than one pass");
  const Eigen::MatrixXd passes = aggregate_pass(frames, ranges);
  std::vector<double> t(static_cast<std::size_t>(passes.rows()));
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<double>(i + 1);

  const fs::path out(args.out);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  write_feature_csv(out, make_trajectory(out.stem().string(), passes, t));
  write_resolved_config(parent_or_cwd(out), config);
  std::cout << out.string() << ": " << passes.rows() << " passes x " << passes.cols() << " features\n";
  return 0;
}

int run_train(const ConfigSource& source, const TrainArgs& args) {
  const RunConfig config = resolve(source);
  const fs::path model_path = args.model.empty() ? fs::path(config.paths.model) : fs::path(args.model);
  const DatasetSplit split =
      make_split(load_features(args.train), load_trajectory(args.test, FileFormat::kFeatureCsv), config.labels);
  const EmbeddingModel model = train_embedding(split, config);
  if (model_path.has_parent_path()) fs::create_directories(model_path.parent_path());
  save_model(model_path, model);
  write_resolved_config(parent_or_cwd(model_path), config);
  std::cout << model_path.string() << ": final epoch loss "
            << (model.loss_trace.empty() ? std::string("n/a") : format_double(model.loss_trace.back())) << '\n';
  return 0;
}

int run_fuse(const ConfigSource& source, const FuseArgs& args) {
  const RunConfig config = resolve(source);
  const Method method = resolve_method(args.method, args.realtime);
  if (traits(method).apaic) warn_if_unregularized(config.fusion);
  const EmbeddingModel model = load_model(args.model.empty() ? fs::path(config.paths.model) : fs::path(args.model));
  const DatasetSplit split =
      make_split(load_features(args.train), load_trajectory(args.test, FileFormat::kFeatureCsv), config.labels);
  const MethodOutput result = run_method(method, model, split, config.fusion);

  const fs::path out = args.out.empty() ? fs::path(config.paths.output_dir) : fs::path(args.out);
  fs::create_directories(out);
  for (const auto& hi : result.train) write_hi_csv(out / (hi.trajectory_id + std::string(kHiSuffix) + ".csv"), hi);
  const fs::path test_path = out / (result.test.trajectory_id + std::string(kHiSuffix) + ".csv");
  write_hi_csv(test_path, result.test);
  write_text(out / "diagnostics.json", dump_json(result.diagnostics));
  write_resolved_config(out, config);
  std::cout << test_path.string() << '\n';
  return 0;
}

int run_evaluate(const ConfigSource& source, const EvaluateArgs& args) {
  const RunConfig config = resolve(source);
  require(args.truth.empty() || args.truth.size() == args.hi.size(), ErrorCode::kConfig,
          "--truth needs one file per --hi file");
  require(args.onsets.empty() || args.onsets.size() == args.hi.size(), ErrorCode::kConfig,
          "--onset needs one value per --hi file");
  std::vector<HealthIndex> his;
  for (const auto& p : args.hi) his.push_back(read_hi_csv(p));
  EvaluationOptions options;
  for (const auto& p : args.truth) options.truths.push_back(read_truth_csv(p));
  if (!options.truths.empty()) options.align_window = config.metrics.align_window;
  for (long onset : args.onsets) options.onsets.push_back(onset);
  options.delay_threshold = config.metrics.delay_threshold;
  const MetricsReport report = evaluate(his, options);

  const fs::path out = args.out.empty() ? fs::path(config.paths.output_dir) : fs::path(args.out);
  fs::create_directories(out);
  write_text(out / "metrics.json", dump_json(to_json(report)));
  const std::string csv = to_csv(report);
  write_text(out / "metrics.csv", csv);
  write_resolved_config(out, config);
  std::cout << csv;
  return 0;
}

namespace {

struct SweepPoint {
  double beta = 0.0;
  int k = 0;
  double lambda = 0.0;
  int seed_offset = 0;
};

struct PointScores {
  double rmse = std::nan("");
  double correlation = std::nan("");
  double mk = std::nan("");
  double trendability = std::nan("");
  double prognosability = std::nan("");
};

Method sweep_method(double lambda, bool realtime) {
  if (lambda > 0.0) return realtime ? Method::kRa2ds : Method::kA2ds;
  return realtime ? Method::kRads : Method::kAds;
}

PointScores score_point(RunConfig config, const SweepPoint& p, bool realtime) {
  config.fusion.beta = p.beta;
  config.network.k = p.k;
  config.train.lambda_div = p.lambda;
  config.seed += static_cast<std::uint64_t>(p.seed_offset);
  config.train.seed = config.seed;
  config.synth.synth.seed = config.seed;
  const auto fleet = generate_fleet(config.synth.synth, config.synth.n_trajectories, config.synth.lifetime_jitter);
  std::vector<Trajectory> trajectories;
  for (const auto& s : fleet) trajectories.push_back(s.trajectory);
  const auto folds = cross_validate(trajectories, sweep_method(p.lambda, realtime), config);

  std::vector<Eigen::VectorXd> tests, truths;
  std::vector<double> corr, mk;
  for (const auto& fold : folds) {
    tests.push_back(fold.output.test.value);
    truths.push_back(fleet[fold.test_index].truth);
    corr.push_back(correlation(tests.back(), truths.back()));
    mk.push_back(mk_monotonicity(tests.back()));
  }
  PointScores s;
  s.correlation = mean_std(corr).first;
  s.mk = mean_std(mk).first;
  s.trendability = trendability(tests);
  try {
    s.prognosability = prognosability(tests);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kDegenerate) throw;
  }
  try {
    const auto aligned = affine_align(tests, truths, config.metrics.align_window);
    std::vector<double> rmse;
    for (std::size_t i = 0; i < aligned.size(); ++i) rmse.push_back(adjusted_rmse(aligned[i], truths[i]));
    s.rmse = mean_std(rmse).first;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kDegenerate && e.code() != ErrorCode::kInvalidArgument) throw;
  }
  return s;
}

}  // namespace

int run_sweep(const ConfigSource& source, const SweepArgs& args) {
  const RunConfig config = resolve(source);
  const std::vector<double> betas = args.betas.empty() ? std::vector<double>{config.fusion.beta} : args.betas;
  const std::vector<int> ks = args.ks.empty() ? std::vector<int>{config.network.k} : args.ks;
  const std::vector<double> lambdas =
      args.lambdas.empty() ? std::vector<double>{config.train.lambda_div} : args.lambdas;
  for (double b : betas) require(b >= 0.0, ErrorCode::kConfig, "--beta values must be >= 0");
  for (int k : ks) require(k >= 1, ErrorCode::kConfig, "--k values must be positive");
  for (double l : lambdas) require(l >= 0.0, ErrorCode::kConfig, "--lambda values must be >= 0");
  if (std::find(betas.begin(), betas.end(), 0.0) != betas.end()) warn_if_unregularized(FusionConfig{0.0});

  std::vector<SweepPoint> points;
  for (double b : betas)
    for (int k : ks)
      for (double l : lambdas)
        for (int s = 0; s < args.seeds; ++s) points.push_back({b, k, l, s});

  // Bounded pool: at most `jobs` points in flight; results land by index, so
  // output order never depends on scheduling.
  std::vector<PointScores> scores(points.size());
  std::size_t next = 0;
  while (next < points.size()) {
    std::vector<std::future<PointScores>> batch;
    const std::size_t stop = std::min(points.size(), next + static_cast<std::size_t>(args.jobs));
    for (std::size_t i = next; i < stop; ++i) {
      batch.push_back(std::async(std::launch::async, score_point, config, points[i], args.realtime));
    }
    for (std::size_t i = next; i < stop; ++i) scores[i] = batch[i - next].get();
    next = stop;
  }

  std::ostringstream detail;
  detail << "beta,k,lambda_div,isotonic,seed,rmse,correlation,mk_monotonicity,trendability,prognosability\n";
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    const auto& s = scores[i];
    detail << format_double(p.beta) << ',' << p.k << ',' << format_double(p.lambda) << ','
           << (config.fusion.isotonic ? "true" : "false") << ',' << config.seed + static_cast<std::uint64_t>(p.seed_offset)
           << ',' << csv_number(s.rmse) << ',' << csv_number(s.correlation) << ',' << csv_number(s.mk) << ','
           << csv_number(s.trendability) << ',' << csv_number(s.prognosability) << '\n';
  }

  std::ostringstream summary;
  summary << "beta,k,lambda_div,isotonic,method,seeds";
  for (const char* m : {"rmse", "correlation", "mk_monotonicity", "trendability", "prognosability"}) {
    summary << ',' << m << "_mean," << m << "_std";
  }
  summary << '\n';
  for (std::size_t i = 0; i < points.size(); i += static_cast<std::size_t>(args.seeds)) {
    const auto& p = points[i];
    summary << format_double(p.beta) << ',' << p.k << ',' << format_double(p.lambda) << ','
            << (config.fusion.isotonic ? "true" : "false") << ',' << to_string(sweep_method(p.lambda, args.realtime))
            << ',' << args.seeds;
    for (auto field : {&PointScores::rmse, &PointScores::correlation, &PointScores::mk, &PointScores::trendability,
                       &PointScores::prognosability}) {
      std::vector<double> xs;
      for (int s = 0; s < args.seeds; ++s) {
        const double v = scores[i + static_cast<std::size_t>(s)].*field;
        if (!std::isnan(v)) xs.push_back(v);
      }
      const auto [mean, sd] = mean_std(xs);
      summary << ',' << csv_number(mean) << ',' << csv_number(sd);
    }
    summary << '\n';
  }

  const fs::path out = args.out.empty() ? fs::path(config.paths.output_dir) : fs::path(args.out);
  fs::create_directories(out);
  write_text(out / "sweep_points.csv", detail.str());
  write_text(out / "sweep.csv", summary.str());
  write_resolved_config(out, config);
  std::cout << summary.str();
  return 0;
}

}  // namespace hifuse::cli
