#include <exception>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "hifuse/error.hpp"

namespace {

using hifuse::cli::ConfigSource;

// Flags that overwrite a config key record themselves into the JSON patch so
// the resolved config written next to every output reflects them.
template <typename T>
void patch_option(CLI::App* app, const std::string& flag, ConfigSource& source, const char* section, const char* key,
                  const std::string& help) {
  app->add_option_function<T>(
      flag, [&source, section, key](const T& value) { source.patch[section][key] = value; }, help);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hifuse: health indices from run-to-failure condition-monitoring data"};
  app.require_subcommand(1);
  app.fallthrough();

  ConfigSource source;
  app.add_option("--config", source.path, "JSON run config (missing keys keep their defaults)");
  app.add_option_function<std::uint64_t>(
      "--seed", [&source](const std::uint64_t& seed) { source.patch["seed"] = seed; },
      "seed for training and simulation");

  hifuse::cli::SimulateArgs simulate;
  auto* sim = app.add_subcommand("simulate", "write a synthetic fleet (feature CSVs plus *_truth.csv)");
  sim->add_option("--out", simulate.out, "output directory (default: paths.data_dir)");
  patch_option<int>(sim, "--n", source, "synth", "n_trajectories", "number of trajectories");
  patch_option<int>(sim, "--length", source, "synth", "length", "nominal trajectory length");
  patch_option<double>(sim, "--noise", source, "synth", "noise_sigma", "noise standard deviation");

  hifuse::cli::ExtractArgs extract;
  auto* ext = app.add_subcommand("extract", "raw signals -> per-pass mel-spectrogram feature CSV");
  ext->add_option("--channels", extract.channels, "raw-signal files, one per channel")->required();
  ext->add_option("--passes", extract.passes, "CSV with header begin,end of frame ranges per pass");
  ext->add_option("--frames-per-pass", extract.frames_per_pass, "consecutive frames averaged per pass")
      ->check(CLI::PositiveNumber);
  ext->add_option("--out", extract.out, "feature CSV to write")->required();

  hifuse::cli::TrainArgs training;
  auto* trn = app.add_subcommand("train", "train the (diversity-regularized) DeepSAD embedding");
  trn->add_option("--train", training.train, "training feature CSVs")->required();
  trn->add_option("--test", training.test, "test feature CSV (its healthy prefix joins training)")->required();
  trn->add_option("--model", training.model, "model file to write (default: paths.model)");
  patch_option<double>(trn, "--lambda-div", source, "train", "lambda_div", "diversity weight (0 = plain DeepSAD)");
  patch_option<double>(trn, "--mu", source, "train", "mu", "weight of unlabeled samples");
  patch_option<double>(trn, "--nu", source, "train", "nu", "weight decay");
  patch_option<int>(trn, "--k", source, "network", "k", "embedding dimension");
  patch_option<int>(trn, "--epochs", source, "train", "epochs", "training epochs");

  hifuse::cli::FuseArgs fusing;
  auto* fus = app.add_subcommand("fuse", "build HIs from a trained model");
  fus->add_option("--model", fusing.model, "model file (default: paths.model)");
  fus->add_option("--train", fusing.train, "training feature CSVs")->required();
  fus->add_option("--test", fusing.test, "test feature CSV")->required();
  fus->add_option("--method", fusing.method, "deepsad|ads|rads|2ds|a2ds|ra2ds");
  fus->add_flag("--realtime", fusing.realtime, "refit every tau steps (turns ads/a2ds into rads/ra2ds)");
  patch_option<int>(fus, "--tau", source, "fusion", "tau", "real-time refit period");
  patch_option<double>(fus, "--beta", source, "fusion", "beta", "ridge regularization");
  fus->add_flag_callback("--no-isotonic", [&source] { source.patch["fusion"]["isotonic"] = false; },
                         "drop the monotonicity constraint");
  fus->add_option("--out", fusing.out, "output directory (default: paths.output_dir)");

  hifuse::cli::EvaluateArgs evaluation;
  auto* eva = app.add_subcommand("evaluate", "HI quality metrics");
  eva->add_option("--hi", evaluation.hi, "HI CSVs (t,h_raw,z_hi)")->required();
  eva->add_option("--truth", evaluation.truth, "ground-truth CSVs (t,hi), one per HI");
  eva->add_option("--onset", evaluation.onsets, "fault-onset row per HI (enables delay and RSSE)");
  eva->add_option_function<std::vector<long>>(
         "--align-window", [&source](const std::vector<long>& w) { source.patch["metrics"]["align_window"] = w; },
         "alignment rows BEGIN END (half-open)")
      ->expected(2);
  patch_option<double>(eva, "--delay-threshold", source, "metrics", "delay_threshold", "alarm level");
  eva->add_option("--out", evaluation.out, "output directory (default: paths.output_dir)");

  hifuse::cli::SweepArgs sweeping;
  auto* swp = app.add_subcommand("sweep", "grid over beta, K and lambda on a synthetic fleet");
  swp->add_option("--beta", sweeping.betas, "ridge values (default: fusion.beta)");
  swp->add_option("--k", sweeping.ks, "embedding dimensions (default: network.k)");
  swp->add_option("--lambda", sweeping.lambdas, "diversity weights (default: train.lambda_div)");
  swp->add_flag_callback("--no-isotonic", [&source] { source.patch["fusion"]["isotonic"] = false; },
                         "ablation: drop the monotonicity constraint");
  swp->add_flag("--realtime", sweeping.realtime, "use the real-time variants");
  swp->add_option("--seeds", sweeping.seeds, "repetitions per grid point (seed, seed+1, ...)")
      ->check(CLI::PositiveNumber);
  swp->add_option("--jobs", sweeping.jobs, "parallel workers")->check(CLI::PositiveNumber);
  swp->add_option("--out", sweeping.out, "output directory (default: paths.output_dir)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*sim) return hifuse::cli::run_simulate(source, simulate);
    if (*ext) return hifuse::cli::run_extract(source, extract);
    if (*trn) return hifuse::cli::run_train(source, training);
    if (*fus) return hifuse::cli::run_fuse(source, fusing);
    if (*eva) return hifuse::cli::run_evaluate(source, evaluation);
    if (*swp) return hifuse::cli::run_sweep(source, sweeping);
  } catch (const hifuse::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return hifuse::exit_code(e.code());
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
