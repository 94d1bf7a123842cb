#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "hifuse/features.hpp"
#include "support/errors.hpp"
#include "support/oracles.hpp"

namespace hifuse {
namespace {

using testing::error_code_of;

MelConfig small_config() {
  MelConfig cfg;
  cfg.n_mels = 16;
  cfg.window_s = 0.064;
  cfg.hop_s = 0.032;
  cfg.sample_rate_hz = 1000;  // 64-sample window, 32-sample hop
  return cfg;
}

std::vector<double> sine(double hz, int rate, int n) {
  std::vector<double> s(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) s[static_cast<std::size_t>(i)] = std::sin(2.0 * std::numbers::pi * hz * i / rate);
  return s;
}

TEST(MelConfig, DefaultsMatchSixtyFourBandTenthSecondFrames) {
  const MelConfig cfg;
  EXPECT_EQ(cfg.n_mels, 64);
  EXPECT_DOUBLE_EQ(cfg.window_s, 0.1);
  EXPECT_DOUBLE_EQ(cfg.hop_s, 0.1);
}

TEST(MelConfig, Validation) {
  MelConfig cfg = small_config();
  cfg.hop_s = 0.1;
  EXPECT_EQ(error_code_of([&] { validate(cfg); }), ErrorCode::kInvalidArgument);
  cfg = small_config();
  cfg.n_mels = 40;  // window of 64 samples < 80
  EXPECT_EQ(error_code_of([&] { validate(cfg); }), ErrorCode::kInvalidArgument);
  cfg = small_config();
  cfg.sample_rate_hz = 0;
  EXPECT_EQ(error_code_of([&] { validate(cfg); }), ErrorCode::kInvalidArgument);
}

TEST(MelScale, RoundTrips) {
  for (double hz : {0.0, 100.0, 700.0, 4000.0, 22050.0}) EXPECT_NEAR(mel_to_hz(hz_to_mel(hz)), hz, 1e-9 * (1 + hz));
  EXPECT_NEAR(hz_to_mel(700.0), 2595.0 * std::log10(2.0), 1e-12);
}

TEST(MelFilterbank, ColumnsNeverAmplify) {
  for (int rate : {1000, 8000, 44100}) {
    MelConfig cfg = small_config();
    cfg.sample_rate_hz = rate;
    cfg.n_mels = 16;
    const Eigen::MatrixXd bank = mel_filterbank(cfg);
    EXPECT_GE(bank.minCoeff(), 0.0);
    EXPECT_LE(bank.colwise().sum().maxCoeff(), 1.0 + 1e-12);
  }
}

TEST(MelSpectrogram, FrameCount) {
  const MelConfig cfg = small_config();
  EXPECT_EQ(mel_spectrogram(std::vector<double>(64, 0.0), cfg).rows(), 1);
  EXPECT_EQ(mel_spectrogram(std::vector<double>(64 + 32 * 5 + 31, 0.0), cfg).rows(), 6);
  MelConfig equal = cfg;
  equal.hop_s = equal.window_s;
  EXPECT_EQ(mel_spectrogram(std::vector<double>(64, 1.0), equal).rows(), 1);
}

TEST(MelSpectrogram, ZeroSignalHitsFloor) {
  const Eigen::MatrixXd m = mel_spectrogram(std::vector<double>(200, 0.0), small_config());
  EXPECT_TRUE((m.array() == std::log(kMelFloor)).all());
}

TEST(MelSpectrogram, ShortSignalIsAnError) {
  EXPECT_EQ(error_code_of([] { mel_spectrogram(std::vector<double>(63, 0.0), small_config()); }),
            ErrorCode::kInvalidArgument);
}

TEST(MelSpectrogram, MatchesNaiveDft) {
  const MelConfig cfg = small_config();
  std::vector<double> signal(64 + 32 * 3);
  for (std::size_t i = 0; i < signal.size(); ++i) signal[i] = std::sin(0.37 * i) + 0.25 * std::cos(1.9 * i * i);
  const Eigen::MatrixXd got = mel_spectrogram(signal, cfg);
  const Eigen::MatrixXd bank = mel_filterbank(cfg);
  const Eigen::VectorXd window = oracle::periodic_hann(64);
  for (Eigen::Index f = 0; f < got.rows(); ++f) {
    const Eigen::VectorXd frame =
        Eigen::Map<const Eigen::VectorXd>(signal.data() + f * 32, 64).cwiseProduct(window);
    const Eigen::VectorXd expected = ((bank * oracle::dft_power(frame)).array() + kMelFloor).log();
    EXPECT_LE((got.row(f).transpose() - expected).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(MelSpectrogram, SineAtBandCenterPeaksInThatBand) {
  MelConfig cfg;
  cfg.n_mels = 16;
  cfg.window_s = 0.1;
  cfg.hop_s = 0.05;
  cfg.sample_rate_hz = 8000;
  const double mel_max = hz_to_mel(4000.0);
  for (int band : {2, 7, 12}) {
    const double center = mel_to_hz(mel_max * (band + 1) / (cfg.n_mels + 1));
    const Eigen::MatrixXd m = mel_spectrogram(sine(center, cfg.sample_rate_hz, 4000), cfg);
    for (Eigen::Index f = 0; f < m.rows(); ++f) {
      Eigen::Index arg = 0;
      m.row(f).maxCoeff(&arg);
      EXPECT_EQ(arg, band) << "frame " << f;
    }
  }
}

TEST(MelSpectrogram, FilterbankEnergyBoundedBySpectralEnergy) {
  const MelConfig cfg = small_config();
  const std::vector<double> signal = sine(123.0, 1000, 64);
  const Eigen::VectorXd frame = Eigen::Map<const Eigen::VectorXd>(signal.data(), 64).cwiseProduct(hann_window(64));
  const Eigen::VectorXd power = oracle::dft_power(frame);
  const Eigen::MatrixXd m = mel_spectrogram(signal, cfg);
  const double mel_energy = (m.row(0).array().exp() - kMelFloor).sum();
  EXPECT_LE(mel_energy, power.sum() + 1e-9);
  EXPECT_TRUE(m.allFinite());
  EXPECT_GE(m.minCoeff(), std::log(kMelFloor));
}

TEST(FuseChannels, ConcatenatesColumns) {
  std::vector<Eigen::MatrixXd> channels(7, Eigen::MatrixXd::Ones(5, 64));
  EXPECT_EQ(fuse_channels(channels).cols(), 448);
  const std::vector<Eigen::MatrixXd> one{Eigen::MatrixXd::Random(4, 3)};
  EXPECT_EQ(fuse_channels(one), one.front());
}

TEST(FuseChannels, RejectsFrameMismatch) {
  const std::vector<Eigen::MatrixXd> channels{Eigen::MatrixXd::Zero(10, 2), Eigen::MatrixXd::Zero(11, 2)};
  EXPECT_EQ(error_code_of([&] { fuse_channels(channels); }), ErrorCode::kShapeMismatch);
}

TEST(AggregatePass, Means) {
  const Eigen::MatrixXd constant = Eigen::MatrixXd::Constant(6, 3, 2.5);
  const std::vector<IndexRange> two{{0, 3}, {3, 6}};
  EXPECT_TRUE(aggregate_pass(constant, two).isApproxToConstant(2.5));

  const Eigen::MatrixXd frames = Eigen::MatrixXd::Random(5, 2);
  const std::vector<IndexRange> all{{0, 5}};
  EXPECT_LE((aggregate_pass(frames, all).row(0) - frames.colwise().mean()).cwiseAbs().maxCoeff(), 1e-15);
  const std::vector<IndexRange> single{{2, 3}};
  EXPECT_EQ(aggregate_pass(frames, single).row(0), frames.row(2));
}

TEST(AggregatePass, PassCountMatchesRanges) {
  const Eigen::MatrixXd frames = Eigen::MatrixXd::Zero(315 * 2, 1);
  std::vector<IndexRange> ranges;
  for (Eigen::Index i = 0; i < 315; ++i) ranges.push_back({2 * i, 2 * i + 2});
  EXPECT_EQ(aggregate_pass(frames, ranges).rows(), 315);
}

TEST(AggregatePass, RejectsBadRanges) {
  const Eigen::MatrixXd frames = Eigen::MatrixXd::Zero(4, 1);
  const std::vector<IndexRange> empty{{1, 1}};
  const std::vector<IndexRange> overlap{{0, 2}, {1, 3}};
  const std::vector<IndexRange> outside{{2, 5}};
  EXPECT_EQ(error_code_of([&] { aggregate_pass(frames, empty); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(error_code_of([&] { aggregate_pass(frames, overlap); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(error_code_of([&] { aggregate_pass(frames, outside); }), ErrorCode::kInvalidArgument);
}

}  // namespace
}  // namespace hifuse
