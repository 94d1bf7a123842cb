#include "hifuse/features.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include <unsupported/Eigen/FFT>

#include "hifuse/error.hpp"

namespace hifuse {

Eigen::Index MelConfig::window_samples() const {
  return static_cast<Eigen::Index>(std::llround(window_s * sample_rate_hz));
}

Eigen::Index MelConfig::hop_samples() const {
  return static_cast<Eigen::Index>(std::llround(hop_s * sample_rate_hz));
}

void validate(const MelConfig& config) {
  require(config.n_mels >= 1, ErrorCode::kInvalidArgument, "n_mels must be >= 1");
  require(config.sample_rate_hz > 0, ErrorCode::kInvalidArgument, "sample_rate_hz must be positive");
  require(config.hop_s > 0.0 && config.hop_s <= config.window_s, ErrorCode::kInvalidArgument,
          "need 0 < hop_s <= window_s");
  require(config.hop_samples() >= 1, ErrorCode::kInvalidArgument, "hop is shorter than one sample");
  require(config.window_samples() >= 2 * config.n_mels, ErrorCode::kInvalidArgument,
          "window of " + std::to_string(config.window_samples()) + " samples is shorter than 2 * n_mels");
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

Eigen::MatrixXd mel_filterbank(const MelConfig& config) {
  validate(config);
  const Eigen::Index n_fft = config.window_samples();
  const Eigen::Index n_bins = config.num_bins();
  const double nyquist = 0.5 * config.sample_rate_hz;
  const double mel_max = hz_to_mel(nyquist);

  std::vector<double> edges(static_cast<std::size_t>(config.n_mels + 2));
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = mel_to_hz(mel_max * static_cast<double>(i) / static_cast<double>(config.n_mels + 1));
  }

  Eigen::MatrixXd bank = Eigen::MatrixXd::Zero(config.n_mels, n_bins);
  for (int m = 0; m < config.n_mels; ++m) {
    const double lo = edges[static_cast<std::size_t>(m)];
    const double center = edges[static_cast<std::size_t>(m + 1)];
    const double hi = edges[static_cast<std::size_t>(m + 2)];
    for (Eigen::Index k = 0; k < n_bins; ++k) {
      const double f = static_cast<double>(k) * config.sample_rate_hz / static_cast<double>(n_fft);
      double w = 0.0;
      if (f > lo && f <= center) {
        w = (f - lo) / (center - lo);
      } else if (f > center && f < hi) {
        w = (hi - f) / (hi - center);
      }
      bank(m, k) = w;
    }
    const double area = bank.row(m).sum();
    if (area > 1.0) bank.row(m) /= area;
  }
  return bank;
}

Eigen::VectorXd hann_window(Eigen::Index length) {
  Eigen::VectorXd w(length);
  for (Eigen::Index n = 0; n < length; ++n) {
    w(n) = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) / static_cast<double>(length));
  }
  return w;
}

Eigen::MatrixXd mel_spectrogram(std::span<const double> signal, const MelConfig& config) {
  validate(config);
  const Eigen::Index win = config.window_samples();
  const Eigen::Index hop = config.hop_samples();
  const auto len = static_cast<Eigen::Index>(signal.size());
  require(len >= win, ErrorCode::kInvalidArgument,
          "signal of " + std::to_string(len) + " samples is shorter than one window (" + std::to_string(win) + ")");

  const Eigen::Index num_frames = (len - win) / hop + 1;
  const Eigen::MatrixXd bank = mel_filterbank(config);
  const Eigen::VectorXd window = hann_window(win);

  Eigen::FFT<double> fft;
  std::vector<double> frame(static_cast<std::size_t>(win));
  std::vector<std::complex<double>> spectrum;
  Eigen::VectorXd power(config.num_bins());
  Eigen::MatrixXd out(num_frames, config.n_mels);

  for (Eigen::Index f = 0; f < num_frames; ++f) {
    const Eigen::Index offset = f * hop;
    for (Eigen::Index n = 0; n < win; ++n) {
      frame[static_cast<std::size_t>(n)] = signal[static_cast<std::size_t>(offset + n)] * window(n);
    }
    fft.fwd(spectrum, frame);
    for (Eigen::Index k = 0; k < power.size(); ++k) power(k) = std::norm(spectrum[static_cast<std::size_t>(k)]);
    out.row(f) = ((bank * power).array() + kMelFloor).log().transpose();
  }
  return out;
}

Eigen::MatrixXd fuse_channels(std::span<const Eigen::MatrixXd> per_channel) {
  require(!per_channel.empty(), ErrorCode::kInvalidArgument, "no channels to fuse");
  const Eigen::Index rows = per_channel.front().rows();
  Eigen::Index cols = 0;
  for (std::size_t c = 0; c < per_channel.size(); ++c) {
    require(per_channel[c].rows() == rows, ErrorCode::kShapeMismatch,
            "channel " + std::to_string(c) + " has " + std::to_string(per_channel[c].rows()) + " frames, channel 0 has " +
                std::to_string(rows));
    cols += per_channel[c].cols();
  }
  Eigen::MatrixXd fused(rows, cols);
  Eigen::Index offset = 0;
  for (const auto& channel : per_channel) {
    fused.middleCols(offset, channel.cols()) = channel;
    offset += channel.cols();
  }
  return fused;
}

Eigen::MatrixXd aggregate_pass(const Eigen::MatrixXd& frames, std::span<const IndexRange> ranges) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(ranges.size()), frames.cols());
  Eigen::Index previous_end = 0;
  for (std::size_t i = 0; i < ranges.size(); ++i) {
    const auto& r = ranges[i];
    const std::string label = "pass range " + std::to_string(i) + " [" + std::to_string(r.begin) + ", " +
                              std::to_string(r.end) + ")";
    require(r.end > r.begin, ErrorCode::kInvalidArgument, label + " is empty");
    require(r.begin >= previous_end, ErrorCode::kInvalidArgument, label + " overlaps or is out of order");
    require(r.end <= frames.rows(), ErrorCode::kInvalidArgument,
            label + " exceeds " + std::to_string(frames.rows()) + " frames");
    out.row(static_cast<Eigen::Index>(i)) =
        frames.middleRows(r.begin, r.end - r.begin).colwise().sum() / static_cast<double>(r.end - r.begin);
    previous_end = r.end;
  }
  return out;
}

}  // namespace hifuse
