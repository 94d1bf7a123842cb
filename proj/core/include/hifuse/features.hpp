#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace hifuse {

inline constexpr double kMelFloor = 1e-10;

struct MelConfig {
  int n_mels = 64;
  double window_s = 0.1;
  double hop_s = 0.1;
  int sample_rate_hz = 0;

  Eigen::Index window_samples() const;
  Eigen::Index hop_samples() const;
  Eigen::Index num_bins() const { return window_samples() / 2 + 1; }
};

// n_mels >= 1, 0 < hop <= window, rate > 0, window >= 2 * n_mels samples.
void validate(const MelConfig& config);

double hz_to_mel(double hz);
double mel_to_hz(double mel);

// Triangular filters on the mel scale spanning 0 Hz to Nyquist, one row per
// band and one column per rfft bin. Each filter is divided by its area in bins
// when that area exceeds one, so no filter amplifies and every bin's column
// sums to at most 1.
Eigen::MatrixXd mel_filterbank(const MelConfig& config);

// Periodic Hann window of the given length.
Eigen::VectorXd hann_window(Eigen::Index length);

// frames x n_mels matrix of log(kMelFloor + filterbank power).
Eigen::MatrixXd mel_spectrogram(std::span<const double> signal, const MelConfig& config);

// Concatenates per-channel spectrograms along the feature axis.
Eigen::MatrixXd fuse_channels(std::span<const Eigen::MatrixXd> per_channel);

// Half-open range of frame indices [begin, end).
struct IndexRange {
  Eigen::Index begin = 0;
  Eigen::Index end = 0;
};

// One output row per range holding the mean of the frames in it.
Eigen::MatrixXd aggregate_pass(const Eigen::MatrixXd& frames, std::span<const IndexRange> ranges);

}  // namespace hifuse
