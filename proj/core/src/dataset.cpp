#include "hifuse/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "hifuse/error.hpp"

namespace hifuse {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

bool is_non_finite_token(std::string_view token) {
  std::string lower;
  for (char c : token) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (!lower.empty() && (lower.front() == '+' || lower.front() == '-')) lower.erase(0, 1);
  return lower == "nan" || lower == "inf" || lower == "infinity";
}

double parse_value(std::string_view token, const std::string& where) {
  double value = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || token.empty()) {
    if (is_non_finite_token(token)) fail(ErrorCode::kNonFiniteValue, where + ": value '" + std::string(token) + "'");
    fail(ErrorCode::kMalformedRow, where + ": cannot parse '" + std::string(token) + "'");
  }
  if (!std::isfinite(value)) fail(ErrorCode::kNonFiniteValue, where + ": value '" + std::string(token) + "'");
  return value;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path.string());
  return in;
}

// Reads non-blank lines. Blank lines are skipped so trailing newlines do not matter.
std::vector<std::string> read_lines(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    lines.push_back(line);
  }
  if (lines.empty()) fail(ErrorCode::kEmptyFile, path.string() + " is empty");
  return lines;
}

Trajectory load_feature_csv(const std::filesystem::path& path) {
  const auto lines = read_lines(path);
  const auto header = split_commas(lines.front());
  if (header.size() < 2 || header[0] != "t") {
    fail(ErrorCode::kMalformedHeader, path.string() + ": header must be t,f0,...,f{F-1}");
  }
  for (std::size_t j = 1; j < header.size(); ++j) {
    if (header[j] != "f" + std::to_string(j - 1)) {
      fail(ErrorCode::kMalformedHeader,
           path.string() + ": column " + std::to_string(j) + " is '" + std::string(header[j]) +
               "', expected 'f" + std::to_string(j - 1) + "'");
    }
  }
  const auto num_features = static_cast<Eigen::Index>(header.size() - 1);
  const auto num_rows = static_cast<Eigen::Index>(lines.size() - 1);
  if (num_rows == 0) fail(ErrorCode::kEmptyFile, path.string() + " has a header but no rows");

  Eigen::MatrixXd features(num_rows, num_features);
  std::vector<double> times(static_cast<std::size_t>(num_rows));
  for (Eigen::Index r = 0; r < num_rows; ++r) {
    const std::string where = path.string() + ":" + std::to_string(r + 2);
    const auto cells = split_commas(lines[static_cast<std::size_t>(r + 1)]);
    if (static_cast<Eigen::Index>(cells.size()) != num_features + 1) {
      fail(ErrorCode::kMalformedRow, where + ": expected " + std::to_string(num_features + 1) + " columns, got " +
                                         std::to_string(cells.size()));
    }
    times[static_cast<std::size_t>(r)] = parse_value(cells[0], where);
    for (Eigen::Index j = 0; j < num_features; ++j) {
      features(r, j) = parse_value(cells[static_cast<std::size_t>(j + 1)], where);
    }
    if (r > 0 && !(times[static_cast<std::size_t>(r)] > times[static_cast<std::size_t>(r - 1)])) {
      fail(ErrorCode::kNonMonotoneTime, where + ": t must be strictly increasing");
    }
  }
  return make_trajectory(path.stem().string(), std::move(features), std::move(times));
}

}  // namespace

double Trajectory::time_at(Eigen::Index t) const {
  return timestamps.empty() ? static_cast<double>(t) : timestamps[static_cast<std::size_t>(t)];
}

Trajectory make_trajectory(std::string id, Eigen::MatrixXd features, std::vector<double> timestamps) {
  require(features.rows() >= 2, ErrorCode::kInvalidArgument,
          "trajectory '" + id + "' needs at least 2 rows, has " + std::to_string(features.rows()));
  require(features.cols() >= 1, ErrorCode::kInvalidArgument, "trajectory '" + id + "' has no features");
  require(features.allFinite(), ErrorCode::kNonFiniteValue, "trajectory '" + id + "' has non-finite features");
  if (!timestamps.empty()) {
    require(static_cast<Eigen::Index>(timestamps.size()) == features.rows(), ErrorCode::kShapeMismatch,
            "trajectory '" + id + "': timestamp count differs from row count");
    for (std::size_t i = 0; i < timestamps.size(); ++i) {
      require(std::isfinite(timestamps[i]), ErrorCode::kNonFiniteValue, "trajectory '" + id + "': timestamp");
      if (i > 0) {
        require(timestamps[i] > timestamps[i - 1], ErrorCode::kNonMonotoneTime,
                "trajectory '" + id + "': timestamps must be strictly increasing");
      }
    }
  }
  return Trajectory{std::move(id), std::move(features), std::move(timestamps)};
}

std::optional<FileFormat> parse_file_format(std::string_view name) {
  if (name == "feature-csv") return FileFormat::kFeatureCsv;
  if (name == "raw-signal") return FileFormat::kRawSignal;
  return std::nullopt;
}

RawSignal load_raw_signal(const std::filesystem::path& path) {
  const auto lines = read_lines(path);
  const std::string_view header = trim(lines.front());
  constexpr std::string_view kKey = "sample_rate_hz=";
  if (header.substr(0, kKey.size()) != kKey) {
    fail(ErrorCode::kMalformedHeader, path.string() + ": first line must be sample_rate_hz=<int>");
  }
  RawSignal signal;
  const auto digits = header.substr(kKey.size());
  const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), signal.sample_rate_hz);
  if (ec != std::errc() || ptr != digits.data() + digits.size() || signal.sample_rate_hz <= 0) {
    fail(ErrorCode::kMalformedHeader, path.string() + ": invalid sample rate '" + std::string(digits) + "'");
  }
  if (lines.size() == 1) fail(ErrorCode::kEmptyFile, path.string() + " has a header but no samples");
  signal.samples.reserve(lines.size() - 1);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    signal.samples.push_back(parse_value(trim(lines[i]), path.string() + ":" + std::to_string(i + 1)));
  }
  return signal;
}

Trajectory load_trajectory(const std::filesystem::path& path, FileFormat format) {
  if (format == FileFormat::kFeatureCsv) return load_feature_csv(path);

  auto signal = load_raw_signal(path);
  const auto n = static_cast<Eigen::Index>(signal.samples.size());
  Eigen::MatrixXd features = Eigen::Map<const Eigen::VectorXd>(signal.samples.data(), n);
  std::vector<double> times(signal.samples.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    times[i] = static_cast<double>(i) / static_cast<double>(signal.sample_rate_hz);
  }
  return make_trajectory(path.stem().string(), std::move(features), std::move(times));
}

std::string format_double(double value) {
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, ptr);
}

void write_feature_csv(const std::filesystem::path& path, const Trajectory& trajectory) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path.string());
  out << "t";
  for (Eigen::Index j = 0; j < trajectory.num_features(); ++j) out << ",f" << j;
  out << '\n';
  for (Eigen::Index t = 0; t < trajectory.length(); ++t) {
    out << format_double(trajectory.time_at(t));
    for (Eigen::Index j = 0; j < trajectory.num_features(); ++j) out << ',' << format_double(trajectory.features(t, j));
    out << '\n';
  }
  if (!out) fail(ErrorCode::kIo, "write failed for " + path.string());
}

void validate(const LabelSpec& spec, Eigen::Index length) {
  const std::string prefix = "label spec (T=" + std::to_string(length) + ", T_d=" + std::to_string(spec.t_healthy);
  require(spec.t_healthy > 0, ErrorCode::kInvalidArgument, prefix + "): T_d must be positive");
  if (spec.t_faulty) {
    const std::string full = prefix + ", T_f=" + std::to_string(*spec.t_faulty) + ")";
    require(spec.t_healthy < *spec.t_faulty, ErrorCode::kInvalidArgument, full + ": need T_d < T_f");
    require(*spec.t_faulty <= length, ErrorCode::kInvalidArgument, full + ": need T_f <= T");
  } else {
    require(spec.t_healthy <= length, ErrorCode::kInvalidArgument, prefix + "): need T_d <= T");
  }
}

std::vector<Label> assign_labels(Eigen::Index length, const LabelSpec& spec) {
  validate(spec, length);
  std::vector<Label> labels(static_cast<std::size_t>(length), Label::kUnlabeled);
  for (Eigen::Index i = 0; i < length; ++i) {
    const Eigen::Index t = i + 1;
    if (t <= spec.t_healthy) {
      labels[static_cast<std::size_t>(i)] = Label::kHealthy;
    } else if (spec.t_faulty && t >= *spec.t_faulty) {
      labels[static_cast<std::size_t>(i)] = Label::kAbnormal;
    }
  }
  return labels;
}

LabelCounts count_labels(std::span<const Label> labels) {
  LabelCounts counts;
  for (Label l : labels) {
    switch (l) {
      case Label::kHealthy: ++counts.healthy; break;
      case Label::kAbnormal: ++counts.abnormal; break;
      case Label::kUnlabeled: ++counts.unlabeled; break;
    }
  }
  return counts;
}

void validate(const DatasetSplit& split) {
  require(!split.train.empty(), ErrorCode::kInvalidArgument, "dataset split has no training trajectories");
  const auto num_features = split.test.trajectory.num_features();
  for (const auto& entry : split.train) {
    require(entry.labels.t_faulty.has_value(), ErrorCode::kInvalidArgument,
            "training trajectory '" + entry.trajectory.id + "' needs a faulty threshold");
    validate(entry.labels, entry.trajectory.length());
    require(entry.trajectory.num_features() == num_features, ErrorCode::kShapeMismatch,
            "training trajectory '" + entry.trajectory.id + "' has a different feature count than the test trajectory");
  }
  require(!split.test.labels.t_faulty.has_value(), ErrorCode::kInvalidArgument,
          "test trajectory '" + split.test.trajectory.id + "' must not declare a faulty threshold");
  validate(split.test.labels, split.test.trajectory.length());
}

Eigen::MatrixXd ScalerParams::transform(const Eigen::MatrixXd& features) const {
  require(features.cols() == mean.size(), ErrorCode::kShapeMismatch,
          "scaler fitted on " + std::to_string(mean.size()) + " features, got " + std::to_string(features.cols()));
  Eigen::MatrixXd out(features.rows(), features.cols());
  for (Eigen::Index j = 0; j < features.cols(); ++j) {
    if (scale(j) > 0.0) {
      out.col(j) = (features.col(j).array() - mean(j)) / scale(j);
    } else {
      out.col(j).setZero();
    }
  }
  return out;
}

Eigen::MatrixXd ScalerParams::inverse_transform(const Eigen::MatrixXd& standardized) const {
  require(standardized.cols() == mean.size(), ErrorCode::kShapeMismatch, "scaler feature count mismatch");
  Eigen::MatrixXd out(standardized.rows(), standardized.cols());
  for (Eigen::Index j = 0; j < standardized.cols(); ++j) {
    out.col(j) = standardized.col(j).array() * scale(j) + mean(j);
  }
  return out;
}

Trajectory ScalerParams::transform(const Trajectory& trajectory) const {
  return Trajectory{trajectory.id, transform(trajectory.features), trajectory.timestamps};
}

ScalerParams fit_scaler(std::span<const Eigen::MatrixXd> blocks) {
  require(!blocks.empty(), ErrorCode::kInvalidArgument, "cannot fit a scaler on zero blocks");
  const Eigen::Index num_features = blocks.front().cols();
  Eigen::Index count = 0;
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(num_features);
  for (const auto& block : blocks) {
    require(block.cols() == num_features, ErrorCode::kShapeMismatch, "scaler blocks differ in feature count");
    sum += block.colwise().sum().transpose();
    count += block.rows();
  }
  require(count > 0, ErrorCode::kInvalidArgument, "cannot fit a scaler on zero rows");
  ScalerParams params;
  params.mean = sum / static_cast<double>(count);
  Eigen::VectorXd sq = Eigen::VectorXd::Zero(num_features);
  for (const auto& block : blocks) {
    sq += (block.rowwise() - params.mean.transpose()).array().square().matrix().colwise().sum().transpose();
  }
  params.scale = (sq / static_cast<double>(count)).array().sqrt();
  // Treat variance at round-off level relative to the mean as zero.
  for (Eigen::Index j = 0; j < num_features; ++j) {
    if (params.scale(j) <= 1e-12 * std::max(1.0, std::abs(params.mean(j)))) params.scale(j) = 0.0;
  }
  return params;
}

std::pair<std::vector<Trajectory>, ScalerParams> standardize(std::span<const Trajectory> trajectories) {
  std::vector<Eigen::MatrixXd> blocks;
  blocks.reserve(trajectories.size());
  for (const auto& t : trajectories) blocks.push_back(t.features);
  auto params = fit_scaler(blocks);
  std::vector<Trajectory> out;
  out.reserve(trajectories.size());
  for (const auto& t : trajectories) out.push_back(params.transform(t));
  return {std::move(out), std::move(params)};
}

ScalerParams fit_scaler(const DatasetSplit& split) {
  std::vector<Eigen::MatrixXd> blocks;
  for (const auto& entry : split.train) blocks.push_back(entry.trajectory.features);
  blocks.push_back(split.test.trajectory.features.topRows(split.test.labels.t_healthy));
  return fit_scaler(blocks);
}

}  // namespace hifuse
