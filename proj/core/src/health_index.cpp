#include "hifuse/health_index.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include "hifuse/dataset.hpp"
#include "hifuse/error.hpp"

namespace hifuse {
namespace {

// Numeric CSV with a fixed header. Column 0 goes to `time`, the rest to the
// returned matrix.
Eigen::MatrixXd read_columns(const std::filesystem::path& path, const std::string& expected_header,
                             std::vector<double>& time) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path.string());
  std::string header;
  if (!std::getline(in, header)) fail(ErrorCode::kEmptyFile, path.string() + " is empty");
  if (!header.empty() && header.back() == '\r') header.pop_back();
  if (header != expected_header) {
    fail(ErrorCode::kMalformedHeader, path.string() + ": expected header '" + expected_header + "'");
  }
  const auto columns = static_cast<Eigen::Index>(std::count(expected_header.begin(), expected_header.end(), ','));
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> values;
    std::size_t start = 0;
    while (true) {
      const auto pos = line.find(',', start);
      const std::string cell = line.substr(start, pos == std::string::npos ? std::string::npos : pos - start);
      try {
        std::size_t consumed = 0;
        values.push_back(std::stod(cell, &consumed));
        if (consumed != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        fail(ErrorCode::kMalformedRow, path.string() + ":" + std::to_string(line_no) + ": cannot parse '" + cell + "'");
      }
      if (pos == std::string::npos) break;
      start = pos + 1;
    }
    if (static_cast<Eigen::Index>(values.size()) != columns + 1) {
      fail(ErrorCode::kMalformedRow, path.string() + ":" + std::to_string(line_no) + ": wrong column count");
    }
    rows.push_back(std::move(values));
  }
  if (rows.empty()) fail(ErrorCode::kEmptyFile, path.string() + " has no rows");
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), columns);
  time.clear();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    time.push_back(rows[r][0]);
    for (Eigen::Index c = 0; c < columns; ++c) out(static_cast<Eigen::Index>(r), c) = rows[r][static_cast<std::size_t>(c + 1)];
  }
  return out;
}

}  // namespace

void write_hi_csv(const std::filesystem::path& path, const HealthIndex& hi) {
  require(hi.raw.size() == hi.value.size() && static_cast<Eigen::Index>(hi.time.size()) == hi.value.size(),
          ErrorCode::kShapeMismatch, "health index columns differ in length");
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path.string());
  out << "t,h_raw,z_hi\n";
  for (Eigen::Index t = 0; t < hi.value.size(); ++t) {
    out << format_double(hi.time[static_cast<std::size_t>(t)]) << ',' << format_double(hi.raw(t)) << ','
        << format_double(hi.value(t)) << '\n';
  }
  if (!out) fail(ErrorCode::kIo, "write failed for " + path.string());
}

HealthIndex read_hi_csv(const std::filesystem::path& path) {
  HealthIndex hi;
  const Eigen::MatrixXd cols = read_columns(path, "t,h_raw,z_hi", hi.time);
  require(cols.allFinite(), ErrorCode::kNonFiniteValue, path.string() + " contains non-finite values");
  hi.trajectory_id = path.stem().string();
  if (hi.trajectory_id.ends_with(kHiSuffix)) hi.trajectory_id.resize(hi.trajectory_id.size() - kHiSuffix.size());
  hi.raw = cols.col(0);
  hi.value = cols.col(1);
  return hi;
}

void write_truth_csv(const std::filesystem::path& path, const std::vector<double>& time, const Eigen::VectorXd& truth) {
  require(static_cast<Eigen::Index>(time.size()) == truth.size(), ErrorCode::kShapeMismatch,
          "truth and time differ in length");
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path.string());
  out << "t,hi\n";
  for (Eigen::Index t = 0; t < truth.size(); ++t) {
    out << format_double(time[static_cast<std::size_t>(t)]) << ',' << format_double(truth(t)) << '\n';
  }
  if (!out) fail(ErrorCode::kIo, "write failed for " + path.string());
}

Eigen::VectorXd read_truth_csv(const std::filesystem::path& path) {
  std::vector<double> time;
  const Eigen::MatrixXd cols = read_columns(path, "t,hi", time);
  require(cols.allFinite(), ErrorCode::kNonFiniteValue, path.string() + " contains non-finite values");
  return cols.col(0);
}

}  // namespace hifuse
