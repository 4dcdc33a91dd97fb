#include "noisecal/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "noisecal/error.hpp"

namespace noisecal::io {

namespace {

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.remove_suffix(1);
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  return s;
}

template <typename T>
T parse_number(std::string_view field, std::size_t line_no) {
  field = trim(field);
  T value{};
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw IoError("line " + std::to_string(line_no) + ": cannot parse '" + std::string(field) + "'");
  }
  return value;
}

std::string header_features(Eigen::Index d) {
  std::string h;
  for (Eigen::Index j = 0; j < d; ++j) {
    if (j) h += ',';
    h += 'f' + std::to_string(j);
  }
  return h;
}

bool looks_like_header(std::string_view line) { return !line.empty() && line.front() == 'f'; }

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

}  // namespace

std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_dataset_csv(std::ostream& out, const Matrix& features, std::span<const int> clean,
                       std::span<const int> noisy) {
  if (static_cast<std::size_t>(features.rows()) != clean.size() || clean.size() != noisy.size())
    throw IoError("dataset CSV: row count mismatch");
  out << header_features(features.cols()) << (features.cols() ? "," : "") << "clean,noisy\n";
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    for (Eigen::Index j = 0; j < features.cols(); ++j) out << format_double(features(i, j)) << ',';
    out << clean[static_cast<std::size_t>(i)] << ',' << noisy[static_cast<std::size_t>(i)] << '\n';
  }
}

DatasetTable read_dataset_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw IoError("dataset CSV: missing header");
  const auto header = split(trim(line));
  if (header.size() < 3 || trim(header[header.size() - 2]) != "clean" || trim(header.back()) != "noisy")
    throw IoError("dataset CSV: header must be f0,...,f{d-1},clean,noisy");
  const std::size_t d = header.size() - 2;

  std::vector<double> values;
  DatasetTable t;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view row = trim(line);
    if (row.empty()) continue;
    const auto fields = split(row);
    if (fields.size() != d + 2) throw IoError("line " + std::to_string(line_no) + ": expected " + std::to_string(d + 2) + " fields");
    for (std::size_t j = 0; j < d; ++j) values.push_back(parse_number<double>(fields[j], line_no));
    t.clean.push_back(parse_number<int>(fields[d], line_no));
    t.noisy.push_back(parse_number<int>(fields[d + 1], line_no));
  }
  t.features = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      values.data(), static_cast<Eigen::Index>(t.clean.size()), static_cast<Eigen::Index>(d));
  return t;
}

void write_points_csv(std::ostream& out, const Matrix& points) {
  out << header_features(points.cols()) << '\n';
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    for (Eigen::Index j = 0; j < points.cols(); ++j) {
      if (j) out << ',';
      out << format_double(points(i, j));
    }
    out << '\n';
  }
}

Matrix read_points_csv(std::istream& in) {
  std::string line;
  std::vector<double> values;
  std::size_t d = 0;
  std::size_t rows = 0;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view row = trim(line);
    if (row.empty()) continue;
    if (line_no == 1 && looks_like_header(row)) {
      d = split(row).size();
      continue;
    }
    const auto fields = split(row);
    if (d == 0) d = fields.size();
    if (fields.size() != d) throw IoError("line " + std::to_string(line_no) + ": expected " + std::to_string(d) + " fields");
    for (auto f : fields) values.push_back(parse_number<double>(f, line_no));
    ++rows;
  }
  return Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      values.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(d));
}

void write_labeled_csv(std::ostream& out, const LabeledSet& data) {
  out << header_features(data.dim()) << (data.dim() ? "," : "") << "label\n";
  for (Eigen::Index i = 0; i < data.features.rows(); ++i) {
    for (Eigen::Index j = 0; j < data.features.cols(); ++j) out << format_double(data.features(i, j)) << ',';
    out << data.labels[static_cast<std::size_t>(i)] << '\n';
  }
}

void write_dataset_csv(const std::filesystem::path& path, const Matrix& features, std::span<const int> clean,
                       std::span<const int> noisy) {
  auto out = open_out(path);
  write_dataset_csv(out, features, clean, noisy);
  finish(out, path);
}

DatasetTable read_dataset_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_dataset_csv(in);
}

void write_points_csv(const std::filesystem::path& path, const Matrix& points) {
  auto out = open_out(path);
  write_points_csv(out, points);
  finish(out, path);
}

Matrix read_points_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_points_csv(in);
}

void write_labeled_csv(const std::filesystem::path& path, const LabeledSet& data) {
  auto out = open_out(path);
  write_labeled_csv(out, data);
  finish(out, path);
}

std::string read_text(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
  finish(out, path);
}

}  // namespace noisecal::io
