#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "noisecal/model.hpp"
#include "noisecal/numkit.hpp"

/// CSV formats. Reals are written with 17 significant digits so that a
/// write/read cycle reproduces every double bit for bit.
///
///   dataset:  f0,...,f{d-1},clean,noisy
///   points:   f0,...,f{d-1}            (header optional on read)
///   labeled:  f0,...,f{d-1},label      (calibrated samples)
namespace noisecal::io {

using numkit::Matrix;

struct DatasetTable {
  Matrix features;
  std::vector<int> clean;
  std::vector<int> noisy;
};

std::string format_double(double value);

void write_dataset_csv(std::ostream& out, const Matrix& features, std::span<const int> clean,
                       std::span<const int> noisy);
DatasetTable read_dataset_csv(std::istream& in);

void write_points_csv(std::ostream& out, const Matrix& points);
Matrix read_points_csv(std::istream& in);

void write_labeled_csv(std::ostream& out, const LabeledSet& data);

void write_dataset_csv(const std::filesystem::path& path, const Matrix& features, std::span<const int> clean,
                       std::span<const int> noisy);
DatasetTable read_dataset_csv(const std::filesystem::path& path);
void write_points_csv(const std::filesystem::path& path, const Matrix& points);
Matrix read_points_csv(const std::filesystem::path& path);
void write_labeled_csv(const std::filesystem::path& path, const LabeledSet& data);

/// Whole-file helpers that map stream failures to IoError.
std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace noisecal::io
