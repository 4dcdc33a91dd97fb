#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "noisecal/csv.hpp"
#include "noisecal/error.hpp"
#include "test_support.hpp"

namespace noisecal {
namespace {

using numkit::Matrix;

TEST(Csv, DatasetRoundTripIsBitExact) {
  Rng rng(1);
  Matrix x = testing::normal_matrix(40, 3, rng) * 1e3;
  x(0, 0) = 0.1;
  x(1, 1) = -std::numeric_limits<double>::denorm_min();
  x(2, 2) = std::numeric_limits<double>::max();
  const std::vector<int> clean(40, 1);
  std::vector<int> noisy(40, 0);
  noisy[7] = 1;
  std::stringstream io;
  io::write_dataset_csv(io, x, clean, noisy);
  const io::DatasetTable t = io::read_dataset_csv(io);
  EXPECT_EQ(t.features, x);
  EXPECT_EQ(t.clean, clean);
  EXPECT_EQ(t.noisy, noisy);
}

TEST(Csv, DatasetHeader) {
  std::stringstream io;
  io::write_dataset_csv(io, Matrix::Zero(1, 2), std::vector<int>{0}, std::vector<int>{1});
  std::string header;
  std::getline(io, header);
  EXPECT_EQ(header, "f0,f1,clean,noisy");
}

TEST(Csv, PointsWithAndWithoutHeader) {
  std::istringstream with("f0,f1\n1,2\n3,4.5\n");
  std::istringstream without("1,2\n3,4.5\n");
  const Matrix expected = (Matrix(2, 2) << 1, 2, 3, 4.5).finished();
  EXPECT_EQ(io::read_points_csv(with), expected);
  EXPECT_EQ(io::read_points_csv(without), expected);
}

TEST(Csv, LabeledFormat) {
  std::ostringstream out;
  io::write_labeled_csv(out, LabeledSet{(Matrix(1, 2) << 0.5, -1).finished(), {3}});
  EXPECT_EQ(out.str(), "f0,f1,label\n0.5,-1,3\n");
}

TEST(Csv, MalformedInputIsIoError) {
  std::istringstream ragged("f0,f1,clean,noisy\n1,2,0,1\n1,0\n");
  EXPECT_THROW(io::read_dataset_csv(ragged), IoError);
  std::istringstream junk("f0,clean,noisy\nabc,0,1\n");
  EXPECT_THROW(io::read_dataset_csv(junk), IoError);
  std::istringstream bad_label("f0,clean,noisy\n1.0,0.5,1\n");
  EXPECT_THROW(io::read_dataset_csv(bad_label), IoError);
  EXPECT_THROW(io::read_points_csv(std::filesystem::path("/nonexistent/points.csv")), IoError);
  EXPECT_THROW(io::read_text("/nonexistent/file.json"), IoError);
}

TEST(Csv, FormatDoubleRoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, 2.0 / 3.0, 1e-300, 6.02214076e23}) EXPECT_EQ(std::stod(io::format_double(v)), v);
}

}  // namespace
}  // namespace noisecal
