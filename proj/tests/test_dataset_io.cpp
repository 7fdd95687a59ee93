// Copyright 2026 The xms Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include <unistd.h>

#include <filesystem>
#include <functional>
#include <fstream>
#include <numeric>
#include <set>

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "xms/dataset_io.hpp"

namespace fs = std::filesystem;
using namespace xms;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("xms_io_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_text(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::string rows_csv(Index rows, Index cols, double offset = 0.0) {
  std::string s;
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) s += (c ? "," : "") + std::to_string(offset + r * cols + c);
    s += "\n";
  }
  return s;
}

std::string labels_csv(const std::vector<int>& labels) {
  std::string s;
  for (int l : labels) s += std::to_string(l) + "\n";
  return s;
}

PairedMultimodalDataset small_dataset(Index n, int classes, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return PairedMultimodalDataset(FeatureMatrix(fx::gaussian(4, n, rng)),
                                 FeatureMatrix(fx::gaussian(3, n, rng)), fx::balanced_labels(n, classes),
                                 classes);
}

Errc error_code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an xms::Error";
  return Errc::internal;
}

}  // namespace

TEST(EncodeLabels, OneHotRows) {
  const std::vector<int> labels = {1, 2, 1};
  Matrix expected(3, 2);
  expected << 1, 0, 0, 1, 1, 0;
  EXPECT_EQ(encode_labels(labels, 2), expected);
  const std::vector<int> three = {3};
  EXPECT_EQ(encode_labels(three, 3), (Matrix(1, 3) << 0, 0, 1).finished());
}

TEST(EncodeLabels, OutOfRangeIsAnError) {
  const std::vector<int> labels = {4};
  EXPECT_EQ(error_code_of([&] { encode_labels(labels, 3); }), Errc::label_out_of_range);
}

TEST(FeatureMatrix, RejectsNonFiniteAndEmpty) {
  Matrix m = Matrix::Ones(2, 2);
  m(1, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_EQ(error_code_of([&] { FeatureMatrix f(m); }), Errc::non_finite);
  EXPECT_THROW(FeatureMatrix(Matrix(0, 3)), Error);
}

TEST(PairedDataset, ValidatesPairingAndClasses) {
  std::mt19937_64 rng(1);
  const Matrix a = fx::gaussian(2, 4, rng);
  const Matrix b3 = fx::gaussian(2, 3, rng);
  EXPECT_EQ(error_code_of([&] {
              PairedMultimodalDataset d(FeatureMatrix(a), FeatureMatrix(b3), {1, 2, 1, 2}, 2);
            }),
            Errc::pair_count_mismatch);
  const Matrix b = fx::gaussian(2, 4, rng);
  EXPECT_EQ(error_code_of([&] {
              PairedMultimodalDataset d(FeatureMatrix(a), FeatureMatrix(b), {1, 1, 1, 1}, 2);
            }),
            Errc::empty_class);
  EXPECT_EQ(error_code_of([&] {
              PairedMultimodalDataset d(FeatureMatrix(a), FeatureMatrix(b), {1, 2, 3, 0}, 3);
            }),
            Errc::label_out_of_range);
}

TEST(RandomSplit, StandardProtocolSizes) {
  const SplitPlan shoe = random_split(419, 304, 7);
  EXPECT_EQ(shoe.train.size(), 304u);
  EXPECT_EQ(shoe.test.size(), 115u);
  const SplitPlan chair = random_split(297, 200, 7);
  EXPECT_EQ(chair.train.size(), 200u);
  EXPECT_EQ(chair.test.size(), 97u);
}

TEST(RandomSplit, Deterministic) {
  const SplitPlan a = random_split(100, 60, 42);
  const SplitPlan b = random_split(100, 60, 42);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.test, b.test);
  EXPECT_EQ(a.seed, 42u);
  const SplitPlan c = random_split(100, 60, 43);
  EXPECT_NE(a.train, c.train);
}

TEST(RandomSplit, PartitionOverManySeeds) {
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const Index n = 5 + static_cast<Index>(seed % 50);
    const Index n_train = 1 + static_cast<Index>(seed % static_cast<std::uint64_t>(n - 1));
    const SplitPlan p = random_split(n, n_train, seed);
    ASSERT_EQ(static_cast<Index>(p.train.size()), n_train);
    ASSERT_EQ(static_cast<Index>(p.train.size() + p.test.size()), n);
    std::set<Index> all(p.train.begin(), p.train.end());
    for (Index i : p.test) ASSERT_TRUE(all.insert(i).second) << "train and test overlap";
    ASSERT_EQ(static_cast<Index>(all.size()), n);
    ASSERT_EQ(*all.begin(), 0);
    ASSERT_EQ(*all.rbegin(), n - 1);
  }
}

TEST(RandomSplit, RejectsBadSizes) {
  EXPECT_THROW(random_split(10, 10, 0), Error);
  EXPECT_THROW(random_split(10, 0, 0), Error);
}

TEST(RandomSplit, UniformBelowIsUnbiasedEnough) {
  std::mt19937_64 rng(3);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) ++counts[detail::uniform_below(rng, 7)];
  for (int c : counts) EXPECT_NEAR(c, 10000, 500);
}

TEST(StratifiedSplit, ProportionalQuotas) {
  std::vector<int> labels;
  for (int i = 0; i < 60; ++i) labels.push_back(1);
  for (int i = 0; i < 30; ++i) labels.push_back(2);
  for (int i = 0; i < 10; ++i) labels.push_back(3);
  const SplitPlan p = stratified_split(labels, 3, 50, 11);
  ASSERT_EQ(p.train.size(), 50u);
  std::vector<int> per(4, 0);
  for (Index i : p.train) ++per[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])];
  EXPECT_EQ(per[1], 30);
  EXPECT_EQ(per[2], 15);
  EXPECT_EQ(per[3], 5);
}

TEST(Subset, IdentityPartitionAndSwap) {
  const auto d = small_dataset(10, 3, 5);
  std::vector<Index> all(10);
  std::iota(all.begin(), all.end(), Index{0});
  const auto same = subset(d, all);
  EXPECT_EQ(same.xa().values(), d.xa().values());
  EXPECT_EQ(same.xb().values(), d.xb().values());
  EXPECT_EQ(same.labels(), d.labels());

  const SplitPlan p = random_split(10, 6, 3);
  EXPECT_EQ(subset(d, p.train).size() + subset(d, p.test).size(), 10);

  const std::vector<Index> swap = {1, 0};
  const auto once = subset(d, swap);
  const auto twice = subset(once, swap);
  EXPECT_EQ(twice.xa().values(), d.xa().values().leftCols(2));
  EXPECT_EQ(twice.xb().values(), d.xb().values().leftCols(2));
}

TEST(Subset, PreservesPairingAndRemapsVanishedClasses) {
  const auto d = small_dataset(9, 3, 8);
  const std::vector<Index> idx = {0, 2, 3, 5};  // labels 1, 3, 1, 3
  const auto s = subset(d, idx);
  EXPECT_EQ(s.classes(), 2);
  EXPECT_EQ(s.labels(), (std::vector<int>{1, 2, 1, 2}));
  for (std::size_t j = 0; j < idx.size(); ++j) {
    EXPECT_EQ(s.xa().values().col(static_cast<Index>(j)), d.xa().values().col(idx[j]));
    EXPECT_EQ(s.xb().values().col(static_cast<Index>(j)), d.xb().values().col(idx[j]));
  }
  const std::vector<Index> bad = {0, 99};
  EXPECT_EQ(error_code_of([&] { subset(d, bad); }), Errc::index_out_of_range);
}

TEST(LoadDataset, ShoeAndChairShapes) {
  const fs::path shoe = scratch_dir("shoe");
  write_text(shoe / "features_a.csv", rows_csv(419, 4));
  write_text(shoe / "features_b.csv", rows_csv(419, 3, 0.5));
  write_text(shoe / "labels.csv", labels_csv(fx::balanced_labels(419, 3)));
  const auto ds = load_dataset(shoe);
  EXPECT_EQ(ds.size(), 419);
  EXPECT_EQ(ds.classes(), 3);
  EXPECT_EQ(ds.xa().dim(), 4);
  EXPECT_EQ(ds.xb().dim(), 3);
  EXPECT_DOUBLE_EQ(ds.xa().values()(1, 2), 9.0);  // row 2, column 1 of the file

  const fs::path chair = scratch_dir("chair");
  write_text(chair / "features_a.csv", "# photo features\n" + rows_csv(297, 2));
  write_text(chair / "features_b.csv", rows_csv(297, 2));
  write_text(chair / "labels.csv", labels_csv(fx::balanced_labels(297, 6)));
  const auto dc = load_dataset(chair);
  EXPECT_EQ(dc.size(), 297);
  EXPECT_EQ(dc.classes(), 6);
  fs::remove_all(shoe);
  fs::remove_all(chair);
}

TEST(LoadDataset, PairCountMismatch) {
  const fs::path dir = scratch_dir("mismatch");
  write_text(dir / "features_a.csv", rows_csv(10, 2));
  write_text(dir / "features_b.csv", rows_csv(9, 2));
  write_text(dir / "labels.csv", labels_csv(fx::balanced_labels(10, 2)));
  try {
    load_dataset(dir);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::pair_count_mismatch);
    EXPECT_NE(std::string(e.what()).find("pair count mismatch"), std::string::npos) << e.what();
    EXPECT_EQ(e.exit_code(), 3);
  }
  fs::remove_all(dir);
}

TEST(LoadDataset, NonFiniteMissingAndStringLabels) {
  const fs::path dir = scratch_dir("bad");
  write_text(dir / "features_a.csv", "1,2\nnan,3\n");
  write_text(dir / "features_b.csv", "1\n2\n");
  write_text(dir / "labels.csv", "cat\ndog\n");
  EXPECT_EQ(error_code_of([&] { load_dataset(dir); }), Errc::non_finite);
  write_text(dir / "features_a.csv", "1,2\n4,3\n");
  const auto d = load_dataset(dir);
  EXPECT_EQ(d.labels(), (std::vector<int>{1, 2}));
  EXPECT_EQ(error_code_of([&] { load_dataset(dir / "nope"); }), Errc::missing_file);
  fs::remove(dir / "labels.csv");
  EXPECT_EQ(error_code_of([&] { load_dataset(dir); }), Errc::missing_file);
  fs::remove_all(dir);
}

TEST(LoadDataset, ManifestDeclaresClasses) {
  const fs::path dir = scratch_dir("manifest");
  write_text(dir / "pa.csv", rows_csv(4, 2));
  write_text(dir / "pb.csv", rows_csv(4, 2));
  write_text(dir / "y.csv", "1\n2\n3\n1\n");
  write_text(dir / "manifest.json", R"({"features_a":"pa.csv","features_b":"pb.csv","labels":"y.csv","classes":3})");
  EXPECT_EQ(load_dataset(dir).classes(), 3);
  write_text(dir / "manifest.json", R"({"features_a":"pa.csv","features_b":"pb.csv","labels":"y.csv","classes":2})");
  EXPECT_EQ(error_code_of([&] { load_dataset(dir); }), Errc::label_out_of_range);
  fs::remove_all(dir);
}

TEST(MatrixFiles, BinaryRoundTripIsBitExact) {
  std::mt19937_64 rng(9);
  Matrix m = fx::gaussian(7, 5, rng);
  m(0, 0) = 1e-310;  // subnormal
  m(1, 1) = -0.0;
  const fs::path dir = scratch_dir("bin");
  write_matrix_binary(dir / "m.bin", m);
  const Matrix r = read_matrix(dir / "m.bin");
  ASSERT_EQ(r.rows(), 7);
  ASSERT_EQ(r.cols(), 5);
  for (Index i = 0; i < m.size(); ++i)
    EXPECT_EQ(std::bit_cast<std::uint64_t>(m.data()[i]), std::bit_cast<std::uint64_t>(r.data()[i]));

  // Header layout: magic, rows, cols little-endian, then row-major values.
  std::ifstream in(dir / "m.bin", std::ios::binary);
  char header[20];
  in.read(header, 20);
  EXPECT_EQ(std::string(header, 4), "XMS1");
  EXPECT_EQ(static_cast<unsigned char>(header[4]), 7);
  EXPECT_EQ(static_cast<unsigned char>(header[12]), 5);
  double first_row_second = 0.0;
  in.seekg(20 + 8);
  in.read(reinterpret_cast<char*>(&first_row_second), 8);
  EXPECT_EQ(first_row_second, m(0, 1));
  fs::remove_all(dir);
}

TEST(MatrixFiles, TruncatedBinaryIsMalformed) {
  const fs::path dir = scratch_dir("trunc");
  write_matrix_binary(dir / "m.bin", Matrix::Ones(3, 3));
  fs::resize_file(dir / "m.bin", 40);
  EXPECT_EQ(error_code_of([&] { read_matrix(dir / "m.bin"); }), Errc::malformed_file);
  fs::remove_all(dir);
}

TEST(SaveDataset, RoundTripBothFormats) {
  std::mt19937_64 rng(12);
  auto d = PairedMultimodalDataset(FeatureMatrix(fx::gaussian(5, 12, rng)),
                                   FeatureMatrix(fx::gaussian(4, 12, rng)), fx::balanced_labels(12, 4), 4,
                                   std::vector<std::string>(12, "id"));
  for (MatrixFormat f : {MatrixFormat::binary, MatrixFormat::csv}) {
    const fs::path dir = scratch_dir(f == MatrixFormat::binary ? "rt_bin" : "rt_csv");
    save_dataset(dir, d, f);
    const auto back = load_dataset(dir);
    EXPECT_EQ(back.labels(), d.labels());
    EXPECT_EQ(back.classes(), 4);
    EXPECT_EQ(back.sample_ids(), d.sample_ids());
    if (f == MatrixFormat::binary) {
      EXPECT_EQ(back.xa().values(), d.xa().values());
      EXPECT_EQ(back.xb().values(), d.xb().values());
    } else {
      EXPECT_LE((back.xa().values() - d.xa().values()).cwiseAbs().maxCoeff(), 1e-12);
      EXPECT_LE((back.xb().values() - d.xb().values()).cwiseAbs().maxCoeff(), 1e-12);
    }
    fs::remove_all(dir);
  }
}
