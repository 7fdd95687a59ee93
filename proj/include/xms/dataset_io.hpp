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

#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "xms/error.hpp"

namespace xms {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Dense d x n matrix holding one sample per column. Always non-empty and finite.
class FeatureMatrix {
 public:
  explicit FeatureMatrix(Matrix values) : values_(std::move(values)) {
    require(values_.rows() >= 1 && values_.cols() >= 1, Errc::invalid_argument,
            "feature matrix must have at least one row and one column");
    require(values_.allFinite(), Errc::non_finite, "feature matrix contains NaN or Inf");
  }

  const Matrix& values() const noexcept { return values_; }
  Index dim() const noexcept { return values_.rows(); }
  Index count() const noexcept { return values_.cols(); }

 private:
  Matrix values_;
};

/// Two aligned modalities: column i of xa and column i of xb are one true pair.
/// Labels are 1-based class ids in 1..classes, every class non-empty.
class PairedMultimodalDataset {
 public:
  PairedMultimodalDataset(FeatureMatrix xa, FeatureMatrix xb, std::vector<int> labels, int classes,
                          std::vector<std::string> sample_ids = {})
      : xa_(std::move(xa)),
        xb_(std::move(xb)),
        labels_(std::move(labels)),
        classes_(classes),
        sample_ids_(std::move(sample_ids)) {
    const auto n = static_cast<std::size_t>(xa_.count());
    require(static_cast<std::size_t>(xb_.count()) == n && labels_.size() == n,
            Errc::pair_count_mismatch,
            "modality a has " + std::to_string(xa_.count()) + " samples, modality b has " +
                std::to_string(xb_.count()) + ", labels has " + std::to_string(labels_.size()));
    require(sample_ids_.empty() || sample_ids_.size() == n, Errc::pair_count_mismatch,
            "sample id count differs from sample count");
    require(classes_ >= 1, Errc::invalid_argument, "class count must be positive");
    std::vector<int> seen(static_cast<std::size_t>(classes_), 0);
    for (int label : labels_) {
      require(label >= 1 && label <= classes_, Errc::label_out_of_range,
              "label " + std::to_string(label) + " outside 1.." + std::to_string(classes_));
      ++seen[static_cast<std::size_t>(label - 1)];
    }
    for (int k = 0; k < classes_; ++k)
      require(seen[static_cast<std::size_t>(k)] > 0, Errc::empty_class,
              "class " + std::to_string(k + 1) + " has no samples");
  }

  const FeatureMatrix& xa() const noexcept { return xa_; }
  const FeatureMatrix& xb() const noexcept { return xb_; }
  const std::vector<int>& labels() const noexcept { return labels_; }
  const std::vector<std::string>& sample_ids() const noexcept { return sample_ids_; }
  int classes() const noexcept { return classes_; }
  Index size() const noexcept { return xa_.count(); }

 private:
  FeatureMatrix xa_;
  FeatureMatrix xb_;
  std::vector<int> labels_;
  int classes_;
  std::vector<std::string> sample_ids_;
};

/// One-hot n x c label matrix.
inline Matrix encode_labels(std::span<const int> labels, int classes) {
  require(classes >= 1, Errc::invalid_argument, "class count must be positive");
  Matrix y = Matrix::Zero(static_cast<Index>(labels.size()), classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    require(labels[i] >= 1 && labels[i] <= classes, Errc::label_out_of_range,
            "label " + std::to_string(labels[i]) + " outside 1.." + std::to_string(classes));
    y(static_cast<Index>(i), labels[i] - 1) = 1.0;
  }
  return y;
}

struct SplitPlan {
  std::vector<Index> train;  // 0-based, ascending
  std::vector<Index> test;   // 0-based, ascending
  std::uint64_t seed = 0;
};

namespace detail {

// Unbiased draw from [0, bound) without relying on the implementation-defined
// std::uniform_int_distribution, so splits are identical across standard libraries.
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t draw;
  do {
    draw = rng();
  } while (draw >= limit);
  return draw % bound;
}

inline void shuffle(std::vector<Index>& values, std::mt19937_64& rng) {
  for (std::size_t i = values.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_below(rng, i));
    std::swap(values[i - 1], values[j]);
  }
}

}  // namespace detail

/// Uniform random train/test partition of {0..n-1}; deterministic in seed.
inline SplitPlan random_split(Index n, Index n_train, std::uint64_t seed) {
  require(n_train > 0 && n_train < n, Errc::invalid_argument,
          "need 0 < n_train < n, got n_train=" + std::to_string(n_train) +
              " n=" + std::to_string(n));
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::mt19937_64 rng(seed);
  detail::shuffle(order, rng);
  SplitPlan plan;
  plan.seed = seed;
  plan.train.assign(order.begin(), order.begin() + n_train);
  plan.test.assign(order.begin() + n_train, order.end());
  std::sort(plan.train.begin(), plan.train.end());
  std::sort(plan.test.begin(), plan.test.end());
  return plan;
}

/// Per-class proportional split. Class quotas use largest remainders so the
/// training count is exactly n_train.
inline SplitPlan stratified_split(std::span<const int> labels, int classes, Index n_train,
                                  std::uint64_t seed) {
  const auto n = static_cast<Index>(labels.size());
  require(n_train > 0 && n_train < n, Errc::invalid_argument, "need 0 < n_train < n");
  std::vector<std::vector<Index>> members(static_cast<std::size_t>(classes));
  for (Index i = 0; i < n; ++i) {
    const int label = labels[static_cast<std::size_t>(i)];
    require(label >= 1 && label <= classes, Errc::label_out_of_range, "label out of range");
    members[static_cast<std::size_t>(label - 1)].push_back(i);
  }
  std::vector<Index> quota(members.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  Index assigned = 0;
  for (std::size_t k = 0; k < members.size(); ++k) {
    const double exact = static_cast<double>(n_train) * static_cast<double>(members[k].size()) /
                         static_cast<double>(n);
    quota[k] = static_cast<Index>(std::floor(exact));
    assigned += quota[k];
    remainders.emplace_back(-(exact - std::floor(exact)), k);
  }
  std::sort(remainders.begin(), remainders.end());
  for (std::size_t r = 0; assigned < n_train && r < remainders.size(); ++r) {
    const std::size_t k = remainders[r].second;
    if (quota[k] < static_cast<Index>(members[k].size())) {
      ++quota[k];
      ++assigned;
    }
  }
  std::mt19937_64 rng(seed);
  SplitPlan plan;
  plan.seed = seed;
  for (std::size_t k = 0; k < members.size(); ++k) {
    detail::shuffle(members[k], rng);
    plan.train.insert(plan.train.end(), members[k].begin(), members[k].begin() + quota[k]);
    plan.test.insert(plan.test.end(), members[k].begin() + quota[k], members[k].end());
  }
  std::sort(plan.train.begin(), plan.train.end());
  std::sort(plan.test.begin(), plan.test.end());
  return plan;
}

/// Select columns (0-based, in the given order) from both modalities and the labels.
/// The class count is preserved, so every class must still be represented.
inline PairedMultimodalDataset subset(const PairedMultimodalDataset& data,
                                      std::span<const Index> indices) {
  require(!indices.empty(), Errc::invalid_argument, "subset needs at least one index");
  const Index n = data.size();
  Matrix xa(data.xa().dim(), static_cast<Index>(indices.size()));
  Matrix xb(data.xb().dim(), static_cast<Index>(indices.size()));
  std::vector<int> labels;
  std::vector<std::string> ids;
  labels.reserve(indices.size());
  for (std::size_t j = 0; j < indices.size(); ++j) {
    const Index i = indices[j];
    require(i >= 0 && i < n, Errc::index_out_of_range,
            "index " + std::to_string(i) + " outside 0.." + std::to_string(n - 1));
    xa.col(static_cast<Index>(j)) = data.xa().values().col(i);
    xb.col(static_cast<Index>(j)) = data.xb().values().col(i);
    labels.push_back(data.labels()[static_cast<std::size_t>(i)]);
    if (!data.sample_ids().empty()) ids.push_back(data.sample_ids()[static_cast<std::size_t>(i)]);
  }
  // Relabel only if some class vanished; keeps class ids stable in the common case.
  std::set<int> present(labels.begin(), labels.end());
  int classes = data.classes();
  if (static_cast<int>(present.size()) != classes) {
    std::map<int, int> remap;
    for (int label : present) remap.emplace(label, static_cast<int>(remap.size()) + 1);
    for (int& label : labels) label = remap.at(label);
    classes = static_cast<int>(present.size());
  }
  return PairedMultimodalDataset(FeatureMatrix(std::move(xa)), FeatureMatrix(std::move(xb)),
                                 std::move(labels), classes, std::move(ids));
}

// ---------------------------------------------------------------------------
// File formats

enum class MatrixFormat { csv, binary };

inline constexpr char kBinaryMagic[4] = {'X', 'M', 'S', '1'};

namespace detail {

inline void write_u64_le(std::ostream& out, std::uint64_t value) {
  char bytes[8];
  for (int b = 0; b < 8; ++b) bytes[b] = static_cast<char>((value >> (8 * b)) & 0xffu);
  out.write(bytes, 8);
}

inline std::uint64_t read_u64_le(std::istream& in, const std::string& path) {
  unsigned char bytes[8];
  in.read(reinterpret_cast<char*>(bytes), 8);
  require(in.gcount() == 8, Errc::malformed_file, path + ": truncated binary matrix");
  std::uint64_t value = 0;
  for (int b = 7; b >= 0; --b) value = (value << 8) | bytes[b];
  return value;
}

inline std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

inline std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(trim(field));
  return fields;
}

inline bool has_binary_magic(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  char magic[4] = {};
  in.read(magic, 4);
  return in.gcount() == 4 && std::equal(magic, magic + 4, kBinaryMagic);
}

// Reads the rows of a comma separated file as raw string fields, skipping an
// optional leading '#' header row and blank lines.
inline std::vector<std::vector<std::string>> read_csv_rows(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(in.good(), Errc::missing_file, "cannot open " + path.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (first && !t.empty() && t.front() == '#') {
      first = false;
      continue;
    }
    first = false;
    if (t.empty()) continue;
    rows.push_back(split_fields(t));
  }
  return rows;
}

inline double parse_double(const std::string& field, const std::string& where) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(field, &used);
  } catch (const std::exception&) {
    fail(Errc::malformed_file, where + ": cannot parse '" + field + "' as a number");
  }
  require(used == field.size(), Errc::malformed_file,
          where + ": trailing characters in '" + field + "'");
  return value;
}

}  // namespace detail

/// Row-major on disk: one sample per row. Returns rows x cols as stored.
inline Matrix read_matrix_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), Errc::missing_file, "cannot open " + path.string());
  char magic[4];
  in.read(magic, 4);
  require(in.gcount() == 4 && std::equal(magic, magic + 4, kBinaryMagic), Errc::malformed_file,
          path.string() + ": missing XMS1 magic");
  const auto rows = detail::read_u64_le(in, path.string());
  const auto cols = detail::read_u64_le(in, path.string());
  require(rows < (1ull << 32) && cols < (1ull << 32), Errc::malformed_file,
          path.string() + ": implausible matrix shape");
  Matrix m(static_cast<Index>(rows), static_cast<Index>(cols));
  for (std::uint64_t r = 0; r < rows; ++r)
    for (std::uint64_t c = 0; c < cols; ++c)
      m(static_cast<Index>(r), static_cast<Index>(c)) =
          std::bit_cast<double>(detail::read_u64_le(in, path.string()));
  return m;
}

inline void write_matrix_binary(std::ostream& out, const Matrix& m) {
  out.write(kBinaryMagic, 4);
  detail::write_u64_le(out, static_cast<std::uint64_t>(m.rows()));
  detail::write_u64_le(out, static_cast<std::uint64_t>(m.cols()));
  for (Index r = 0; r < m.rows(); ++r)
    for (Index c = 0; c < m.cols(); ++c)
      detail::write_u64_le(out, std::bit_cast<std::uint64_t>(m(r, c)));
}

inline void write_matrix_binary(const std::filesystem::path& path, const Matrix& m) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), Errc::missing_file, "cannot write " + path.string());
  write_matrix_binary(out, m);
}

inline Matrix read_matrix_csv(const std::filesystem::path& path) {
  const auto rows = detail::read_csv_rows(path);
  require(!rows.empty(), Errc::malformed_file, path.string() + ": no data rows");
  const std::size_t cols = rows.front().size();
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(cols));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const std::string where = path.string() + ":" + std::to_string(r + 1);
    require(rows[r].size() == cols, Errc::malformed_file,
            where + ": expected " + std::to_string(cols) + " fields, got " +
                std::to_string(rows[r].size()));
    for (std::size_t c = 0; c < cols; ++c)
      m(static_cast<Index>(r), static_cast<Index>(c)) = detail::parse_double(rows[r][c], where);
  }
  return m;
}

inline void write_matrix_csv(const std::filesystem::path& path, const Matrix& m) {
  std::ofstream out(path);
  require(out.good(), Errc::missing_file, "cannot write " + path.string());
  out << std::setprecision(17);
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) out << (c ? "," : "") << m(r, c);
    out << '\n';
  }
}

/// Reads either format, detected by the XMS1 magic.
inline Matrix read_matrix(const std::filesystem::path& path) {
  require(std::filesystem::exists(path), Errc::missing_file, "no such file " + path.string());
  return detail::has_binary_magic(path) ? read_matrix_binary(path) : read_matrix_csv(path);
}

inline void write_matrix(const std::filesystem::path& path, const Matrix& m, MatrixFormat format) {
  if (format == MatrixFormat::binary)
    write_matrix_binary(path, m);
  else
    write_matrix_csv(path, m);
}

namespace detail {

inline std::vector<std::string> read_label_tokens(const std::filesystem::path& path) {
  std::vector<std::string> tokens;
  if (has_binary_magic(path)) {
    const Matrix m = read_matrix_binary(path);
    require(m.cols() == 1, Errc::malformed_file, path.string() + ": labels must be one column");
    for (Index r = 0; r < m.rows(); ++r) {
      const double v = m(r, 0);
      require(std::isfinite(v) && v == std::floor(v), Errc::malformed_file,
              path.string() + ": non-integer label");
      tokens.push_back(std::to_string(static_cast<long long>(v)));
    }
    return tokens;
  }
  for (auto& row : read_csv_rows(path)) {
    require(!row.empty() && !row.front().empty(), Errc::malformed_file,
            path.string() + ": empty label row");
    tokens.push_back(row.front());
  }
  return tokens;
}

inline std::optional<long long> parse_integer(const std::string& token) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(token, &used);
    if (used == token.size()) return v;
  } catch (const std::exception&) {
  }
  return std::nullopt;
}

// Without a declared class count, arbitrary label tokens are remapped onto
// 1..c (numeric order when all tokens are integers, lexicographic otherwise).
inline std::pair<std::vector<int>, int> normalize_labels(const std::vector<std::string>& tokens,
                                                         std::optional<int> declared,
                                                         const std::string& where) {
  std::vector<int> labels;
  labels.reserve(tokens.size());
  if (declared) {
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      const auto v = parse_integer(tokens[i]);
      require(v.has_value(), Errc::malformed_file,
              where + ":" + std::to_string(i + 1) + ": label '" + tokens[i] + "' is not an integer");
      require(*v >= 1 && *v <= *declared, Errc::label_out_of_range,
              where + ":" + std::to_string(i + 1) + ": label " + tokens[i] + " outside 1.." +
                  std::to_string(*declared));
      labels.push_back(static_cast<int>(*v));
    }
    return {labels, *declared};
  }
  bool numeric = true;
  for (const auto& t : tokens) numeric = numeric && parse_integer(t).has_value();
  std::map<std::string, int> ids;
  if (numeric) {
    std::set<long long> values;
    for (const auto& t : tokens) values.insert(*parse_integer(t));
    for (long long v : values) ids.emplace(std::to_string(v), static_cast<int>(ids.size()) + 1);
    for (const auto& t : tokens) labels.push_back(ids.at(std::to_string(*parse_integer(t))));
  } else {
    std::set<std::string> values(tokens.begin(), tokens.end());
    for (const auto& v : values) ids.emplace(v, static_cast<int>(ids.size()) + 1);
    for (const auto& t : tokens) labels.push_back(ids.at(t));
  }
  return {labels, static_cast<int>(ids.size())};
}

inline std::filesystem::path resolve_feature_file(const std::filesystem::path& dir,
                                                  const std::string& stem) {
  for (const char* ext : {".csv", ".bin"}) {
    auto candidate = dir / (stem + ext);
    if (std::filesystem::exists(candidate)) return candidate;
  }
  fail(Errc::missing_file, "no " + stem + ".csv or " + stem + ".bin in " + dir.string());
}

}  // namespace detail

/// Loads features_a, features_b and labels from a dataset directory. An optional
/// manifest.json may name the files ("features_a", "features_b", "labels",
/// "sample_ids") and declare the class count ("classes").
inline PairedMultimodalDataset load_dataset(const std::filesystem::path& dir) {
  require(std::filesystem::is_directory(dir), Errc::missing_file,
          "dataset directory " + dir.string() + " does not exist");
  nlohmann::json manifest = nlohmann::json::object();
  if (const auto mpath = dir / "manifest.json"; std::filesystem::exists(mpath)) {
    std::ifstream in(mpath);
    try {
      manifest = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      fail(Errc::malformed_file, mpath.string() + ": " + e.what());
    }
  }
  auto file_for = [&](const char* key, const std::string& stem) {
    if (manifest.contains(key)) return dir / manifest.at(key).get<std::string>();
    return detail::resolve_feature_file(dir, stem);
  };
  const auto path_a = file_for("features_a", "features_a");
  const auto path_b = file_for("features_b", "features_b");
  const auto path_y = file_for("labels", "labels");

  const Matrix rows_a = read_matrix(path_a);
  const Matrix rows_b = read_matrix(path_b);
  const auto tokens = detail::read_label_tokens(path_y);
  require(rows_a.rows() == rows_b.rows() && static_cast<std::size_t>(rows_a.rows()) == tokens.size(),
          Errc::pair_count_mismatch,
          std::to_string(rows_a.rows()) + " rows in " + path_a.filename().string() + ", " +
              std::to_string(rows_b.rows()) + " in " + path_b.filename().string() + ", " +
              std::to_string(tokens.size()) + " in " + path_y.filename().string());
  require(rows_a.allFinite(), Errc::non_finite, path_a.string() + " contains NaN or Inf");
  require(rows_b.allFinite(), Errc::non_finite, path_b.string() + " contains NaN or Inf");

  std::optional<int> declared;
  if (manifest.contains("classes")) declared = manifest.at("classes").get<int>();
  auto [labels, classes] = detail::normalize_labels(tokens, declared, path_y.string());

  std::vector<std::string> ids;
  if (manifest.contains("sample_ids")) {
    for (auto& row : detail::read_csv_rows(dir / manifest.at("sample_ids").get<std::string>()))
      ids.push_back(row.empty() ? std::string{} : row.front());
  }
  return PairedMultimodalDataset(FeatureMatrix(rows_a.transpose()), FeatureMatrix(rows_b.transpose()),
                                 std::move(labels), classes, std::move(ids));
}

inline void save_dataset(const std::filesystem::path& dir, const PairedMultimodalDataset& data,
                         MatrixFormat format = MatrixFormat::csv) {
  std::filesystem::create_directories(dir);
  const std::string ext = format == MatrixFormat::binary ? ".bin" : ".csv";
  write_matrix(dir / ("features_a" + ext), data.xa().values().transpose(), format);
  write_matrix(dir / ("features_b" + ext), data.xb().values().transpose(), format);
  Matrix y(data.size(), 1);
  for (Index i = 0; i < data.size(); ++i) y(i, 0) = data.labels()[static_cast<std::size_t>(i)];
  write_matrix(dir / ("labels" + ext), y, format);
  nlohmann::json manifest = {{"features_a", "features_a" + ext},
                             {"features_b", "features_b" + ext},
                             {"labels", "labels" + ext},
                             {"classes", data.classes()}};
  if (!data.sample_ids().empty()) {
    std::ofstream ids(dir / "sample_ids.csv");
    for (const auto& id : data.sample_ids()) ids << id << '\n';
    manifest["sample_ids"] = "sample_ids.csv";
  }
  std::ofstream(dir / "manifest.json") << manifest.dump(2) << '\n';
}

}  // namespace xms
