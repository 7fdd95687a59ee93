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

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "xms/dataset_io.hpp"
#include "xms/model.hpp"

namespace xms {

// Model file: "XMSM", u64 little-endian header length, JSON header, then the
// matrix blocks named in header["blocks"], each in the XMS1 binary matrix format.
inline constexpr char kModelMagic[4] = {'X', 'M', 'S', 'M'};

namespace detail {

inline Matrix as_column(const Vector& v) { return Matrix(v); }

inline nlohmann::json preprocess_header(const ModalityPreprocessor& p) {
  nlohmann::json j = {{"input_dim", p.input_dim},
                      {"l2_normalize", p.l2_normalize},
                      {"centered", p.mean.has_value()}};
  if (p.pca)
    j["pca"] = {{"k", p.pca->k()}, {"total_variance", p.pca->total_variance}};
  else
    j["pca"] = nullptr;
  return j;
}

}  // namespace detail

inline void save_model(std::ostream& out, const SubspaceModel& model) {
  std::vector<std::pair<std::string, Matrix>> blocks = {{"wa", model.wa}, {"wb", model.wb}};
  auto add_pre = [&](const std::string& tag, const ModalityPreprocessor& p) {
    if (p.mean) blocks.emplace_back(tag + ".mean", detail::as_column(*p.mean));
    if (p.pca) {
      blocks.emplace_back(tag + ".pca.mean", detail::as_column(p.pca->mean));
      blocks.emplace_back(tag + ".pca.basis", p.pca->basis);
      blocks.emplace_back(tag + ".pca.eigenvalues", detail::as_column(p.pca->eigenvalues));
    }
  };
  add_pre("a", model.preprocess_a);
  add_pre("b", model.preprocess_b);
  for (const auto& [name, m] : model.aux) blocks.emplace_back("aux." + name, m);

  nlohmann::json header = {
      {"format", "xms-model"},
      {"version", 1},
      {"method", std::string(method_name(model.method))},
      {"d", model.dim()},
      {"hyperparams", model.hyperparams},
      {"eigenvalues", std::vector<double>(model.eigenvalues.data(),
                                          model.eigenvalues.data() + model.eigenvalues.size())},
      {"objective_trace", model.objective_trace},
      {"fit_seconds", model.fit_seconds},
      {"preprocessing", {{"a", detail::preprocess_header(model.preprocess_a)},
                         {"b", detail::preprocess_header(model.preprocess_b)}}},
  };
  nlohmann::json names = nlohmann::json::array();
  for (const auto& b : blocks) names.push_back(b.first);
  header["blocks"] = names;

  const std::string text = header.dump();
  out.write(kModelMagic, 4);
  detail::write_u64_le(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& b : blocks) write_matrix_binary(out, b.second);
}

inline void save_model(const std::filesystem::path& path, const SubspaceModel& model) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), Errc::missing_file, "cannot write " + path.string());
  save_model(out, model);
}

namespace detail {

inline Matrix read_block(std::istream& in, const std::string& where) {
  char magic[4];
  in.read(magic, 4);
  require(in.gcount() == 4 && std::equal(magic, magic + 4, kBinaryMagic), Errc::malformed_file,
          where + ": bad matrix block");
  const auto rows = read_u64_le(in, where);
  const auto cols = read_u64_le(in, where);
  require(rows < (1ull << 32) && cols < (1ull << 32), Errc::malformed_file, where + ": bad block shape");
  Matrix m(static_cast<Index>(rows), static_cast<Index>(cols));
  for (std::uint64_t r = 0; r < rows; ++r)
    for (std::uint64_t c = 0; c < cols; ++c)
      m(static_cast<Index>(r), static_cast<Index>(c)) = std::bit_cast<double>(read_u64_le(in, where));
  return m;
}

}  // namespace detail

inline SubspaceModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), Errc::missing_file, "cannot open model " + path.string());
  char magic[4];
  in.read(magic, 4);
  require(in.gcount() == 4 && std::equal(magic, magic + 4, kModelMagic), Errc::malformed_file,
          path.string() + ": not an xms model file");
  const auto len = detail::read_u64_le(in, path.string());
  require(len < (1ull << 30), Errc::malformed_file, path.string() + ": implausible header size");
  std::string text(len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(len));
  require(static_cast<std::uint64_t>(in.gcount()) == len, Errc::malformed_file, path.string() + ": truncated header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::malformed_file, path.string() + ": " + e.what());
  }

  std::map<std::string, Matrix> blocks;
  for (const auto& name : header.at("blocks"))
    blocks[name.get<std::string>()] = detail::read_block(in, path.string());

  SubspaceModel model;
  model.method = parse_method(header.at("method").get<std::string>());
  model.wa = blocks.at("wa");
  model.wb = blocks.at("wb");
  model.hyperparams = header.at("hyperparams").get<std::map<std::string, double>>();
  const auto eig = header.at("eigenvalues").get<std::vector<double>>();
  model.eigenvalues = Eigen::Map<const Vector>(eig.data(), static_cast<Index>(eig.size()));
  model.objective_trace = header.at("objective_trace").get<std::vector<double>>();
  model.fit_seconds = header.at("fit_seconds").get<double>();
  auto load_pre = [&](const std::string& tag) {
    const auto& h = header.at("preprocessing").at(tag);
    ModalityPreprocessor p;
    p.input_dim = h.at("input_dim").get<Index>();
    p.l2_normalize = h.at("l2_normalize").get<bool>();
    if (h.at("centered").get<bool>()) p.mean = Vector(blocks.at(tag + ".mean").col(0));
    if (!h.at("pca").is_null()) {
      PcaModel pca;
      pca.mean = blocks.at(tag + ".pca.mean").col(0);
      pca.basis = blocks.at(tag + ".pca.basis");
      pca.eigenvalues = blocks.at(tag + ".pca.eigenvalues").col(0);
      pca.total_variance = h.at("pca").at("total_variance").get<double>();
      p.pca = std::move(pca);
    }
    return p;
  };
  model.preprocess_a = load_pre("a");
  model.preprocess_b = load_pre("b");
  for (const auto& [name, m] : blocks)
    if (name.rfind("aux.", 0) == 0) model.aux[name.substr(4)] = m;
  require(model.wa.cols() == model.wb.cols(), Errc::malformed_file,
          path.string() + ": wa and wb disagree on the subspace dimension");
  return model;
}

}  // namespace xms
