// model-io.cc

// Copyright 2026  The nplda-backend Authors
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

#include "nplda/model-io.h"

#include <cstring>
#include <fstream>

#include "binary-io.h"

namespace nplda {

namespace {

using internal::ReadPod;
using internal::WritePod;

constexpr char kModelMagic[8] = {'N', 'P', 'L', 'D', 'A', 'M', 'D', 'L'};
constexpr std::uint64_t kMaxElements = std::uint64_t{1} << 28;

void WriteMatrix(std::ostream &os, const Eigen::MatrixXd &m) {
  WritePod<std::uint64_t>(os, static_cast<std::uint64_t>(m.rows()));
  WritePod<std::uint64_t>(os, static_cast<std::uint64_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.size(); ++i) WritePod<double>(os, m.data()[i]);
}

Eigen::MatrixXd ReadMatrix(std::istream &is) {
  const auto rows = ReadPod<std::uint64_t>(is);
  const auto cols = ReadPod<std::uint64_t>(is);
  if (rows > kMaxElements || cols > kMaxElements ||
      (rows != 0 && cols > kMaxElements / rows))
    throw DataError(DataError::Kind::kMalformedHeader,
                    "implausible matrix size " + std::to_string(rows) + "x" +
                        std::to_string(cols));
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows),
                    static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = ReadPod<double>(is);
  return m;
}

void WriteVector(std::ostream &os, const Eigen::VectorXd &v) {
  WriteMatrix(os, v);
}

Eigen::VectorXd ReadVector(std::istream &is) {
  Eigen::MatrixXd m = ReadMatrix(is);
  if (m.cols() != 1 && m.size() != 0)
    throw DataError(DataError::Kind::kMalformedHeader,
                    "expected a column vector");
  return Eigen::Map<Eigen::VectorXd>(m.data(), m.size());
}

void WritePayload(std::ostream &os, const PreprocessPipeline &p) {
  WriteVector(os, p.mean);
  WriteMatrix(os, p.lda);
  WriteVector(os, p.post_mean);
}

void WritePayload(std::ostream &os, const GpldaModel &m) {
  WriteMatrix(os, m.phi);
  WriteMatrix(os, m.sigma);
  WriteVector(os, m.mu);
}

void WritePayload(std::ostream &os, const GaussianBackendModel &m) {
  WriteVector(os, m.mu_t);
  WriteMatrix(os, m.sigma_t);
  WriteVector(os, m.mu_nt);
  WriteMatrix(os, m.sigma_nt);
}

void WritePayload(std::ostream &os, const DpldaModel &m) { WriteVector(os, m.w); }

void WritePayload(std::ostream &os, const NpldaParams &m) {
  WriteMatrix(os, m.a1);
  WriteVector(os, m.b1);
  WriteMatrix(os, m.a2);
  WriteVector(os, m.b2);
  WriteMatrix(os, m.p);
  WriteMatrix(os, m.q);
  WriteVector(os, m.thresholds);
  WritePod<double>(os, m.alpha);
}

ModelSection ReadPayload(std::istream &is, ModelType type) {
  switch (type) {
    case ModelType::kPipeline: {
      PreprocessPipeline p;
      p.mean = ReadVector(is);
      p.lda = ReadMatrix(is);
      p.post_mean = ReadVector(is);
      if (p.mean.size() != p.lda.cols() || p.post_mean.size() != p.lda.rows())
        throw DataError(DataError::Kind::kMalformedHeader,
                        "inconsistent pipeline shapes");
      return p;
    }
    case ModelType::kGplda: {
      GpldaModel m;
      m.phi = ReadMatrix(is);
      m.sigma = ReadMatrix(is);
      m.mu = ReadVector(is);
      m.Validate();
      return m;
    }
    case ModelType::kGaussianBackend: {
      GaussianBackendModel m;
      m.mu_t = ReadVector(is);
      m.sigma_t = ReadMatrix(is);
      m.mu_nt = ReadVector(is);
      m.sigma_nt = ReadMatrix(is);
      m.Validate();
      return m;
    }
    case ModelType::kDplda: {
      DpldaModel m;
      m.w = ReadVector(is);
      m.Dim();
      return m;
    }
    case ModelType::kNplda: {
      NpldaParams m;
      m.a1 = ReadMatrix(is);
      m.b1 = ReadVector(is);
      m.a2 = ReadMatrix(is);
      m.b2 = ReadVector(is);
      m.p = ReadMatrix(is);
      m.q = ReadMatrix(is);
      m.thresholds = ReadVector(is);
      m.alpha = ReadPod<double>(is);
      m.Validate();
      return m;
    }
  }
  throw DataError(DataError::Kind::kMalformedHeader,
                  "unknown model type tag " +
                      std::to_string(static_cast<std::uint32_t>(type)));
}

}  // namespace

std::string_view ModelTypeName(ModelType type) {
  switch (type) {
    case ModelType::kPipeline: return "pipeline";
    case ModelType::kGplda: return "gplda";
    case ModelType::kGaussianBackend: return "gb";
    case ModelType::kDplda: return "dplda";
    case ModelType::kNplda: return "nplda";
  }
  return "unknown";
}

ModelType TypeOf(const ModelSection &section) {
  return static_cast<ModelType>(section.index() + 1);
}

void WriteModels(std::ostream &os, const std::vector<ModelSection> &sections) {
  os.write(kModelMagic, sizeof(kModelMagic));
  WritePod<std::uint32_t>(os, kModelFileVersion);
  WritePod<std::uint32_t>(os, static_cast<std::uint32_t>(sections.size()));
  for (const ModelSection &s : sections) {
    WritePod<std::uint32_t>(os, static_cast<std::uint32_t>(TypeOf(s)));
    std::visit([&os](const auto &m) { WritePayload(os, m); }, s);
  }
  if (!os) throw DataError(DataError::Kind::kIo, "failed to write model");
}

std::vector<ModelSection> ReadModels(std::istream &is) {
  char magic[sizeof(kModelMagic)] = {};
  is.read(magic, sizeof(magic));
  if (is.gcount() != static_cast<std::streamsize>(sizeof(magic)) ||
      std::memcmp(magic, kModelMagic, sizeof(magic)) != 0)
    throw DataError(DataError::Kind::kBadMagic, "not a model file (bad magic)");
  const auto version = ReadPod<std::uint32_t>(is);
  if (version != kModelFileVersion)
    throw DataError(DataError::Kind::kVersionMismatch,
                    "model file version " + std::to_string(version) +
                        ", expected " + std::to_string(kModelFileVersion));
  const auto count = ReadPod<std::uint32_t>(is);
  if (count > 16)
    throw DataError(DataError::Kind::kMalformedHeader,
                    "implausible section count " + std::to_string(count));
  std::vector<ModelSection> sections;
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto tag = ReadPod<std::uint32_t>(is, i + 1);
    if (tag < 1 || tag > 5)
      throw DataError(DataError::Kind::kMalformedHeader,
                      "unknown model type tag " + std::to_string(tag), i + 1);
    sections.push_back(ReadPayload(is, static_cast<ModelType>(tag)));
  }
  if (is.peek() != std::char_traits<char>::eof())
    throw DataError(DataError::Kind::kMalformedHeader,
                    "trailing bytes after the last model section");
  return sections;
}

void SaveModels(const std::string &path,
                const std::vector<ModelSection> &sections) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError(DataError::Kind::kIo, "cannot open " + path);
  WriteModels(os, sections);
}

std::vector<ModelSection> LoadModels(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError(DataError::Kind::kIo, "cannot open " + path);
  return ReadModels(is);
}

std::string_view ScoringModel::BackendName() const {
  return ModelTypeName(static_cast<ModelType>(backend.index() + 2));
}

bool ScoringModel::HasPipeline() const {
  return !std::holds_alternative<NpldaParams>(backend);
}

Eigen::Index ScoringModel::InputDim() const {
  if (const auto *n = std::get_if<NpldaParams>(&backend)) return n->InputDim();
  return pipeline.InputDim();
}

std::vector<ModelSection> ScoringModel::Sections() const {
  std::vector<ModelSection> out;
  if (HasPipeline()) out.emplace_back(pipeline);
  std::visit([&out](const auto &m) { out.emplace_back(m); }, backend);
  return out;
}

ScoringModel ScoringModel::FromSections(std::vector<ModelSection> sections) {
  ScoringModel out;
  if (sections.size() == 1 && std::holds_alternative<NpldaParams>(sections[0])) {
    out.backend = std::get<NpldaParams>(std::move(sections[0]));
    return out;
  }
  if (sections.size() != 2 ||
      !std::holds_alternative<PreprocessPipeline>(sections[0]) ||
      std::holds_alternative<PreprocessPipeline>(sections[1]))
    throw DataError(DataError::Kind::kWrongModelType,
                    "expected a pipeline followed by a backend, or an nplda "
                    "model");
  out.pipeline = std::get<PreprocessPipeline>(std::move(sections[0]));
  std::visit(
      [&out](auto &&m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (!std::is_same_v<T, PreprocessPipeline>)
          out.backend = std::move(m);
      },
      std::move(sections[1]));
  const Eigen::Index k = out.pipeline.OutputDim();
  const Eigen::Index backend_dim = std::visit(
      [](const auto &m) -> Eigen::Index {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, DpldaModel>)
          return m.Dim();
        else if constexpr (std::is_same_v<T, GpldaModel>)
          return m.Dim();
        else if constexpr (std::is_same_v<T, GaussianBackendModel>)
          return m.Dim();
        else
          return m.InputDim();
      },
      out.backend);
  if (backend_dim != k)
    throw DimensionError("pipeline output dimension " + std::to_string(k) +
                         " does not match backend dimension " +
                         std::to_string(backend_dim));
  return out;
}

void SaveScoringModel(const ScoringModel &model, const std::string &path) {
  SaveModels(path, model.Sections());
}

ScoringModel LoadScoringModel(const std::string &path) {
  return ScoringModel::FromSections(LoadModels(path));
}

}  // namespace nplda
