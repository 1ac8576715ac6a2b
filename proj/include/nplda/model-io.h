// nplda/model-io.h

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

#ifndef NPLDA_MODEL_IO_H_
#define NPLDA_MODEL_IO_H_

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "nplda/baselines.h"
#include "nplda/error.h"
#include "nplda/gplda.h"
#include "nplda/nplda.h"
#include "nplda/preprocess.h"

namespace nplda {

// Model file layout (little-endian):
//   "NPLDAMDL"  uint32 version  uint32 num_sections
//   per section: uint32 type tag, then the typed payload.
// Matrices are stored as uint64 rows, uint64 cols and column-major doubles,
// so a round trip is bit-exact.

enum class ModelType : std::uint32_t {
  kPipeline = 1,
  kGplda = 2,
  kGaussianBackend = 3,
  kDplda = 4,
  kNplda = 5,
};

inline constexpr std::uint32_t kModelFileVersion = 1;

std::string_view ModelTypeName(ModelType type);

using ModelSection = std::variant<PreprocessPipeline, GpldaModel,
                                  GaussianBackendModel, DpldaModel,
                                  NpldaParams>;

ModelType TypeOf(const ModelSection &section);

void WriteModels(std::ostream &os, const std::vector<ModelSection> &sections);
/// Errors: kBadMagic, kVersionMismatch, kTruncated, kMalformedHeader for an
/// unknown type tag or implausible sizes.
std::vector<ModelSection> ReadModels(std::istream &is);
void SaveModels(const std::string &path,
                const std::vector<ModelSection> &sections);
std::vector<ModelSection> LoadModels(const std::string &path);

template <typename T>
void SaveModel(const T &model, const std::string &path) {
  SaveModels(path, {ModelSection(model)});
}

/// Loads a single-section file holding a T; anything else is
/// DataError(kWrongModelType).
template <typename T>
T LoadModel(const std::string &path) {
  std::vector<ModelSection> sections = LoadModels(path);
  if (sections.size() != 1 || !std::holds_alternative<T>(sections[0]))
    throw DataError(DataError::Kind::kWrongModelType,
                    path + ": does not hold a single model of the requested type");
  return std::get<T>(std::move(sections[0]));
}

using BackendModel =
    std::variant<GpldaModel, GaussianBackendModel, DpldaModel, NpldaParams>;

/// Everything `score` needs: a backend plus the pipeline that maps raw
/// embeddings into its input space.  NPLDA carries its own pre-processing, so
/// it has no separate pipeline.
struct ScoringModel {
  PreprocessPipeline pipeline;  // unused for NPLDA
  BackendModel backend;

  /// "gplda", "gb", "dplda" or "nplda".
  std::string_view BackendName() const;
  bool HasPipeline() const;
  Eigen::Index InputDim() const;

  std::vector<ModelSection> Sections() const;
  /// Accepts [pipeline, backend] or [nplda].
  static ScoringModel FromSections(std::vector<ModelSection> sections);
};

void SaveScoringModel(const ScoringModel &model, const std::string &path);
ScoringModel LoadScoringModel(const std::string &path);

}  // namespace nplda

#endif  // NPLDA_MODEL_IO_H_
