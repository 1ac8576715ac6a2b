// nplda/dataio.h

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

#ifndef NPLDA_DATAIO_H_
#define NPLDA_DATAIO_H_

#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "nplda/error.h"

namespace nplda {

enum class Gender { kMale, kFemale, kUnknown };

std::string_view GenderName(Gender g);
/// Accepts "male"/"female"/"unknown" and the one-letter forms m/f/u.
std::optional<Gender> ParseGender(std::string_view token);

struct Embedding {
  std::string segment_id;
  std::string speaker_id;  // empty when unknown
  Gender gender = Gender::kUnknown;
  Eigen::VectorXd vector;
};

/// Ordered collection of same-dimension embeddings with unique segment ids.
/// Archives are filled once with Add() and afterwards only read.
class EmbeddingArchive {
 public:
  explicit EmbeddingArchive(Eigen::Index dimension);

  /// Validates dimension, uniqueness and finiteness; errors name the 1-based
  /// record position the embedding would have taken.
  void Add(Embedding embedding);

  Eigen::Index Dim() const { return dimension_; }
  std::size_t Size() const { return records_.size(); }
  bool Empty() const { return records_.empty(); }

  const Embedding &operator[](std::size_t i) const { return records_[i]; }
  const std::vector<Embedding> &Records() const { return records_; }

  /// Position of a segment id, or nullopt.
  std::optional<std::size_t> Find(const std::string &segment_id) const;
  /// Like Find() but throws DataError(kUnknownId).
  std::size_t IndexOf(const std::string &segment_id) const;

  /// All vectors as the columns of a Dim() x Size() matrix.
  Eigen::MatrixXd AsColumns() const;

 private:
  Eigen::Index dimension_;
  std::vector<Embedding> records_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Record positions grouped by speaker id, groups in order of first
/// appearance.  Throws DataError(kInsufficientData) if any record lacks a
/// speaker id.
std::vector<std::vector<std::size_t>> GroupBySpeaker(
    const EmbeddingArchive &archive);

enum class ArchiveEncoding { kBinary, kText };

/// Reads either encoding; binary files are recognised by their magic string.
EmbeddingArchive ReadArchive(std::istream &is);
EmbeddingArchive LoadArchive(const std::string &path);

void WriteArchive(const EmbeddingArchive &archive, std::ostream &os,
                  ArchiveEncoding encoding = ArchiveEncoding::kBinary);
void SaveArchive(const EmbeddingArchive &archive, const std::string &path,
                 ArchiveEncoding encoding = ArchiveEncoding::kBinary);

enum class TrialLabel { kTarget, kNontarget, kUnlabeled };

std::string_view TrialLabelName(TrialLabel label);
std::optional<TrialLabel> ParseTrialLabel(std::string_view token);

struct Trial {
  std::string enroll_id;
  std::string test_id;
  TrialLabel label = TrialLabel::kUnlabeled;

  bool operator==(const Trial &) const = default;
};

/// Trial list lines are "enroll_id test_id label".  Every id must resolve
/// against `archive`.
std::vector<Trial> ReadTrials(std::istream &is, const EmbeddingArchive &archive);
std::vector<Trial> LoadTrials(const std::string &path,
                              const EmbeddingArchive &archive);
void WriteTrials(const std::vector<Trial> &trials, std::ostream &os);
void SaveTrials(const std::vector<Trial> &trials, const std::string &path);

struct ScoreRecord {
  std::string enroll_id;
  std::string test_id;
  double score = 0.0;
  TrialLabel label = TrialLabel::kUnlabeled;
};

/// Score lines are "enroll_id test_id score" with the score at 6 decimal
/// places, followed by the trial label when the trial is labeled.
void WriteScores(const std::vector<ScoreRecord> &scores, std::ostream &os);
void SaveScores(const std::vector<ScoreRecord> &scores, const std::string &path);
std::vector<ScoreRecord> ReadScores(std::istream &is);
std::vector<ScoreRecord> LoadScores(const std::string &path);

}  // namespace nplda

#endif  // NPLDA_DATAIO_H_
