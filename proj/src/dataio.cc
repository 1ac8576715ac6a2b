// dataio.cc

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

#include "nplda/dataio.h"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "binary-io.h"

namespace nplda {

namespace {

constexpr char kArchiveMagic[8] = {'N', 'P', 'L', 'D', 'A', 'A', 'R', 'K'};
constexpr std::uint32_t kArchiveVersion = 1;
// Value encoding tag: 64-bit IEEE-754, little-endian.
constexpr std::uint32_t kEncodingF64Le = 1;

std::vector<std::string> SplitWhitespace(const std::string &line) {
  std::vector<std::string> out;
  std::istringstream ss(line);
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

bool ParseDouble(const std::string &token, double *value) {
  const char *begin = token.data();
  const char *end = begin + token.size();
  if (begin != end && *begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, *value);
  return ec == std::errc() && ptr == end;
}

std::string RecordLabel(std::size_t record, const std::string &id) {
  return "record " + std::to_string(record) + " ('" + id + "')";
}

std::ifstream OpenForRead(const std::string &path, bool binary) {
  std::ifstream is(path, binary ? std::ios::binary : std::ios::in);
  if (!is) throw DataError(DataError::Kind::kIo, "cannot open " + path);
  return is;
}

std::ofstream OpenForWrite(const std::string &path, bool binary) {
  std::ofstream os(path, binary ? std::ios::binary | std::ios::trunc
                                : std::ios::out | std::ios::trunc);
  if (!os) throw DataError(DataError::Kind::kIo, "cannot write " + path);
  return os;
}

EmbeddingArchive ReadBinaryArchive(std::istream &is) {
  using internal::ReadPod;
  char magic[sizeof(kArchiveMagic)];
  is.read(magic, sizeof(magic));
  const auto version = ReadPod<std::uint32_t>(is);
  if (version != kArchiveVersion)
    throw DataError(DataError::Kind::kVersionMismatch,
                    "unsupported archive version " + std::to_string(version));
  const auto encoding = ReadPod<std::uint32_t>(is);
  if (encoding != kEncodingF64Le)
    throw DataError(DataError::Kind::kMalformedHeader,
                    "unsupported value encoding " + std::to_string(encoding));
  const auto dim = ReadPod<std::uint64_t>(is);
  const auto count = ReadPod<std::uint64_t>(is);
  if (dim == 0 || dim > (1u << 24))
    throw DataError(DataError::Kind::kMalformedHeader,
                    "invalid dimension " + std::to_string(dim));

  EmbeddingArchive archive(static_cast<Eigen::Index>(dim));
  for (std::uint64_t r = 0; r < count; ++r) {
    const std::size_t record = static_cast<std::size_t>(r) + 1;
    Embedding e;
    e.segment_id = internal::ReadString(is, record);
    e.speaker_id = internal::ReadString(is, record);
    const auto g = ReadPod<std::uint8_t>(is, record);
    if (g > 2)
      throw DataError(DataError::Kind::kMalformedHeader,
                      RecordLabel(record, e.segment_id) + ": bad gender byte",
                      record);
    e.gender = static_cast<Gender>(g);
    e.vector.resize(static_cast<Eigen::Index>(dim));
    for (Eigen::Index i = 0; i < e.vector.size(); ++i)
      e.vector(i) = ReadPod<double>(is, record);
    archive.Add(std::move(e));
  }
  return archive;
}

EmbeddingArchive ReadTextArchive(std::istream &is) {
  std::optional<EmbeddingArchive> archive;
  std::string line;
  std::size_t record = 0;
  bool first_content = true;
  while (std::getline(is, line)) {
    auto tokens = SplitWhitespace(line);
    if (tokens.empty() || tokens[0][0] == '#') continue;
    if (first_content && tokens[0] == "dim") {
      first_content = false;
      long long dim = 0;
      if (tokens.size() != 2 ||
          std::from_chars(tokens[1].data(), tokens[1].data() + tokens[1].size(),
                          dim)
                  .ec != std::errc() ||
          dim <= 0)
        throw DataError(DataError::Kind::kMalformedHeader,
                        "malformed header line: " + line);
      archive.emplace(static_cast<Eigen::Index>(dim));
      continue;
    }
    first_content = false;
    ++record;
    if (tokens.size() < 4)
      throw DataError(DataError::Kind::kMalformedHeader,
                      "record " + std::to_string(record) +
                          ": expected 'id speaker gender v1 .. vd'",
                      record);
    const std::size_t nvalues = tokens.size() - 3;
    if (!archive) archive.emplace(static_cast<Eigen::Index>(nvalues));
    if (static_cast<Eigen::Index>(nvalues) != archive->Dim())
      throw DataError(DataError::Kind::kDimensionMismatch,
                      RecordLabel(record, tokens[0]) + " has " +
                          std::to_string(nvalues) + " values, expected " +
                          std::to_string(archive->Dim()),
                      record);
    Embedding e;
    e.segment_id = tokens[0];
    e.speaker_id = tokens[1] == "-" ? std::string() : tokens[1];
    auto g = ParseGender(tokens[2]);
    if (!g)
      throw DataError(DataError::Kind::kMalformedHeader,
                      RecordLabel(record, tokens[0]) + ": bad gender '" +
                          tokens[2] + "'",
                      record);
    e.gender = *g;
    e.vector.resize(static_cast<Eigen::Index>(nvalues));
    for (std::size_t i = 0; i < nvalues; ++i) {
      if (!ParseDouble(tokens[3 + i], &e.vector(static_cast<Eigen::Index>(i))))
        throw DataError(DataError::Kind::kMalformedHeader,
                        RecordLabel(record, tokens[0]) + ": bad value '" +
                            tokens[3 + i] + "'",
                        record);
    }
    archive->Add(std::move(e));
  }
  if (!archive)
    throw DataError(DataError::Kind::kMalformedHeader,
                    "archive has no header and no records");
  return std::move(*archive);
}

}  // namespace

std::string_view GenderName(Gender g) {
  switch (g) {
    case Gender::kMale: return "male";
    case Gender::kFemale: return "female";
    default: return "unknown";
  }
}

std::optional<Gender> ParseGender(std::string_view token) {
  if (token == "male" || token == "m") return Gender::kMale;
  if (token == "female" || token == "f") return Gender::kFemale;
  if (token == "unknown" || token == "u") return Gender::kUnknown;
  return std::nullopt;
}

EmbeddingArchive::EmbeddingArchive(Eigen::Index dimension)
    : dimension_(dimension) {
  if (dimension <= 0)
    throw DataError(DataError::Kind::kMalformedHeader,
                    "archive dimension must be positive");
}

void EmbeddingArchive::Add(Embedding embedding) {
  const std::size_t record = records_.size() + 1;
  if (embedding.vector.size() != dimension_)
    throw DataError(DataError::Kind::kDimensionMismatch,
                    RecordLabel(record, embedding.segment_id) + " has " +
                        std::to_string(embedding.vector.size()) +
                        " values, expected " + std::to_string(dimension_),
                    record);
  if (embedding.segment_id.empty())
    throw DataError(DataError::Kind::kMalformedHeader,
                    "record " + std::to_string(record) + " has an empty id",
                    record);
  if (!embedding.vector.allFinite())
    throw DataError(DataError::Kind::kNonFinite,
                    RecordLabel(record, embedding.segment_id) +
                        " contains a non-finite value",
                    record);
  auto [it, inserted] = index_.emplace(embedding.segment_id, records_.size());
  if (!inserted)
    throw DataError(DataError::Kind::kDuplicateId,
                    RecordLabel(record, embedding.segment_id) +
                        " duplicates record " + std::to_string(it->second + 1),
                    record);
  records_.push_back(std::move(embedding));
}

std::optional<std::size_t> EmbeddingArchive::Find(
    const std::string &segment_id) const {
  auto it = index_.find(segment_id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t EmbeddingArchive::IndexOf(const std::string &segment_id) const {
  auto pos = Find(segment_id);
  if (!pos)
    throw DataError(DataError::Kind::kUnknownId,
                    "unknown segment id '" + segment_id + "'");
  return *pos;
}

Eigen::MatrixXd EmbeddingArchive::AsColumns() const {
  Eigen::MatrixXd m(dimension_, static_cast<Eigen::Index>(records_.size()));
  for (std::size_t i = 0; i < records_.size(); ++i)
    m.col(static_cast<Eigen::Index>(i)) = records_[i].vector;
  return m;
}

std::vector<std::vector<std::size_t>> GroupBySpeaker(
    const EmbeddingArchive &archive) {
  std::vector<std::vector<std::size_t>> groups;
  std::unordered_map<std::string, std::size_t> group_of;
  for (std::size_t i = 0; i < archive.Size(); ++i) {
    const auto &spk = archive[i].speaker_id;
    if (spk.empty())
      throw DataError(DataError::Kind::kInsufficientData,
                      RecordLabel(i + 1, archive[i].segment_id) +
                          " has no speaker id",
                      i + 1);
    auto [it, inserted] = group_of.emplace(spk, groups.size());
    if (inserted) groups.emplace_back();
    groups[it->second].push_back(i);
  }
  return groups;
}

EmbeddingArchive ReadArchive(std::istream &is) {
  char magic[sizeof(kArchiveMagic)] = {};
  is.read(magic, sizeof(magic));
  const auto got = is.gcount();
  is.clear();
  is.seekg(0);
  if (got == sizeof(magic) &&
      std::memcmp(magic, kArchiveMagic, sizeof(magic)) == 0)
    return ReadBinaryArchive(is);
  return ReadTextArchive(is);
}

EmbeddingArchive LoadArchive(const std::string &path) {
  auto is = OpenForRead(path, true);
  return ReadArchive(is);
}

void WriteArchive(const EmbeddingArchive &archive, std::ostream &os,
                  ArchiveEncoding encoding) {
  if (encoding == ArchiveEncoding::kBinary) {
    using internal::WritePod;
    os.write(kArchiveMagic, sizeof(kArchiveMagic));
    WritePod<std::uint32_t>(os, kArchiveVersion);
    WritePod<std::uint32_t>(os, kEncodingF64Le);
    WritePod<std::uint64_t>(os, static_cast<std::uint64_t>(archive.Dim()));
    WritePod<std::uint64_t>(os, archive.Size());
    for (const auto &e : archive.Records()) {
      internal::WriteString(os, e.segment_id);
      internal::WriteString(os, e.speaker_id);
      WritePod<std::uint8_t>(os, static_cast<std::uint8_t>(e.gender));
      for (Eigen::Index i = 0; i < e.vector.size(); ++i)
        WritePod<double>(os, e.vector(i));
    }
  } else {
    os << "dim " << archive.Dim() << '\n';
    char buf[40];
    for (const auto &e : archive.Records()) {
      os << e.segment_id << ' '
         << (e.speaker_id.empty() ? std::string("-") : e.speaker_id) << ' '
         << GenderName(e.gender);
      for (Eigen::Index i = 0; i < e.vector.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", e.vector(i));
        os << ' ' << buf;
      }
      os << '\n';
    }
  }
  if (!os) throw DataError(DataError::Kind::kIo, "write failed");
}

void SaveArchive(const EmbeddingArchive &archive, const std::string &path,
                 ArchiveEncoding encoding) {
  auto os = OpenForWrite(path, encoding == ArchiveEncoding::kBinary);
  WriteArchive(archive, os, encoding);
}

std::string_view TrialLabelName(TrialLabel label) {
  switch (label) {
    case TrialLabel::kTarget: return "target";
    case TrialLabel::kNontarget: return "nontarget";
    default: return "unlabeled";
  }
}

std::optional<TrialLabel> ParseTrialLabel(std::string_view token) {
  if (token == "target") return TrialLabel::kTarget;
  if (token == "nontarget") return TrialLabel::kNontarget;
  if (token == "unlabeled") return TrialLabel::kUnlabeled;
  return std::nullopt;
}

std::vector<Trial> ReadTrials(std::istream &is,
                              const EmbeddingArchive &archive) {
  std::vector<Trial> trials;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    auto tokens = SplitWhitespace(line);
    if (tokens.empty() || tokens[0][0] == '#') continue;
    if (tokens.size() != 3)
      throw DataError(DataError::Kind::kMalformedHeader,
                      "trial line " + std::to_string(lineno) +
                          ": expected 'enroll_id test_id label'",
                      lineno);
    auto label = ParseTrialLabel(tokens[2]);
    if (!label)
      throw DataError(DataError::Kind::kBadLabel,
                      "trial line " + std::to_string(lineno) +
                          ": unknown label '" + tokens[2] + "'",
                      lineno);
    for (int i = 0; i < 2; ++i)
      if (!archive.Find(tokens[i]))
        throw DataError(DataError::Kind::kUnknownId,
                        "trial line " + std::to_string(lineno) +
                            ": unknown segment id '" + tokens[i] + "'",
                        lineno);
    trials.push_back({tokens[0], tokens[1], *label});
  }
  return trials;
}

std::vector<Trial> LoadTrials(const std::string &path,
                              const EmbeddingArchive &archive) {
  auto is = OpenForRead(path, false);
  return ReadTrials(is, archive);
}

void WriteTrials(const std::vector<Trial> &trials, std::ostream &os) {
  for (const auto &t : trials)
    os << t.enroll_id << ' ' << t.test_id << ' ' << TrialLabelName(t.label)
       << '\n';
  if (!os) throw DataError(DataError::Kind::kIo, "write failed");
}

void SaveTrials(const std::vector<Trial> &trials, const std::string &path) {
  auto os = OpenForWrite(path, false);
  WriteTrials(trials, os);
}

void WriteScores(const std::vector<ScoreRecord> &scores, std::ostream &os) {
  char buf[64];
  for (const auto &s : scores) {
    if (!std::isfinite(s.score))
      throw NumericError("non-finite score for trial " + s.enroll_id + " " +
                         s.test_id);
    std::snprintf(buf, sizeof(buf), "%.6f", s.score);
    os << s.enroll_id << ' ' << s.test_id << ' ' << buf;
    if (s.label != TrialLabel::kUnlabeled) os << ' ' << TrialLabelName(s.label);
    os << '\n';
  }
  if (!os) throw DataError(DataError::Kind::kIo, "write failed");
}

void SaveScores(const std::vector<ScoreRecord> &scores,
                const std::string &path) {
  auto os = OpenForWrite(path, false);
  WriteScores(scores, os);
}

std::vector<ScoreRecord> ReadScores(std::istream &is) {
  std::vector<ScoreRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    auto tokens = SplitWhitespace(line);
    if (tokens.empty() || tokens[0][0] == '#') continue;
    if (tokens.size() != 3 && tokens.size() != 4)
      throw DataError(DataError::Kind::kMalformedHeader,
                      "score line " + std::to_string(lineno) +
                          ": expected 'enroll_id test_id score [label]'",
                      lineno);
    ScoreRecord r;
    r.enroll_id = tokens[0];
    r.test_id = tokens[1];
    if (!ParseDouble(tokens[2], &r.score))
      throw DataError(DataError::Kind::kMalformedHeader,
                      "score line " + std::to_string(lineno) +
                          ": bad score '" + tokens[2] + "'",
                      lineno);
    if (!std::isfinite(r.score))
      throw DataError(DataError::Kind::kNonFinite,
                      "score line " + std::to_string(lineno) +
                          ": non-finite score",
                      lineno);
    if (tokens.size() == 4) {
      auto label = ParseTrialLabel(tokens[3]);
      if (!label)
        throw DataError(DataError::Kind::kBadLabel,
                        "score line " + std::to_string(lineno) +
                            ": unknown label '" + tokens[3] + "'",
                        lineno);
      r.label = *label;
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<ScoreRecord> LoadScores(const std::string &path) {
  auto is = OpenForRead(path, false);
  return ReadScores(is);
}

}  // namespace nplda
