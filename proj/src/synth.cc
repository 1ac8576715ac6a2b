// synth.cc

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

#include "nplda/synth.h"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "nplda/rng.h"

namespace nplda {

namespace {

DataError SpecError(const std::string &what) {
  return DataError(DataError::Kind::kMalformedHeader, "synth spec: " + what);
}

std::vector<double> ParseNumbers(const std::string &key,
                                 const std::string &value) {
  std::vector<double> out;
  std::istringstream ss(value);
  std::string tok;
  while (ss >> tok) {
    double v;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size())
      throw SpecError("bad number '" + tok + "' for key '" + key + "'");
    out.push_back(v);
  }
  if (out.empty()) throw SpecError("key '" + key + "' has no value");
  return out;
}

std::uint64_t ParseUnsigned(const std::string &key, const std::string &value) {
  std::uint64_t v;
  auto [ptr, ec] =
      std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size())
    throw SpecError("key '" + key + "' needs a non-negative integer, got '" +
                    value + "'");
  return v;
}

std::string Trim(const std::string &s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

void SynthSpec::Validate() const {
  if (dimension <= 0) throw SpecError("dimension must be positive");
  const Eigen::Index r = Rank();
  if (r <= 0 || r > dimension)
    throw SpecError("rank must be in [1, dimension]");
  if (n_speakers == 0 || segments_per_speaker == 0)
    throw SpecError("speaker and segment counts must be positive");
  if (phi.size() != 0 && (phi.rows() != dimension || phi.cols() != r))
    throw SpecError("phi must be dimension x rank");
  if (phi_spectrum.size() != 0 && phi_spectrum.size() != r)
    throw SpecError("phi_spectrum needs one value per rank column");
  if (sigma.rows() != dimension || sigma.cols() != dimension)
    throw SpecError("sigma must be dimension x dimension");
  if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() >
      1e-12 * std::max(1.0, sigma.cwiseAbs().maxCoeff()))
    throw SpecError("sigma must be symmetric");
  if (Eigen::LLT<Eigen::MatrixXd>(sigma).info() != Eigen::Success)
    throw SpecError("sigma must be positive definite");
  if (mean.size() != 0 && mean.size() != dimension)
    throw SpecError("mean must have dimension entries");
}

Eigen::MatrixXd SynthSpec::ResolvedPhi() const {
  if (phi.size() != 0) return phi;
  Rng rng(phi_seed);
  Eigen::MatrixXd out = rng.NormalMatrix(dimension, Rank());
  if (phi_spectrum.size() != 0) out = out * phi_spectrum.asDiagonal();
  return out;
}

Eigen::MatrixXd RandomRotation(Eigen::Index k, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(rng.NormalMatrix(k, k));
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < k; ++j)
    if (r(j, j) < 0) q.col(j) = -q.col(j);
  return q;
}

SynthSpec ParseSynthSpec(std::istream &is) {
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw SpecError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = Trim(line.substr(0, eq));
    const std::string value = Trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw SpecError("line " + std::to_string(lineno) + ": empty key or value");
    if (!kv.emplace(key, value).second)
      throw SpecError("line " + std::to_string(lineno) + ": duplicate key '" +
                      key + "'");
  }

  static const char *kKnown[] = {"dimension", "rank",  "speakers", "segments",
                                 "seed",      "phi",   "phi_spectrum",
                                 "phi_seed",  "sigma", "sigma_rotation_seed",
                                 "mean",      "prefix"};
  for (const auto &[key, value] : kv) {
    bool known = false;
    for (const char *k : kKnown) known = known || key == k;
    if (!known) throw SpecError("unknown key '" + key + "'");
  }
  for (const char *required : {"dimension", "speakers", "segments", "sigma"})
    if (!kv.count(required))
      throw SpecError(std::string("missing required key '") + required + "'");

  SynthSpec spec;
  spec.dimension = static_cast<Eigen::Index>(ParseUnsigned("dimension", kv["dimension"]));
  if (spec.dimension == 0) throw SpecError("dimension must be positive");
  const Eigen::Index k = spec.dimension;
  if (kv.count("rank"))
    spec.rank = static_cast<Eigen::Index>(ParseUnsigned("rank", kv["rank"]));
  const Eigen::Index r = spec.Rank();
  spec.n_speakers = ParseUnsigned("speakers", kv["speakers"]);
  spec.segments_per_speaker = ParseUnsigned("segments", kv["segments"]);
  if (kv.count("seed")) spec.seed = ParseUnsigned("seed", kv["seed"]);
  spec.phi_seed = kv.count("phi_seed") ? ParseUnsigned("phi_seed", kv["phi_seed"])
                                       : spec.seed;
  if (kv.count("prefix")) spec.speaker_prefix = kv["prefix"];

  if (kv.count("phi") && kv["phi"] != "random") {
    auto values = ParseNumbers("phi", kv["phi"]);
    if (static_cast<Eigen::Index>(values.size()) != k * r)
      throw SpecError("phi needs dimension*rank values");
    spec.phi.resize(k, r);
    for (Eigen::Index i = 0; i < k; ++i)
      for (Eigen::Index j = 0; j < r; ++j)
        spec.phi(i, j) = values[static_cast<std::size_t>(i * r + j)];
  }
  if (kv.count("phi_spectrum")) {
    auto values = ParseNumbers("phi_spectrum", kv["phi_spectrum"]);
    if (values.size() == 1) values.assign(static_cast<std::size_t>(r), values[0]);
    if (static_cast<Eigen::Index>(values.size()) != r)
      throw SpecError("phi_spectrum needs 1 or rank values");
    spec.phi_spectrum = Eigen::Map<Eigen::VectorXd>(values.data(), r);
  }

  auto sigma_values = ParseNumbers("sigma", kv["sigma"]);
  const auto ns = static_cast<Eigen::Index>(sigma_values.size());
  if (ns == 1) {
    spec.sigma = sigma_values[0] * Eigen::MatrixXd::Identity(k, k);
  } else if (ns == k) {
    spec.sigma = Eigen::Map<Eigen::VectorXd>(sigma_values.data(), k).asDiagonal();
  } else if (ns == k * k) {
    spec.sigma = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                          Eigen::RowMajor>>(sigma_values.data(), k, k);
  } else {
    throw SpecError("sigma needs 1, dimension or dimension^2 values");
  }
  if (kv.count("sigma_rotation_seed")) {
    const Eigen::MatrixXd rot = RandomRotation(
        k, ParseUnsigned("sigma_rotation_seed", kv["sigma_rotation_seed"]));
    spec.sigma = rot * spec.sigma * rot.transpose();
    spec.sigma = (0.5 * (spec.sigma + spec.sigma.transpose())).eval();
  }

  if (kv.count("mean")) {
    auto values = ParseNumbers("mean", kv["mean"]);
    if (values.size() == 1) values.assign(static_cast<std::size_t>(k), values[0]);
    if (static_cast<Eigen::Index>(values.size()) != k)
      throw SpecError("mean needs 1 or dimension values");
    spec.mean = Eigen::Map<Eigen::VectorXd>(values.data(), k);
  }
  spec.Validate();
  return spec;
}

SynthSpec LoadSynthSpec(const std::string &path) {
  std::ifstream is(path);
  if (!is) throw DataError(DataError::Kind::kIo, "cannot open " + path);
  return ParseSynthSpec(is);
}

EmbeddingArchive Generate(const SynthSpec &spec) {
  spec.Validate();
  const Eigen::Index k = spec.dimension;
  const Eigen::MatrixXd phi = spec.ResolvedPhi();
  const Eigen::MatrixXd chol = Eigen::LLT<Eigen::MatrixXd>(spec.sigma).matrixL();
  const Eigen::VectorXd mean =
      spec.mean.size() ? spec.mean : Eigen::VectorXd::Zero(k);

  Rng rng(spec.seed);
  EmbeddingArchive archive(k);
  char buf[64];
  for (std::size_t s = 0; s < spec.n_speakers; ++s) {
    std::snprintf(buf, sizeof(buf), "%04zu", s);
    const std::string speaker = spec.speaker_prefix + buf;
    const Gender gender = s % 2 == 0 ? Gender::kMale : Gender::kFemale;
    const Eigen::VectorXd center = mean + phi * rng.NormalVector(phi.cols());
    for (std::size_t j = 0; j < spec.segments_per_speaker; ++j) {
      std::snprintf(buf, sizeof(buf), "-%03zu", j);
      archive.Add({speaker + buf, speaker, gender,
                   center + chol * rng.NormalVector(k)});
    }
  }
  return archive;
}

}  // namespace nplda
