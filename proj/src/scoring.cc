// scoring.cc

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

#include "nplda/scoring.h"

#include <string>
#include <unordered_map>

namespace nplda {

Scorer::Scorer(ScoringModel model) : model_(std::move(model)) {
  if (const auto *g = std::get_if<GpldaModel>(&model_.backend)) {
    sm_ = DeriveScoreMatrices(*g);
  } else if (const auto *gb = std::get_if<GaussianBackendModel>(&model_.backend)) {
    gb_ = std::make_unique<GaussianBackendScorer>(*gb);
  }
}

Eigen::VectorXd Scorer::Prepare(const Eigen::VectorXd &x) const {
  if (x.size() != InputDim())
    throw DimensionError("model expects dimension " +
                         std::to_string(InputDim()) + ", embedding has " +
                         std::to_string(x.size()));
  if (const auto *n = std::get_if<NpldaParams>(&model_.backend))
    return NpldaEmbed(*n, x);
  return model_.pipeline.Apply(x);
}

double Scorer::ScorePrepared(const Eigen::VectorXd &e,
                             const Eigen::VectorXd &t) const {
  switch (model_.backend.index()) {
    case 0: {
      const Eigen::VectorXd &mu = std::get<GpldaModel>(model_.backend).mu;
      return GpldaScore(sm_, e - mu, t - mu);
    }
    case 1:
      return gb_->Llr(e, t);
    case 2:
      return DpldaScore(std::get<DpldaModel>(model_.backend), e, t);
    default: {
      // Prepared vectors are the embedding-layer outputs.
      const auto &n = std::get<NpldaParams>(model_.backend);
      return e.dot(n.q * e) + t.dot(n.q * t) +
             0.5 * (e.dot(n.p * t) + t.dot(n.p * e));
    }
  }
}

double Scorer::Score(const Eigen::VectorXd &x_e,
                     const Eigen::VectorXd &x_t) const {
  return ScorePrepared(Prepare(x_e), Prepare(x_t));
}

std::vector<ScoreRecord> ScoreTrials(const Scorer &scorer,
                                     const EmbeddingArchive &archive,
                                     const std::vector<Trial> &trials) {
  if (archive.Dim() != scorer.InputDim())
    throw DimensionError("model dimension " +
                         std::to_string(scorer.InputDim()) +
                         " does not match archive dimension " +
                         std::to_string(archive.Dim()));
  std::unordered_map<std::size_t, Eigen::VectorXd> prepared;
  auto get = [&](const std::string &id) -> const Eigen::VectorXd & {
    const std::size_t idx = archive.IndexOf(id);
    auto it = prepared.find(idx);
    if (it == prepared.end())
      it = prepared.emplace(idx, scorer.Prepare(archive[idx].vector)).first;
    return it->second;
  };
  std::vector<ScoreRecord> out;
  out.reserve(trials.size());
  for (const Trial &t : trials) {
    const double s = scorer.ScorePrepared(get(t.enroll_id), get(t.test_id));
    out.push_back({t.enroll_id, t.test_id, s, t.label});
  }
  return out;
}

}  // namespace nplda
