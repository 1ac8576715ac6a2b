// nplda/scoring.h

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

#ifndef NPLDA_SCORING_H_
#define NPLDA_SCORING_H_

#include <memory>
#include <vector>

#include "nplda/dataio.h"
#include "nplda/model-io.h"

namespace nplda {

/// Scores raw embeddings with any backend.  Keeps derived quantities (PLDA
/// scoring matrices, Gaussian backend inverses) so repeated calls are cheap.
class Scorer {
 public:
  explicit Scorer(ScoringModel model);
  Scorer(const Scorer &) = delete;
  Scorer &operator=(const Scorer &) = delete;

  Eigen::Index InputDim() const { return model_.InputDim(); }
  /// Maps a raw embedding into the space the backend scores in.
  Eigen::VectorXd Prepare(const Eigen::VectorXd &x) const;
  double ScorePrepared(const Eigen::VectorXd &e, const Eigen::VectorXd &t) const;
  double Score(const Eigen::VectorXd &x_e, const Eigen::VectorXd &x_t) const;

 private:
  ScoringModel model_;
  ScoreMatrices sm_;
  // Refers into model_, so Scorer is not copyable.
  std::unique_ptr<GaussianBackendScorer> gb_;
};

/// One record per trial, in input order.  Each referenced embedding is
/// prepared once.  Throws DimensionError naming both dimensions when the
/// archive does not match the model, DataError(kUnknownId) for missing ids.
std::vector<ScoreRecord> ScoreTrials(const Scorer &scorer,
                                     const EmbeddingArchive &archive,
                                     const std::vector<Trial> &trials);

}  // namespace nplda

#endif  // NPLDA_SCORING_H_
