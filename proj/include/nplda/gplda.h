// nplda/gplda.h

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

#ifndef NPLDA_GPLDA_H_
#define NPLDA_GPLDA_H_

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nplda/dataio.h"
#include "nplda/preprocess.h"

namespace nplda {

/// Generative PLDA:  eta = mu + phi * omega + eps,  omega ~ N(0, I_r),
/// eps ~ N(0, sigma).
struct GpldaModel {
  Eigen::MatrixXd phi;    // k x r speaker subspace
  Eigen::MatrixXd sigma;  // k x k residual covariance, SPD
  Eigen::VectorXd mu;     // k

  Eigen::Index Dim() const { return phi.rows(); }
  Eigen::Index Rank() const { return phi.cols(); }

  /// phi phi^T + sigma.
  Eigen::MatrixXd TotalCovariance() const;
  /// phi phi^T.
  Eigen::MatrixXd AcrossCovariance() const;

  /// Throws if shapes disagree, sigma is not symmetric within 1e-10 or has a
  /// non-positive eigenvalue.
  void Validate() const;
};

/// The P and Q matrices of the quadratic LLR score.
struct ScoreMatrices {
  Eigen::MatrixXd p;
  Eigen::MatrixXd q;
};

struct GpldaEmConfig {
  Eigen::Index rank = 0;  // 0 means full rank (r = k)
  int iterations = 10;
  /// Train on one averaged vector per speaker instead of every utterance.
  bool average_per_speaker = false;
  /// Eigenvalues of sigma are floored at this fraction of the largest one.
  double sigma_floor = 1e-8;
  /// A warning is attached when the floor hits more than this fraction of
  /// the dimensions in any M-step.
  double floor_warning_fraction = 0.25;
};

struct GpldaFitResult {
  GpldaModel model;
  /// Marginal log-likelihood of the training data; entry 0 is the initial
  /// model, entry i the model after EM iteration i.
  std::vector<double> log_likelihoods;
  std::vector<std::string> warnings;
};

/// Sufficient statistics of speaker-grouped data after mean removal.
struct GpldaStats {
  Eigen::VectorXd mean;
  std::vector<double> counts;            // n_s
  std::vector<Eigen::VectorXd> sums;     // sum of centered vectors, per speaker
  Eigen::MatrixXd scatter;               // sum of x x^T over all records
  double num_records = 0.0;
  /// Moment-based starting point for EM: residual covariance and the
  /// between-speaker covariance with the residual share removed.
  Eigen::MatrixXd init_within;
  Eigen::MatrixXd init_between;

  static GpldaStats Compute(const Eigen::MatrixXd &columns,
                            const std::vector<std::vector<std::size_t>> &groups,
                            bool average_per_speaker);
};

/// EM training.  Columns are processed embeddings; `groups` lists the column
/// indices of each speaker.
GpldaFitResult FitGpldaEm(const Eigen::MatrixXd &columns,
                          const std::vector<std::vector<std::size_t>> &groups,
                          const GpldaEmConfig &config = {});
GpldaFitResult FitGpldaEm(const EmbeddingArchive &processed,
                          const GpldaEmConfig &config = {});

/// Marginal log-likelihood sum_s log p(x_s1 .. x_sn) with omega integrated
/// out.  `model.mu` is ignored; the stats are already centered.
double GpldaLogLikelihood(const GpldaModel &model, const GpldaStats &stats);

/// One E-step plus M-step.  Returns the number of floored sigma eigenvalues
/// through `num_floored` when non-null.
GpldaModel GpldaEmIteration(const GpldaModel &model, const GpldaStats &stats,
                            double sigma_floor, int *num_floored = nullptr);

/// Q = T^-1 - (T - A T^-1 A)^-1,  P = T^-1 A (T - A T^-1 A)^-1,
/// with T the total and A the across-class covariance.
ScoreMatrices DeriveScoreMatrices(const GpldaModel &model);

/// eta_e^T Q eta_e + eta_t^T Q eta_t + eta_e^T P eta_t.
double GpldaScore(const ScoreMatrices &sm, const Eigen::VectorXd &eta_e,
                  const Eigen::VectorXd &eta_t);

/// Complete GPLDA backend: preprocessing, mean removal with the model mean,
/// quadratic scoring.
struct GpldaBackend {
  PreprocessPipeline pipeline;
  GpldaModel model;
  ScoreMatrices sm;

  GpldaBackend() = default;
  GpldaBackend(PreprocessPipeline p, GpldaModel m);

  /// Scores two processed (pipeline-output) vectors.
  double ScoreProcessed(const Eigen::VectorXd &eta_e,
                        const Eigen::VectorXd &eta_t) const;
  /// Scores two raw embeddings.
  double Score(const Eigen::VectorXd &x_e, const Eigen::VectorXd &x_t) const;
};

}  // namespace nplda

#endif  // NPLDA_GPLDA_H_
