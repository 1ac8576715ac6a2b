// nplda/baselines.h

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

#ifndef NPLDA_BASELINES_H_
#define NPLDA_BASELINES_H_

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "nplda/gplda.h"
#include "nplda/trainer.h"

namespace nplda {

/// Pairwise Gaussian backend over stacked trials eta = [eta_e; eta_t].
struct GaussianBackendModel {
  Eigen::VectorXd mu_t;      // 2k
  Eigen::MatrixXd sigma_t;   // 2k x 2k
  Eigen::VectorXd mu_nt;     // 2k
  Eigen::MatrixXd sigma_nt;  // 2k x 2k

  Eigen::Index Dim() const { return mu_t.size() / 2; }
  void Validate() const;
};

/// Ridge on each class covariance: kGaussianBackendRidge * trace / 2k, or
/// kGaussianBackendRidge itself when the trace is zero.
inline constexpr double kGaussianBackendRidge = 1e-4;

/// Class-conditional sample means and (1/N-normalized) covariances.
/// `stacked` holds one 2k-dimensional trial per column.
GaussianBackendModel FitGaussianBackend(const Eigen::MatrixXd &stacked,
                                        std::span<const std::uint8_t> labels);
/// Trials over processed embeddings.
GaussianBackendModel FitGaussianBackend(const TrialData &processed);
GaussianBackendModel FitGaussianBackend(const std::vector<Trial> &trials,
                                        const EmbeddingArchive &processed);

/// Caches the two inverse covariances for repeated scoring.
class GaussianBackendScorer {
 public:
  explicit GaussianBackendScorer(const GaussianBackendModel &model);

  /// (eta - mu_nt)^T Sigma_nt^-1 (eta - mu_nt)
  ///   - (eta - mu_t)^T Sigma_t^-1 (eta - mu_t).
  double Llr(const Eigen::VectorXd &eta_e, const Eigen::VectorXd &eta_t) const;

 private:
  const GaussianBackendModel &model_;
  Eigen::MatrixXd inv_t_;
  Eigen::MatrixXd inv_nt_;
};

double GaussianBackendLlr(const GaussianBackendModel &model,
                          const Eigen::VectorXd &eta_e,
                          const Eigen::VectorXd &eta_t);

/// 2k^2 + k + 1.
Eigen::Index QuadraticExpansionSize(Eigen::Index k);

/// [vec(e t^T + t e^T); vec(e e^T + t t^T); e + t; 1], row-major vec.
Eigen::VectorXd ExpandQuadratic(const Eigen::VectorXd &eta_e,
                                const Eigen::VectorXd &eta_t);

/// Discriminative PLDA: s = w^T ExpandQuadratic(eta_e, eta_t).
struct DpldaModel {
  Eigen::VectorXd w;

  /// k recovered from the weight length; throws if the length is not
  /// 2k^2 + k + 1 for any k.
  Eigen::Index Dim() const;
};

/// Weights that reproduce GPLDA scoring of (eta - mu) exactly:
/// [vec(P)/2; vec(Q); -(2Q + P) mu; mu^T (2Q + P) mu].
DpldaModel DpldaFromGplda(const ScoreMatrices &sm,
                          const Eigen::VectorXd &mu);
/// mu = 0: [vec(P)/2; vec(Q); 0; 0].
DpldaModel DpldaFromGplda(const ScoreMatrices &sm);

double DpldaScore(const DpldaModel &model, const Eigen::VectorXd &eta_e,
                  const Eigen::VectorXd &eta_t);

struct DpldaTrainResult {
  DpldaModel model;
  /// Objective (mean BCE + lambda ||w - w0||^2) over the full training set;
  /// entry 0 is at w0, entry i after epoch i.
  std::vector<double> epoch_losses;
};

/// Mini-batch Adam on the mean BCE of w^T phi, with the pull toward w0
/// applied as a proximal step after every update.  Uses batch_size, lr,
/// max_epochs, seed, lambda and stratified_batches from `config`.  Aborts
/// with TrainingError if the objective exceeds 10x its initial value.
DpldaTrainResult TrainDplda(const TrialData &processed,
                            const Eigen::VectorXd &w0,
                            const TrainConfig &config);

}  // namespace nplda

#endif  // NPLDA_BASELINES_H_
