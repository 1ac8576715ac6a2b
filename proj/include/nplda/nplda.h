// nplda/nplda.h

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

#ifndef NPLDA_NPLDA_H_
#define NPLDA_NPLDA_H_

#include <array>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "nplda/gplda.h"
#include "nplda/preprocess.h"

namespace nplda {

/// Parameters of the pairwise network
///
///   f(x) = a2 * LengthNormalize(a1 * x + b1) + b2
///   s(x_e, x_t) = f_e^T q f_e + f_t^T q f_t + f_e^T p f_t
///
/// plus one learnable decision threshold per cost operating point and the
/// fixed sigmoid warp factor used by the soft DCF loss.
struct NpldaParams {
  Eigen::MatrixXd a1;  // k x d
  Eigen::VectorXd b1;  // k
  Eigen::MatrixXd a2;  // k x k
  Eigen::VectorXd b2;  // k
  Eigen::MatrixXd p;   // k x k, symmetric
  Eigen::MatrixXd q;   // k x k, symmetric
  Eigen::VectorXd thresholds;
  double alpha = 20.0;

  Eigen::Index InputDim() const { return a1.cols(); }
  Eigen::Index Dim() const { return a1.rows(); }

  /// Shapes, finiteness, symmetry of p and q within 1e-10, alpha > 0.
  void Validate() const;
  /// p <- (p + p^T) / 2, q <- (q + q^T) / 2.
  void Symmetrize();
};

inline constexpr std::size_t kNumNpldaBlocks = 7;
inline constexpr std::array<std::string_view, kNumNpldaBlocks> kNpldaBlockNames = {
    "a1", "b1", "a2", "b2", "p", "q", "thresholds"};

/// Same shapes as NpldaParams, without alpha.
struct BatchGradients {
  Eigen::MatrixXd a1;
  Eigen::VectorXd b1;
  Eigen::MatrixXd a2;
  Eigen::VectorXd b2;
  Eigen::MatrixXd p;
  Eigen::MatrixXd q;
  Eigen::VectorXd thresholds;

  static BatchGradients ZerosLike(const NpldaParams &params);
};

/// Contiguous views of every learnable block, in kNpldaBlockNames order.
std::array<std::span<double>, kNumNpldaBlocks> ParamBlocks(NpldaParams &params);
std::array<std::span<const double>, kNumNpldaBlocks> GradBlocks(
    const BatchGradients &grads);

/// Builds the network that reproduces GPLDA scoring: a1 = LDA, b1 folds the
/// global mean and the post-LDA mean (both precede length normalization),
/// a2 = I, b2 = -model.mu, (p, q) copied, thresholds = log(beta_j).
NpldaParams InitFromGplda(const PreprocessPipeline &pipeline,
                          const GpldaModel &model, const ScoreMatrices &sm,
                          std::span<const double> betas, double alpha = 20.0);

/// f(x): the embedding after both affine layers.
Eigen::VectorXd NpldaEmbed(const NpldaParams &params, const Eigen::VectorXd &x);

double NpldaForward(const NpldaParams &params, const Eigen::VectorXd &x_e,
                    const Eigen::VectorXd &x_t);

/// A trial as two column indices into an embedding matrix.
struct TrialIndex {
  std::size_t enroll;
  std::size_t test;
};

/// Scores every trial; `embeddings` holds raw inputs as columns.
std::vector<double> NpldaForwardBatch(const NpldaParams &params,
                                      const Eigen::MatrixXd &embeddings,
                                      std::span<const TrialIndex> trials);

/// Chain rule from per-score loss gradients back to every block.  Threshold
/// gradients come straight from the loss.  Contributions are summed in trial
/// order.  Throws NumericError naming the block on a non-finite gradient.
BatchGradients NpldaBackward(const NpldaParams &params,
                             const Eigen::MatrixXd &embeddings,
                             std::span<const TrialIndex> trials,
                             std::span<const double> d_scores,
                             std::span<const double> d_thresholds);

}  // namespace nplda

#endif  // NPLDA_NPLDA_H_
