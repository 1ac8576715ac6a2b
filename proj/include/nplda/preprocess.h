// nplda/preprocess.h

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

#ifndef NPLDA_PREPROCESS_H_
#define NPLDA_PREPROCESS_H_

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "nplda/dataio.h"

namespace nplda {

/// Centering, LDA projection and length normalization, applied in that
/// order:  apply(v) = LengthNormalize(lda * (v - mean) - post_mean).
struct PreprocessPipeline {
  Eigen::VectorXd mean;       // d
  Eigen::MatrixXd lda;        // k x d, full row rank
  Eigen::VectorXd post_mean;  // k, mean of the projected training set

  Eigen::Index InputDim() const { return lda.cols(); }
  Eigen::Index OutputDim() const { return lda.rows(); }

  Eigen::VectorXd Apply(const Eigen::VectorXd &v) const;
  /// Applies the pipeline to every column of `columns`.
  Eigen::MatrixXd ApplyColumns(const Eigen::MatrixXd &columns) const;

  /// Mean removal and projection without length normalization.
  Eigen::VectorXd Project(const Eigen::VectorXd &v) const;

  static PreprocessPipeline Identity(Eigen::Index dim);
};

/// Arithmetic mean of the columns.
Eigen::VectorXd FitCentering(const Eigen::MatrixXd &columns);
Eigen::VectorXd FitCentering(const EmbeddingArchive &archive);

struct LdaResult {
  Eigen::MatrixXd projection;   // k x d, unit-length rows
  Eigen::VectorXd eigenvalues;  // k, non-increasing
  Eigen::MatrixXd between;      // S_b
  Eigen::MatrixXd within;       // S_w including the ridge
};

/// Relative ridge added to the within-class scatter:
/// S_w + kLdaRidge * trace(S_w) / d * I.
inline constexpr double kLdaRidge = 1e-6;

/// Solves S_b r = lambda S_w r and keeps the k leading eigenvectors as rows,
/// each scaled to unit length with its first nonzero component positive.
/// Scatters are normalized by the number of vectors; the global mean is
/// removed internally so the result does not depend on translation.
/// `groups` lists the column indices of each class.
LdaResult FitLda(const Eigen::MatrixXd &columns,
                 const std::vector<std::vector<std::size_t>> &groups,
                 Eigen::Index k);
LdaResult FitLda(const EmbeddingArchive &archive, Eigen::Index k);

/// v / ||v||; throws NumericError when ||v|| < 1e-12 or v is non-finite.
Eigen::VectorXd LengthNormalize(const Eigen::VectorXd &v);

/// min(170, d, num_speakers - 1).
Eigen::Index DefaultLdaDim(Eigen::Index d, std::size_t num_speakers);

/// Fits centering, LDA (to `k` dims, or DefaultLdaDim) and the post-LDA mean
/// on a speaker-labelled archive.
PreprocessPipeline FitPipeline(const EmbeddingArchive &archive,
                               std::optional<Eigen::Index> k = std::nullopt);

}  // namespace nplda

#endif  // NPLDA_PREPROCESS_H_
