// preprocess.cc

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

#include "nplda/preprocess.h"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

namespace nplda {

Eigen::VectorXd PreprocessPipeline::Project(const Eigen::VectorXd &v) const {
  if (v.size() != InputDim())
    throw DimensionError("pipeline expects dimension " +
                         std::to_string(InputDim()) + ", got " +
                         std::to_string(v.size()));
  return lda * (v - mean) - post_mean;
}

Eigen::VectorXd PreprocessPipeline::Apply(const Eigen::VectorXd &v) const {
  return LengthNormalize(Project(v));
}

Eigen::MatrixXd PreprocessPipeline::ApplyColumns(
    const Eigen::MatrixXd &columns) const {
  Eigen::MatrixXd out(OutputDim(), columns.cols());
  for (Eigen::Index j = 0; j < columns.cols(); ++j)
    out.col(j) = Apply(columns.col(j));
  return out;
}

PreprocessPipeline PreprocessPipeline::Identity(Eigen::Index dim) {
  return {Eigen::VectorXd::Zero(dim), Eigen::MatrixXd::Identity(dim, dim),
          Eigen::VectorXd::Zero(dim)};
}

Eigen::VectorXd FitCentering(const Eigen::MatrixXd &columns) {
  if (columns.cols() == 0)
    throw DataError(DataError::Kind::kInsufficientData,
                    "cannot compute the mean of an empty archive");
  return columns.rowwise().mean();
}

Eigen::VectorXd FitCentering(const EmbeddingArchive &archive) {
  return FitCentering(archive.AsColumns());
}

LdaResult FitLda(const Eigen::MatrixXd &columns,
                 const std::vector<std::vector<std::size_t>> &groups,
                 Eigen::Index k) {
  const Eigen::Index d = columns.rows();
  if (k <= 0 || k > d)
    throw DimensionError("LDA dimension " + std::to_string(k) +
                         " must be in [1, " + std::to_string(d) + "]");
  if (static_cast<Eigen::Index>(groups.size()) < k + 1)
    throw DataError(DataError::Kind::kInsufficientData,
                    "LDA to " + std::to_string(k) + " dims needs at least " +
                        std::to_string(k + 1) + " speakers, got " +
                        std::to_string(groups.size()));

  const Eigen::VectorXd global_mean = FitCentering(columns);
  Eigen::MatrixXd between = Eigen::MatrixXd::Zero(d, d);
  Eigen::MatrixXd within = Eigen::MatrixXd::Zero(d, d);
  double total = 0.0;
  for (const auto &group : groups) {
    if (group.empty()) continue;
    Eigen::VectorXd class_mean = Eigen::VectorXd::Zero(d);
    for (auto i : group) class_mean += columns.col(static_cast<Eigen::Index>(i));
    class_mean /= static_cast<double>(group.size());
    for (auto i : group) {
      Eigen::VectorXd diff =
          columns.col(static_cast<Eigen::Index>(i)) - class_mean;
      within.noalias() += diff * diff.transpose();
    }
    Eigen::VectorXd offset = class_mean - global_mean;
    between.noalias() +=
        static_cast<double>(group.size()) * offset * offset.transpose();
    total += static_cast<double>(group.size());
  }
  between /= total;
  within /= total;
  between = 0.5 * (between + between.transpose());
  within = 0.5 * (within + within.transpose());
  within.diagonal().array() += kLdaRidge * within.trace() / static_cast<double>(d);

  Eigen::LLT<Eigen::MatrixXd> llt(within);
  if (llt.info() != Eigen::Success || within.trace() <= 0.0)
    throw NumericError("within-class scatter is singular after regularization");

  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(
      between, within, Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
  if (solver.info() != Eigen::Success)
    throw NumericError("LDA generalized eigensolve failed");

  // Eigen returns ascending eigenvalues.
  LdaResult result;
  result.projection.resize(k, d);
  result.eigenvalues.resize(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const Eigen::Index src = d - 1 - i;
    Eigen::VectorXd row = solver.eigenvectors().col(src);
    row.normalize();
    const double tiny = 1e-12 * row.cwiseAbs().maxCoeff();
    for (Eigen::Index j = 0; j < d; ++j) {
      if (std::abs(row(j)) > tiny) {
        if (row(j) < 0) row = -row;
        break;
      }
    }
    result.projection.row(i) = row.transpose();
    result.eigenvalues(i) = solver.eigenvalues()(src);
  }
  result.between = std::move(between);
  result.within = std::move(within);
  return result;
}

LdaResult FitLda(const EmbeddingArchive &archive, Eigen::Index k) {
  return FitLda(archive.AsColumns(), GroupBySpeaker(archive), k);
}

Eigen::VectorXd LengthNormalize(const Eigen::VectorXd &v) {
  if (!v.allFinite())
    throw NumericError("length normalization of a non-finite vector");
  const double norm = v.norm();
  if (norm < 1e-12)
    throw NumericError("length normalization of a zero vector");
  return v / norm;
}

Eigen::Index DefaultLdaDim(Eigen::Index d, std::size_t num_speakers) {
  const Eigen::Index by_speakers =
      num_speakers > 0 ? static_cast<Eigen::Index>(num_speakers) - 1 : 0;
  return std::max<Eigen::Index>(
      1, std::min<Eigen::Index>({170, d, by_speakers}));
}

PreprocessPipeline FitPipeline(const EmbeddingArchive &archive,
                               std::optional<Eigen::Index> k) {
  const Eigen::MatrixXd columns = archive.AsColumns();
  const auto groups = GroupBySpeaker(archive);
  const Eigen::Index dim = k.value_or(DefaultLdaDim(archive.Dim(), groups.size()));

  PreprocessPipeline pipeline;
  pipeline.mean = FitCentering(columns);
  const Eigen::MatrixXd centered = columns.colwise() - pipeline.mean;
  pipeline.lda = FitLda(centered, groups, dim).projection;
  pipeline.post_mean = (pipeline.lda * centered).rowwise().mean();
  return pipeline;
}

}  // namespace nplda
