// gplda.cc

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

#include "nplda/gplda.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Eigenvalues>

namespace nplda {

namespace {

Eigen::MatrixXd Symmetrize(const Eigen::MatrixXd &m) {
  return 0.5 * (m + m.transpose());
}

// Raises eigenvalues below floor_fraction * max to that value.
Eigen::MatrixXd FloorEigenvalues(const Eigen::MatrixXd &m,
                                 double floor_fraction, int *num_floored) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Symmetrize(m));
  Eigen::VectorXd values = es.eigenvalues();
  const double floor = floor_fraction * std::max(values.maxCoeff(), 0.0);
  int floored = 0;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (values(i) < floor) {
      values(i) = floor;
      ++floored;
    }
  }
  if (num_floored) *num_floored = floored;
  if (floored == 0) return Symmetrize(m);
  return Symmetrize(es.eigenvectors() * values.asDiagonal() *
                    es.eigenvectors().transpose());
}

Eigen::LLT<Eigen::MatrixXd> CheckedLlt(const Eigen::MatrixXd &m,
                                       const char *what) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success || !m.allFinite())
    throw NumericError(std::string(what) + " is not positive definite");
  return llt;
}

double LogDetFromLlt(const Eigen::LLT<Eigen::MatrixXd> &llt) {
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

}  // namespace

Eigen::MatrixXd GpldaModel::TotalCovariance() const {
  return phi * phi.transpose() + sigma;
}

Eigen::MatrixXd GpldaModel::AcrossCovariance() const {
  return phi * phi.transpose();
}

void GpldaModel::Validate() const {
  const Eigen::Index k = phi.rows();
  if (k == 0 || sigma.rows() != k || sigma.cols() != k || mu.size() != k)
    throw DimensionError("inconsistent GPLDA model shapes");
  if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-10)
    throw NumericError("GPLDA sigma is not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma,
                                                    Eigen::EigenvaluesOnly);
  if (!(es.eigenvalues().minCoeff() > 0.0))
    throw NumericError("GPLDA sigma is not positive definite");
}

GpldaStats GpldaStats::Compute(
    const Eigen::MatrixXd &columns,
    const std::vector<std::vector<std::size_t>> &groups,
    bool average_per_speaker) {
  const Eigen::Index k = columns.rows();
  std::vector<Eigen::VectorXd> speaker_means;
  std::vector<double> speaker_counts;
  for (const auto &g : groups) {
    if (g.empty()) continue;
    Eigen::VectorXd m = Eigen::VectorXd::Zero(k);
    for (auto i : g) m += columns.col(static_cast<Eigen::Index>(i));
    speaker_means.push_back(m / static_cast<double>(g.size()));
    speaker_counts.push_back(static_cast<double>(g.size()));
  }
  const std::size_t num_speakers = speaker_means.size();
  if (num_speakers < 2)
    throw DataError(DataError::Kind::kInsufficientData,
                    "GPLDA training needs at least 2 speakers");

  GpldaStats stats;
  if (average_per_speaker) {
    stats.mean = Eigen::VectorXd::Zero(k);
    for (const auto &m : speaker_means) stats.mean += m;
    stats.mean /= static_cast<double>(num_speakers);
  } else {
    stats.mean = columns.rowwise().mean();
  }

  // Within-speaker covariance of individual records.
  Eigen::MatrixXd within = Eigen::MatrixXd::Zero(k, k);
  double total = 0.0;
  double mean_inv_count = 0.0;
  std::size_t s = 0;
  for (const auto &g : groups) {
    if (g.empty()) continue;
    for (auto i : g) {
      Eigen::VectorXd diff =
          columns.col(static_cast<Eigen::Index>(i)) - speaker_means[s];
      within.noalias() += diff * diff.transpose();
    }
    total += static_cast<double>(g.size());
    mean_inv_count += 1.0 / static_cast<double>(g.size());
    ++s;
  }
  within /= total;
  mean_inv_count /= static_cast<double>(num_speakers);

  Eigen::MatrixXd between = Eigen::MatrixXd::Zero(k, k);
  for (const auto &m : speaker_means) {
    Eigen::VectorXd c = m - stats.mean;
    between.noalias() += c * c.transpose();
  }
  between /= static_cast<double>(num_speakers);

  if (within.trace() <= 0.0) {
    // No speaker has more than one record; split the spread evenly.
    within = 0.5 * between / std::max(mean_inv_count, 1e-12);
  }
  const Eigen::MatrixXd residual_of_mean = mean_inv_count * within;
  stats.init_between = Symmetrize(between - residual_of_mean);
  stats.init_within = Symmetrize(average_per_speaker ? residual_of_mean : within);

  stats.scatter = Eigen::MatrixXd::Zero(k, k);
  if (average_per_speaker) {
    for (const auto &m : speaker_means) {
      Eigen::VectorXd c = m - stats.mean;
      stats.counts.push_back(1.0);
      stats.sums.push_back(c);
      stats.scatter.noalias() += c * c.transpose();
    }
    stats.num_records = static_cast<double>(num_speakers);
  } else {
    s = 0;
    for (const auto &g : groups) {
      if (g.empty()) continue;
      Eigen::VectorXd sum = Eigen::VectorXd::Zero(k);
      for (auto i : g) {
        Eigen::VectorXd c = columns.col(static_cast<Eigen::Index>(i)) - stats.mean;
        sum += c;
        stats.scatter.noalias() += c * c.transpose();
      }
      stats.counts.push_back(speaker_counts[s]);
      stats.sums.push_back(std::move(sum));
      ++s;
    }
    stats.num_records = total;
  }
  stats.scatter = Symmetrize(stats.scatter);
  return stats;
}

double GpldaLogLikelihood(const GpldaModel &model, const GpldaStats &stats) {
  const Eigen::Index k = model.Dim();
  const Eigen::Index r = model.Rank();
  auto sigma_llt = CheckedLlt(model.sigma, "PLDA residual covariance");
  const double logdet_sigma = LogDetFromLlt(sigma_llt);
  const Eigen::MatrixXd sigma_inv =
      sigma_llt.solve(Eigen::MatrixXd::Identity(k, k));
  const Eigen::MatrixXd w = model.phi.transpose() * sigma_inv;  // r x k
  const Eigen::MatrixXd j = w * model.phi;                       // r x r

  const double log2pi = std::log(2.0 * std::numbers::pi);
  double ll = -0.5 * (stats.num_records * (static_cast<double>(k) * log2pi +
                                           logdet_sigma) +
                      (sigma_inv.cwiseProduct(stats.scatter)).sum());
  for (std::size_t s = 0; s < stats.counts.size(); ++s) {
    Eigen::MatrixXd precision =
        Eigen::MatrixXd::Identity(r, r) + stats.counts[s] * j;
    auto llt = CheckedLlt(precision, "speaker posterior precision");
    const Eigen::VectorXd b = w * stats.sums[s];
    ll += 0.5 * b.dot(llt.solve(b)) - 0.5 * LogDetFromLlt(llt);
  }
  return ll;
}

GpldaModel GpldaEmIteration(const GpldaModel &model, const GpldaStats &stats,
                            double sigma_floor, int *num_floored) {
  const Eigen::Index k = model.Dim();
  const Eigen::Index r = model.Rank();
  auto sigma_llt = CheckedLlt(model.sigma, "PLDA residual covariance");
  const Eigen::MatrixXd w =
      sigma_llt.solve(model.phi).transpose();  // phi^T sigma^-1, r x k
  const Eigen::MatrixXd j = w * model.phi;

  // E-step: speaker posteriors N(omega_hat, L^-1), L = I + n phi^T sigma^-1 phi.
  Eigen::MatrixXd cross = Eigen::MatrixXd::Zero(k, r);   // sum_s S_s omega^T
  Eigen::MatrixXd second = Eigen::MatrixXd::Zero(r, r);  // sum_s n E[w w^T]
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(r, r);
  for (std::size_t s = 0; s < stats.counts.size(); ++s) {
    const double n = stats.counts[s];
    auto llt = CheckedLlt(eye + n * j, "speaker posterior precision");
    const Eigen::VectorXd omega = llt.solve(w * stats.sums[s]);
    cross.noalias() += stats.sums[s] * omega.transpose();
    second.noalias() += n * (llt.solve(eye) + omega * omega.transpose());
  }

  // M-step.
  GpldaModel next;
  next.mu = model.mu;
  auto second_llt = CheckedLlt(Symmetrize(second), "EM second moment");
  next.phi = second_llt.solve(cross.transpose()).transpose();
  Eigen::MatrixXd sigma =
      (stats.scatter - next.phi * cross.transpose()) / stats.num_records;
  next.sigma = FloorEigenvalues(sigma, sigma_floor, num_floored);
  return next;
}

GpldaFitResult FitGpldaEm(const Eigen::MatrixXd &columns,
                          const std::vector<std::vector<std::size_t>> &groups,
                          const GpldaEmConfig &config) {
  const Eigen::Index k = columns.rows();
  const Eigen::Index r = config.rank == 0 ? k : config.rank;
  if (r < 1 || r > k)
    throw DimensionError("PLDA rank " + std::to_string(r) +
                         " is not feasible for dimension " + std::to_string(k));
  if (config.iterations < 0)
    throw Error("negative EM iteration count");

  const GpldaStats stats =
      GpldaStats::Compute(columns, groups, config.average_per_speaker);

  GpldaFitResult result;
  GpldaModel &model = result.model;
  model.mu = stats.mean;
  int floored = 0;
  model.sigma = FloorEigenvalues(stats.init_within, config.sigma_floor, &floored);
  {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(stats.init_between);
    const double scale = std::max(model.sigma.trace() / static_cast<double>(k), 1e-30);
    model.phi.resize(k, r);
    for (Eigen::Index i = 0; i < r; ++i) {
      const Eigen::Index src = k - 1 - i;
      const double value = std::max(es.eigenvalues()(src), 1e-3 * scale);
      model.phi.col(i) = es.eigenvectors().col(src) * std::sqrt(value);
    }
  }

  result.log_likelihoods.push_back(GpldaLogLikelihood(model, stats));
  for (int it = 0; it < config.iterations; ++it) {
    model = GpldaEmIteration(model, stats, config.sigma_floor, &floored);
    if (static_cast<double>(floored) >
        config.floor_warning_fraction * static_cast<double>(k))
      result.warnings.push_back("iteration " + std::to_string(it + 1) + ": " +
                                std::to_string(floored) + " of " +
                                std::to_string(k) +
                                " sigma eigenvalues hit the floor");
    result.log_likelihoods.push_back(GpldaLogLikelihood(model, stats));
  }
  return result;
}

GpldaFitResult FitGpldaEm(const EmbeddingArchive &processed,
                          const GpldaEmConfig &config) {
  return FitGpldaEm(processed.AsColumns(), GroupBySpeaker(processed), config);
}

ScoreMatrices DeriveScoreMatrices(const GpldaModel &model) {
  const Eigen::Index k = model.Dim();
  const Eigen::MatrixXd total = model.TotalCovariance();
  const Eigen::MatrixXd across = model.AcrossCovariance();
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(k, k);

  auto total_llt = CheckedLlt(Symmetrize(total), "total covariance");
  const Eigen::MatrixXd total_inv = Symmetrize(total_llt.solve(eye));
  const Eigen::MatrixXd schur =
      Symmetrize(total - across * total_inv * across);
  auto schur_llt = CheckedLlt(schur, "conditional covariance T - A T^-1 A");
  const Eigen::MatrixXd schur_inv = Symmetrize(schur_llt.solve(eye));

  ScoreMatrices sm;
  sm.q = Symmetrize(total_inv - schur_inv);
  sm.p = Symmetrize(total_inv * across * schur_inv);
  if (!sm.p.allFinite() || !sm.q.allFinite())
    throw NumericError("non-finite PLDA score matrices");
  return sm;
}

double GpldaScore(const ScoreMatrices &sm, const Eigen::VectorXd &eta_e,
                  const Eigen::VectorXd &eta_t) {
  const Eigen::Index k = sm.q.rows();
  if (eta_e.size() != k || eta_t.size() != k || sm.p.rows() != k)
    throw DimensionError("GPLDA score: expected dimension " +
                         std::to_string(k) + ", got " +
                         std::to_string(eta_e.size()) + " and " +
                         std::to_string(eta_t.size()));
  return eta_e.dot(sm.q * eta_e) + eta_t.dot(sm.q * eta_t) +
         eta_e.dot(sm.p * eta_t);
}

GpldaBackend::GpldaBackend(PreprocessPipeline p, GpldaModel m)
    : pipeline(std::move(p)), model(std::move(m)),
      sm(DeriveScoreMatrices(model)) {
  if (pipeline.OutputDim() != model.Dim())
    throw DimensionError("pipeline output dimension " +
                         std::to_string(pipeline.OutputDim()) +
                         " does not match GPLDA dimension " +
                         std::to_string(model.Dim()));
}

double GpldaBackend::ScoreProcessed(const Eigen::VectorXd &eta_e,
                                    const Eigen::VectorXd &eta_t) const {
  return GpldaScore(sm, eta_e - model.mu, eta_t - model.mu);
}

double GpldaBackend::Score(const Eigen::VectorXd &x_e,
                           const Eigen::VectorXd &x_t) const {
  return ScoreProcessed(pipeline.Apply(x_e), pipeline.Apply(x_t));
}

}  // namespace nplda
