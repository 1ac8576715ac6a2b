// baselines.cc

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

#include "nplda/baselines.h"

#include <cmath>
#include <string>

#include "nplda/metrics.h"

namespace nplda {

namespace {

Eigen::MatrixXd InverseSpd(const Eigen::MatrixXd &m, const char *what) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success)
    throw NumericError(std::string(what) + " is singular");
  const Eigen::MatrixXd inv =
      llt.solve(Eigen::MatrixXd::Identity(m.rows(), m.cols()));
  return 0.5 * (inv + inv.transpose());
}

void ClassMoments(const Eigen::MatrixXd &stacked,
                  std::span<const std::uint8_t> labels, std::uint8_t cls,
                  Eigen::VectorXd *mean, Eigen::MatrixXd *cov) {
  const Eigen::Index dim = stacked.rows();
  *mean = Eigen::VectorXd::Zero(dim);
  double n = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != cls) continue;
    *mean += stacked.col(static_cast<Eigen::Index>(i));
    n += 1.0;
  }
  if (n == 0.0)
    throw DataError(DataError::Kind::kInsufficientData,
                    std::string("Gaussian backend: no ") +
                        (cls ? "target" : "nontarget") + " trials");
  *mean /= n;
  *cov = Eigen::MatrixXd::Zero(dim, dim);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != cls) continue;
    Eigen::VectorXd c = stacked.col(static_cast<Eigen::Index>(i)) - *mean;
    cov->noalias() += c * c.transpose();
  }
  *cov /= n;
  *cov = 0.5 * (*cov + cov->transpose());
  const double trace = cov->trace();
  const double ridge = trace > 0.0
                           ? kGaussianBackendRidge * trace / static_cast<double>(dim)
                           : kGaussianBackendRidge;
  cov->diagonal().array() += ridge;
}

Eigen::VectorXd Stack(const Eigen::VectorXd &a, const Eigen::VectorXd &b) {
  Eigen::VectorXd out(a.size() + b.size());
  out << a, b;
  return out;
}

}  // namespace

void GaussianBackendModel::Validate() const {
  const Eigen::Index n = mu_t.size();
  if (n == 0 || n % 2 != 0 || mu_nt.size() != n || sigma_t.rows() != n ||
      sigma_t.cols() != n || sigma_nt.rows() != n || sigma_nt.cols() != n)
    throw DimensionError("inconsistent Gaussian backend shapes");
  for (const auto *m : {&sigma_t, &sigma_nt}) {
    if ((*m - m->transpose()).cwiseAbs().maxCoeff() > 1e-10)
      throw NumericError("Gaussian backend covariance is not symmetric");
    if (Eigen::LLT<Eigen::MatrixXd>(*m).info() != Eigen::Success)
      throw NumericError("Gaussian backend covariance is not positive definite");
  }
}

GaussianBackendModel FitGaussianBackend(const Eigen::MatrixXd &stacked,
                                        std::span<const std::uint8_t> labels) {
  if (static_cast<std::size_t>(stacked.cols()) != labels.size())
    throw DimensionError("Gaussian backend: one label per trial is required");
  if (stacked.rows() == 0 || stacked.rows() % 2 != 0)
    throw DimensionError("Gaussian backend: stacked trials must have even dimension");
  GaussianBackendModel model;
  ClassMoments(stacked, labels, 1, &model.mu_t, &model.sigma_t);
  ClassMoments(stacked, labels, 0, &model.mu_nt, &model.sigma_nt);
  return model;
}

GaussianBackendModel FitGaussianBackend(const TrialData &processed) {
  const Eigen::Index k = processed.embeddings.rows();
  Eigen::MatrixXd stacked(2 * k, static_cast<Eigen::Index>(processed.Size()));
  for (std::size_t i = 0; i < processed.Size(); ++i) {
    const auto col = static_cast<Eigen::Index>(i);
    stacked.col(col).head(k) =
        processed.embeddings.col(static_cast<Eigen::Index>(processed.pairs[i].enroll));
    stacked.col(col).tail(k) =
        processed.embeddings.col(static_cast<Eigen::Index>(processed.pairs[i].test));
  }
  return FitGaussianBackend(stacked, processed.labels);
}

GaussianBackendModel FitGaussianBackend(const std::vector<Trial> &trials,
                                        const EmbeddingArchive &processed) {
  return FitGaussianBackend(TrialData::Resolve(trials, processed));
}

GaussianBackendScorer::GaussianBackendScorer(const GaussianBackendModel &model)
    : model_(model),
      inv_t_(InverseSpd(model.sigma_t, "target covariance")),
      inv_nt_(InverseSpd(model.sigma_nt, "nontarget covariance")) {}

double GaussianBackendScorer::Llr(const Eigen::VectorXd &eta_e,
                                  const Eigen::VectorXd &eta_t) const {
  if (eta_e.size() != model_.Dim() || eta_t.size() != model_.Dim())
    throw DimensionError("Gaussian backend expects dimension " +
                         std::to_string(model_.Dim()));
  const Eigen::VectorXd eta = Stack(eta_e, eta_t);
  const Eigen::VectorXd dn = eta - model_.mu_nt;
  const Eigen::VectorXd dt = eta - model_.mu_t;
  return dn.dot(inv_nt_ * dn) - dt.dot(inv_t_ * dt);
}

double GaussianBackendLlr(const GaussianBackendModel &model,
                          const Eigen::VectorXd &eta_e,
                          const Eigen::VectorXd &eta_t) {
  return GaussianBackendScorer(model).Llr(eta_e, eta_t);
}

Eigen::Index QuadraticExpansionSize(Eigen::Index k) { return 2 * k * k + k + 1; }

Eigen::VectorXd ExpandQuadratic(const Eigen::VectorXd &eta_e,
                                const Eigen::VectorXd &eta_t) {
  const Eigen::Index k = eta_e.size();
  if (eta_t.size() != k)
    throw DimensionError("quadratic expansion: dimensions " +
                         std::to_string(k) + " and " +
                         std::to_string(eta_t.size()) + " differ");
  Eigen::VectorXd phi(QuadraticExpansionSize(k));
  Eigen::Index pos = 0;
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j)
      phi(pos++) = eta_e(i) * eta_t(j) + eta_t(i) * eta_e(j);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j)
      phi(pos++) = eta_e(i) * eta_e(j) + eta_t(i) * eta_t(j);
  for (Eigen::Index i = 0; i < k; ++i) phi(pos++) = eta_e(i) + eta_t(i);
  phi(pos) = 1.0;
  return phi;
}

Eigen::Index DpldaModel::Dim() const {
  // Solve 2k^2 + k + 1 = n.
  const auto n = static_cast<double>(w.size());
  const auto k = static_cast<Eigen::Index>(
      std::llround((-1.0 + std::sqrt(1.0 + 8.0 * (n - 1.0))) / 4.0));
  if (k <= 0 || QuadraticExpansionSize(k) != w.size())
    throw DimensionError("DPLDA weight length " + std::to_string(w.size()) +
                         " is not 2k^2 + k + 1");
  return k;
}

DpldaModel DpldaFromGplda(const ScoreMatrices &sm, const Eigen::VectorXd &mu) {
  const Eigen::Index k = sm.p.rows();
  if (mu.size() != k) throw DimensionError("DPLDA: mean has wrong dimension");
  DpldaModel model;
  model.w.resize(QuadraticExpansionSize(k));
  Eigen::Index pos = 0;
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j) model.w(pos++) = 0.5 * sm.p(i, j);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j) model.w(pos++) = sm.q(i, j);
  // Expanding (e - mu)^T Q (e - mu) + (t - mu)^T Q (t - mu)
  // + (e - mu)^T P (t - mu) gives these linear and constant terms.
  const Eigen::VectorXd shift = (2.0 * sm.q + sm.p) * mu;
  model.w.segment(pos, k) = -shift;
  model.w(pos + k) = mu.dot(shift);
  return model;
}

DpldaModel DpldaFromGplda(const ScoreMatrices &sm) {
  return DpldaFromGplda(sm, Eigen::VectorXd::Zero(sm.p.rows()));
}

double DpldaScore(const DpldaModel &model, const Eigen::VectorXd &eta_e,
                  const Eigen::VectorXd &eta_t) {
  if (QuadraticExpansionSize(eta_e.size()) != model.w.size())
    throw DimensionError("DPLDA weight length " +
                         std::to_string(model.w.size()) +
                         " does not match input dimension " +
                         std::to_string(eta_e.size()));
  return model.w.dot(ExpandQuadratic(eta_e, eta_t));
}

namespace {

double DpldaObjective(const TrialData &data, const Eigen::VectorXd &w,
                      const Eigen::VectorXd &w0, double lambda) {
  std::vector<double> scores(data.Size());
  for (std::size_t i = 0; i < data.Size(); ++i)
    scores[i] = w.dot(ExpandQuadratic(
        data.embeddings.col(static_cast<Eigen::Index>(data.pairs[i].enroll)),
        data.embeddings.col(static_cast<Eigen::Index>(data.pairs[i].test))));
  return BceLoss(scores, data.labels).value + lambda * (w - w0).squaredNorm();
}

}  // namespace

DpldaTrainResult TrainDplda(const TrialData &processed,
                            const Eigen::VectorXd &w0,
                            const TrainConfig &config) {
  const Eigen::Index k = processed.embeddings.rows();
  if (w0.size() != QuadraticExpansionSize(k))
    throw DimensionError("DPLDA initial weights have the wrong length");
  if (processed.Size() == 0)
    throw DataError(DataError::Kind::kInsufficientData, "no DPLDA training trials");
  if (!(config.lambda >= 0.0)) throw Error("lambda must be >= 0");

  DpldaTrainResult result;
  Eigen::VectorXd w = w0;
  result.epoch_losses.push_back(DpldaObjective(processed, w, w0, config.lambda));
  const double initial = result.epoch_losses.front();

  Rng rng(config.seed);
  AdamState adam;
  double lr = config.lr;
  Eigen::VectorXd grad(w.size());
  std::vector<double> scores;
  std::vector<std::uint8_t> labels;
  std::vector<Eigen::VectorXd> features;
  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const auto batches = MakeBatches(processed.labels, config.batch_size,
                                     config.stratified_batches, &rng);
    for (const auto &batch : batches) {
      if (batch.empty()) continue;
      scores.clear();
      labels.clear();
      features.clear();
      for (auto i : batch) {
        const auto &pair = processed.pairs[i];
        features.push_back(ExpandQuadratic(
            processed.embeddings.col(static_cast<Eigen::Index>(pair.enroll)),
            processed.embeddings.col(static_cast<Eigen::Index>(pair.test))));
        scores.push_back(w.dot(features.back()));
        labels.push_back(processed.labels[i]);
      }
      const auto loss = BceLoss(scores, labels);
      grad.setZero();
      for (std::size_t i = 0; i < features.size(); ++i)
        grad += loss.d_scores[i] * features[i];
      std::span<double> wp(w.data(), static_cast<std::size_t>(w.size()));
      std::span<const double> gp(grad.data(), static_cast<std::size_t>(grad.size()));
      AdamStep(&adam, std::span<const std::span<double>>(&wp, 1),
               std::span<const std::span<const double>>(&gp, 1), lr);
      // Proximal step for lambda ||w - w0||^2 with step size lr.
      if (config.lambda > 0.0) {
        const double shrink = 2.0 * lr * config.lambda;
        w = (w + shrink * w0) / (1.0 + shrink);
      }
    }
    const double objective = DpldaObjective(processed, w, w0, config.lambda);
    if (!std::isfinite(objective) || objective > 10.0 * initial)
      throw TrainingError("DPLDA training diverged at epoch " +
                          std::to_string(epoch) + " (objective " +
                          std::to_string(objective) + ", initial " +
                          std::to_string(initial) + ")");
    result.epoch_losses.push_back(objective);
  }
  result.model.w = std::move(w);
  return result;
}

}  // namespace nplda
