// nplda.cc

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

#include "nplda/nplda.h"

#include <cmath>
#include <string>

namespace nplda {

namespace {

struct Activations {
  Eigen::VectorXd u;  // unit-norm hidden vector
  double norm;        // ||a1 x + b1||
  Eigen::VectorXd f;  // output of the second affine layer
};

Activations Activate(const NpldaParams &params, const Eigen::VectorXd &x) {
  if (x.size() != params.InputDim())
    throw DimensionError("NPLDA input dimension " + std::to_string(x.size()) +
                         " does not match " +
                         std::to_string(params.InputDim()));
  Eigen::VectorXd v = params.a1 * x + params.b1;
  Activations a;
  a.norm = v.norm();
  if (!(a.norm >= 1e-12) || !std::isfinite(a.norm))
    throw NumericError("NPLDA length normalization hit a zero vector");
  a.u = v / a.norm;
  a.f = params.a2 * a.u + params.b2;
  return a;
}

double QuadraticScore(const NpldaParams &params, const Eigen::VectorXd &fe,
                      const Eigen::VectorXd &ft) {
  // Only the symmetric part of p enters the score.
  return fe.dot(params.q * fe) + ft.dot(params.q * ft) +
         0.5 * (fe.dot(params.p * ft) + ft.dot(params.p * fe));
}

template <typename M>
std::span<double> View(M &m) {
  return {m.data(), static_cast<std::size_t>(m.size())};
}
template <typename M>
std::span<const double> ConstView(const M &m) {
  return {m.data(), static_cast<std::size_t>(m.size())};
}

}  // namespace

void NpldaParams::Validate() const {
  const Eigen::Index k = Dim();
  if (k == 0 || InputDim() == 0 || b1.size() != k || a2.rows() != k ||
      a2.cols() != k || b2.size() != k || p.rows() != k || p.cols() != k ||
      q.rows() != k || q.cols() != k)
    throw DimensionError("inconsistent NPLDA parameter shapes");
  if (thresholds.size() < 1)
    throw DimensionError("NPLDA needs at least one threshold");
  if (!(alpha > 0.0) || !std::isfinite(alpha))
    throw Error("NPLDA warp factor must be positive");
  if (!a1.allFinite() || !b1.allFinite() || !a2.allFinite() ||
      !b2.allFinite() || !p.allFinite() || !q.allFinite() ||
      !thresholds.allFinite())
    throw NumericError("non-finite NPLDA parameter");
  if ((p - p.transpose()).cwiseAbs().maxCoeff() > 1e-10 ||
      (q - q.transpose()).cwiseAbs().maxCoeff() > 1e-10)
    throw NumericError("NPLDA p and q must be symmetric");
}

void NpldaParams::Symmetrize() {
  p = (0.5 * (p + p.transpose())).eval();
  q = (0.5 * (q + q.transpose())).eval();
}

BatchGradients BatchGradients::ZerosLike(const NpldaParams &params) {
  BatchGradients g;
  g.a1 = Eigen::MatrixXd::Zero(params.a1.rows(), params.a1.cols());
  g.b1 = Eigen::VectorXd::Zero(params.b1.size());
  g.a2 = Eigen::MatrixXd::Zero(params.a2.rows(), params.a2.cols());
  g.b2 = Eigen::VectorXd::Zero(params.b2.size());
  g.p = Eigen::MatrixXd::Zero(params.p.rows(), params.p.cols());
  g.q = Eigen::MatrixXd::Zero(params.q.rows(), params.q.cols());
  g.thresholds = Eigen::VectorXd::Zero(params.thresholds.size());
  return g;
}

std::array<std::span<double>, kNumNpldaBlocks> ParamBlocks(NpldaParams &params) {
  return {View(params.a1), View(params.b1), View(params.a2), View(params.b2),
          View(params.p),  View(params.q),  View(params.thresholds)};
}

std::array<std::span<const double>, kNumNpldaBlocks> GradBlocks(
    const BatchGradients &grads) {
  return {ConstView(grads.a1), ConstView(grads.b1), ConstView(grads.a2),
          ConstView(grads.b2), ConstView(grads.p),  ConstView(grads.q),
          ConstView(grads.thresholds)};
}

NpldaParams InitFromGplda(const PreprocessPipeline &pipeline,
                          const GpldaModel &model, const ScoreMatrices &sm,
                          std::span<const double> betas, double alpha) {
  const Eigen::Index k = pipeline.OutputDim();
  if (model.Dim() != k || sm.p.rows() != k || sm.q.rows() != k ||
      pipeline.post_mean.size() != k || pipeline.mean.size() != pipeline.InputDim())
    throw DimensionError("pipeline, GPLDA model and score matrices disagree "
                         "on dimensions");
  if (betas.empty()) throw Error("at least one operating point is required");

  NpldaParams params;
  params.a1 = pipeline.lda;
  params.b1 = -(pipeline.lda * pipeline.mean) - pipeline.post_mean;
  params.a2 = Eigen::MatrixXd::Identity(k, k);
  params.b2 = -model.mu;
  params.p = sm.p;
  params.q = sm.q;
  params.thresholds.resize(static_cast<Eigen::Index>(betas.size()));
  for (std::size_t j = 0; j < betas.size(); ++j) {
    if (!(betas[j] > 0.0)) throw Error("beta must be positive");
    params.thresholds(static_cast<Eigen::Index>(j)) = std::log(betas[j]);
  }
  params.alpha = alpha;
  params.Symmetrize();
  params.Validate();
  return params;
}

Eigen::VectorXd NpldaEmbed(const NpldaParams &params, const Eigen::VectorXd &x) {
  return Activate(params, x).f;
}

double NpldaForward(const NpldaParams &params, const Eigen::VectorXd &x_e,
                    const Eigen::VectorXd &x_t) {
  return QuadraticScore(params, NpldaEmbed(params, x_e), NpldaEmbed(params, x_t));
}

std::vector<double> NpldaForwardBatch(const NpldaParams &params,
                                      const Eigen::MatrixXd &embeddings,
                                      std::span<const TrialIndex> trials) {
  std::vector<double> scores(trials.size());
  for (std::size_t i = 0; i < trials.size(); ++i) {
    const auto &t = trials[i];
    scores[i] = NpldaForward(params, embeddings.col(static_cast<Eigen::Index>(t.enroll)),
                             embeddings.col(static_cast<Eigen::Index>(t.test)));
  }
  return scores;
}

BatchGradients NpldaBackward(const NpldaParams &params,
                             const Eigen::MatrixXd &embeddings,
                             std::span<const TrialIndex> trials,
                             std::span<const double> d_scores,
                             std::span<const double> d_thresholds) {
  if (d_scores.size() != trials.size())
    throw DimensionError("one loss gradient per trial is required");
  if (d_thresholds.size() != static_cast<std::size_t>(params.thresholds.size()))
    throw DimensionError("one loss gradient per threshold is required");

  BatchGradients g = BatchGradients::ZerosLike(params);
  const Eigen::MatrixXd q_sym2 = params.q + params.q.transpose();
  const Eigen::MatrixXd p_sym = 0.5 * (params.p + params.p.transpose());

  // Gradient of one side's f back through both layers.
  auto propagate = [&](const Activations &act, const Eigen::VectorXd &df,
                       const Eigen::VectorXd &x) {
    g.a2.noalias() += df * act.u.transpose();
    g.b2 += df;
    const Eigen::VectorXd du = params.a2.transpose() * df;
    // Length-norm Jacobian: (I - u u^T) / ||v||.
    const Eigen::VectorXd dv = (du - act.u * act.u.dot(du)) / act.norm;
    g.a1.noalias() += dv * x.transpose();
    g.b1 += dv;
  };

  for (std::size_t i = 0; i < trials.size(); ++i) {
    const double ds = d_scores[i];
    if (ds == 0.0) continue;
    const Eigen::VectorXd xe =
        embeddings.col(static_cast<Eigen::Index>(trials[i].enroll));
    const Eigen::VectorXd xt =
        embeddings.col(static_cast<Eigen::Index>(trials[i].test));
    const Activations ae = Activate(params, xe);
    const Activations at = Activate(params, xt);

    g.q.noalias() += ds * (ae.f * ae.f.transpose() + at.f * at.f.transpose());
    g.p.noalias() +=
        (0.5 * ds) * (ae.f * at.f.transpose() + at.f * ae.f.transpose());

    const Eigen::VectorXd dfe = ds * (q_sym2 * ae.f + p_sym * at.f);
    const Eigen::VectorXd dft = ds * (q_sym2 * at.f + p_sym * ae.f);
    propagate(ae, dfe, xe);
    propagate(at, dft, xt);
  }
  for (std::size_t j = 0; j < d_thresholds.size(); ++j)
    g.thresholds(static_cast<Eigen::Index>(j)) = d_thresholds[j];

  const auto blocks = GradBlocks(g);
  for (std::size_t b = 0; b < kNumNpldaBlocks; ++b)
    for (double v : blocks[b])
      if (!std::isfinite(v))
        throw NumericError("non-finite gradient in block " +
                           std::string(kNpldaBlockNames[b]));
  return g;
}

}  // namespace nplda
