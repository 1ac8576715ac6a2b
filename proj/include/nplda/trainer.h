// nplda/trainer.h

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

#ifndef NPLDA_TRAINER_H_
#define NPLDA_TRAINER_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "nplda/dataio.h"
#include "nplda/nplda.h"
#include "nplda/rng.h"

namespace nplda {

enum class LossKind { kSoftDcf, kBce, kBceRegularized };

std::string_view LossKindName(LossKind kind);
std::optional<LossKind> ParseLossKind(std::string_view name);

struct TrainConfig {
  std::size_t batch_size = 8192;
  double lr = 1e-3;
  /// Epochs without a validation-loss decrease before lr is halved.
  int lr_halving_patience = 2;
  int max_epochs = 20;
  /// Nontarget trials per target trial.
  std::size_t nontarget_ratio = 10;
  std::uint64_t seed = 42;
  LossKind loss = LossKind::kSoftDcf;
  double lambda = 0.0;
  double alpha = 20.0;
  /// One soft-DCF term and one learnable threshold per beta.
  std::vector<double> betas = {99.0};
  /// Keep every batch at the global target:nontarget mix.  When false,
  /// batches are cut from one shuffled list.
  bool stratified_batches = true;
};

/// Adam with bias correction; beta1 = 0.9, beta2 = 0.999, eps = 1e-8.
struct AdamState {
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;

  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
  std::int64_t step = 0;
};

/// One update over a list of parameter blocks.  Accumulators are sized on
/// the first call.  Throws NumericError if any updated value is non-finite.
void AdamStep(AdamState *state, std::span<const std::span<double>> params,
              std::span<const std::span<const double>> grads, double lr);

/// Adam over every NPLDA block followed by re-symmetrization of p and q.
void AdamStep(AdamState *state, NpldaParams *params,
              const BatchGradients &grads, double lr);

/// Samples n_target same-speaker trials and ratio * n_target different-
/// speaker, same-gender trials; no unordered pair is repeated.
std::vector<Trial> SampleTrials(const EmbeddingArchive &archive,
                                std::size_t n_target, std::size_t ratio,
                                std::uint64_t seed);

/// Partitions trial positions into batches.  With `stratified`, targets and
/// nontargets are shuffled separately and split so that each batch keeps the
/// global nontarget:target ratio within one trial.
std::vector<std::vector<std::size_t>> MakeBatches(
    std::span<const std::uint8_t> labels, std::size_t batch_size,
    bool stratified, Rng *rng);

/// Labelled trials resolved against a private copy of the embeddings.
struct TrialData {
  Eigen::MatrixXd embeddings;  // raw inputs as columns
  std::vector<TrialIndex> pairs;
  std::vector<std::uint8_t> labels;

  std::size_t Size() const { return pairs.size(); }
  /// Throws on unknown ids or unlabeled trials.
  static TrialData Resolve(const std::vector<Trial> &trials,
                           const EmbeddingArchive &archive);
  /// Pipeline-processed inputs, for backends that score processed vectors.
  TrialData Processed(const PreprocessPipeline &pipeline) const;
};

struct LossValue {
  double value = 0.0;
  std::vector<double> d_scores;
  std::vector<double> d_thresholds;
};

/// The configured training loss on a set of scores.  `reference` holds the
/// GPLDA scores needed by the regularized BCE and may be empty otherwise.
LossValue ComputeLoss(const TrainConfig &config, std::span<const double> scores,
                      std::span<const std::uint8_t> labels,
                      std::span<const double> reference,
                      const Eigen::VectorXd &thresholds, double alpha);

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double valid_loss = 0.0;
  double valid_min_dcf = 0.0;
  double lr = 0.0;
};

struct TrainResult {
  NpldaParams best;
  int best_epoch = 0;
  /// Validation figures of the initial parameters (epoch 0).
  EpochRecord initial;
  /// One record per trained epoch.
  std::vector<EpochRecord> history;
};

/// Mini-batch Adam training with validation-driven lr halving and
/// best-validation-minDCF snapshot selection.  Epoch 0 (the initial
/// parameters) takes part in the selection.
TrainResult TrainNplda(const NpldaParams &init, const TrialData &train,
                       const TrialData &valid, const TrainConfig &config);
TrainResult TrainNplda(const NpldaParams &init,
                       const std::vector<Trial> &train_trials,
                       const std::vector<Trial> &valid_trials,
                       const EmbeddingArchive &archive,
                       const TrainConfig &config);

/// "epoch,train_loss,valid_loss,valid_min_dcf,lr" rows, starting with the
/// epoch-0 row.
void WriteHistory(const TrainResult &result, std::ostream &os);

}  // namespace nplda

#endif  // NPLDA_TRAINER_H_
