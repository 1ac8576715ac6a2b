// trainer.cc

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

#include "nplda/trainer.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <string>
#include <utility>

#include "nplda/metrics.h"

namespace nplda {

namespace {

using PairKey = std::pair<std::size_t, std::size_t>;

PairKey Unordered(std::size_t a, std::size_t b) {
  return a < b ? PairKey{a, b} : PairKey{b, a};
}

Trial MakeTrial(const EmbeddingArchive &archive, std::size_t a, std::size_t b,
                TrialLabel label, Rng *rng) {
  if (rng->UniformIndex(2) == 1) std::swap(a, b);
  return {archive[a].segment_id, archive[b].segment_id, label};
}

// Draws `count` distinct unordered pairs.  `draw` proposes a candidate pair
// or returns false to reject; `enumerate` lists every valid pair.  Sparse
// requests use rejection sampling, dense ones a shuffled enumeration.
template <typename Draw, typename Enumerate>
std::vector<PairKey> DistinctPairs(std::size_t count, std::size_t available,
                                   Draw draw, Enumerate enumerate, Rng *rng) {
  std::vector<PairKey> out;
  if (count == 0) return out;
  if (2 * count < available) {
    std::set<PairKey> seen;
    const std::size_t max_attempts = 200 * count + 1000;
    for (std::size_t attempt = 0; attempt < max_attempts && out.size() < count;
         ++attempt) {
      PairKey key;
      if (!draw(&key)) continue;
      if (seen.insert(key).second) out.push_back(key);
    }
    if (out.size() == count) return out;
    out.clear();
  }
  std::vector<PairKey> all = enumerate();
  rng->Shuffle(&all);
  all.resize(count);
  return all;
}

}  // namespace

std::string_view LossKindName(LossKind kind) {
  switch (kind) {
    case LossKind::kSoftDcf: return "soft_dcf";
    case LossKind::kBce: return "bce";
    default: return "bce_regularized";
  }
}

std::optional<LossKind> ParseLossKind(std::string_view name) {
  if (name == "soft_dcf") return LossKind::kSoftDcf;
  if (name == "bce") return LossKind::kBce;
  if (name == "bce_regularized") return LossKind::kBceRegularized;
  return std::nullopt;
}

void AdamStep(AdamState *state, std::span<const std::span<double>> params,
              std::span<const std::span<const double>> grads, double lr) {
  if (params.size() != grads.size())
    throw DimensionError("Adam: parameter and gradient block counts differ");
  if (state->m.empty()) {
    for (const auto &p : params) {
      state->m.emplace_back(p.size(), 0.0);
      state->v.emplace_back(p.size(), 0.0);
    }
  }
  if (state->m.size() != params.size())
    throw DimensionError("Adam: state does not match parameter blocks");
  for (std::size_t b = 0; b < params.size(); ++b)
    if (params[b].size() != grads[b].size() ||
        state->m[b].size() != params[b].size())
      throw DimensionError("Adam: block " + std::to_string(b) +
                           " has inconsistent sizes");

  ++state->step;
  const double t = static_cast<double>(state->step);
  const double correction1 = 1.0 - std::pow(AdamState::kBeta1, t);
  const double correction2 = 1.0 - std::pow(AdamState::kBeta2, t);
  for (std::size_t b = 0; b < params.size(); ++b) {
    auto &m = state->m[b];
    auto &v = state->v[b];
    for (std::size_t i = 0; i < params[b].size(); ++i) {
      const double g = grads[b][i];
      m[i] = AdamState::kBeta1 * m[i] + (1.0 - AdamState::kBeta1) * g;
      v[i] = AdamState::kBeta2 * v[i] + (1.0 - AdamState::kBeta2) * g * g;
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      const double updated =
          params[b][i] - lr * m_hat / (std::sqrt(v_hat) + AdamState::kEps);
      if (!std::isfinite(updated))
        throw NumericError("Adam produced a non-finite value in block " +
                           std::to_string(b));
      params[b][i] = updated;
    }
  }
}

void AdamStep(AdamState *state, NpldaParams *params,
              const BatchGradients &grads, double lr) {
  auto p = ParamBlocks(*params);
  auto g = GradBlocks(grads);
  AdamStep(state, std::span<const std::span<double>>(p),
           std::span<const std::span<const double>>(g), lr);
  params->Symmetrize();
}

std::vector<Trial> SampleTrials(const EmbeddingArchive &archive,
                                std::size_t n_target, std::size_t ratio,
                                std::uint64_t seed) {
  Rng rng(seed);
  const auto groups = GroupBySpeaker(archive);
  std::vector<std::size_t> speaker_of(archive.Size());
  for (std::size_t s = 0; s < groups.size(); ++s)
    for (auto i : groups[s]) speaker_of[i] = s;

  // Target pairs: uniform over same-speaker pairs of distinct segments.
  std::vector<std::size_t> pair_cum;  // cumulative C(n_s, 2)
  std::size_t target_available = 0;
  for (const auto &g : groups) {
    target_available += g.size() * (g.size() - 1) / 2;
    pair_cum.push_back(target_available);
  }
  if (n_target > target_available)
    throw DataError(DataError::Kind::kInsufficientData,
                    "requested " + std::to_string(n_target) +
                        " target trials but only " +
                        std::to_string(target_available) +
                        " same-speaker pairs exist");
  auto draw_target = [&](PairKey *key) {
    const std::size_t r = rng.UniformIndex(target_available);
    const auto s = static_cast<std::size_t>(
        std::upper_bound(pair_cum.begin(), pair_cum.end(), r) - pair_cum.begin());
    const auto &g = groups[s];
    const std::size_t a = rng.UniformIndex(g.size());
    std::size_t b = rng.UniformIndex(g.size() - 1);
    if (b >= a) ++b;
    *key = Unordered(g[a], g[b]);
    return true;
  };
  auto enumerate_targets = [&] {
    std::vector<PairKey> all;
    for (const auto &g : groups)
      for (std::size_t a = 0; a < g.size(); ++a)
        for (std::size_t b = a + 1; b < g.size(); ++b)
          all.push_back(Unordered(g[a], g[b]));
    return all;
  };
  const auto target_pairs = DistinctPairs(n_target, target_available,
                                          draw_target, enumerate_targets, &rng);

  // Nontarget pairs: different speakers of the same gender.
  std::vector<std::vector<std::size_t>> by_gender(3);
  for (std::size_t i = 0; i < archive.Size(); ++i)
    by_gender[static_cast<std::size_t>(archive[i].gender)].push_back(i);
  std::vector<std::size_t> gender_cum;
  std::size_t nontarget_available = 0;
  for (const auto &members : by_gender) {
    std::size_t same_speaker = 0;
    std::vector<std::size_t> per_speaker(groups.size(), 0);
    for (auto i : members) ++per_speaker[speaker_of[i]];
    for (auto c : per_speaker)
      if (c > 1) same_speaker += c * (c - 1) / 2;
    const std::size_t n = members.size();
    if (n > 1) nontarget_available += n * (n - 1) / 2 - same_speaker;
    gender_cum.push_back(nontarget_available);
  }
  const std::size_t n_nontarget = n_target * ratio;
  if (n_nontarget > nontarget_available)
    throw DataError(DataError::Kind::kInsufficientData,
                    "requested " + std::to_string(n_nontarget) +
                        " nontarget trials but only " +
                        std::to_string(nontarget_available) +
                        " gender-matched different-speaker pairs exist");
  // Genders are drawn in proportion to all segment pairs, then pairs of the
  // same speaker are rejected.
  std::vector<std::size_t> all_pairs_cum;
  std::size_t all_pairs = 0;
  for (const auto &members : by_gender) {
    const std::size_t n = members.size();
    if (n > 1) all_pairs += n * (n - 1) / 2;
    all_pairs_cum.push_back(all_pairs);
  }
  auto draw_nontarget = [&](PairKey *key) {
    const std::size_t r = rng.UniformIndex(all_pairs);
    const auto gi = static_cast<std::size_t>(
        std::upper_bound(all_pairs_cum.begin(), all_pairs_cum.end(), r) -
        all_pairs_cum.begin());
    const auto &members = by_gender[gi];
    const std::size_t a = rng.UniformIndex(members.size());
    std::size_t b = rng.UniformIndex(members.size() - 1);
    if (b >= a) ++b;
    if (speaker_of[members[a]] == speaker_of[members[b]]) return false;
    *key = Unordered(members[a], members[b]);
    return true;
  };
  auto enumerate_nontargets = [&] {
    std::vector<PairKey> all;
    for (const auto &members : by_gender)
      for (std::size_t a = 0; a < members.size(); ++a)
        for (std::size_t b = a + 1; b < members.size(); ++b)
          if (speaker_of[members[a]] != speaker_of[members[b]])
            all.push_back(Unordered(members[a], members[b]));
    return all;
  };
  const auto nontarget_pairs =
      DistinctPairs(n_nontarget, nontarget_available, draw_nontarget,
                    enumerate_nontargets, &rng);

  std::vector<Trial> trials;
  trials.reserve(target_pairs.size() + nontarget_pairs.size());
  for (const auto &[a, b] : target_pairs)
    trials.push_back(MakeTrial(archive, a, b, TrialLabel::kTarget, &rng));
  for (const auto &[a, b] : nontarget_pairs)
    trials.push_back(MakeTrial(archive, a, b, TrialLabel::kNontarget, &rng));
  rng.Shuffle(&trials);
  return trials;
}

std::vector<std::vector<std::size_t>> MakeBatches(
    std::span<const std::uint8_t> labels, std::size_t batch_size,
    bool stratified, Rng *rng) {
  if (batch_size == 0) throw Error("batch size must be positive");
  const std::size_t total = labels.size();
  std::vector<std::vector<std::size_t>> batches;
  if (total == 0) return batches;
  const std::size_t num_batches = (total + batch_size - 1) / batch_size;

  if (!stratified) {
    std::vector<std::size_t> order(total);
    for (std::size_t i = 0; i < total; ++i) order[i] = i;
    rng->Shuffle(&order);
    for (std::size_t b = 0; b < num_batches; ++b) {
      const std::size_t lo = b * total / num_batches;
      const std::size_t hi = (b + 1) * total / num_batches;
      batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(lo),
                           order.begin() + static_cast<std::ptrdiff_t>(hi));
    }
    return batches;
  }

  std::vector<std::size_t> targets, nontargets;
  for (std::size_t i = 0; i < total; ++i)
    (labels[i] ? targets : nontargets).push_back(i);
  rng->Shuffle(&targets);
  rng->Shuffle(&nontargets);
  const std::size_t nt = targets.size(), nn = nontargets.size();
  // Nontarget cut points follow the cumulative target count so each batch
  // holds round(ratio * cumulative targets) nontargets.
  auto target_cut = [&](std::size_t b) { return b * nt / num_batches; };
  auto nontarget_cut = [&](std::size_t b) -> std::size_t {
    if (nt == 0) return b * nn / num_batches;
    const std::size_t c = target_cut(b);
    return static_cast<std::size_t>(
        std::llround(static_cast<double>(c) * static_cast<double>(nn) /
                     static_cast<double>(nt)));
  };
  for (std::size_t b = 0; b < num_batches; ++b) {
    std::vector<std::size_t> batch;
    batch.insert(batch.end(),
                 targets.begin() + static_cast<std::ptrdiff_t>(target_cut(b)),
                 targets.begin() + static_cast<std::ptrdiff_t>(target_cut(b + 1)));
    batch.insert(
        batch.end(),
        nontargets.begin() + static_cast<std::ptrdiff_t>(nontarget_cut(b)),
        nontargets.begin() + static_cast<std::ptrdiff_t>(nontarget_cut(b + 1)));
    batches.push_back(std::move(batch));
  }
  return batches;
}

TrialData TrialData::Resolve(const std::vector<Trial> &trials,
                             const EmbeddingArchive &archive) {
  TrialData data;
  data.embeddings = archive.AsColumns();
  data.pairs.reserve(trials.size());
  data.labels.reserve(trials.size());
  for (std::size_t i = 0; i < trials.size(); ++i) {
    const auto &t = trials[i];
    if (t.label == TrialLabel::kUnlabeled)
      throw DataError(DataError::Kind::kBadLabel,
                      "training trial " + std::to_string(i + 1) +
                          " is unlabeled",
                      i + 1);
    data.pairs.push_back({archive.IndexOf(t.enroll_id), archive.IndexOf(t.test_id)});
    data.labels.push_back(t.label == TrialLabel::kTarget ? 1 : 0);
  }
  return data;
}

TrialData TrialData::Processed(const PreprocessPipeline &pipeline) const {
  TrialData out;
  out.embeddings = pipeline.ApplyColumns(embeddings);
  out.pairs = pairs;
  out.labels = labels;
  return out;
}

LossValue ComputeLoss(const TrainConfig &config, std::span<const double> scores,
                      std::span<const std::uint8_t> labels,
                      std::span<const double> reference,
                      const Eigen::VectorXd &thresholds, double alpha) {
  LossValue out;
  out.d_thresholds.assign(static_cast<std::size_t>(thresholds.size()), 0.0);
  switch (config.loss) {
    case LossKind::kSoftDcf: {
      if (config.betas.size() != static_cast<std::size_t>(thresholds.size()))
        throw DimensionError("one threshold per beta is required");
      out.d_scores.assign(scores.size(), 0.0);
      for (std::size_t j = 0; j < config.betas.size(); ++j) {
        auto r = SoftDcfUnchecked(scores, labels, config.betas[j],
                                  thresholds(static_cast<Eigen::Index>(j)), alpha);
        out.value += r.value;
        for (std::size_t i = 0; i < scores.size(); ++i)
          out.d_scores[i] += r.d_scores[i];
        out.d_thresholds[j] = r.d_theta;
      }
      break;
    }
    case LossKind::kBce: {
      auto r = BceLoss(scores, labels);
      out.value = r.value;
      out.d_scores = std::move(r.d_scores);
      break;
    }
    case LossKind::kBceRegularized: {
      auto r = BceRegularized(scores, labels, reference, config.lambda);
      out.value = r.value;
      out.d_scores = std::move(r.d_scores);
      break;
    }
  }
  return out;
}

namespace {

struct Evaluation {
  double loss;
  double min_dcf;
};

Evaluation Evaluate(const NpldaParams &params, const TrialData &data,
                    const std::vector<double> &reference,
                    const TrainConfig &config) {
  const auto scores = NpldaForwardBatch(params, data.embeddings, data.pairs);
  const auto loss = ComputeLoss(config, scores, data.labels, reference,
                                params.thresholds, params.alpha);
  ScoreSet ss{scores, data.labels};
  return {loss.value, MinDcf(ss, config.betas.front()).min_dcf};
}

}  // namespace

TrainResult TrainNplda(const NpldaParams &init, const TrialData &train,
                       const TrialData &valid, const TrainConfig &config) {
  init.Validate();
  if (config.betas.empty()) throw Error("at least one beta is required");
  if (!(config.lr > 0.0)) throw Error("learning rate must be positive");
  if (config.max_epochs < 0) throw Error("negative epoch count");
  if (train.Size() == 0 || valid.Size() == 0)
    throw DataError(DataError::Kind::kInsufficientData,
                    "training and validation trial lists must be non-empty");

  NpldaParams params = init;
  params.alpha = config.alpha;
  if (config.loss == LossKind::kSoftDcf &&
      static_cast<std::size_t>(params.thresholds.size()) != config.betas.size())
    throw DimensionError("parameter thresholds do not match configured betas");

  // Reference scores for the regularized BCE: the initial model's scores.
  std::vector<double> train_ref, valid_ref;
  if (config.loss == LossKind::kBceRegularized) {
    train_ref = NpldaForwardBatch(init, train.embeddings, train.pairs);
    valid_ref = NpldaForwardBatch(init, valid.embeddings, valid.pairs);
  }

  TrainResult result;
  const Evaluation start_train = Evaluate(params, train, train_ref, config);
  const Evaluation start_valid = Evaluate(params, valid, valid_ref, config);
  result.initial = {0, start_train.loss, start_valid.loss, start_valid.min_dcf,
                    config.lr};
  result.best = params;
  result.best_epoch = 0;
  double best_min_dcf = start_valid.min_dcf;
  double best_valid_loss = start_valid.loss;
  int epochs_without_improvement = 0;
  double lr = config.lr;

  Rng rng(config.seed);
  AdamState adam;
  std::vector<double> batch_ref;
  std::vector<TrialIndex> batch_pairs;
  std::vector<std::uint8_t> batch_labels;
  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const auto batches = MakeBatches(train.labels, config.batch_size,
                                     config.stratified_batches, &rng);
    double loss_sum = 0.0;
    double weight_sum = 0.0;
    for (std::size_t b = 0; b < batches.size(); ++b) {
      const auto &batch = batches[b];
      if (batch.empty()) continue;
      batch_pairs.clear();
      batch_labels.clear();
      batch_ref.clear();
      for (auto i : batch) {
        batch_pairs.push_back(train.pairs[i]);
        batch_labels.push_back(train.labels[i]);
        if (!train_ref.empty()) batch_ref.push_back(train_ref[i]);
      }
      const auto scores = NpldaForwardBatch(params, train.embeddings, batch_pairs);
      const auto loss = ComputeLoss(config, scores, batch_labels, batch_ref,
                                    params.thresholds, params.alpha);
      if (!std::isfinite(loss.value))
        throw TrainingError("non-finite training loss at epoch " +
                            std::to_string(epoch) + ", batch " +
                            std::to_string(b + 1));
      loss_sum += loss.value * static_cast<double>(batch.size());
      weight_sum += static_cast<double>(batch.size());
      const auto grads = NpldaBackward(params, train.embeddings, batch_pairs,
                                       loss.d_scores, loss.d_thresholds);
      AdamStep(&adam, &params, grads, lr);
    }

    const Evaluation v = Evaluate(params, valid, valid_ref, config);
    if (!std::isfinite(v.loss))
      throw TrainingError("non-finite validation loss at epoch " +
                          std::to_string(epoch));
    result.history.push_back(
        {epoch, loss_sum / weight_sum, v.loss, v.min_dcf, lr});

    if (v.min_dcf < best_min_dcf) {
      best_min_dcf = v.min_dcf;
      result.best = params;
      result.best_epoch = epoch;
    }
    if (v.loss < best_valid_loss) {
      best_valid_loss = v.loss;
      epochs_without_improvement = 0;
    } else if (++epochs_without_improvement >= config.lr_halving_patience) {
      lr *= 0.5;
      epochs_without_improvement = 0;
    }
  }
  return result;
}

TrainResult TrainNplda(const NpldaParams &init,
                       const std::vector<Trial> &train_trials,
                       const std::vector<Trial> &valid_trials,
                       const EmbeddingArchive &archive,
                       const TrainConfig &config) {
  return TrainNplda(init, TrialData::Resolve(train_trials, archive),
                    TrialData::Resolve(valid_trials, archive), config);
}

void WriteHistory(const TrainResult &result, std::ostream &os) {
  os << "epoch,train_loss,valid_loss,valid_min_dcf,lr\n";
  char buf[160];
  auto row = [&](const EpochRecord &r) {
    std::snprintf(buf, sizeof(buf), "%d,%.10g,%.10g,%.10g,%.10g\n", r.epoch,
                  r.train_loss, r.valid_loss, r.valid_min_dcf, r.lr);
    os << buf;
  };
  row(result.initial);
  for (const auto &r : result.history) row(r);
}

}  // namespace nplda
