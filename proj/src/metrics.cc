// metrics.cc

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

#include "nplda/metrics.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace nplda {

namespace {

double CostFromCounts(std::size_t misses, std::size_t false_alarms,
                      std::size_t num_targets, std::size_t num_nontargets,
                      double beta) {
  return static_cast<double>(misses) / static_cast<double>(num_targets) +
         beta * (static_cast<double>(false_alarms) /
                 static_cast<double>(num_nontargets));
}

// log(1 + exp(x)) without overflow.
double Softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

void CheckBeta(double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta))
    throw Error("beta must be positive and finite");
}

// One operating point per candidate threshold, in increasing threshold order.
struct SweepPoint {
  double threshold;
  std::size_t misses;
  std::size_t false_alarms;
};

std::vector<SweepPoint> Sweep(const ScoreSet &ss) {
  std::vector<std::size_t> order(ss.Size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return ss.scores[a] < ss.scores[b];
  });
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<SweepPoint> points;
  std::size_t misses = 0;
  std::size_t false_alarms = ss.NumNontargets();
  points.push_back({-inf, misses, false_alarms});
  std::size_t i = 0;
  while (i < order.size()) {
    const double value = ss.scores[order[i]];
    while (i < order.size() && ss.scores[order[i]] == value) {
      if (ss.labels[order[i]]) ++misses;
      else --false_alarms;
      ++i;
    }
    double next = inf;
    if (i < order.size()) {
      const double upper = ss.scores[order[i]];
      next = value + 0.5 * (upper - value);
      // Adjacent doubles: the midpoint rounds onto an endpoint; only the
      // upper one reproduces these counts under the s >= theta rule.
      if (!(next > value)) next = upper;
    }
    points.push_back({next, misses, false_alarms});
  }
  return points;
}

}  // namespace

std::size_t ScoreSet::NumTargets() const {
  return static_cast<std::size_t>(
      std::count_if(labels.begin(), labels.end(), [](auto l) { return l != 0; }));
}

void ScoreSet::Validate() const {
  if (scores.size() != labels.size())
    throw DimensionError("score set has " + std::to_string(scores.size()) +
                         " scores but " + std::to_string(labels.size()) +
                         " labels");
  for (auto l : labels)
    if (l > 1) throw Error("score labels must be 0 or 1");
  for (std::size_t i = 0; i < scores.size(); ++i)
    if (!std::isfinite(scores[i]))
      throw NumericError("score " + std::to_string(i) + " is not finite");
}

void ScoreSet::ValidateBothClasses() const {
  Validate();
  const auto nt = NumTargets();
  if (nt == 0) throw DataError(DataError::Kind::kInsufficientData, "no target trials");
  if (nt == Size())
    throw DataError(DataError::Kind::kInsufficientData, "no nontarget trials");
}

ScoreSet ScoreSet::FromRecords(const std::vector<ScoreRecord> &records,
                               bool ignore_unlabeled) {
  ScoreSet ss;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto &r = records[i];
    if (r.label == TrialLabel::kUnlabeled) {
      if (ignore_unlabeled) continue;
      throw DataError(DataError::Kind::kBadLabel,
                      "trial " + r.enroll_id + " " + r.test_id +
                          " is unlabeled",
                      i + 1);
    }
    ss.scores.push_back(r.score);
    ss.labels.push_back(r.label == TrialLabel::kTarget ? 1 : 0);
  }
  return ss;
}

double CostParams::Beta() const {
  return c_fa * (1.0 - p_target) / (c_miss * p_target);
}

void CostParams::Validate() const {
  if (!(c_miss > 0.0) || !(c_fa > 0.0))
    throw Error("detection costs must be positive");
  if (!(p_target > 0.0 && p_target < 1.0))
    throw Error("target prior must be in (0, 1)");
}

CostParams CostParams::FromBeta(double beta) {
  CheckBeta(beta);
  return {1.0, 1.0, 1.0 / (1.0 + beta)};
}

ErrorRates MissFalseAlarm(const ScoreSet &ss, double theta) {
  ss.ValidateBothClasses();
  std::size_t misses = 0, false_alarms = 0;
  for (std::size_t i = 0; i < ss.Size(); ++i) {
    if (ss.labels[i]) {
      if (ss.scores[i] < theta) ++misses;
    } else if (ss.scores[i] >= theta) {
      ++false_alarms;
    }
  }
  return {static_cast<double>(misses) / static_cast<double>(ss.NumTargets()),
          static_cast<double>(false_alarms) /
              static_cast<double>(ss.NumNontargets())};
}

double Dcf(const ScoreSet &ss, double beta, double theta) {
  CheckBeta(beta);
  ss.ValidateBothClasses();
  std::size_t misses = 0, false_alarms = 0;
  for (std::size_t i = 0; i < ss.Size(); ++i) {
    if (ss.labels[i]) {
      if (ss.scores[i] < theta) ++misses;
    } else if (ss.scores[i] >= theta) {
      ++false_alarms;
    }
  }
  return CostFromCounts(misses, false_alarms, ss.NumTargets(),
                        ss.NumNontargets(), beta);
}

double Dcf(const ScoreSet &ss, const CostParams &cp, double theta) {
  cp.Validate();
  return Dcf(ss, cp.Beta(), theta);
}

double Sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

SoftDcfResult SoftDcfUnchecked(std::span<const double> scores,
                               std::span<const std::uint8_t> labels,
                               double beta, double theta, double alpha) {
  std::size_t num_targets = 0;
  for (auto l : labels) num_targets += l ? 1 : 0;
  const std::size_t num_nontargets = labels.size() - num_targets;

  SoftDcfResult r;
  r.d_scores.assign(scores.size(), 0.0);
  double miss = 0.0, fa = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double z = alpha * (scores[i] - theta);
    const double accept = Sigmoid(z);
    const double reject = Sigmoid(-z);
    const double slope = alpha * accept * reject;
    if (labels[i]) {
      miss += reject;
      r.d_scores[i] = -slope / static_cast<double>(num_targets);
    } else {
      fa += accept;
      r.d_scores[i] = beta * slope / static_cast<double>(num_nontargets);
    }
    r.d_theta -= r.d_scores[i];
  }
  if (num_targets > 0) r.value += miss / static_cast<double>(num_targets);
  if (num_nontargets > 0)
    r.value += beta * fa / static_cast<double>(num_nontargets);
  return r;
}

SoftDcfResult SoftDcf(const ScoreSet &ss, double beta, double theta,
                      double alpha) {
  CheckBeta(beta);
  if (!(alpha > 0.0)) throw Error("soft DCF warp factor must be positive");
  if (!std::isfinite(theta)) throw NumericError("soft DCF threshold is not finite");
  ss.ValidateBothClasses();
  return SoftDcfUnchecked(ss.scores, ss.labels, beta, theta, alpha);
}

SoftDcfResult SoftDcf(const ScoreSet &ss, const CostParams &cp, double theta,
                      double alpha) {
  cp.Validate();
  return SoftDcf(ss, cp.Beta(), theta, alpha);
}

MinDcfResult MinDcf(const ScoreSet &ss, double beta) {
  CheckBeta(beta);
  ss.ValidateBothClasses();
  const std::size_t nt = ss.NumTargets(), nn = ss.NumNontargets();
  MinDcfResult best{std::numeric_limits<double>::infinity(), 0.0};
  for (const auto &p : Sweep(ss)) {
    const double cost = CostFromCounts(p.misses, p.false_alarms, nt, nn, beta);
    if (cost < best.min_dcf) best = {cost, p.threshold};
  }
  return best;
}

MinDcfResult MinDcf(const ScoreSet &ss, const CostParams &cp) {
  cp.Validate();
  return MinDcf(ss, cp.Beta());
}

double ActDcf(const ScoreSet &ss, double beta) {
  CheckBeta(beta);
  return Dcf(ss, beta, std::log(beta));
}

double ActDcf(const ScoreSet &ss, const CostParams &cp) {
  cp.Validate();
  return ActDcf(ss, cp.Beta());
}

double Eer(const ScoreSet &ss) {
  ss.ValidateBothClasses();
  const double nt = static_cast<double>(ss.NumTargets());
  const double nn = static_cast<double>(ss.NumNontargets());
  const auto points = Sweep(ss);
  double prev_miss = 0.0, prev_fa = 1.0;
  for (const auto &p : points) {
    const double miss = static_cast<double>(p.misses) / nt;
    const double fa = static_cast<double>(p.false_alarms) / nn;
    const double diff = miss - fa;
    if (diff == 0.0) return miss;
    if (diff > 0.0) {
      // Intersect the segment (prev_miss, prev_fa) -> (miss, fa) with the
      // diagonal P_miss = P_fa.
      const double t = (prev_fa - prev_miss) / ((miss - prev_miss) - (fa - prev_fa));
      return prev_miss + t * (miss - prev_miss);
    }
    prev_miss = miss;
    prev_fa = fa;
  }
  return prev_miss;  // unreachable: the sweep ends at (1, 0)
}

LossResult BceLoss(std::span<const double> scores,
                   std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size())
    throw DimensionError("BCE: scores and labels differ in length");
  if (scores.empty()) throw Error("BCE of an empty score set");
  const double n = static_cast<double>(scores.size());
  LossResult r;
  r.d_scores.resize(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double s = scores[i];
    const double t = labels[i] ? 1.0 : 0.0;
    // -log sig(s) = softplus(-s);  -log(1 - sig(s)) = softplus(s)
    r.value += labels[i] ? Softplus(-s) : Softplus(s);
    r.d_scores[i] = (Sigmoid(s) - t) / n;
  }
  r.value /= n;
  return r;
}

LossResult BceLoss(const ScoreSet &ss) {
  ss.Validate();
  return BceLoss(ss.scores, ss.labels);
}

LossResult BceRegularized(std::span<const double> scores,
                          std::span<const std::uint8_t> labels,
                          std::span<const double> plda_scores, double lambda) {
  if (plda_scores.size() != scores.size())
    throw DimensionError("regularized BCE: reference scores misaligned");
  if (!(lambda >= 0.0)) throw Error("regularization weight must be >= 0");
  LossResult r = BceLoss(scores, labels);
  if (lambda == 0.0) return r;
  const double n = static_cast<double>(scores.size());
  double penalty = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double diff = scores[i] - plda_scores[i];
    penalty += diff * diff;
    r.d_scores[i] += 2.0 * lambda * diff / n;
  }
  r.value += lambda * penalty / n;
  return r;
}

LossResult BceRegularized(const ScoreSet &ss,
                          std::span<const double> plda_scores, double lambda) {
  ss.Validate();
  return BceRegularized(ss.scores, ss.labels, plda_scores, lambda);
}

}  // namespace nplda
