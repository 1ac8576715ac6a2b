// nplda/metrics.h

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

#ifndef NPLDA_METRICS_H_
#define NPLDA_METRICS_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "nplda/dataio.h"

namespace nplda {

/// Scores with binary labels, 1 = target and 0 = nontarget.
struct ScoreSet {
  std::vector<double> scores;
  std::vector<std::uint8_t> labels;

  std::size_t Size() const { return scores.size(); }
  std::size_t NumTargets() const;
  std::size_t NumNontargets() const { return Size() - NumTargets(); }

  /// Sizes agree, labels are 0/1 and all scores are finite.
  void Validate() const;
  /// Validate() plus at least one target and one nontarget.
  void ValidateBothClasses() const;

  /// Builds a set from labelled score records.  Unlabeled records raise
  /// DataError(kBadLabel) unless `ignore_unlabeled` is set.
  static ScoreSet FromRecords(const std::vector<ScoreRecord> &records,
                              bool ignore_unlabeled = false);
};

struct CostParams {
  double c_miss = 1.0;
  double c_fa = 1.0;
  double p_target = 0.01;

  /// C_fa (1 - P_target) / (C_miss P_target).
  double Beta() const;
  void Validate() const;
  /// Unit costs with the prior that gives `beta`.
  static CostParams FromBeta(double beta);
};

struct ErrorRates {
  double p_miss = 0.0;
  double p_fa = 0.0;
};

/// P_miss counts targets with s < theta; P_fa counts nontargets with
/// s >= theta.
ErrorRates MissFalseAlarm(const ScoreSet &ss, double theta);

/// P_miss(theta) + beta P_fa(theta).
double Dcf(const ScoreSet &ss, double beta, double theta);
double Dcf(const ScoreSet &ss, const CostParams &cp, double theta);

struct SoftDcfResult {
  double value = 0.0;
  std::vector<double> d_scores;  // d value / d s_i
  double d_theta = 0.0;
};

/// Sigmoid relaxation of the DCF with warp factor alpha:
/// mean_tgt[1 - sig(alpha (s - theta))] + beta mean_non[sig(alpha (s - theta))].
SoftDcfResult SoftDcf(const ScoreSet &ss, double beta, double theta,
                      double alpha);
SoftDcfResult SoftDcf(const ScoreSet &ss, const CostParams &cp, double theta,
                      double alpha);
/// As SoftDcf() but without the class checks; an absent class contributes
/// zero.  Used on mini-batches.
SoftDcfResult SoftDcfUnchecked(std::span<const double> scores,
                               std::span<const std::uint8_t> labels,
                               double beta, double theta, double alpha);

struct MinDcfResult {
  double min_dcf = 0.0;
  double threshold = 0.0;
};

/// Exhaustive sweep over -inf, the midpoints between consecutive distinct
/// scores, and +inf.  Ties go to the smallest threshold.
MinDcfResult MinDcf(const ScoreSet &ss, double beta);
MinDcfResult MinDcf(const ScoreSet &ss, const CostParams &cp);

/// Dcf at theta = log(beta).
double ActDcf(const ScoreSet &ss, double beta);
double ActDcf(const ScoreSet &ss, const CostParams &cp);

/// Equal error rate as a proportion, linearly interpolated between the two
/// operating points where P_miss - P_fa changes sign.
double Eer(const ScoreSet &ss);

struct LossResult {
  double value = 0.0;
  std::vector<double> d_scores;
};

/// Mean negative log-likelihood of the labels under sigmoid(score).
LossResult BceLoss(std::span<const double> scores,
                   std::span<const std::uint8_t> labels);
LossResult BceLoss(const ScoreSet &ss);

/// BceLoss + lambda / N * sum (s_i - l_i)^2, l being reference PLDA scores.
LossResult BceRegularized(std::span<const double> scores,
                          std::span<const std::uint8_t> labels,
                          std::span<const double> plda_scores, double lambda);
LossResult BceRegularized(const ScoreSet &ss,
                          std::span<const double> plda_scores, double lambda);

/// Numerically stable logistic function.
double Sigmoid(double z);

}  // namespace nplda

#endif  // NPLDA_METRICS_H_
