// metrics-test.cc

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

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "doctest.h"
#include "nplda/metrics.h"
#include "test-util.h"

namespace nplda {

namespace {

const double kInf = std::numeric_limits<double>::infinity();

ScoreSet Make(std::vector<double> targets, std::vector<double> nontargets) {
  ScoreSet ss;
  for (double s : targets) {
    ss.scores.push_back(s);
    ss.labels.push_back(1);
  }
  for (double s : nontargets) {
    ss.scores.push_back(s);
    ss.labels.push_back(0);
  }
  return ss;
}

ScoreSet RandomSet(Rng *rng, std::size_t max_size, bool quantize) {
  ScoreSet ss;
  const std::size_t n = 2 + rng->UniformIndex(max_size - 1);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint8_t label = i == 0 ? 1 : i == 1 ? 0 : rng->Uniform() < 0.3;
    double s = rng->Normal() + (label ? 1.0 : 0.0);
    if (quantize) s = std::round(4 * s) / 4;  // plenty of ties
    ss.scores.push_back(s);
    ss.labels.push_back(label);
  }
  return ss;
}

// Direct count, written independently of the library's sweep.
double OracleDcf(const ScoreSet &ss, double beta, double theta) {
  double nt = 0, nn = 0, miss = 0, fa = 0;
  for (std::size_t i = 0; i < ss.Size(); ++i) {
    if (ss.labels[i]) {
      nt += 1;
      miss += ss.scores[i] < theta;
    } else {
      nn += 1;
      fa += ss.scores[i] >= theta;
    }
  }
  return miss / nt + beta * (fa / nn);
}

double OracleMinDcf(const ScoreSet &ss, double beta) {
  double best = std::min(OracleDcf(ss, beta, -kInf), OracleDcf(ss, beta, kInf));
  for (double s : ss.scores)
    for (double t : {s, std::nextafter(s, -kInf), std::nextafter(s, kInf),
                     s - 1e-9, s + 1e-9})
      best = std::min(best, OracleDcf(ss, beta, t));
  return best;
}

double OracleEer(const ScoreSet &ss) {
  std::set<double> thresholds(ss.scores.begin(), ss.scores.end());
  thresholds.insert(kInf);
  double prev_m = 0, prev_f = 1;
  for (double t : thresholds) {
    const ErrorRates r = MissFalseAlarm(ss, t);
    const double d = r.p_miss - r.p_fa;
    if (d >= 0) {
      if (d == 0) return r.p_miss;
      const double d0 = prev_m - prev_f;
      const double w = -d0 / (d - d0);
      return prev_m + w * (r.p_miss - prev_m);
    }
    prev_m = r.p_miss;
    prev_f = r.p_fa;
  }
  return prev_m;
}

}  // namespace

TEST_CASE("miss and false alarm rates") {
  const ScoreSet ss = Make({1, 2}, {0, 3});
  const ErrorRates low = MissFalseAlarm(ss, -10);
  CHECK(low.p_miss == 0.0);
  CHECK(low.p_fa == 1.0);
  const ErrorRates high = MissFalseAlarm(ss, 10);
  CHECK(high.p_miss == 1.0);
  CHECK(high.p_fa == 0.0);
  const ErrorRates mid = MissFalseAlarm(ss, 1.5);
  CHECK(mid.p_miss == 0.5);
  CHECK(mid.p_fa == 0.5);
  // A score equal to the threshold is accepted.
  CHECK(MissFalseAlarm(ss, 1.0).p_miss == 0.0);
  CHECK(MissFalseAlarm(ss, 3.0).p_fa == 0.5);

  Rng rng(1);
  const ScoreSet r = RandomSet(&rng, 100, true);
  ErrorRates prev = MissFalseAlarm(r, -5);
  for (double t = -5; t <= 5; t += 0.05) {
    const ErrorRates cur = MissFalseAlarm(r, t);
    CHECK(cur.p_miss >= prev.p_miss);
    CHECK(cur.p_fa <= prev.p_fa);
    prev = cur;
  }
}

TEST_CASE("score set validation") {
  CHECK(testing::CaptureKind([] { MissFalseAlarm(Make({1, 2}, {}), 0); }) ==
        DataError::Kind::kInsufficientData);
  CHECK(testing::CaptureKind([] { Eer(Make({}, {1})); }) ==
        DataError::Kind::kInsufficientData);
  CHECK_THROWS_AS(Dcf(Make({NAN}, {1}), 1.0, 0.0), NumericError);
  std::vector<ScoreRecord> recs = {{"a", "b", 1.0, TrialLabel::kTarget},
                                   {"a", "c", 0.0, TrialLabel::kUnlabeled}};
  CHECK(testing::CaptureKind([&] { ScoreSet::FromRecords(recs); }) ==
        DataError::Kind::kBadLabel);
  CHECK(ScoreSet::FromRecords(recs, true).Size() == 1);
}

TEST_CASE("detection cost") {
  const ScoreSet ss = Make({1, 2}, {0, 3});
  CHECK(Dcf(ss, 1.0, 1.5) == 1.0);
  CHECK(Dcf(ss, 7.0, -kInf) == 7.0);
  const CostParams cp{1.0, 1.0, 0.01};
  CHECK(cp.Beta() == doctest::Approx(99.0).epsilon(1e-12));
  CHECK(std::abs(CostParams::FromBeta(99.0).Beta() - 99.0) < 1e-12);
  CHECK_THROWS(CostParams{1.0, 1.0, 1.0}.Validate());
  CHECK_THROWS(Dcf(ss, -1.0, 0.0));
}

TEST_CASE("soft detection cost") {
  // One nontarget exactly at the threshold, targets far above it.
  const ScoreSet ss = Make({100, 101}, {2.0});
  CHECK(SoftDcf(ss, 9.0, 2.0, 20.0).value == doctest::Approx(4.5));

  Rng rng(2);
  for (int rep = 0; rep < 50; ++rep) {
    ScoreSet r = RandomSet(&rng, 60, false);
    const double theta = rng.Normal();
    const double alpha = 5.0 + 50 * rng.Uniform();
    for (double &s : r.scores)
      if (std::abs(s - theta) < 10 / alpha) s = theta + (s < theta ? -1 : 1) * 10 / alpha;
    const double beta = 0.5 + 20 * rng.Uniform();
    CHECK(std::abs(SoftDcf(r, beta, theta, alpha).value - Dcf(r, beta, theta)) <=
          1e-4 * (1 + beta));
  }
}

TEST_CASE("soft detection cost gradients match finite differences") {
  Rng rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    const ScoreSet ss = RandomSet(&rng, 40, false);
    const double theta = 0.3 * rng.Normal(), alpha = 4.0, beta = 3.0, h = 1e-6;
    const SoftDcfResult r = SoftDcf(ss, beta, theta, alpha);
    const double fd = (SoftDcf(ss, beta, theta + h, alpha).value -
                       SoftDcf(ss, beta, theta - h, alpha).value) / (2 * h);
    CHECK(std::abs(fd - r.d_theta) <= 1e-6 * std::max(1.0, std::abs(fd)));
    ScoreSet moved = ss;
    const std::size_t i = rng.UniformIndex(ss.Size());
    moved.scores[i] += h;
    const double up = SoftDcf(moved, beta, theta, alpha).value;
    moved.scores[i] -= 2 * h;
    const double down = SoftDcf(moved, beta, theta, alpha).value;
    CHECK(std::abs((up - down) / (2 * h) - r.d_scores[i]) <= 1e-6);
  }
}

TEST_CASE("soft detection cost approaches the hard cost as alpha grows") {
  Rng rng(4);
  for (int rep = 0; rep < 20; ++rep) {
    ScoreSet ss = RandomSet(&rng, 80, false);
    const double theta = 0.5, beta = 5.0;
    for (double &s : ss.scores)
      if (std::abs(s - theta) < 0.02) s = theta + (s >= theta ? 0.02 : -0.02);
    const double hard = Dcf(ss, beta, theta);
    double prev_bound = kInf, first = 0, last = 0;
    for (double alpha : {1.0, 10.0, 100.0, 1000.0}) {
      // Sum of the per-trial indicator errors bounds |soft - hard|.
      double bound = 0;
      const double nt = static_cast<double>(ss.NumTargets());
      const double nn = static_cast<double>(ss.NumNontargets());
      for (std::size_t i = 0; i < ss.Size(); ++i) {
        const double tail = Sigmoid(-alpha * std::abs(ss.scores[i] - theta));
        bound += ss.labels[i] ? tail / nt : beta * tail / nn;
      }
      const double err = std::abs(SoftDcf(ss, beta, theta, alpha).value - hard);
      CHECK(err <= bound + 1e-12);
      CHECK(bound < prev_bound);
      prev_bound = bound;
      if (alpha == 1.0) first = err;
      last = err;
    }
    CHECK(last <= first);
    CHECK(last < 1e-2);
  }
}

TEST_CASE("minimum detection cost") {
  const MinDcfResult r = MinDcf(Make({1, 2}, {0, 3}), 1.0);
  CHECK(r.min_dcf == 0.5);
  CHECK(MinDcf(Make({2, 3}, {0, 1}), 99.0).min_dcf == 0.0);

  const MinDcfResult sep = MinDcf(Make({1}, {0}), 1.0);
  CHECK(sep.min_dcf == 0.0);
  CHECK(sep.threshold == 0.5);
  // -inf and +inf both cost 1; ties go to the smallest threshold.
  CHECK(MinDcf(Make({0}, {1}), 1.0).threshold == -kInf);

  Rng rng(5);
  for (int rep = 0; rep < 200; ++rep) {
    const ScoreSet ss = RandomSet(&rng, 60, rep % 2 == 0);
    const double beta = 0.2 + 100 * rng.Uniform();
    const MinDcfResult m = MinDcf(ss, beta);
    CHECK(m.min_dcf == OracleMinDcf(ss, beta));
    CHECK(Dcf(ss, beta, m.threshold) == m.min_dcf);
    for (int j = 0; j < 5; ++j) CHECK(m.min_dcf <= Dcf(ss, beta, 2 * rng.Normal()));
    // Strictly increasing maps leave the minimum unchanged.
    ScoreSet affine = ss, cubic = ss;
    for (double &s : affine.scores) s = 3 * s - 7;
    for (double &s : cubic.scores) s = s * s * s + s;
    CHECK(MinDcf(affine, beta).min_dcf == m.min_dcf);
    CHECK(MinDcf(cubic, beta).min_dcf == m.min_dcf);
  }
}

TEST_CASE("actual detection cost") {
  Rng rng(6);
  for (int rep = 0; rep < 50; ++rep) {
    const ScoreSet ss = RandomSet(&rng, 50, false);
    CHECK(ActDcf(ss, 9.0) >= MinDcf(ss, 9.0).min_dcf);
    CHECK(ActDcf(ss, 1.0) == Dcf(ss, 1.0, 0.0));
    CHECK(ActDcf(ss, 99.0) == Dcf(ss, 99.0, std::log(99.0)));
  }
  CHECK(std::log(99.0) == doctest::Approx(4.5951).epsilon(1e-5));
  // A constant shift moves scores across log(beta).
  ScoreSet ss = Make({1.0, 5.0}, {0.0, 4.0});
  const double before = ActDcf(ss, 99.0);
  for (double &s : ss.scores) s += 1.0;
  CHECK(ActDcf(ss, 99.0) != before);
  CHECK(ActDcf(ss, CostParams{1, 1, 0.01}) == ActDcf(ss, 99.0));
}

TEST_CASE("equal error rate") {
  CHECK(Eer(Make({2, 3}, {0, 1})) == 0.0);
  CHECK(Eer(Make({0.9, 0.8, 0.7}, {0.1, 0.2, 0.75})) == doctest::Approx(1.0 / 3));
  CHECK(Eer(Make({0}, {1})) == 1.0);

  Rng rng(7);
  for (int rep = 0; rep < 200; ++rep) {
    const ScoreSet ss = RandomSet(&rng, 60, rep % 2 == 0);
    const double e = Eer(ss);
    CHECK(e == doctest::Approx(OracleEer(ss)).epsilon(1e-12));
    ScoreSet flipped = ss;
    for (auto &l : flipped.labels) l = 1 - l;
    CHECK(Eer(flipped) == doctest::Approx(OracleEer(flipped)).epsilon(1e-12));
    if (rep % 2 == 1)  // distinct scores: flipping mirrors the curve
      CHECK(Eer(flipped) == doctest::Approx(1.0 - e).epsilon(1e-12));
  }
}

TEST_CASE("cross-entropy losses") {
  const std::vector<double> zeros(4, 0.0);
  const std::vector<std::uint8_t> labels = {1, 0, 1, 0};
  CHECK(BceLoss(zeros, labels).value == doctest::Approx(std::log(2.0)));
  CHECK(std::abs(std::log(2.0) - 0.6931) < 1e-4);

  Rng rng(8);
  std::vector<double> s(4), ref(4);
  for (double &v : s) v = 3 * rng.Normal();
  for (double &v : ref) v = 3 * rng.Normal();
  const LossResult plain = BceLoss(s, labels);
  const LossResult reg0 = BceRegularized(s, labels, ref, 0.0);
  CHECK(reg0.value == plain.value);
  CHECK(reg0.d_scores == plain.d_scores);
  CHECK(BceRegularized(s, labels, s, 2.0).value == plain.value);

  const LossResult reg = BceRegularized(s, labels, ref, 0.7);
  const double h = 1e-6;
  for (std::size_t i = 0; i < 4; ++i) {
    auto up = s, down = s;
    up[i] += h;
    down[i] -= h;
    const double fd = (BceRegularized(up, labels, ref, 0.7).value -
                       BceRegularized(down, labels, ref, 0.7).value) / (2 * h);
    CHECK(fd == doctest::Approx(reg.d_scores[i]).epsilon(1e-6));
  }
  // Large margins stay finite.
  const std::vector<double> big = {800, -800, -800, 800};
  CHECK(std::isfinite(BceLoss(big, labels).value));
  CHECK(BceLoss(big, labels).value == doctest::Approx(400.0));
}

}  // namespace nplda
