// baselines-test.cc

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

#include "doctest.h"
#include "nplda/baselines.h"
#include "nplda/metrics.h"
#include "test-util.h"

namespace nplda {

namespace {

double RelFrob(const Eigen::MatrixXd &a, const Eigen::MatrixXd &b) {
  return (a - b).norm() / b.norm();
}

TrialData RandomTrialData(Rng *rng, Eigen::Index k, std::size_t n_embeddings,
                          std::size_t n_trials) {
  TrialData data;
  data.embeddings = rng->NormalMatrix(k, static_cast<Eigen::Index>(n_embeddings));
  for (std::size_t i = 0; i < n_trials; ++i) {
    data.pairs.push_back({rng->UniformIndex(n_embeddings),
                          rng->UniformIndex(n_embeddings)});
    data.labels.push_back(i % 3 == 0 ? 1 : 0);
  }
  return data;
}

}  // namespace

TEST_CASE("quadratic expansion") {
  const Eigen::VectorXd phi =
      ExpandQuadratic(Eigen::VectorXd::Constant(1, 2.0), Eigen::VectorXd::Constant(1, 3.0));
  CHECK(phi == Eigen::Vector4d(12, 13, 5, 1));
  CHECK(QuadraticExpansionSize(3) == 22);

  Rng rng(1);
  const Eigen::VectorXd a = rng.NormalVector(4), b = rng.NormalVector(4);
  CHECK(ExpandQuadratic(a, b) == ExpandQuadratic(b, a));
  const Eigen::VectorXd z = ExpandQuadratic(Eigen::VectorXd::Zero(4),
                                            Eigen::VectorXd::Zero(4));
  CHECK(z.head(z.size() - 1).isZero());
  CHECK(z(z.size() - 1) == 1.0);
  CHECK_THROWS_AS(ExpandQuadratic(a, Eigen::VectorXd::Zero(3)), DimensionError);
}

TEST_CASE("dplda scoring") {
  Rng rng(2);
  const Eigen::VectorXd a = rng.NormalVector(3), b = rng.NormalVector(3);
  DpldaModel m{Eigen::VectorXd::Zero(22)};
  CHECK(m.Dim() == 3);
  CHECK(DpldaScore(m, a, b) == 0.0);
  m.w(21) = 1.0;
  CHECK(DpldaScore(m, a, b) == 1.0);
  CHECK_THROWS_AS(DpldaScore(m, rng.NormalVector(2), rng.NormalVector(2)),
                  DimensionError);
  CHECK_THROWS_AS(DpldaModel{Eigen::VectorXd::Zero(20)}.Dim(), DimensionError);
}

TEST_CASE("dplda weights from gplda reproduce gplda scores") {
  Rng rng(3);
  for (int rep = 0; rep < 5; ++rep) {
    GpldaModel m{rng.NormalMatrix(5, 5), testing::RandomSpd(&rng, 5),
                 rng.NormalVector(5)};
    const ScoreMatrices sm = DeriveScoreMatrices(m);
    const DpldaModel plain = DpldaFromGplda(sm);
    const DpldaModel shifted = DpldaFromGplda(sm, m.mu);
    for (int i = 0; i < 200; ++i) {
      const Eigen::VectorXd e = rng.NormalVector(5), t = rng.NormalVector(5);
      CHECK(std::abs(DpldaScore(plain, e, t) - GpldaScore(sm, e, t)) <= 1e-10);
      CHECK(std::abs(DpldaScore(shifted, e, t) -
                     GpldaScore(sm, e - m.mu, t - m.mu)) <= 1e-10);
      CHECK(DpldaScore(plain, e, t) == doctest::Approx(DpldaScore(plain, t, e)));
    }
  }
}

TEST_CASE("gaussian backend llr") {
  GaussianBackendModel m{Eigen::Vector2d(1, 1), Eigen::MatrixXd::Identity(2, 2),
                         Eigen::Vector2d(0, 0), Eigen::MatrixXd::Identity(2, 2)};
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(1);
  CHECK(GaussianBackendLlr(m, one, one) == doctest::Approx(2.0));

  // Monotone along the segment from mu_nt to mu_t.
  double prev = -1e300;
  for (int i = 0; i <= 20; ++i) {
    const double s = i / 20.0;
    const double llr = GaussianBackendLlr(m, s * one, s * one);
    CHECK(llr > prev);
    prev = llr;
  }

  Rng rng(4);
  GaussianBackendModel same{rng.NormalVector(4), testing::RandomSpd(&rng, 4),
                            Eigen::VectorXd(), Eigen::MatrixXd()};
  same.mu_nt = same.mu_t;
  same.sigma_nt = same.sigma_t;
  for (int i = 0; i < 10; ++i)
    CHECK(GaussianBackendLlr(same, rng.NormalVector(2), rng.NormalVector(2)) == 0.0);
  CHECK_THROWS_AS(GaussianBackendLlr(same, rng.NormalVector(3), rng.NormalVector(3)),
                  DimensionError);
}

TEST_CASE("gaussian backend llr is invariant to an affine change of basis") {
  Rng rng(5);
  GaussianBackendModel m{rng.NormalVector(6), testing::RandomSpd(&rng, 6),
                         rng.NormalVector(6), testing::RandomSpd(&rng, 6)};
  Eigen::MatrixXd a = rng.NormalMatrix(6, 6) + 3.0 * Eigen::MatrixXd::Identity(6, 6);
  const Eigen::VectorXd c = rng.NormalVector(6);
  GaussianBackendModel t{a * m.mu_t + c, a * m.sigma_t * a.transpose(),
                         a * m.mu_nt + c, a * m.sigma_nt * a.transpose()};
  t.sigma_t = (0.5 * (t.sigma_t + t.sigma_t.transpose())).eval();
  t.sigma_nt = (0.5 * (t.sigma_nt + t.sigma_nt.transpose())).eval();
  for (int i = 0; i < 50; ++i) {
    const Eigen::VectorXd z = rng.NormalVector(6);
    const Eigen::VectorXd tz = a * z + c;
    CHECK(GaussianBackendLlr(t, tz.head(3), tz.tail(3)) ==
          doctest::Approx(GaussianBackendLlr(m, z.head(3), z.tail(3))).epsilon(1e-8));
  }
}

TEST_CASE("gaussian backend fit") {
  Rng rng(6);
  SUBCASE("identical populations give identical classes") {
    const Eigen::MatrixXd pop = rng.NormalMatrix(4, 50);
    Eigen::MatrixXd stacked(4, 100);
    stacked << pop, pop;
    std::vector<std::uint8_t> labels(100, 0);
    std::fill(labels.begin(), labels.begin() + 50, 1);
    const GaussianBackendModel m = FitGaussianBackend(stacked, labels);
    CHECK((m.mu_t - m.mu_nt).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((m.sigma_t - m.sigma_nt).cwiseAbs().maxCoeff() < 1e-14);
  }
  SUBCASE("recovers generating Gaussians from 50k trials") {
    const Eigen::VectorXd mt = rng.NormalVector(4), mn = rng.NormalVector(4);
    const Eigen::MatrixXd st = testing::RandomSpd(&rng, 4),
                          sn = testing::RandomSpd(&rng, 4);
    const Eigen::MatrixXd lt = st.llt().matrixL(), ln = sn.llt().matrixL();
    Eigen::MatrixXd stacked(4, 50000);
    std::vector<std::uint8_t> labels(50000);
    for (Eigen::Index i = 0; i < 50000; ++i) {
      labels[static_cast<std::size_t>(i)] = i % 2;
      stacked.col(i) = i % 2 ? Eigen::VectorXd(mt + lt * rng.NormalVector(4))
                             : Eigen::VectorXd(mn + ln * rng.NormalVector(4));
    }
    const GaussianBackendModel m = FitGaussianBackend(stacked, labels);
    CHECK((m.mu_t - mt).norm() / mt.norm() < 0.05);
    CHECK((m.mu_nt - mn).norm() / mn.norm() < 0.05);
    CHECK(RelFrob(m.sigma_t, st) < 0.05);
    CHECK(RelFrob(m.sigma_nt, sn) < 0.05);
  }
  SUBCASE("duplicated single trials engage the ridge") {
    Eigen::MatrixXd stacked(2, 4);
    stacked << 1, 1, 0, 0,
               2, 2, 0, 0;
    const std::vector<std::uint8_t> labels = {1, 1, 0, 0};
    const GaussianBackendModel m = FitGaussianBackend(stacked, labels);
    CHECK_NOTHROW(m.Validate());
    CHECK(m.sigma_t(0, 0) > 0.0);
    CHECK(std::isfinite(GaussianBackendLlr(m, Eigen::VectorXd::Ones(1),
                                           Eigen::VectorXd::Ones(1))));
  }
  SUBCASE("a missing class is an error") {
    const std::vector<std::uint8_t> labels = {1, 1};
    CHECK(testing::CaptureKind([&] {
            FitGaussianBackend(rng.NormalMatrix(2, 2), labels);
          }) == DataError::Kind::kInsufficientData);
  }
}

TEST_CASE("dplda training") {
  Rng rng(7);
  TrainConfig cfg;
  cfg.batch_size = 64;
  cfg.seed = 3;

  SUBCASE("zero epochs keeps the gplda weights") {
    const TrialData data = RandomTrialData(&rng, 3, 20, 100);
    GpldaModel g{rng.NormalMatrix(3, 3), testing::RandomSpd(&rng, 3),
                 rng.NormalVector(3)};
    const ScoreMatrices sm = DeriveScoreMatrices(g);
    const DpldaModel w0 = DpldaFromGplda(sm, g.mu);
    cfg.max_epochs = 0;
    const DpldaTrainResult r = TrainDplda(data, w0.w, cfg);
    for (const auto &pair : data.pairs) {
      const Eigen::VectorXd e = data.embeddings.col(static_cast<Eigen::Index>(pair.enroll));
      const Eigen::VectorXd t = data.embeddings.col(static_cast<Eigen::Index>(pair.test));
      CHECK(std::abs(DpldaScore(r.model, e, t) - GpldaScore(sm, e - g.mu, t - g.mu)) <=
            1e-10);
    }
  }
  SUBCASE("a huge penalty pins the weights") {
    const TrialData data = RandomTrialData(&rng, 2, 30, 200);
    const Eigen::VectorXd w0 = rng.NormalVector(QuadraticExpansionSize(2));
    cfg.max_epochs = 5;
    cfg.lambda = 1e6;
    const DpldaTrainResult r = TrainDplda(data, w0, cfg);
    CHECK((r.model.w - w0).norm() <= 1e-3 * w0.norm());
  }
  SUBCASE("separable trials reach zero training eer") {
    // Targets point the same way, non-targets opposite ways.
    TrialData data;
    data.embeddings.resize(2, 400);
    for (Eigen::Index i = 0; i < 200; ++i) {
      const Eigen::VectorXd u = rng.NormalVector(2).normalized();
      const bool target = i % 2 == 0;
      data.embeddings.col(2 * i) = u;
      data.embeddings.col(2 * i + 1) = target ? Eigen::VectorXd(u) : Eigen::VectorXd(-u);
      data.pairs.push_back({static_cast<std::size_t>(2 * i),
                            static_cast<std::size_t>(2 * i + 1)});
      data.labels.push_back(target ? 1 : 0);
    }
    cfg.max_epochs = 100;
    cfg.lr = 0.05;
    cfg.lambda = 0.0;
    const DpldaTrainResult r =
        TrainDplda(data, Eigen::VectorXd::Zero(QuadraticExpansionSize(2)), cfg);
    ScoreSet ss;
    for (std::size_t i = 0; i < data.Size(); ++i) {
      ss.scores.push_back(DpldaScore(
          r.model, data.embeddings.col(static_cast<Eigen::Index>(data.pairs[i].enroll)),
          data.embeddings.col(static_cast<Eigen::Index>(data.pairs[i].test))));
      ss.labels.push_back(data.labels[i]);
    }
    CHECK(Eer(ss) == 0.0);
    CHECK(r.epoch_losses.back() < r.epoch_losses.front());
  }
  SUBCASE("divergence is reported") {
    const TrialData data = RandomTrialData(&rng, 2, 30, 200);
    cfg.max_epochs = 5;
    cfg.lr = 1e4;
    CHECK_THROWS_AS(
        TrainDplda(data, Eigen::VectorXd::Zero(QuadraticExpansionSize(2)), cfg),
        TrainingError);
  }
}

}  // namespace nplda
