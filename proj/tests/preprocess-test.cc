// preprocess-test.cc

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
#include "nplda/preprocess.h"
#include "test-util.h"

namespace nplda {

TEST_CASE("centering") {
  Eigen::MatrixXd two(2, 2);
  two << 0, 2,
         2, 0;
  CHECK(FitCentering(two).isApprox(Eigen::Vector2d(1, 1)));
  const Eigen::VectorXd v = Eigen::Vector3d(1, -2, 3);
  CHECK(FitCentering(Eigen::MatrixXd(v)) == v);
  CHECK_THROWS_AS(FitCentering(Eigen::MatrixXd(3, 0)), Error);

  // Welford streaming mean as an independent oracle.
  Rng rng(1);
  const Eigen::MatrixXd x = rng.NormalMatrix(4, 1000) * 10.0;
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(4);
  for (Eigen::Index i = 0; i < x.cols(); ++i)
    mean += (x.col(i) - mean) / static_cast<double>(i + 1);
  CHECK((FitCentering(x) - mean).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("length normalization") {
  const Eigen::VectorXd v = LengthNormalize(Eigen::Vector2d(3, 4));
  CHECK(v(0) == doctest::Approx(0.6));
  CHECK(v(1) == doctest::Approx(0.8));
  Rng rng(2);
  for (int i = 0; i < 20; ++i) {
    const Eigen::VectorXd r = rng.NormalVector(7);
    const Eigen::VectorXd u = LengthNormalize(r);
    CHECK(std::abs(u.norm() - 1.0) < 1e-12);
    CHECK((LengthNormalize(u) - u).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((LengthNormalize(3.7 * r) - u).cwiseAbs().maxCoeff() < 1e-15);
  }
  CHECK_THROWS_AS(LengthNormalize(Eigen::VectorXd::Zero(3)), NumericError);
  CHECK_THROWS_AS(LengthNormalize(Eigen::Vector2d(1, NAN)), NumericError);
}

TEST_CASE("lda separates two clusters along their axis") {
  Rng rng(3);
  Eigen::MatrixXd x(2, 400);
  std::vector<std::vector<std::size_t>> groups(2);
  for (Eigen::Index i = 0; i < 400; ++i) {
    const int s = i < 200 ? 0 : 1;
    x.col(i) = Eigen::Vector2d(s ? 5.0 : -5.0, 0.0) + rng.NormalVector(2);
    groups[static_cast<std::size_t>(s)].push_back(static_cast<std::size_t>(i));
  }
  const LdaResult lda = FitLda(x, groups, 1);
  CHECK(std::abs(std::abs(lda.projection(0, 0)) - 1.0) < 0.01);
  CHECK(lda.projection(0, 0) > 0);  // sign convention
}

TEST_CASE("lda rows are generalized eigenvectors in descending order") {
  Rng rng(4);
  const EmbeddingArchive archive = testing::RandomArchive(&rng, 5, 3, 10);
  const LdaResult lda = FitLda(archive, 2);
  REQUIRE(lda.projection.rows() == 2);
  for (Eigen::Index j = 0; j < 2; ++j) {
    const Eigen::VectorXd r = lda.projection.row(j).transpose();
    CHECK(std::abs(r.norm() - 1.0) < 1e-12);
    const Eigen::VectorXd residual =
        lda.between * r - lda.eigenvalues(j) * lda.within * r;
    CHECK(residual.cwiseAbs().maxCoeff() < 1e-8);
  }
  CHECK(lda.eigenvalues(0) >= lda.eigenvalues(1));
}

TEST_CASE("lda is invariant to a global translation") {
  Rng rng(5);
  const EmbeddingArchive archive = testing::RandomArchive(&rng, 4, 6, 8);
  EmbeddingArchive shifted(4);
  const Eigen::VectorXd shift = 100.0 * rng.NormalVector(4);
  for (const Embedding &e : archive.Records())
    shifted.Add({e.segment_id, e.speaker_id, e.gender, e.vector + shift});
  const LdaResult a = FitLda(archive, 3), b = FitLda(shifted, 3);
  CHECK((a.projection - b.projection).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("full-rank lda preserves the between/within ratio") {
  Rng rng(6);
  const EmbeddingArchive archive = testing::RandomArchive(&rng, 3, 8, 10);
  const LdaResult lda = FitLda(archive, 3);
  // In the projected space the generalized eigenproblem is diagonal with the
  // same eigenvalues.
  const Eigen::MatrixXd w = lda.projection;
  const Eigen::MatrixXd sb = w * lda.between * w.transpose();
  const Eigen::MatrixXd sw = w * lda.within * w.transpose();
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(sb, sw);
  Eigen::VectorXd ev = ges.eigenvalues().reverse();
  CHECK((ev - lda.eigenvalues).cwiseAbs().maxCoeff() <
        1e-8 * lda.eigenvalues.maxCoeff());
}

TEST_CASE("lda preconditions") {
  Rng rng(7);
  const EmbeddingArchive archive = testing::RandomArchive(&rng, 4, 3, 5);
  CHECK_THROWS_AS(FitLda(archive, 3), Error);  // needs 4 speakers
  CHECK_THROWS_AS(FitLda(archive, 0), Error);
  CHECK_THROWS_AS(FitLda(archive, 5), Error);
  // Every speaker has one record: S_w is zero even after the relative ridge.
  const EmbeddingArchive single = testing::RandomArchive(&rng, 3, 5, 1);
  CHECK_THROWS_AS(FitLda(single, 2), NumericError);
}

TEST_CASE("pipeline application") {
  const PreprocessPipeline id = PreprocessPipeline::Identity(2);
  CHECK(id.Apply(Eigen::Vector2d(3, 4)).isApprox(Eigen::Vector2d(0.6, 0.8)));

  Rng rng(8);
  PreprocessPipeline p{rng.NormalVector(4), rng.NormalMatrix(3, 4),
                       rng.NormalVector(3)};
  CHECK(p.Apply(p.mean).isApprox(LengthNormalize(-p.post_mean)));
  CHECK_THROWS_AS(p.Apply(Eigen::VectorXd::Ones(3)), DimensionError);

  const Eigen::MatrixXd x = rng.NormalMatrix(4, 100);
  const Eigen::MatrixXd batch = p.ApplyColumns(x);
  for (Eigen::Index i = 0; i < 100; ++i)
    CHECK((batch.col(i) - p.Apply(x.col(i))).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("fitted pipeline centers the training set") {
  Rng rng(9);
  const EmbeddingArchive archive = testing::RandomArchive(&rng, 6, 12, 6);
  const PreprocessPipeline p = FitPipeline(archive);
  CHECK(p.OutputDim() == DefaultLdaDim(6, 12));
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(p.OutputDim());
  for (const Embedding &e : archive.Records()) {
    sum += p.Project(e.vector);
    CHECK(std::abs(p.Apply(e.vector).norm() - 1.0) < 1e-12);
  }
  CHECK((sum / static_cast<double>(archive.Size())).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(DefaultLdaDim(512, 1000) == 170);
  CHECK(DefaultLdaDim(8, 3) == 2);
  CHECK(DefaultLdaDim(8, 1) == 1);
}

}  // namespace nplda
