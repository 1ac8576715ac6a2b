// test-util.h

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

// Helpers shared by the unit tests.

#ifndef NPLDA_TESTS_TEST_UTIL_H_
#define NPLDA_TESTS_TEST_UTIL_H_

#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>

#include <Eigen/Dense>

#include "nplda/dataio.h"
#include "nplda/error.h"
#include "nplda/rng.h"

namespace nplda::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string &tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("nplda-" + tag + "-" + std::to_string(::getpid()) + "-" +
             std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::string File(const std::string &name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

inline std::string ReadFile(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

inline void WriteFile(const std::string &path, const std::string &content) {
  std::ofstream os(path, std::ios::binary);
  os << content;
}

/// Random symmetric positive definite matrix with eigenvalues in
/// [floor, floor + spread].
inline Eigen::MatrixXd RandomSpd(Rng *rng, Eigen::Index k, double floor = 0.5,
                                 double spread = 1.5) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(rng->NormalMatrix(k, k));
  const Eigen::MatrixXd q = qr.householderQ();
  Eigen::VectorXd ev(k);
  for (Eigen::Index i = 0; i < k; ++i) ev(i) = floor + spread * rng->Uniform();
  return q * ev.asDiagonal() * q.transpose();
}

/// Archive of `speakers` x `segments` random embeddings; speaker s gets a
/// random center of scale `between` plus unit-scale noise.
inline EmbeddingArchive RandomArchive(Rng *rng, Eigen::Index dim,
                                      std::size_t speakers,
                                      std::size_t segments,
                                      double between = 2.0) {
  EmbeddingArchive archive(dim);
  for (std::size_t s = 0; s < speakers; ++s) {
    const std::string spk = "s" + std::to_string(s);
    const Eigen::VectorXd center = between * rng->NormalVector(dim);
    for (std::size_t j = 0; j < segments; ++j)
      archive.Add({spk + "_" + std::to_string(j), spk,
                   s % 2 ? Gender::kFemale : Gender::kMale,
                   center + rng->NormalVector(dim)});
  }
  return archive;
}

template <typename F>
DataError::Kind CaptureKind(F &&f) {
  try {
    f();
  } catch (const DataError &e) {
    return e.kind();
  }
  throw std::logic_error("expected a DataError");
}

}  // namespace nplda::testing

#endif  // NPLDA_TESTS_TEST_UTIL_H_
