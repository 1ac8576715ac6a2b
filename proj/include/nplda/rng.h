// nplda/rng.h

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

#ifndef NPLDA_RNG_H_
#define NPLDA_RNG_H_

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace nplda {

/// Seedable random source whose output is identical on every platform.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard.  The standard <random> distributions are implementation-defined,
/// so the transforms on top of the engine are done here:
///   - Uniform(): top 53 bits of one engine draw, scaled to [0, 1).
///   - UniformIndex(n): rejection sampling on the engine output.
///   - Normal(): Box-Muller on two Uniform() draws, caching the sine branch.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double Uniform();
  std::size_t UniformIndex(std::size_t n);
  double Normal();

  /// Column vector of i.i.d. standard normals.
  Eigen::VectorXd NormalVector(Eigen::Index n);
  Eigen::MatrixXd NormalMatrix(Eigen::Index rows, Eigen::Index cols);

  /// Fisher-Yates shuffle.
  template <typename T>
  void Shuffle(std::vector<T> *items) {
    for (std::size_t i = items->size(); i > 1; --i) {
      std::size_t j = UniformIndex(i);
      std::swap((*items)[i - 1], (*items)[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool have_cached_ = false;
  double cached_ = 0.0;
};

}  // namespace nplda

#endif  // NPLDA_RNG_H_
