// rng-test.cc

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
#include <numeric>
#include <vector>

#include "doctest.h"
#include "nplda/rng.h"

namespace nplda {

TEST_CASE("same seed gives the same stream") {
  Rng a(7), b(7), c(8);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const double x = a.Uniform();
    CHECK(x == b.Uniform());
    differs = differs || x != c.Uniform();
  }
  CHECK(differs);
}

TEST_CASE("uniform draws stay in [0, 1) and index draws in range") {
  Rng rng(1);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.Uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(rng.UniformIndex(7) < 7);
  }
  CHECK(rng.UniformIndex(0) == 0);
  CHECK(rng.UniformIndex(1) == 0);
}

TEST_CASE("normal draws have unit moments") {
  Rng rng(3);
  const int n = 200000;
  double sum = 0, sq = 0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.Normal();
    sum += z;
    sq += z * z;
  }
  CHECK(sum / n == doctest::Approx(0.0).epsilon(0.01).scale(1.0));
  CHECK(sq / n == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("shuffle is a permutation and depends on the seed") {
  std::vector<int> v(50);
  std::iota(v.begin(), v.end(), 0);
  auto a = v, b = v;
  Rng r1(5), r2(6);
  r1.Shuffle(&a);
  r2.Shuffle(&b);
  CHECK(a != b);
  std::sort(a.begin(), a.end());
  CHECK(a == v);
}

}  // namespace nplda
