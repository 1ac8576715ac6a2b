// nplda/synth.h

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

#ifndef NPLDA_SYNTH_H_
#define NPLDA_SYNTH_H_

#include <cstddef>
#include <cstdint>
#include <istream>
#include <string>

#include <Eigen/Dense>

#include "nplda/dataio.h"

namespace nplda {

/// Parameters for drawing embeddings from  x = mean + phi * omega + eps.
struct SynthSpec {
  Eigen::Index dimension = 0;
  Eigen::Index rank = 0;  // 0 means rank = dimension
  std::size_t n_speakers = 0;
  std::size_t segments_per_speaker = 0;

  /// Explicit k x r speaker subspace; when empty a random one is drawn with
  /// i.i.d. N(0, 1) entries, column j scaled by phi_spectrum(j).
  Eigen::MatrixXd phi;
  Eigen::VectorXd phi_spectrum;  // r values; empty means all ones
  std::uint64_t phi_seed = 42;

  Eigen::MatrixXd sigma;  // k x k SPD residual covariance
  Eigen::VectorXd mean;   // k; empty means zero

  std::uint64_t seed = 42;
  std::string speaker_prefix = "spk";

  Eigen::Index Rank() const { return rank == 0 ? dimension : rank; }
  void Validate() const;
  /// The explicit phi, or the random one drawn from phi_seed.
  Eigen::MatrixXd ResolvedPhi() const;
};

/// Key-value text:
///
///   dimension = 8            # required
///   rank = 8                 # default: dimension
///   speakers = 200           # required
///   segments = 20            # required
///   seed = 42
///   phi = random             # or k*r values, row-major
///   phi_spectrum = 1.0       # one value or r values
///   phi_seed = 7             # default: seed
///   sigma = 0.5              # scalar (times I), k values (diagonal) or k*k
///   sigma_rotation_seed = 3  # optional: sigma <- R sigma R^T, R random
///                            # orthogonal
///   mean = 0                 # scalar or k values
///   prefix = spk
///
/// Throws DataError(kMalformedHeader) naming the offending line or key.
SynthSpec ParseSynthSpec(std::istream &is);
SynthSpec LoadSynthSpec(const std::string &path);

/// Random orthogonal k x k matrix (Q factor of a Gaussian matrix with the
/// signs fixed by diag(R) > 0).
Eigen::MatrixXd RandomRotation(Eigen::Index k, std::uint64_t seed);

/// Draws omega once per speaker and a fresh eps per segment.  Speakers
/// alternate male/female starting with male.  Deterministic under seed.
EmbeddingArchive Generate(const SynthSpec &spec);

}  // namespace nplda

#endif  // NPLDA_SYNTH_H_
