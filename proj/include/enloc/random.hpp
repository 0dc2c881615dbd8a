/*
 * (C) Copyright 2026 The enloc authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace enloc {

/// What a random stream is used for. Distinct purposes never share draws.
enum class StreamPurpose : std::uint32_t {
  Prior = 1,
  Perturbation = 2,
  Truth = 3,
  ObservationNoise = 4,
  ModelSetup = 5,
};

/// Root seed of a run. Every random quantity is drawn from a substream keyed
/// by (purpose, step, member), so results do not depend on evaluation order
/// or thread count.
///
/// Generator: std::mt19937_64 seeded through std::seed_seq, normal deviates
/// from std::normal_distribution. Bit-identical per build and standard library.
struct RunSeed {
  std::uint64_t seed = 0;

  std::mt19937_64 stream(StreamPurpose purpose, std::uint64_t step,
                         std::uint64_t member) const;
};

/// Fills `out` with independent standard normal deviates from `gen`.
void fill_standard_normal(std::mt19937_64 & gen, Eigen::Ref<Eigen::VectorXd> out);

}  // namespace enloc
