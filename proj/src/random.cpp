/*
 * (C) Copyright 2026 The enloc authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "enloc/random.hpp"

namespace enloc {

std::mt19937_64 RunSeed::stream(StreamPurpose purpose, std::uint64_t step,
                                std::uint64_t member) const {
  auto lo = [](std::uint64_t v) {return static_cast<std::uint32_t>(v & 0xffffffffu);};
  auto hi = [](std::uint64_t v) {return static_cast<std::uint32_t>(v >> 32);};
  std::seed_seq seq{lo(seed), hi(seed), static_cast<std::uint32_t>(purpose),
                    lo(step), hi(step), lo(member), hi(member)};
  return std::mt19937_64(seq);
}

void fill_standard_normal(std::mt19937_64 & gen, Eigen::Ref<Eigen::VectorXd> out) {
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = normal(gen);
}

}  // namespace enloc
