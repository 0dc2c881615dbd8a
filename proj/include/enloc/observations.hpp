/*
 * (C) Copyright 2026 The enloc authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <Eigen/Dense>

#include "enloc/error.hpp"

namespace enloc {

/// Observed data with independent Gaussian errors, C_e = diag(sigma_e^2).
struct ObservationSet {
  Eigen::VectorXd d_obs;
  Eigen::VectorXd sigma_e;

  Eigen::Index size() const {return d_obs.size();}

  void validate() const {
    if (d_obs.size() != sigma_e.size()) {
      throw DimensionMismatch("observations and error deviations differ in length");
    }
    if (!d_obs.allFinite()) throw InvalidArgument("observations must be finite");
    if (!sigma_e.allFinite() || (sigma_e.array() <= 0.0).any()) {
      throw InvalidArgument("error deviations must be finite and positive");
    }
  }
};

}  // namespace enloc
