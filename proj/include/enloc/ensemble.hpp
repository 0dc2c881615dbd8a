/*
 * (C) Copyright 2026 The enloc authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace enloc {

using Index = Eigen::Index;

/// Cell coordinates in gridblock units.
struct GridCell {
  int i = 0;
  int j = 0;
  int k = 0;
  bool operator==(const GridCell &) const = default;
};

struct ParameterInfo {
  std::string name;
  /// Property field the parameter belongs to (e.g. "poro"); empty for scalars.
  std::string field;
  std::optional<GridCell> cell;
};

struct DatumInfo {
  std::string source;  ///< data source, e.g. a well name
  std::string kind;    ///< data kind, e.g. "wct"
  int time_index = 0;
  /// Planar location of the source in gridblock units, when it has one.
  std::optional<std::pair<double, double>> location;
};

/// Row range [start, start + width) of the parameter dimension.
struct RowBlock {
  Index start = 0;
  Index width = 0;
};

/// Splits [0, rows) into consecutive blocks of at most `width` rows.
std::vector<RowBlock> partition_rows(Index rows, Index width);

// -----------------------------------------------------------------------------
/// Nm x Ne matrix of parameter realizations (one column per member).
class Ensemble {
 public:
  Ensemble() = default;
  explicit Ensemble(Eigen::MatrixXd values, std::vector<ParameterInfo> params = {});

  const Eigen::MatrixXd & values() const {return values_;}
  Eigen::MatrixXd & values() {return values_;}
  Index n_params() const {return values_.rows();}
  Index n_members() const {return values_.cols();}
  const std::vector<ParameterInfo> & parameters() const {return params_;}

 private:
  Eigen::MatrixXd values_;
  std::vector<ParameterInfo> params_;
};

/// Nd x Ne matrix of forward-model outputs; column k belongs to member k.
class PredictedEnsemble {
 public:
  PredictedEnsemble() = default;
  explicit PredictedEnsemble(Eigen::MatrixXd values, std::vector<DatumInfo> data = {});

  const Eigen::MatrixXd & values() const {return values_;}
  Index n_data() const {return values_.rows();}
  Index n_members() const {return values_.cols();}
  const std::vector<DatumInfo> & data() const {return data_;}

 private:
  Eigen::MatrixXd values_;
  std::vector<DatumInfo> data_;
};

// -----------------------------------------------------------------------------

/// Marker stored in correlation blocks for pairs involving a constant row.
inline constexpr double kUndefinedCorrelation = std::numeric_limits<double>::quiet_NaN();

/// Unbiased sample cross-covariance of two equally long rows.
double cross_covariance(std::span<const double> m_row, std::span<const double> d_row);

/// Sample correlation clamped to [-1, 1]. Throws UndefinedCorrelation if
/// either row is constant.
double correlation(std::span<const double> m_row, std::span<const double> d_row);

Eigen::VectorXd ensemble_variance_per_row(const Ensemble & ens);

/// Computes parameter-data correlations one row block at a time. The data
/// anomalies are normalized once on construction; the parameter side is
/// normalized per block, so memory stays at O(width x Nd).
class CorrelationEngine {
 public:
  CorrelationEngine(const Ensemble & ens, const PredictedEnsemble & pred);

  /// width x Nd block; kUndefinedCorrelation where a row is constant.
  Eigen::MatrixXd block(const RowBlock & rows) const;
  void block(const RowBlock & rows, Eigen::Ref<Eigen::MatrixXd> out) const;

  Index n_params() const {return ens_.n_params();}
  Index n_data() const {return data_unit_.rows();}
  int n_members() const {return static_cast<int>(ens_.n_members());}

 private:
  const Ensemble & ens_;
  Eigen::MatrixXd data_unit_;       // Nd x Ne, rows of unit norm (or zero)
  std::vector<bool> data_defined_;
};

Eigen::MatrixXd correlation_block(const Ensemble & ens, const PredictedEnsemble & pred,
                                  const RowBlock & rows);

// -----------------------------------------------------------------------------
// CSV with header "param_id,e1,...,eNe". Grid parameters are named
// "<field>@i.j.k" and their cells are recovered on read.

std::string parameter_id(const ParameterInfo & info, Index row);
void write_ensemble_csv(std::ostream & os, const Ensemble & ens);
Ensemble read_ensemble_csv(std::istream & is);

}  // namespace enloc
