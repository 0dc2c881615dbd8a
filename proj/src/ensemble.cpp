/*
 * (C) Copyright 2026 The enloc authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "enloc/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>
#include <utility>

#include "enloc/error.hpp"
#include "enloc/text.hpp"

namespace enloc {

std::vector<RowBlock> partition_rows(Index rows, Index width) {
  if (width <= 0) throw InvalidArgument("block width must be positive");
  std::vector<RowBlock> blocks;
  for (Index start = 0; start < rows; start += width) {
    blocks.push_back({start, std::min(width, rows - start)});
  }
  return blocks;
}

// -----------------------------------------------------------------------------

Ensemble::Ensemble(Eigen::MatrixXd values, std::vector<ParameterInfo> params)
  : values_(std::move(values)), params_(std::move(params))
{
  if (values_.cols() < 2) throw InvalidEnsembleSize("an ensemble needs at least 2 members");
  if (!values_.allFinite()) throw InvalidArgument("ensemble contains non-finite values");
  if (params_.empty()) {
    params_.resize(values_.rows());
  } else if (static_cast<Index>(params_.size()) != values_.rows()) {
    throw DimensionMismatch("parameter metadata does not match the number of rows");
  }
}

PredictedEnsemble::PredictedEnsemble(Eigen::MatrixXd values, std::vector<DatumInfo> data)
  : values_(std::move(values)), data_(std::move(data))
{
  if (values_.cols() < 2) throw InvalidEnsembleSize("an ensemble needs at least 2 members");
  if (data_.empty()) {
    data_.resize(values_.rows());
  } else if (static_cast<Index>(data_.size()) != values_.rows()) {
    throw DimensionMismatch("datum metadata does not match the number of rows");
  }
}

// -----------------------------------------------------------------------------

double cross_covariance(std::span<const double> m_row, std::span<const double> d_row) {
  if (m_row.size() != d_row.size()) throw DimensionMismatch("rows differ in length");
  const std::size_t n = m_row.size();
  if (n < 2) throw InvalidEnsembleSize("covariance needs at least 2 samples");
  double m_mean = 0.0;
  double d_mean = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    m_mean += m_row[k];
    d_mean += d_row[k];
  }
  m_mean /= n;
  d_mean /= n;
  double sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) sum += (m_row[k] - m_mean) * (d_row[k] - d_mean);
  return sum / (n - 1.0);
}

double correlation(std::span<const double> m_row, std::span<const double> d_row) {
  const double c_md = cross_covariance(m_row, d_row);
  const double c_mm = cross_covariance(m_row, m_row);
  const double c_dd = cross_covariance(d_row, d_row);
  if (c_mm <= 0.0 || c_dd <= 0.0) throw UndefinedCorrelation("correlation of a constant row");
  return std::clamp(c_md / std::sqrt(c_mm * c_dd), -1.0, 1.0);
}

Eigen::VectorXd ensemble_variance_per_row(const Ensemble & ens) {
  const Eigen::MatrixXd & x = ens.values();
  const Eigen::VectorXd mean = x.rowwise().mean();
  return (x.colwise() - mean).rowwise().squaredNorm() / (x.cols() - 1.0);
}

// -----------------------------------------------------------------------------

namespace {

// Centers each row and scales it to unit Euclidean norm; constant rows are
// left at zero and flagged undefined.
void normalize_rows(Eigen::Ref<Eigen::MatrixXd> rows, std::vector<bool> & defined) {
  defined.assign(rows.rows(), false);
  for (Index i = 0; i < rows.rows(); ++i) {
    auto row = rows.row(i);
    row.array() -= row.mean();
    const double norm = row.norm();
    if (norm > 0.0 && std::isfinite(norm)) {
      row /= norm;
      defined[i] = true;
    } else {
      row.setZero();
    }
  }
}

}  // namespace

CorrelationEngine::CorrelationEngine(const Ensemble & ens, const PredictedEnsemble & pred)
  : ens_(ens), data_unit_(pred.values())
{
  if (pred.n_members() != ens.n_members()) {
    throw DimensionMismatch("ensemble and predictions differ in member count");
  }
  normalize_rows(data_unit_, data_defined_);
}

Eigen::MatrixXd CorrelationEngine::block(const RowBlock & rows) const {
  Eigen::MatrixXd out(rows.width, n_data());
  block(rows, out);
  return out;
}

void CorrelationEngine::block(const RowBlock & rows, Eigen::Ref<Eigen::MatrixXd> out) const {
  if (rows.start < 0 || rows.width < 0 || rows.start + rows.width > n_params()) {
    throw InvalidArgument("row block outside the parameter range");
  }
  if (out.rows() != rows.width || out.cols() != n_data()) {
    throw DimensionMismatch("correlation block has the wrong shape");
  }
  Eigen::MatrixXd param_unit = ens_.values().middleRows(rows.start, rows.width);
  std::vector<bool> param_defined;
  normalize_rows(param_unit, param_defined);
  out.noalias() = param_unit * data_unit_.transpose();
  out = out.cwiseMax(-1.0).cwiseMin(1.0);
  for (Index i = 0; i < rows.width; ++i) {
    if (!param_defined[i]) out.row(i).setConstant(kUndefinedCorrelation);
  }
  for (Index j = 0; j < n_data(); ++j) {
    if (!data_defined_[j]) out.col(j).setConstant(kUndefinedCorrelation);
  }
}

Eigen::MatrixXd correlation_block(const Ensemble & ens, const PredictedEnsemble & pred,
                                  const RowBlock & rows) {
  return CorrelationEngine(ens, pred).block(rows);
}

// -----------------------------------------------------------------------------

std::string parameter_id(const ParameterInfo & info, Index row) {
  if (info.cell) {
    const auto & c = *info.cell;
    return (info.field.empty() ? std::string("cell") : info.field) + "@" +
           std::to_string(c.i) + "." + std::to_string(c.j) + "." + std::to_string(c.k);
  }
  if (!info.name.empty()) return info.name;
  return "m" + std::to_string(row);
}

void write_ensemble_csv(std::ostream & os, const Ensemble & ens) {
  os << "param_id";
  for (Index k = 0; k < ens.n_members(); ++k) os << ",e" << (k + 1);
  os << '\n';
  for (Index i = 0; i < ens.n_params(); ++i) {
    os << parameter_id(ens.parameters()[i], i);
    for (Index k = 0; k < ens.n_members(); ++k) {
      os << ',' << text::format_double(ens.values()(i, k));
    }
    os << '\n';
  }
}

namespace {

ParameterInfo parse_parameter_id(const std::string & id) {
  ParameterInfo info;
  info.name = id;
  const auto at = id.find('@');
  if (at == std::string::npos) return info;
  const auto parts = text::split(std::string_view(id).substr(at + 1), '.');
  if (parts.size() != 3) return info;
  try {
    GridCell cell{static_cast<int>(text::parse_int(parts[0])),
                  static_cast<int>(text::parse_int(parts[1])),
                  static_cast<int>(text::parse_int(parts[2]))};
    info.field = id.substr(0, at);
    info.cell = cell;
  } catch (const ParseError &) {
    // Not a grid id; keep the plain name.
  }
  return info;
}

}  // namespace

Ensemble read_ensemble_csv(std::istream & is) {
  std::string line;
  if (!std::getline(is, line)) throw ParseError("empty ensemble CSV");
  const auto header = text::split(text::trim(line), ',');
  if (header.empty() || text::trim(header[0]) != "param_id") {
    throw ParseError("ensemble CSV must start with a param_id column");
  }
  const Index n_members = static_cast<Index>(header.size()) - 1;
  std::vector<ParameterInfo> params;
  std::vector<double> flat;
  while (std::getline(is, line)) {
    if (text::trim(line).empty()) continue;
    const auto fields = text::split(text::trim(line), ',');
    if (static_cast<Index>(fields.size()) != n_members + 1) {
      throw ParseError("ensemble CSV row " + std::to_string(params.size() + 1) +
                       " has the wrong number of columns");
    }
    params.push_back(parse_parameter_id(std::string(text::trim(fields[0]))));
    for (Index k = 0; k < n_members; ++k) flat.push_back(text::parse_double(fields[k + 1]));
  }
  const Index n_params = static_cast<Index>(params.size());
  Eigen::MatrixXd values(n_params, n_members);
  for (Index i = 0; i < n_params; ++i) {
    for (Index k = 0; k < n_members; ++k) values(i, k) = flat[i * n_members + k];
  }
  // Scalar names round-trip as names; grid ids also recover their cells.
  return Ensemble(std::move(values), std::move(params));
}

}  // namespace enloc
