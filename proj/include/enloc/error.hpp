/*
 * (C) Copyright 2026 The enloc authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace enloc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class InvalidEnsembleSize : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class DimensionMismatch : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// A correlation was requested for a row with zero sample variance.
class UndefinedCorrelation : public Error {
 public:
  using Error::Error;
};

/// A taper family was used where its inputs do not apply (e.g. a distance
/// taper evaluated from correlation statistics).
class WrongTaperKind : public Error {
 public:
  using Error::Error;
};

class DegenerateStatistic : public Error {
 public:
  using Error::Error;
};

class ParseError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class GenerationError : public Error {
 public:
  using Error::Error;
};

/// Forward-model evaluation failed for one ensemble member.
class ForwardModelError : public Error {
 public:
  ForwardModelError(std::size_t member, const std::string & what)
    : Error("forward model failed for member " + std::to_string(member) + ": " + what),
      member_(member) {}
  std::size_t member() const {return member_;}

 private:
  std::size_t member_;
};

}  // namespace enloc
