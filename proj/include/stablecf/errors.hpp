#pragma once

#include <stdexcept>
#include <string>

namespace stablecf {

// Root of everything this library throws on purpose. The three direct
// subclasses sort failures into the categories callers dispatch on: bad input,
// numerical breakdown, and file-system trouble. The CLI maps them to exit
// codes 1, 2 and 3.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
  public:
    using Error::Error;
};

class NumericalError : public Error {
  public:
    using Error::Error;
};

class IoError : public Error {
  public:
    using Error::Error;
};

// Inputs whose parameters lie outside the stable family's domain
// (alpha out of (0,2], |beta| > 1, gamma < 0, non-finite entries).
class InvalidParams : public ValidationError {
  public:
    using ValidationError::ValidationError;
};

// Two operands or rows that must share a characteristic exponent but do not.
class AlphaMismatch : public ValidationError {
  public:
    using ValidationError::ValidationError;
};

// Model-level structural problems: wrong dimensions, all-zero rows,
// missing or duplicated sides, bad partition tables.
class ModelShapeError : public ValidationError {
  public:
    using ValidationError::ValidationError;
};

// A request the closed forms do not cover (e.g. noise on the inverse map).
class UnsupportedFeature : public ValidationError {
  public:
    using ValidationError::ValidationError;
};

// Malformed file content; the message carries row/field context.
class ParseError : public ValidationError {
  public:
    using ValidationError::ValidationError;
};

// A diagonal entry <= 0 where unit-diagonal normalization is required.
class NormalizationImpossible : public ValidationError {
  public:
    using ValidationError::ValidationError;
};

// A computed scale parameter came out negative: no stable source is
// consistent with the model.
class NonphysicalScale : public NumericalError {
  public:
    using NumericalError::NumericalError;
};

// A computed skew fell outside [-1, 1] beyond rounding slack.
class NonphysicalSkew : public NumericalError {
  public:
    using NumericalError::NumericalError;
};

// A pivot below threshold during elimination.
class SingularMatrix : public NumericalError {
  public:
    using NumericalError::NumericalError;
};

// Asking for a density of a point mass.
class DegenerateDistribution : public NumericalError {
  public:
    using NumericalError::NumericalError;
};

}  // namespace stablecf
