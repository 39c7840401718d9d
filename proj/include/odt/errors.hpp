// odtmotion: rigid-motion estimation for optical diffraction tomography
// Exception hierarchy shared by all library components
#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace odt {

/// Base class for all library errors.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string &msg) : std::runtime_error(msg) {}
};

/// A geometric argument left the domain where the operation is defined,
/// e.g. a frequency outside the measurement disk ||k|| < k0.
class OutOfDiskError : public Error {
  public:
    using Error::Error;
};

/// An input is (numerically) degenerate for the requested operation,
/// e.g. coinciding rotation axes where a common-circle basis is needed,
/// or a matrix with non-positive determinant passed to the polar retraction.
class DegenerateInputError : public Error {
  public:
    using Error::Error;
};

/// A linear system whose solution the contract requires to be unique is
/// rank-deficient (directions fail to span, profiles linearly dependent, ...).
class RankDeficientError : public Error {
  public:
    using Error::Error;
};

/// The data admits more than one consistent interpretation, e.g. a frame
/// pair matching both the plain and the reflected common-axis branch.
/// The CLI maps this error to exit code 2.
class AmbiguityError : public Error {
  public:
    using Error::Error;
};

/// Every sample of a matching functional fell outside the interpolable
/// region, so the functional value is undefined.
class EmptySupportError : public Error {
  public:
    using Error::Error;
};

/// An iterative optimizer hit a non-finite objective value.  Carries the
/// best point seen so far so callers can decide whether to salvage it.
class OptimizationError : public Error {
  public:
    OptimizationError(const std::string &msg, std::vector<double> best,
                      double best_value)
        : Error(msg), best_point(std::move(best)), best_value(best_value) {}

    std::vector<double> best_point;
    double best_value;
};

/// Configuration values violate a documented invariant.
/// The CLI maps this error (and IoError) to exit code 1.
class ConfigError : public Error {
  public:
    using Error::Error;
};

/// File input/output failed (missing file, malformed header, short read...).
class IoError : public Error {
  public:
    using Error::Error;
};

} // namespace odt
