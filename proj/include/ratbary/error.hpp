#ifndef RATBARY_ERROR_HPP
#define RATBARY_ERROR_HPP

#include <complex>
#include <sstream>
#include <stdexcept>
#include <string>

namespace ratbary {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Invalid argument or inconsistent shapes.
class ParameterError : public Error {
  public:
    using Error::Error;
};

/// Rejected input data (non-finite entries, duplicate points, ...).
class InputError : public Error {
  public:
    using Error::Error;
};

/// The input carries no information to approximate (all-zero data, rank 0).
class DegenerateError : public Error {
  public:
    using Error::Error;
};

/// A candidate pool ran out (grid too small, every point already used).
class ExhaustionError : public Error {
  public:
    using Error::Error;
};

/// Malformed file contents.
class FormatError : public Error {
  public:
    using Error::Error;
};

/// The barycentric denominator vanished at a point that is not a support.
class PoleHitError : public Error {
  public:
    explicit PoleHitError(std::complex<double> z) : Error(describe(z)), point_(z) {}

    std::complex<double> point() const { return point_; }

  private:
    static std::string describe(std::complex<double> z) {
        std::ostringstream os;
        os.precision(17);
        os << "barycentric denominator vanishes at z = (" << z.real() << ", " << z.imag() << ")";
        return os.str();
    }

    std::complex<double> point_;
};

} // namespace ratbary

#endif
