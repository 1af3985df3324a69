#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace otfs {

using cplx = std::complex<double>;
using CVec = std::vector<cplx>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;
inline constexpr double kSpeedOfLight = 299792458.0;
inline constexpr double kBoltzmann = 1.380649e-23;

// Error hierarchy. Every library failure derives from otfs::Error so callers
// (and the C API) can map it to a status code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Vector or grid of the wrong size.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A request for more distinct items than the underlying set can provide.
class CapacityError : public Error {
 public:
  using Error::Error;
};

// File could not be read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

// Invalid run configuration; carries the dotted path of the offending field.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& message)
      : Error(field.empty() ? message : field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// Physically infeasible configuration (outside the detectable regime).
class InfeasibleError : public Error {
 public:
  InfeasibleError(std::string bound, const std::string& message)
      : Error(message), bound_(std::move(bound)) {}
  const std::string& bound() const noexcept { return bound_; }

 private:
  std::string bound_;
};

// Grid numerology. Critical sampling is assumed throughout: delta_f * T = 1.
struct Numerology {
  int M = 139;
  int N = 4;
  double delta_f_hz = 60e3;

  double symbol_period_s() const { return 1.0 / delta_f_hz; }
  double sample_period_s() const { return 1.0 / (delta_f_hz * M); }
  double delay_resolution_s() const { return sample_period_s(); }
  double doppler_resolution_hz() const { return delta_f_hz / N; }
  int frame_length() const { return M * N; }
};

inline double energy(const CVec& v) {
  double e = 0.0;
  for (const auto& z : v) e += std::norm(z);
  return e;
}

}  // namespace otfs
