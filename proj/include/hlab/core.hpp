#pragma once

// Shared value types: spatial points, space-time cylinders and the error type
// used throughout the library.

#include <array>
#include <functional>
#include <stdexcept>
#include <string>

namespace hlab {

/// Largest spatial dimension supported by the quadrature and the solver.
inline constexpr int kMaxDim = 2;

using SpacePoint = std::array<double, kMaxDim>;
using Vec = std::array<double, kMaxDim>;

/// Scalar map (t, x) -> R.
using SpaceTimeFn = std::function<double(double, const SpacePoint&)>;

/// Raised when an operation's precondition is violated.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a numerical procedure fails (no bracket, no convergence, ...).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Q = K_R(x0) x (t0 - T, t0) with K_R the axis-aligned cube (-R, R)^n
/// around x0.
struct Cylinder {
  double t0 = 0.0;
  SpacePoint x0{};
  double R = 1.0;
  double T = 1.0;
  int n = 1;

  double bottom() const { return t0 - T; }
  double spatial_volume() const;  // (2R)^n
  double volume() const;          // (2R)^n * T

  bool contains_point(double t, const SpacePoint& x, double tol = 1e-12) const;
  bool contains(const Cylinder& inner, double tol = 1e-12) const;

  /// Throws PreconditionError unless R, T > 0 and 1 <= n <= kMaxDim.
  void validate() const;
};

double norm(const Vec& v, int n);
double dot(const Vec& a, const Vec& b, int n);

std::string describe(const Cylinder& q);

}  // namespace hlab
