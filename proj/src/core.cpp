#include "hlab/core.hpp"

#include <cmath>
#include <sstream>

namespace hlab {

double Cylinder::spatial_volume() const { return std::pow(2.0 * R, n); }

double Cylinder::volume() const { return spatial_volume() * T; }

bool Cylinder::contains_point(double t, const SpacePoint& x, double tol) const {
  const double st = tol * std::max(1.0, T);
  if (t < bottom() - st || t > t0 + st) return false;
  const double sx = tol * std::max(1.0, R);
  for (int k = 0; k < n; ++k) {
    if (std::abs(x[k] - x0[k]) > R + sx) return false;
  }
  return true;
}

bool Cylinder::contains(const Cylinder& inner, double tol) const {
  if (inner.n != n) return false;
  const double st = tol * std::max(1.0, T);
  if (inner.bottom() < bottom() - st || inner.t0 > t0 + st) return false;
  const double sx = tol * std::max(1.0, R);
  for (int k = 0; k < n; ++k) {
    if (inner.x0[k] - inner.R < x0[k] - R - sx) return false;
    if (inner.x0[k] + inner.R > x0[k] + R + sx) return false;
  }
  return true;
}

void Cylinder::validate() const {
  if (!(R > 0.0) || !std::isfinite(R)) throw PreconditionError("cylinder radius must be positive");
  if (!(T > 0.0) || !std::isfinite(T)) throw PreconditionError("cylinder height must be positive");
  if (n < 1 || n > kMaxDim) throw PreconditionError("cylinder dimension must be 1 or 2");
}

double norm(const Vec& v, int n) { return std::sqrt(dot(v, v, n)); }

double dot(const Vec& a, const Vec& b, int n) {
  double s = 0.0;
  for (int k = 0; k < n; ++k) s += a[k] * b[k];
  return s;
}

std::string describe(const Cylinder& q) {
  std::ostringstream os;
  os << "K_" << q.R << "(" << q.x0[0];
  if (q.n > 1) os << "," << q.x0[1];
  os << ") x (" << q.bottom() << ", " << q.t0 << ")";
  return os.str();
}

}  // namespace hlab
