#include <algorithm>
#include <cmath>

#include "hlab/solver.hpp"

namespace hlab {

namespace {

// phi' = |psi|^{p'-2} psi,  psi' = -mu |phi|^{p-2} phi,  psi = |phi'|^{p-2} phi'.
struct Shot {
  std::vector<double> phi;
  bool crossed = false;  // phi returned to zero before the right end
};

double spow(double v, double e) { return v == 0.0 ? 0.0 : std::copysign(std::pow(std::abs(v), e), v); }

Shot shoot(double p, double mu, double a, double b, int samples) {
  const double pp = p / (p - 1.0);
  const double h = (b - a) / samples;
  auto rhs = [&](double phi, double psi, double& dphi, double& dpsi) {
    dphi = spow(psi, pp - 1.0);
    dpsi = -mu * spow(phi, p - 1.0);
  };
  Shot s;
  s.phi.reserve(samples + 1);
  double phi = 0.0, psi = 1.0;
  s.phi.push_back(phi);
  for (int i = 0; i < samples; ++i) {
    double k1f, k1s, k2f, k2s, k3f, k3s, k4f, k4s;
    rhs(phi, psi, k1f, k1s);
    rhs(phi + 0.5 * h * k1f, psi + 0.5 * h * k1s, k2f, k2s);
    rhs(phi + 0.5 * h * k2f, psi + 0.5 * h * k2s, k3f, k3s);
    rhs(phi + h * k3f, psi + h * k3s, k4f, k4s);
    phi += h / 6.0 * (k1f + 2.0 * k2f + 2.0 * k3f + k4f);
    psi += h / 6.0 * (k1s + 2.0 * k2s + 2.0 * k3s + k4s);
    s.phi.push_back(phi);
    if (phi < 0.0) {
      s.crossed = true;
      return s;
    }
  }
  return s;
}

}  // namespace

double Eigenpair::operator()(double xx) const {
  if (x.empty()) return 0.0;
  if (xx <= x.front() || xx >= x.back()) return 0.0;
  const double h = (x.back() - x.front()) / (x.size() - 1);
  const auto i = std::min(static_cast<std::size_t>((xx - x.front()) / h), x.size() - 2);
  const double s = (xx - x[i]) / h;
  return (1.0 - s) * phi[i] + s * phi[i + 1];
}

Eigenpair p_eigenpair_1d(double p, double a, double b, double tol, int samples) {
  if (!(p > 1.0)) throw PreconditionError("p_eigenpair_1d needs p > 1");
  if (!(b > a)) throw PreconditionError("p_eigenpair_1d needs a < b");
  if (samples < 16) throw PreconditionError("p_eigenpair_1d needs at least 16 samples");

  // Bracket: too small a mu never returns to zero, too large returns early.
  double lo = 1e-8, hi = 1.0;
  int guard = 0;
  while (!shoot(p, hi, a, b, samples).crossed) {
    lo = hi;
    hi *= 2.0;
    if (++guard > 200) throw NumericalError("p_eigenpair_1d: no shooting bracket");
  }
  if (shoot(p, lo, a, b, samples).crossed) throw NumericalError("p_eigenpair_1d: no shooting bracket");
  while ((hi - lo) > tol * hi) {
    const double mid = 0.5 * (lo + hi);
    if (shoot(p, mid, a, b, samples).crossed) hi = mid;
    else lo = mid;
  }
  Eigenpair ep;
  ep.mu = 0.5 * (lo + hi);
  ep.lambda = ep.mu / (p - 1.0);
  auto s = shoot(p, lo, a, b, samples);
  ep.phi = s.phi;
  ep.phi.back() = 0.0;
  const double m = *std::max_element(ep.phi.begin(), ep.phi.end());
  for (double& v : ep.phi) v = std::max(v, 0.0) / m;
  ep.x.resize(ep.phi.size());
  for (std::size_t i = 0; i < ep.x.size(); ++i) ep.x[i] = a + (b - a) * i / samples;
  return ep;
}

}  // namespace hlab
