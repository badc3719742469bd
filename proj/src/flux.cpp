#include "hlab/flux.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace hlab {

Flux model_flux(const Weight& w) {
  const auto& ex = w.exponents();
  const double p = ex.p;
  const int n = ex.n;
  const auto omega = w.omega_fn();
  Flux f;
  f.label = "model";
  f.c1 = f.c2 = 1.0;
  f.A = [omega, p, n](double t, const SpacePoint& x, double, const Vec& eta) {
    const double g = norm(eta, n);
    Vec a{};
    if (g == 0.0) return a;
    const double s = omega(t, x) * std::pow(g, p - 2.0);
    for (int k = 0; k < n; ++k) a[k] = s * eta[k];
    return a;
  };
  f.linearize = [omega, p, n](double t, const SpacePoint& x, const Vec& eta, double eps) {
    FluxLinearization L;
    const double om = omega(t, x);
    const double s = dot(eta, eta, n) + eps * eps;
    const double a = std::pow(s, 0.5 * (p - 2.0));
    const double da = 0.5 * (p - 2.0) * std::pow(s, 0.5 * (p - 4.0));
    for (int i = 0; i < n; ++i) {
      L.A[i] = om * a * eta[i];
      for (int j = 0; j < n; ++j)
        L.dA[i][j] = om * ((i == j ? a : 0.0) + 2.0 * da * eta[i] * eta[j]);
    }
    L.potential = om * (std::pow(s, 0.5 * p) - std::pow(eps, p)) / p;
    return L;
  };
  return f;
}

GrowthAudit audit_growth(const Flux& A, const Weight& w, std::size_t samples, std::uint64_t seed) {
  if (samples < 1) throw PreconditionError("audit_growth needs at least one sample");
  if (!A.A) throw PreconditionError("flux has no evaluation callback");
  const auto& ex = w.exponents();
  const int n = ex.n;
  const double p = ex.p;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> logmag(std::log(1e-3), std::log(1e3));
  std::normal_distribution<double> gauss;

  GrowthAudit audit;
  audit.c1 = std::numeric_limits<double>::infinity();
  audit.c2 = 0.0;
  double worst = 0.0;  // largest relative violation seen
  std::size_t attempts = 0;
  while (audit.samples < samples) {
    if (++attempts > 100 * samples) throw NumericalError("audit_growth: weight vanishes on the sample box");
    const double t = unit(rng);
    SpacePoint x{unit(rng), n == 2 ? unit(rng) : 0.0};
    const double xi = 2.0 * unit(rng);
    Vec dir{gauss(rng), n == 2 ? gauss(rng) : 0.0};
    const double dn = norm(dir, n);
    if (dn == 0.0) continue;
    const double mag = std::exp(logmag(rng));
    Vec eta{};
    for (int k = 0; k < n; ++k) eta[k] = mag * dir[k] / dn;
    const double om = w.omega(t, x);
    if (!(om > 0.0) || !std::isfinite(om)) continue;
    ++audit.samples;

    const Vec a = A.A(t, x, xi, eta);
    const double coerc = dot(a, eta, n) / (om * std::pow(mag, p));
    const double bound = norm(a, n) / (om * std::pow(mag, p - 1.0));
    audit.c1 = std::min(audit.c1, coerc);
    audit.c2 = std::max(audit.c2, bound);

    const double tol = 1e-12;
    const double v1 = A.c1 - coerc;  // positive means coercivity fails
    const double v2 = bound - A.c2;  // positive means the bound fails
    if (v1 > tol * A.c1 && v1 / A.c1 > worst) {
      worst = v1 / A.c1;
      audit.witness = GrowthWitness{t, x, xi, eta, "coercivity"};
    }
    if (v2 > tol * A.c2 && v2 / A.c2 > worst) {
      worst = v2 / A.c2;
      audit.witness = GrowthWitness{t, x, xi, eta, "bound"};
    }
  }
  audit.pass = !audit.witness.has_value();
  return audit;
}

}  // namespace hlab
