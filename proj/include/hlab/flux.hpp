#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "hlab/weight.hpp"

namespace hlab {

using FluxFn = std::function<Vec(double t, const SpacePoint& x, double xi, const Vec& eta)>;

/// Regularized flux data at one point: A_eps(eta), its Jacobian in eta and
/// the potential Phi_eps with grad Phi_eps = A_eps.
struct FluxLinearization {
  Vec A{};
  std::array<Vec, 2> dA{};  // dA[i][j] = d A_i / d eta_j
  double potential = 0.0;
};

using LinearizeFn =
    std::function<FluxLinearization(double t, const SpacePoint& x, const Vec& eta, double eps)>;

/// A(t, x, xi, eta) with its declared growth constants. Fluxes that come from
/// a convex potential supply `linearize`, which the solver uses for an exact
/// symmetric Newton system; other fluxes get a finite-difference Jacobian.
struct Flux {
  std::string label = "user";
  FluxFn A;
  double c1 = 1.0;
  double c2 = 1.0;
  LinearizeFn linearize;
};

/// A = omega |eta|^{p-2} eta, with c1 = c2 = 1. The linearization uses
/// (|eta|^2 + eps^2)^{(p-2)/2} in place of |eta|^{p-2}.
Flux model_flux(const Weight& w);

struct GrowthWitness {
  double t = 0.0;
  SpacePoint x{};
  double xi = 0.0;
  Vec eta{};
  std::string condition;  // "coercivity" or "bound"
};

struct GrowthAudit {
  std::size_t samples = 0;
  double c1 = 0.0;  // inf over samples of A.eta / (omega |eta|^p)
  double c2 = 0.0;  // sup over samples of |A| / (omega |eta|^{p-1})
  bool pass = true;
  std::optional<GrowthWitness> witness;
};

/// Samples (t, x, xi, eta) uniformly over [-1, 1] x [-1, 1]^n x [-2, 2] with
/// |eta| log-uniform in [1e-3, 1e3], and compares the empirical constants
/// with the declared ones. Points where omega is zero or not finite are
/// resampled.
GrowthAudit audit_growth(const Flux& A, const Weight& w, std::size_t samples,
                         std::uint64_t seed = 1);

}  // namespace hlab
