#pragma once

#include <utility>
#include <vector>

#include "hlab/quadrature.hpp"
#include "hlab/weight.hpp"

namespace hlab {

enum class HeightStatus {
  ok,
  bracket_edge,  // no sign change inside [1e-12, 1e12] * R^p; T is the edge
  diverged,      // omega^alpha failed to integrate on the returned cylinder
};

const char* to_string(HeightStatus s);

/// Solution of the intrinsic height equation
///   G(T) = (int_{Q_T} omega^alpha)^{1/alpha} T^{1/alpha'} = C R^p |K_R|^{1/alpha}.
/// With the cube cross-section |K_R| = (2R)^n the unit weight gives T = C R^p.
/// `raw_constant` is C ((2R)^n / R^n)^{1/alpha} = C 2^{n/alpha}: the constant in
/// the form G(T) = C' R^{n/alpha + p} that produces the same T.
struct HeightSolve {
  double T = 0.0;
  double residual = 0.0;  // (G(T) - target) / target
  int iterations = 0;
  double C = 1.0;
  double raw_constant = 1.0;
  double target = 0.0;
  HeightStatus status = HeightStatus::ok;
  bool monotone = true;  // every recorded (T, G) pair is ordered consistently
  std::vector<std::pair<double, double>> evaluations;
};

/// G(T) at a single quadrature level (spec.levels, spec.rule).
double height_functional(const Weight& w, double t0, const SpacePoint& x0, double R, double T,
                         const QuadratureSpec& spec);

/// Root form: log-space bisection on a bracket grown by factors of 4 from C R^p.
HeightSolve intrinsic_height(const Weight& w, double t0, const SpacePoint& x0, double R, double C,
                             const QuadratureSpec& spec);

/// Sup form: sup{F : G(F) <= target}, found by a log-grid scan from the top of
/// [1e-12, 1e12] * R^p followed by geometric refinement. Independent of the
/// bisection in intrinsic_height.
double intrinsic_height_supform(const Weight& w, double t0, const SpacePoint& x0, double R,
                                double C, const QuadratureSpec& spec);

/// Q^s = K_{sR} x (t0 - sT, t0) for 1/2 <= s <= 1.
Cylinder subcylinder(const Cylinder& q, double s);

/// Same construction for any s in (0, 1].
Cylinder scaled_cylinder(const Cylinder& q, double s);

struct HarnackCylinders {
  Cylinder lower;  // K_{R/4} x (t0 - 3T/4, t0 - T/2)
  Cylinder upper;  // K_{R/4} x (t0 - T/4, t0)
};

HarnackCylinders harnack_cylinders(const Cylinder& q);

}  // namespace hlab
