#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hlab/field.hpp"
#include "hlab/flux.hpp"
#include "hlab/weight.hpp"

namespace hlab {

struct SolverOptions {
  int max_newton = 60;
  /// Stop when max_i |R_i / w_i| * dt / ||b(u^m)||_inf falls below this, where
  /// R is the nonlinear residual, w_i the lumped nodal volume and
  /// b(u) = |u|^{p-2} u.
  double tolerance = 1e-12;
  /// Keep u > 0: steps are cut so no node drops below a tenth of its value.
  bool positivity = false;
  /// Gradient regularization: eps = max(eps_floor, h / R) ||u^m||_inf / R.
  double eps_floor = 1e-8;
};

struct StepReport {
  int newton_iterations = 0;
  double residual_norm = 0.0;
  bool positivity_preserved = true;
  bool converged = false;
  std::string message;
};

struct StepResult {
  std::vector<double> u;
  StepReport report;
};

/// One implicit step from u^m at time t to t + dt:
///   (b(u^{m+1}) - b(u^m)) / dt = div_h A(t + dt, x, u^{m+1}, grad_h u^{m+1}).
/// 1-D uses fluxes on half-nodes with omega at the half-nodes; 2-D uses
/// piecewise-linear triangles with omega at the centroids. Dirichlet nodes
/// take bc(t + dt, x). Only the spatial part of `grid` is used.
StepResult step(const Grid& grid, BoundaryKind boundary, const std::vector<double>& um, double t,
                double dt, const Flux& flux, const Weight& w, const SpaceTimeFn& bc = {},
                const SolverOptions& opt = {});

struct SolveResult {
  Field field;
  std::vector<StepReport> reports;
  bool ok = true;
  int failed_step = -1;  // index m of the step m -> m+1 that failed
  std::string failure;
};

/// Marches over the grid's time interval. On a failed step the trajectory up
/// to the failure is kept and the remaining slices are NaN.
SolveResult solve(const Grid& grid, BoundaryKind boundary, const std::vector<double>& u0,
                  const SpaceTimeFn& bc, const Flux& flux, const Weight& w,
                  const SolverOptions& opt = {});

/// Convenience overload sampling u0 = init(t0 - T, x).
SolveResult solve(const Grid& grid, BoundaryKind boundary, const SpaceTimeFn& init,
                  const SpaceTimeFn& bc, const Flux& flux, const Weight& w,
                  const SolverOptions& opt = {});

/// Lumped nodal volumes used by the scheme (zero for nodes that duplicate a
/// periodic partner).
std::vector<double> nodal_volumes(const Grid& grid, BoundaryKind boundary);

/// sum_i w_i b(u_i): the quantity conserved by periodic runs.
double discrete_mass(const Grid& grid, BoundaryKind boundary, const std::vector<double>& u,
                     double p);

/// First eigenpair of (|phi'|^{p-2} phi')' = -mu |phi|^{p-2} phi on (a, b)
/// with phi = 0 at both ends, max phi = 1. `lambda` = mu / (p - 1), so that
/// u = exp(-lambda t) phi(x) solves the model equation with omega = 1.
struct Eigenpair {
  double lambda = 0.0;
  double mu = 0.0;
  std::vector<double> x;
  std::vector<double> phi;
  /// Linear interpolation of phi.
  double operator()(double xx) const;
};

Eigenpair p_eigenpair_1d(double p, double a, double b, double tol = 1e-10, int samples = 4096);

/// Lipschitz test function with its spatial gradient. Weak residuals need v
/// to vanish on the bottom slice and the lateral boundary of the field's
/// cylinder.
struct TestFunction {
  std::string label;
  SpaceTimeFn v;
  std::function<Vec(double, const SpacePoint&)> grad;
};

/// Discrete value of
///   -[int b(u) v dx]_{t0-T}^{t0} - iint A . grad v + iint b(u) d_t v
/// with b(u) = |u|^{p-2} u. Space integrals use the scheme's lumped volumes,
/// the flux term uses grad u^{m+1} on each element with grad v at the
/// mid-step, and the time-derivative term integrates d_t v exactly in time
/// against the trapezoidal average of b(u). Throws PreconditionError when v
/// does not vanish on the parabolic boundary.
double weak_residual(const Field& u, const Flux& flux, const TestFunction& v, double p);

/// Nonnegative random test functions on q: a time ramp times a product of
/// spatial bubbles times a positive smooth modulation.
std::vector<TestFunction> random_test_functions(const Cylinder& q, std::size_t count,
                                                std::uint64_t seed);

}  // namespace hlab
