#pragma once

#include <string>
#include <vector>

#include "hlab/quadrature.hpp"
#include "hlab/weight.hpp"

namespace hlab {

/// The averaged product (avg omega^alpha)^{1/alpha} (avg sigma^r)^{(p-1)/r}
/// on one cylinder, plus the norm form
/// ||omega||_{L^alpha(Q)} ||sigma||_{L^r(Q)}^{p-1} = product * |Q|^{1/alpha + (p-1)/r}.
struct CylinderProduct {
  Cylinder cylinder;
  double omega_alpha_average = 0.0;
  double sigma_r_average = 0.0;
  double product = 0.0;
  double norm_form = 0.0;
  double error = 0.0;  // propagated relative quadrature error of the product
  bool admissible = true;
  std::string reason;  // why the cylinder was flagged, empty when admissible
};

struct MuckenhouptReport {
  double constant = 0.0;  // sup of the product over admissible cylinders
  Cylinder worst_cylinder;
  std::size_t samples = 0;
  std::size_t inadmissible = 0;
  bool converged = true;  // all admissible cylinders converged
  std::vector<CylinderProduct> entries;
};

CylinderProduct muckenhoupt_product(const Weight& w, const Cylinder& q, const QuadratureSpec& spec);

/// Sup of the product over the family. Cylinders where omega^alpha or
/// sigma^r fails to integrate are flagged and excluded from the sup.
MuckenhouptReport muckenhoupt_constant(const Weight& w, const std::vector<Cylinder>& family,
                                       const QuadratureSpec& spec);

struct AInfinityReport {
  double C = 0.0;
  double delta = 0.0;
  double fit_intercept = 0.0;  // least-squares log C before the envelope shift
  std::vector<double> log_measure_ratio;
  std::vector<double> log_mass_ratio;
  std::size_t ls_violations = 0;  // samples above the plain least-squares line
  bool diverged = false;
  bool flagged = false;
  std::string reason;
};

/// Fits v(E)/v(K) <= C (|E|/|K|)^delta on the given subsets of K. The slope
/// comes from least squares in log-log coordinates; C is then raised to the
/// smallest value for which every sample satisfies the bound. The result is
/// flagged when an integral diverges, when delta <= 0, or when the plain
/// least-squares line is exceeded by more than a factor 2 on some sample.
AInfinityReport a_infinity_estimate(const BoxFn& w, const Box& K, const std::vector<Box>& subsets,
                                    const QuadratureSpec& spec, const BoxFn& distance = {});

struct DoublingReport {
  double exponent = 0.0;
  double inner_mass = 0.0;
  double outer_mass = 0.0;
  double volume_ratio = 0.0;
  std::vector<double> delta1;
  std::vector<double> C2;  // largest C2 for each delta1
  bool converged = true;
};

/// Largest C2 with  int_inner omega^e >= C2 (|inner|/|outer|)^{delta1} int_outer omega^e
/// for each delta1 in the grid.
DoublingReport doubling_estimate(const Weight& w, const Cylinder& inner, const Cylinder& outer,
                                 double exponent, const std::vector<double>& delta1_grid,
                                 const QuadratureSpec& spec);

}  // namespace hlab
