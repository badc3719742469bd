#include "hlab/muckenhoupt.hpp"

#include <cmath>
#include <limits>

namespace hlab {

CylinderProduct muckenhoupt_product(const Weight& w, const Cylinder& q, const QuadratureSpec& spec) {
  const auto& ex = w.exponents();
  CylinderProduct cp;
  cp.cylinder = q;
  const auto dist = w.singular_distance_fn();
  const auto wa = cylinder_average(w.omega_alpha_fn(), q, spec, dist);
  const auto sr = cylinder_average(w.sigma_r_fn(), q, spec, dist);
  cp.omega_alpha_average = wa.value;
  cp.sigma_r_average = sr.value;
  if (!wa.converged || !sr.converged) {
    cp.admissible = false;
    cp.reason = !wa.converged ? "omega^alpha does not integrate" : "sigma^r does not integrate";
    cp.product = std::numeric_limits<double>::infinity();
    cp.norm_form = cp.product;
    return cp;
  }
  if (!(wa.value > 0.0) || !(sr.value > 0.0)) {
    cp.admissible = false;
    cp.reason = "weight vanishes on the cylinder";
    cp.product = std::numeric_limits<double>::infinity();
    cp.norm_form = cp.product;
    return cp;
  }
  const double a = 1.0 / ex.alpha;
  const double b = (ex.p - 1.0) / ex.r;
  cp.product = std::pow(wa.value, a) * std::pow(sr.value, b);
  cp.norm_form = cp.product * std::pow(q.volume(), a + b);
  cp.error = cp.product * (a * wa.error / wa.value + b * sr.error / sr.value);
  return cp;
}

MuckenhouptReport muckenhoupt_constant(const Weight& w, const std::vector<Cylinder>& family,
                                       const QuadratureSpec& spec) {
  if (family.empty()) throw PreconditionError("muckenhoupt_constant needs a non-empty family");
  MuckenhouptReport rep;
  rep.samples = family.size();
  bool any = false;
  for (const auto& q : family) {
    auto cp = muckenhoupt_product(w, q, spec);
    if (!cp.admissible) {
      ++rep.inadmissible;
    } else if (!any || cp.product > rep.constant) {
      rep.constant = cp.product;
      rep.worst_cylinder = q;
      any = true;
    }
    rep.entries.push_back(std::move(cp));
  }
  if (!any) {
    rep.constant = std::numeric_limits<double>::infinity();
    rep.converged = false;
  }
  return rep;
}

AInfinityReport a_infinity_estimate(const BoxFn& w, const Box& K, const std::vector<Box>& subsets,
                                    const QuadratureSpec& spec, const BoxFn& distance) {
  if (subsets.size() < 2) throw PreconditionError("A_infinity fit needs at least two subsets");
  for (const auto& E : subsets) {
    if (E.dims != K.dims) throw PreconditionError("subset dimension differs from K");
    for (int k = 0; k < K.dims; ++k) {
      if (E.lo[k] < K.lo[k] - 1e-12 || E.hi[k] > K.hi[k] + 1e-12 || !(E.hi[k] > E.lo[k]))
        throw PreconditionError("subset is not a positive-measure subset of K");
    }
  }
  AInfinityReport rep;
  const auto whole = integrate_box(w, K, spec, distance);
  if (!whole.converged) {
    rep.diverged = rep.flagged = true;
    rep.reason = "weight does not integrate over K";
    rep.C = rep.delta = std::numeric_limits<double>::quiet_NaN();
    return rep;
  }
  const double vK = K.volume();
  for (const auto& E : subsets) {
    const auto part = integrate_box(w, E, spec, distance);
    if (!part.converged) {
      rep.diverged = rep.flagged = true;
      rep.reason = "weight does not integrate over a subset";
      rep.C = rep.delta = std::numeric_limits<double>::quiet_NaN();
      return rep;
    }
    rep.log_measure_ratio.push_back(std::log(E.volume() / vK));
    rep.log_mass_ratio.push_back(std::log(part.value / whole.value));
  }

  const auto& x = rep.log_measure_ratio;
  const auto& y = rep.log_mass_ratio;
  const double m = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i] / m;
    my += y[i] / m;
  }
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx <= 1e-24 * m) throw PreconditionError("degenerate A_infinity fit: all subsets have the same measure");
  rep.delta = sxy / sxx;
  rep.fit_intercept = my - rep.delta * mx;
  double shift = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double excess = y[i] - rep.delta * x[i];
    shift = std::max(shift, excess);
    if (excess - rep.fit_intercept > std::log(2.0)) ++rep.ls_violations;
  }
  rep.C = std::exp(shift);
  if (rep.delta <= 0.0) {
    rep.flagged = true;
    rep.reason = "non-positive exponent";
  } else if (rep.ls_violations > 0) {
    rep.flagged = true;
    rep.reason = "least-squares bound violated";
  }
  return rep;
}

DoublingReport doubling_estimate(const Weight& w, const Cylinder& inner, const Cylinder& outer,
                                 double exponent, const std::vector<double>& delta1_grid,
                                 const QuadratureSpec& spec) {
  if (!outer.contains(inner)) throw PreconditionError("doubling_estimate: inner cylinder not inside outer");
  DoublingReport rep;
  rep.exponent = exponent;
  const auto f = w.omega_pow_fn(exponent);
  const auto dist = w.singular_distance_fn();
  const auto a = cylinder_integral(f, inner, spec, dist);
  const auto b = cylinder_integral(f, outer, spec, dist);
  rep.converged = a.converged && b.converged;
  rep.inner_mass = a.value;
  rep.outer_mass = b.value;
  rep.volume_ratio = inner.volume() / outer.volume();
  for (double d : delta1_grid) {
    rep.delta1.push_back(d);
    rep.C2.push_back(rep.converged ? (a.value / b.value) / std::pow(rep.volume_ratio, d)
                                   : std::numeric_limits<double>::quiet_NaN());
  }
  return rep;
}

}  // namespace hlab
