#include "hlab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hlab {

namespace {

constexpr double kLowFactor = 1e-12;
constexpr double kHighFactor = 1e12;

struct Problem {
  const Weight& w;
  double t0;
  SpacePoint x0;
  double R;
  const QuadratureSpec& spec;
  SpaceTimeFn integrand;
  SpaceTimeFn dist;

  double G(double T) const {
    Cylinder q{t0, x0, R, T, w.exponents().n};
    const double I = cylinder_integral_level(integrand, q, spec.levels, spec.rule, dist,
                                             spec.singular_tolerance);
    const double a = w.exponents().alpha;
    if (!(I > 0.0)) return 0.0;
    return std::pow(I, 1.0 / a) * std::pow(T, 1.0 - 1.0 / a);
  }
};

void check_inputs(const Weight& w, double R, double C, const QuadratureSpec& spec) {
  if (!(R > 0.0)) throw PreconditionError("intrinsic height needs R > 0");
  if (!(C > 0.0)) throw PreconditionError("intrinsic height needs C > 0");
  if (w.exponents().n < 1 || w.exponents().n > kMaxDim)
    throw PreconditionError("intrinsic height supports n = 1, 2");
  spec.validate();
}

double height_target(const Exponents& ex, double R, double C) {
  return C * std::pow(R, ex.p) * std::pow(std::pow(2.0 * R, ex.n), 1.0 / ex.alpha);
}

}  // namespace

const char* to_string(HeightStatus s) {
  switch (s) {
    case HeightStatus::ok: return "ok";
    case HeightStatus::bracket_edge: return "bracket_edge";
    case HeightStatus::diverged: return "diverged";
  }
  return "unknown";
}

double height_functional(const Weight& w, double t0, const SpacePoint& x0, double R, double T,
                         const QuadratureSpec& spec) {
  Problem pr{w, t0, x0, R, spec, w.omega_alpha_fn(), w.singular_distance_fn()};
  return pr.G(T);
}

HeightSolve intrinsic_height(const Weight& w, double t0, const SpacePoint& x0, double R, double C,
                             const QuadratureSpec& spec) {
  check_inputs(w, R, C, spec);
  const auto& ex = w.exponents();
  Problem pr{w, t0, x0, R, spec, w.omega_alpha_fn(), w.singular_distance_fn()};
  HeightSolve hs;
  hs.C = C;
  hs.raw_constant = C * std::pow(2.0, ex.n / ex.alpha);
  hs.target = height_target(ex, R, C);
  const double Rp = std::pow(R, ex.p);
  const double t_min = kLowFactor * Rp, t_max = kHighFactor * Rp;

  auto eval = [&](double T) {
    const double g = pr.G(T);
    hs.evaluations.emplace_back(T, g);
    ++hs.iterations;
    return g;
  };

  double T = std::clamp(C * Rp, t_min, t_max);
  double g = eval(T);
  double lo = T, hi = T;
  if (std::abs(g - hs.target) <= 1e-14 * hs.target) {
    hs.T = T;
  } else {
    // Grow the bracket by factors of 4 until G crosses the target.
    bool found = true;
    if (g < hs.target) {
      while (g < hs.target) {
        lo = hi;
        if (hi >= t_max) {
          found = false;
          break;
        }
        hi = std::min(hi * 4.0, t_max);
        g = eval(hi);
      }
    } else {
      while (g > hs.target) {
        hi = lo;
        if (lo <= t_min) {
          found = false;
          break;
        }
        lo = std::max(lo / 4.0, t_min);
        g = eval(lo);
      }
    }
    if (!found) {
      hs.status = HeightStatus::bracket_edge;
      hs.T = g < hs.target ? t_max : t_min;
    } else {
      double best = hi, best_res = std::numeric_limits<double>::infinity();
      for (int it = 0; it < 60 && hi / lo - 1.0 > 1e-15; ++it) {
        const double mid = std::sqrt(lo * hi);
        const double gm = eval(mid);
        const double res = std::abs(gm - hs.target);
        if (res < best_res) {
          best_res = res;
          best = mid;
        }
        if (gm < hs.target) lo = mid;
        else hi = mid;
        if (res <= 1e-14 * hs.target) break;
      }
      hs.T = best;
    }
  }

  const double gT = pr.G(hs.T);
  hs.residual = (gT - hs.target) / hs.target;

  auto ev = hs.evaluations;
  std::sort(ev.begin(), ev.end());
  for (std::size_t i = 1; i < ev.size(); ++i) {
    if (ev[i].second < ev[i - 1].second) hs.monotone = false;
  }

  if (hs.status == HeightStatus::ok) {
    Cylinder q{t0, x0, R, hs.T, ex.n};
    const auto full = cylinder_integral(w.omega_alpha_fn(), q, spec, w.singular_distance_fn());
    if (!full.converged) hs.status = HeightStatus::diverged;
  }
  return hs;
}

double intrinsic_height_supform(const Weight& w, double t0, const SpacePoint& x0, double R,
                                double C, const QuadratureSpec& spec) {
  check_inputs(w, R, C, spec);
  const auto& ex = w.exponents();
  Problem pr{w, t0, x0, R, spec, w.omega_alpha_fn(), w.singular_distance_fn()};
  const double target = height_target(ex, R, C);
  const double Rp = std::pow(R, ex.p);
  const double log_lo = std::log(kLowFactor * Rp), log_hi = std::log(kHighFactor * Rp);
  auto feasible = [&](double logF) { return pr.G(std::exp(logF)) <= target; };

  constexpr int kGrid = 97;
  const double step = (log_hi - log_lo) / (kGrid - 1);
  if (feasible(log_hi)) return std::exp(log_hi);
  int top = -1;
  for (int i = kGrid - 2; i >= 0; --i) {
    if (feasible(log_lo + i * step)) {
      top = i;
      break;
    }
  }
  if (top < 0) return std::exp(log_lo);

  // The sup lies in [a, a + width); shrink the window by 16 per round.
  double a = log_lo + top * step;
  double width = step;
  for (int round = 0; round < 13; ++round) {
    const double sub = width / 16.0;
    int last = 0;
    for (int j = 1; j < 16; ++j) {
      if (feasible(a + j * sub)) last = j;
    }
    a += last * sub;
    width = sub;
  }
  return std::exp(a + 0.5 * width);
}

Cylinder scaled_cylinder(const Cylinder& q, double s) {
  q.validate();
  if (!(s > 0.0 && s <= 1.0)) throw PreconditionError("cylinder scale must lie in (0, 1]");
  Cylinder c = q;
  c.R = s * q.R;
  c.T = s * q.T;
  return c;
}

Cylinder subcylinder(const Cylinder& q, double s) {
  if (!(s >= 0.5 && s <= 1.0)) throw PreconditionError("subcylinder scale must lie in [1/2, 1]");
  return scaled_cylinder(q, s);
}

HarnackCylinders harnack_cylinders(const Cylinder& q) {
  q.validate();
  HarnackCylinders h;
  h.lower = Cylinder{q.t0 - 0.5 * q.T, q.x0, 0.25 * q.R, 0.25 * q.T, q.n};
  h.upper = Cylinder{q.t0, q.x0, 0.25 * q.R, 0.25 * q.T, q.n};
  return h;
}

}  // namespace hlab
