#include "hlab/quadrature.hpp"

#include <cmath>
#include <limits>

namespace hlab {

namespace {

// Gauss-Legendre nodes and weights on [-1, 1].
constexpr std::array<double, 3> kGaussNodes{-0.7745966692414834, 0.0, 0.7745966692414834};
constexpr std::array<double, 3> kGaussWeights{5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};

struct AxisRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

AxisRule axis_rule(double lo, double hi, int cells, QuadratureRule rule) {
  AxisRule a;
  const double h = (hi - lo) / cells;
  if (rule == QuadratureRule::midpoint) {
    a.nodes.reserve(cells);
    a.weights.assign(cells, h);
    for (int i = 0; i < cells; ++i) a.nodes.push_back(lo + (i + 0.5) * h);
  } else {
    a.nodes.reserve(3 * cells);
    a.weights.reserve(3 * cells);
    for (int i = 0; i < cells; ++i) {
      const double mid = lo + (i + 0.5) * h;
      for (int g = 0; g < 3; ++g) {
        a.nodes.push_back(mid + 0.5 * h * kGaussNodes[g]);
        a.weights.push_back(0.5 * h * kGaussWeights[g]);
      }
    }
  }
  return a;
}

}  // namespace

void QuadratureSpec::validate() const {
  if (levels < 1) throw PreconditionError("quadrature levels must be >= 1");
  if (levels > 14) throw PreconditionError("quadrature levels above 14 are not supported");
  if (!(singular_tolerance > 0.0)) throw PreconditionError("singular tolerance must be positive");
}

double Box::volume() const {
  double v = 1.0;
  for (int k = 0; k < dims; ++k) v *= hi[k] - lo[k];
  return v;
}

double integrate_box_level(const BoxFn& f, const Box& box, int level, QuadratureRule rule,
                           const BoxFn& distance, double tol, std::size_t* clipped) {
  if (box.dims < 1 || box.dims > 3) throw PreconditionError("box dimension must be 1..3");
  const int cells = 1 << level;
  std::array<AxisRule, 3> axes;
  for (int k = 0; k < box.dims; ++k) axes[k] = axis_rule(box.lo[k], box.hi[k], cells, rule);
  for (int k = box.dims; k < 3; ++k) axes[k] = AxisRule{{0.0}, {1.0}};

  double sum = 0.0;
  std::size_t skipped = 0;
  std::array<double, 3> c{};
  for (std::size_t i = 0; i < axes[0].nodes.size(); ++i) {
    c[0] = axes[0].nodes[i];
    for (std::size_t j = 0; j < axes[1].nodes.size(); ++j) {
      c[1] = axes[1].nodes[j];
      const double wij = axes[0].weights[i] * axes[1].weights[j];
      double inner = 0.0;
      for (std::size_t k = 0; k < axes[2].nodes.size(); ++k) {
        c[2] = axes[2].nodes[k];
        if (distance && distance(c) < tol) {
          ++skipped;
          continue;
        }
        const double v = f(c);
        if (!std::isfinite(v)) {
          ++skipped;
          continue;
        }
        inner += axes[2].weights[k] * v;
      }
      sum += wij * inner;
    }
  }
  if (clipped) *clipped += skipped;
  return sum;
}

std::pair<bool, double> assess_sequence(const std::vector<double>& seq) {
  const double inf = std::numeric_limits<double>::infinity();
  for (double v : seq) {
    if (!std::isfinite(v)) return {false, inf};
  }
  const std::size_t m = seq.size();
  if (m < 2) return {true, 0.0};
  std::vector<double> d;
  for (std::size_t i = 1; i < m; ++i) d.push_back(seq[i] - seq[i - 1]);
  const double value = seq.back();
  const double scale = std::max(std::abs(value), std::numeric_limits<double>::min());
  const double last = d.back();

  // Divergence: three successive increments of one sign that do not contract.
  if (d.size() >= 3) {
    const double d1 = d[d.size() - 3], d2 = d[d.size() - 2], d3 = d[d.size() - 1];
    const bool same_sign = (d1 > 0 && d2 > 0 && d3 > 0) || (d1 < 0 && d2 < 0 && d3 < 0);
    if (same_sign && std::abs(d3) > 1e-8 * scale && std::abs(d2) >= 0.9 * std::abs(d1) &&
        std::abs(d3) >= 0.9 * std::abs(d2)) {
      return {false, inf};
    }
  }

  double err = std::abs(last);
  if (d.size() >= 2 && d[d.size() - 2] != 0.0) {
    const double rho = std::abs(last) / std::abs(d[d.size() - 2]);
    err = rho < 1.0 ? 2.0 * std::abs(last) * std::max(1.0, rho / (1.0 - rho))
                    : 2.0 * std::abs(last);
  }
  err = std::max(err, 8.0 * std::numeric_limits<double>::epsilon() * std::abs(value));
  return {true, err};
}

QuadratureResult integrate_box(const BoxFn& f, const Box& box, const QuadratureSpec& spec,
                               const BoxFn& distance) {
  spec.validate();
  QuadratureResult res;
  const int first = std::max(1, spec.levels - 3);
  for (int l = first; l <= spec.levels; ++l) {
    std::size_t clipped = 0;
    res.sequence.push_back(
        integrate_box_level(f, box, l, spec.rule, distance, spec.singular_tolerance, &clipped));
    if (l == spec.levels) res.clipped_nodes = clipped;
  }
  auto [ok, err] = assess_sequence(res.sequence);
  res.converged = ok;
  res.error = err;
  res.value = ok ? res.sequence.back() : std::numeric_limits<double>::quiet_NaN();
  return res;
}

Box cylinder_box(const Cylinder& q) {
  q.validate();
  Box b;
  b.dims = 1 + q.n;
  b.lo[0] = q.bottom();
  b.hi[0] = q.t0;
  for (int k = 0; k < q.n; ++k) {
    b.lo[k + 1] = q.x0[k] - q.R;
    b.hi[k + 1] = q.x0[k] + q.R;
  }
  return b;
}

namespace {

BoxFn wrap(const SpaceTimeFn& f) {
  if (!f) return {};
  return [&f](const std::array<double, 3>& c) { return f(c[0], SpacePoint{c[1], c[2]}); };
}

}  // namespace

double cylinder_integral_level(const SpaceTimeFn& f, const Cylinder& q, int level,
                               QuadratureRule rule, const SpaceTimeFn& distance, double tol) {
  return integrate_box_level(wrap(f), cylinder_box(q), level, rule, wrap(distance), tol);
}

QuadratureResult cylinder_integral(const SpaceTimeFn& f, const Cylinder& q,
                                   const QuadratureSpec& spec, const SpaceTimeFn& distance) {
  return integrate_box(wrap(f), cylinder_box(q), spec, wrap(distance));
}

QuadratureResult cylinder_average(const SpaceTimeFn& f, const Cylinder& q,
                                  const QuadratureSpec& spec, const SpaceTimeFn& distance) {
  auto res = cylinder_integral(f, q, spec, distance);
  const double vol = q.volume();
  res.value /= vol;
  res.error /= vol;
  for (double& v : res.sequence) v /= vol;
  return res;
}

}  // namespace hlab
