#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "hlab/estimates.hpp"

namespace hlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct MeasuredNode {
  double u;
  double mass;
};

// Nodes of q with their mass under w (or Lebesgue). Nodes where the density
// is not finite are dropped.
std::vector<MeasuredNode> measured(const Field& u, const Cylinder& q, const Weight* w,
                                   bool interior_only) {
  const Grid& g = u.grid();
  std::vector<MeasuredNode> out;
  for (const auto& nd : cylinder_nodes(g, q, interior_only)) {
    double mass = nd.weight;
    if (w) {
      const double d = w->omega(g.time(nd.m), g.point(nd.k));
      if (!std::isfinite(d)) continue;
      mass *= d;
    }
    out.push_back({u.at(nd.m, nd.k), mass});
  }
  if (out.empty()) throw PreconditionError("cylinder holds no grid node: " + describe(q));
  return out;
}

std::vector<double> default_deltas() {
  std::vector<double> d;
  for (int i = 1; i <= 19; ++i) d.push_back(0.05 * i);
  return d;
}

}  // namespace

// --- Bombieri ---------------------------------------------------------------

namespace {

struct BombieriHypotheses {
  double C1 = 0.0, C2 = 0.0;
  double C1_delta = 0.0, C1_s = 0.0, C1_r = 0.0;
  bool hold = true;
  std::vector<double> sups;  // sup over Q_s per pair
};

BombieriHypotheses estimate_hypotheses(const BombieriInput& in,
                                       const std::vector<std::pair<double, double>>& pairs) {
  if (!in.u) throw PreconditionError("bombieri_check: no field");
  if (!(in.theta > 0.0)) throw PreconditionError("bombieri_check needs theta > 0");
  const Field& u = *in.u;
  const auto deltas = in.deltas.empty() ? default_deltas() : in.deltas;
  BombieriHypotheses h;

  const auto whole = measured(u, in.q1, in.w, false);
  double w_q1 = 0.0;
  for (const auto& nd : whole) {
    if (!(nd.u > 0.0)) h.hold = false;
    w_q1 += nd.mass;
  }
  if (!h.hold || !(w_q1 > 0.0)) {
    h.hold = false;
    return h;
  }

  // (B2): sup_k k w({ln u > k}) / w(Q1), attained as k approaches a data value from below.
  std::vector<std::pair<double, double>> logs;
  for (const auto& nd : whole) logs.emplace_back(std::log(nd.u), nd.mass);
  std::sort(logs.begin(), logs.end(), [](auto& a, auto& b) { return a.first > b.first; });
  double above = 0.0;
  for (std::size_t i = 0; i < logs.size(); ++i) {
    above += logs[i].second;
    if (i + 1 < logs.size() && logs[i + 1].first == logs[i].first) continue;
    if (logs[i].first > 0.0) h.C2 = std::max(h.C2, logs[i].first * above / w_q1);
  }

  // (B1): minimal C1 over the delta grid and the pairs.
  for (const auto& [s, r] : pairs) {
    if (!(s >= 0.5 && s < r && r <= 1.0)) throw PreconditionError("bombieri_check needs 1/2 <= s < r <= 1");
    const auto inner = measured(u, scaled_cylinder(in.q1, s), nullptr, true);
    const auto outer = measured(u, scaled_cylinder(in.q1, r), in.w, false);
    double sup = 0.0;
    for (const auto& nd : inner) sup = std::max(sup, nd.u);
    h.sups.push_back(sup);
    for (double d : deltas) {
      double integral = 0.0;
      for (const auto& nd : outer) integral += std::pow(nd.u, d) * nd.mass;
      const double c = std::pow(sup, d) * std::pow(r - s, in.theta) * w_q1 / integral;
      if (!std::isfinite(c)) h.hold = false;
      if (c > h.C1) {
        h.C1 = c;
        h.C1_delta = d;
        h.C1_s = s;
        h.C1_r = r;
      }
    }
  }
  if (!std::isfinite(h.C2)) h.hold = false;
  return h;
}

}  // namespace

BombieriReport bombieri_check(const BombieriInput& in,
                              const std::vector<std::pair<double, double>>& pairs,
                              double C_theta) {
  const auto h = estimate_hypotheses(in, pairs);
  BombieriReport rep;
  rep.C1 = h.C1;
  rep.C2 = h.C2;
  rep.theta = in.theta;
  rep.C_theta = C_theta;
  rep.C1_delta = h.C1_delta;
  rep.C1_s = h.C1_s;
  rep.C1_r = h.C1_r;
  rep.hypotheses_hold = h.hold;
  if (!h.hold) {
    rep.conclusion_holds = false;
    return rep;
  }
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto [s, r] = pairs[i];
    BombieriPair bp;
    bp.s = s;
    bp.r = r;
    bp.sup_u = h.sups[i];
    bp.bound_log = C_theta * 32.0 * h.C2 * std::pow(h.C1, 4) / std::pow(r - s, 4.0 * in.theta);
    bp.margin = bp.bound_log - std::log(bp.sup_u);
    if (bp.margin < 0.0) rep.conclusion_holds = false;
    rep.pairs.push_back(bp);
  }
  return rep;
}

double bombieri_required_C_theta(const BombieriInput& in,
                                 const std::vector<std::pair<double, double>>& pairs) {
  const auto h = estimate_hypotheses(in, pairs);
  if (!h.hold) return std::numeric_limits<double>::quiet_NaN();
  double need = 0.0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const double lg = std::log(h.sups[i]);
    if (lg <= 0.0) continue;
    const auto [s, r] = pairs[i];
    const double unit = 32.0 * h.C2 * std::pow(h.C1, 4) / std::pow(r - s, 4.0 * in.theta);
    need = std::max(need, unit > 0.0 ? lg / unit : kInf);
  }
  return need;
}

// --- iteration lemma ----------------------------------------------------------

namespace {

double iteration_expression(double lambda, double alpha, double beta) {
  return std::pow(1.0 - lambda, -beta) / (1.0 - alpha * std::pow(lambda, -beta));
}

void check_iteration_args(double alpha, double beta) {
  if (!(alpha >= 0.0 && alpha < 1.0)) throw PreconditionError("iteration lemma needs 0 <= alpha < 1");
  if (!(beta > 0.0)) throw PreconditionError("iteration lemma needs beta > 0");
}

}  // namespace

double iteration_constant(double alpha, double beta) {
  check_iteration_args(alpha, beta);
  if (alpha == 0.0) return 1.0;
  // The expression blows up at both ends of the interval; minimize its log.
  double a = std::pow(alpha, 1.0 / beta), b = 1.0;
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  auto f = [&](double l) { return std::log(iteration_expression(l, alpha, beta)); };
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < 200 && b - a > 1e-15; ++i) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = f(x2);
    }
  }
  return iteration_expression(0.5 * (a + b), alpha, beta);
}

double iteration_constant_midpoint(double alpha, double beta) {
  check_iteration_args(alpha, beta);
  const double lambda = 0.5 * (std::pow(alpha, 1.0 / beta) + 1.0);
  return iteration_expression(lambda, alpha, beta);
}

IterationReport iteration_check(const std::vector<double>& s, const std::vector<double>& f,
                                double alpha, double A, double beta) {
  check_iteration_args(alpha, beta);
  if (s.size() != f.size() || s.size() < 2) throw PreconditionError("iteration_check needs matching samples");
  if (!(A > 0.0)) throw PreconditionError("iteration_check needs A > 0");
  for (std::size_t i = 1; i < s.size(); ++i)
    if (!(s[i] > s[i - 1])) throw PreconditionError("iteration_check needs increasing abscissae");
  for (double v : f)
    if (!std::isfinite(v)) throw PreconditionError("iteration_check needs bounded f");

  IterationReport rep;
  rep.c = iteration_constant(alpha, beta);
  rep.c_midpoint = iteration_constant_midpoint(alpha, beta);
  rep.worst_margin = kInf;
  const double rel = 1e-12;
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = i + 1; j < s.size(); ++j) {
      const double term = A / std::pow(s[j] - s[i], beta);
      const double hyp = alpha * f[j] + term;
      if (f[i] > hyp + rel * std::abs(hyp)) rep.applicable = false;
      const double bound = rep.c * term;
      rep.worst_margin = std::min(rep.worst_margin, (bound - f[i]) / bound);
    }
  }
  if (!rep.applicable) {
    rep.conclusion_holds = false;
    return rep;
  }
  rep.conclusion_holds = rep.worst_margin >= -rel;
  return rep;
}

std::vector<double> back_propagated_sample(const std::vector<double>& s, double alpha, double A,
                                           double beta, std::uint64_t seed) {
  check_iteration_args(alpha, beta);
  if (s.size() < 2) throw PreconditionError("back_propagated_sample needs two abscissae");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> top(0.0, 1.0), shrink(0.5, 1.0);
  const std::size_t N = s.size();
  std::vector<double> f(N);
  // f at the right end is bounded by A / (span)^beta: with any larger value the
  // discrete grid cannot carry the iteration that makes the lemma work.
  f[N - 1] = top(rng) * A / std::pow(s[N - 1] - s[0], beta);
  for (std::size_t i = N - 1; i-- > 0;) {
    double best = kInf;
    for (std::size_t j = i + 1; j < N; ++j)
      best = std::min(best, alpha * f[j] + A / std::pow(s[j] - s[i], beta));
    f[i] = shrink(rng) * best;
  }
  return f;
}

// --- Mamedov inequality -------------------------------------------------------

MamedovReport mamedov_check(const Field& v, const Cylinder& q, double s) {
  if (!(s > 0.0 && s < 1.0)) throw PreconditionError("mamedov_check needs 0 < s < 1");
  const Grid& g = v.grid();
  const int n = g.n();
  const Cylinder qs = scaled_cylinder(q, s);
  const auto nodes = cylinder_nodes(g, qs, false);
  if (nodes.empty()) throw PreconditionError("mamedov_check: Q^s holds no node");

  auto grad_norm = [&](int m, std::size_t k) {
    const auto idx = g.axis_index(k);
    double sq = 0.0;
    for (int a = 0; a < n; ++a) {
      std::array<int, 2> lo = idx, hi = idx;
      if (idx[a] > 0) --lo[a];
      if (idx[a] < g.cells) ++hi[a];
      const double d = (v.at(m, g.node(hi[0], hi[1])) - v.at(m, g.node(lo[0], lo[1]))) /
                       ((hi[a] - lo[a]) * g.h());
      sq += d * d;
    }
    return std::sqrt(sq);
  };

  MamedovReport rep;
  int top_m = -1;
  for (const auto& nd : nodes) top_m = std::max(top_m, nd.m);
  for (const auto& nd : nodes) {
    const double val = v.at(nd.m, nd.k);
    if (val <= 0.0) continue;
    rep.lhs += nd.weight * val;
    rep.gradient_term += nd.weight * grad_norm(nd.m, nd.k);
  }
  rep.gradient_term *= q.R;
  for (const auto& nd : nodes) {
    if (nd.m != top_m) continue;
    const double val = v.at(nd.m, nd.k);
    if (val <= 0.0) continue;
    // Undo the time-face halving and the dt factor: a spatial integral.
    rep.top_term += 2.0 * nd.weight / g.dt() * val;
  }
  rep.top_term *= q.T;
  rep.slack = 2.0 * (g.h() / (s * q.R) + g.dt() / (s * q.T)) *
              (std::abs(rep.lhs) + std::abs(rep.gradient_term) + std::abs(rep.top_term));
  rep.pass = rep.lhs <= rep.gradient_term + rep.top_term + rep.slack;
  return rep;
}

Field random_mamedov_field(const Grid& g, std::uint64_t seed) {
  g.validate();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> sym(-1.0, 1.0), pos(0.0, 1.0);
  const int knots = 6;
  const int n = g.n();
  const int per = n == 2 ? knots * knots : knots;
  std::vector<double> a(per), b(per), phi(knots);
  for (auto& x : a) x = sym(rng);
  for (auto& x : b) x = pos(rng);
  // phi: nondecreasing piecewise-linear in time, starting at a random offset.
  phi[0] = sym(rng);
  for (int i = 1; i < knots; ++i) phi[i] = phi[i - 1] + pos(rng);
  const Cylinder& q = g.cylinder;

  // Piecewise-linear interpolation on `knots` equispaced points of [0, 1].
  auto locate = [&](double r, int& i, double& f) {
    r = std::clamp(r, 0.0, 1.0) * (knots - 1);
    i = std::min(static_cast<int>(r), knots - 2);
    f = r - i;
  };
  auto spatial = [&](const std::vector<double>& c, const SpacePoint& x) {
    int i, j = 0;
    double fx, fy = 0.0;
    locate((x[0] - q.x0[0] + q.R) / (2.0 * q.R), i, fx);
    if (n == 1) return (1.0 - fx) * c[i] + fx * c[i + 1];
    locate((x[1] - q.x0[1] + q.R) / (2.0 * q.R), j, fy);
    auto at = [&](int ii, int jj) { return c[jj * knots + ii]; };
    return (1.0 - fy) * ((1.0 - fx) * at(i, j) + fx * at(i + 1, j)) +
           fy * ((1.0 - fx) * at(i, j + 1) + fx * at(i + 1, j + 1));
  };
  auto temporal = [&](double t) {
    int i;
    double f;
    locate((t - q.bottom()) / q.T, i, f);
    return (1.0 - f) * phi[i] + f * phi[i + 1];
  };
  return sample_field(g, BoundaryKind::dirichlet, [&](double t, const SpacePoint& x) {
    return spatial(a, x) + spatial(b, x) * temporal(t);
  });
}

// --- interpolation inequality --------------------------------------------------

SampledFunction sample_on_box(const Box& d, int cells,
                              const std::function<double(const SpacePoint&)>& f) {
  if (d.dims < 1 || d.dims > 2) throw PreconditionError("sample_on_box supports n = 1, 2");
  if (cells < 1) throw PreconditionError("sample_on_box needs cells >= 1");
  SampledFunction s;
  s.domain = d;
  s.cells = cells;
  const int N = cells + 1;
  const int ny = d.dims == 2 ? N : 1;
  s.values.resize(static_cast<std::size_t>(N) * ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < N; ++i) {
      SpacePoint x{};
      x[0] = d.lo[0] + (d.hi[0] - d.lo[0]) * i / cells;
      if (d.dims == 2) x[1] = d.lo[1] + (d.hi[1] - d.lo[1]) * j / cells;
      s.values[static_cast<std::size_t>(j) * N + i] = f(x);
    }
  }
  return s;
}

double interpolation_check(const SampledFunction& f, double q, double p) {
  const int n = f.domain.dims;
  if (n < 1 || n > 2) throw PreconditionError("interpolation_check supports n = 1, 2");
  if (!(p >= 1.0)) throw PreconditionError("interpolation_check needs p >= 1");
  if (!(q >= 1.0 && q <= (n + p) / n)) throw PreconditionError("interpolation_check needs 1 <= q <= (n+p)/n");
  const int N = f.cells + 1;
  if (f.values.size() != static_cast<std::size_t>(n == 2 ? N * N : N))
    throw PreconditionError("interpolation_check: sample size mismatch");

  const double gx[3] = {0.5 - 0.5 * std::sqrt(0.6), 0.5, 0.5 + 0.5 * std::sqrt(0.6)};
  const double gw[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
  const double hx = (f.domain.hi[0] - f.domain.lo[0]) / f.cells;
  const double hy = n == 2 ? (f.domain.hi[1] - f.domain.lo[1]) / f.cells : 1.0;
  const int ycells = n == 2 ? f.cells : 1;
  auto val = [&](int i, int j) { return f.values[static_cast<std::size_t>(j) * N + i]; };

  double Iq = 0.0, Ip = 0.0, Ig = 0.0;
  for (int j = 0; j < ycells; ++j) {
    for (int i = 0; i < f.cells; ++i) {
      if (n == 1) {
        const double f0 = val(i, 0), f1 = val(i + 1, 0);
        Ig += std::abs(f1 - f0);
        for (int a = 0; a < 3; ++a) {
          const double v = std::abs(f0 + (f1 - f0) * gx[a]);
          Iq += gw[a] * hx * std::pow(v, q);
          Ip += gw[a] * hx * std::pow(v, p);
        }
        continue;
      }
      const double f00 = val(i, j), f10 = val(i + 1, j), f01 = val(i, j + 1), f11 = val(i + 1, j + 1);
      for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
          const double x = gx[a], y = gx[b], wt = gw[a] * gw[b] * hx * hy;
          const double v = std::abs((1 - x) * (1 - y) * f00 + x * (1 - y) * f10 +
                                    (1 - x) * y * f01 + x * y * f11);
          const double dx = ((1 - y) * (f10 - f00) + y * (f11 - f01)) / hx;
          const double dy = ((1 - x) * (f01 - f00) + x * (f11 - f10)) / hy;
          Iq += wt * std::pow(v, q);
          Ip += wt * std::pow(v, p);
          Ig += wt * std::hypot(dx, dy);
        }
      }
    }
  }
  double D = 1.0;
  for (int a = 0; a < n; ++a) D *= f.domain.hi[a] - f.domain.lo[a];
  const double A = std::pow(D, 1.0 / n - (q - 1.0) / p);
  const double norm_q = std::pow(Iq, 1.0 / q);
  const double norm_p = std::pow(Ip, 1.0 / p);
  const double inv_qprime = 1.0 - 1.0 / q;
  const double denom = std::pow(A, 1.0 / q) * std::pow(norm_p, inv_qprime) * std::pow(Ig, 1.0 / q);
  if (!(denom > 0.0)) throw PreconditionError("interpolation_check: f vanishes identically");
  return norm_q / denom;
}

SampledFunction random_compact_sample(const Box& d, int cells, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const int n = d.dims;
  const int bumps = 1 + static_cast<int>(u01(rng) * 4.0);
  struct Bump {
    std::array<double, 2> c;
    double rho, amp;
  };
  std::vector<Bump> bs;
  for (int b = 0; b < bumps; ++b) {
    Bump bp{};
    bp.rho = 0.15 + 0.6 * u01(rng);
    for (int a = 0; a < n; ++a) bp.c[a] = (1.0 - bp.rho) * (2.0 * u01(rng) - 1.0);
    bp.amp = 0.2 + u01(rng);
    bs.push_back(bp);
  }
  // Bumps are cones of radius rho inside the reference cube [-1, 1]^n, so
  // the sample vanishes on the boundary and scales with the box.
  return sample_on_box(d, cells, [&](const SpacePoint& x) {
    std::array<double, 2> xi{};
    for (int a = 0; a < n; ++a) xi[a] = 2.0 * (x[a] - d.lo[a]) / (d.hi[a] - d.lo[a]) - 1.0;
    double v = 0.0;
    for (const auto& b : bs) {
      double r2 = 0.0;
      for (int a = 0; a < n; ++a) r2 += (xi[a] - b.c[a]) * (xi[a] - b.c[a]);
      v += b.amp * std::max(0.0, 1.0 - std::sqrt(r2) / b.rho);
    }
    return v;
  });
}

// --- Steklov averages ------------------------------------------------------------

Field steklov_average(const Field& v, double h) {
  const Grid& g = v.grid();
  const Cylinder& q = g.cylinder;
  if (!(h > 0.0 && h < q.T)) throw PreconditionError("steklov_average needs 0 < h < T");
  const double dt = g.dt();
  const int last = static_cast<int>(std::floor((q.T - h) / dt + 1e-9));
  if (last < 1) throw PreconditionError("steklov_average: h leaves fewer than two slices");

  Grid out_grid = g;
  out_grid.cylinder.T = last * dt;
  out_grid.cylinder.t0 = q.bottom() + last * dt;
  out_grid.steps = last;
  Field out(out_grid, v.boundary());
  out.weight_label = v.weight_label;
  out.flux_label = v.flux_label;

  const std::size_t S = g.space_nodes();
  std::vector<double> cum(g.steps + 1);
  for (std::size_t k = 0; k < S; ++k) {
    cum[0] = 0.0;
    for (int m = 0; m < g.steps; ++m) cum[m + 1] = cum[m] + 0.5 * dt * (v.at(m, k) + v.at(m + 1, k));
    // Primitive of the piecewise-linear interpolant, measured from the bottom.
    auto F = [&](double tau) {
      const double r = tau / dt;
      const int j = std::min(static_cast<int>(std::floor(r)), g.steps - 1);
      const double frac = r - j;
      const double vt = (1.0 - frac) * v.at(j, k) + frac * v.at(j + 1, k);
      return cum[j] + 0.5 * frac * dt * (v.at(j, k) + vt);
    };
    for (int m = 0; m <= last; ++m) out.at(m, k) = (F(m * dt + h) - F(m * dt)) / h;
  }
  return out;
}

SteklovErrors steklov_errors(const Field& v, const Field& vh, double p, const Weight* w) {
  if (!(p >= 1.0)) throw PreconditionError("steklov_errors needs p >= 1");
  const Grid& g = v.grid();
  const Grid& gh = vh.grid();
  if (gh.cells != g.cells || gh.n() != g.n() || gh.steps > g.steps ||
      std::abs(gh.dt() - g.dt()) > 1e-12 * g.dt())
    throw PreconditionError("steklov_errors: grids do not match");
  const int n = g.n();
  const int N = g.nodes_per_axis();
  const double h = g.h(), dt = g.dt();

  SteklovErrors e;
  double grad_sum = 0.0;
  for (int m = 0; m <= gh.steps; ++m) {
    const double t = g.time(m);
    const double tw = (m == 0 || m == gh.steps) ? 0.5 * dt : dt;
    auto d = [&](int i, int j) {
      const std::size_t k = g.node(i, j);
      return vh.at(m, k) - v.at(m, k);
    };
    double lp = 0.0;
    for (std::size_t k = 0; k < g.space_nodes(); ++k) {
      const auto idx = g.axis_index(k);
      double vol = std::pow(h, n);
      for (int a = 0; a < n; ++a)
        if (idx[a] == 0 || idx[a] == N - 1) vol *= 0.5;
      lp += vol * std::pow(std::abs(vh.at(m, k) - v.at(m, k)), p);
    }
    e.sup_lp = std::max(e.sup_lp, std::pow(lp, 1.0 / p));

    const int ny = n == 2 ? g.cells : 1;
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < g.cells; ++i) {
        SpacePoint c{};
        c[0] = g.coord(0, i) + 0.5 * h;
        double gsq;
        if (n == 1) {
          const double gx = (d(i + 1, 0) - d(i, 0)) / h;
          gsq = gx * gx;
        } else {
          c[1] = g.coord(1, j) + 0.5 * h;
          const double gx = 0.5 * ((d(i + 1, j) - d(i, j)) + (d(i + 1, j + 1) - d(i, j + 1))) / h;
          const double gy = 0.5 * ((d(i, j + 1) - d(i, j)) + (d(i + 1, j + 1) - d(i + 1, j))) / h;
          gsq = gx * gx + gy * gy;
        }
        const double om = w ? w->omega(t, c) : 1.0;
        grad_sum += tw * std::pow(h, n) * om * std::pow(gsq, 0.5 * p);
      }
    }
  }
  e.gradient_lp = std::pow(grad_sum, 1.0 / p);
  return e;
}

}  // namespace hlab
