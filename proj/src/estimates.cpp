#include "hlab/estimates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "hlab/muckenhoupt.hpp"

namespace hlab {

Json to_json(const Verdict& v) {
  Json j;
  j["check"] = v.check;
  j["parameters"] = v.parameters;
  j["constant"] = v.constant;
  j["margin"] = v.margin;
  j["resolution"] = v.resolution;
  j["pass"] = v.pass;
  return j;
}

Json resolution_of(const Grid& g) {
  return Json{{"n", g.n()}, {"cells", g.cells}, {"steps", g.steps}, {"h", g.h()}, {"dt", g.dt()}};
}

std::vector<WeightedNode> cylinder_nodes(const Grid& g, const Cylinder& q, bool interior_only) {
  q.validate();
  const double dt = g.dt(), h = g.h();
  const double ttol = 1e-9 * dt, xtol = 1e-9 * h;
  const double gb = g.cylinder.bottom();
  const int m_lo = std::max(0, static_cast<int>(std::ceil((q.bottom() - gb - ttol) / dt)));
  const int m_hi = std::min(g.steps, static_cast<int>(std::floor((q.t0 - gb + ttol) / dt)));
  std::array<int, 2> i_lo{0, 0}, i_hi{0, 0};
  for (int a = 0; a < g.n(); ++a) {
    const double left = g.coord(a, 0);
    i_lo[a] = std::max(0, static_cast<int>(std::ceil((q.x0[a] - q.R - left - xtol) / h)));
    i_hi[a] = std::min(g.cells, static_cast<int>(std::floor((q.x0[a] + q.R - left + xtol) / h)));
  }
  std::vector<WeightedNode> out;
  const double base = std::pow(h, g.n()) * dt;
  for (int m = m_lo; m <= m_hi; ++m) {
    const double t = g.time(m);
    double wt = base;
    if (std::abs(t - q.bottom()) <= ttol || std::abs(t - q.t0) <= ttol) wt *= 0.5;
    for (int j = i_lo[1]; j <= i_hi[1]; ++j) {
      double wj = wt;
      if (g.n() == 2 && std::abs(std::abs(g.coord(1, j) - q.x0[1]) - q.R) <= xtol) wj *= 0.5;
      for (int i = i_lo[0]; i <= i_hi[0]; ++i) {
        const std::size_t k = g.node(i, j);
        if (interior_only && g.boundary_layer(k) < 2) continue;
        double wi = wj;
        if (std::abs(std::abs(g.coord(0, i) - q.x0[0]) - q.R) <= xtol) wi *= 0.5;
        out.push_back({m, k, wi});
      }
    }
  }
  return out;
}

namespace {

std::vector<WeightedNode> nonempty_nodes(const Grid& g, const Cylinder& q, bool interior_only) {
  auto nodes = cylinder_nodes(g, q, interior_only);
  if (nodes.empty()) throw PreconditionError("cylinder holds no grid node: " + describe(q));
  return nodes;
}

}  // namespace

double ess_sup(const Field& u, const Cylinder& q) {
  double s = -std::numeric_limits<double>::infinity();
  for (const auto& nd : nonempty_nodes(u.grid(), q, true)) s = std::max(s, u.at(nd.m, nd.k));
  return s;
}

double ess_inf(const Field& u, const Cylinder& q) {
  double s = std::numeric_limits<double>::infinity();
  for (const auto& nd : nonempty_nodes(u.grid(), q, true)) s = std::min(s, u.at(nd.m, nd.k));
  return s;
}

std::vector<MoserReport> moser_check(const Field& u, const Cylinder& q,
                                     const std::vector<double>& deltas,
                                     const std::vector<std::pair<double, double>>& pairs,
                                     double L) {
  if (!(L > 1.0)) throw PreconditionError("moser_check needs L > 1");
  if (u.min() < 0.0) throw PreconditionError("moser_check needs u >= 0");
  std::vector<MoserReport> out;
  for (const auto& [s, tau] : pairs) {
    if (!(s > 0.0 && s < tau && tau <= 1.0)) throw PreconditionError("moser_check needs 0 < s < tau <= 1");
    const double lhs = ess_sup(u, scaled_cylinder(q, s));
    const auto nodes = nonempty_nodes(u.grid(), scaled_cylinder(q, tau), false);
    for (double delta : deltas) {
      if (!(delta > 0.0 && delta < 1.0)) throw PreconditionError("moser_check needs 0 < delta < 1");
      double sum = 0.0;
      for (const auto& nd : nodes) sum += nd.weight * std::pow(u.at(nd.m, nd.k), delta);
      MoserReport r;
      r.delta = delta;
      r.s = s;
      r.tau = tau;
      r.lhs = lhs;
      r.rhs_core = std::pow(sum / q.volume(), 1.0 / delta);
      const double gap = std::pow(tau - s, 1.0 / (delta * (L - 1.0)));
      if (r.rhs_core > 0.0) r.implied_C = lhs * gap / r.rhs_core;
      else r.implied_C = lhs > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
      r.constant = std::pow(r.implied_C, delta);
      out.push_back(r);
    }
  }
  return out;
}

MoserSummary summarize(const std::vector<MoserReport>& reps) {
  std::map<double, std::pair<double, double>> by;  // delta -> (max constant, max implied C)
  for (const auto& r : reps) {
    auto [it, fresh] = by.try_emplace(r.delta, r.constant, r.implied_C);
    if (!fresh) {
      it->second.first = std::max(it->second.first, r.constant);
      it->second.second = std::max(it->second.second, r.implied_C);
    }
  }
  MoserSummary s;
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const auto& [d, v] : by) {
    s.deltas.push_back(d);
    s.max_constant.push_back(v.first);
    s.max_implied_C.push_back(v.second);
    if (!std::isfinite(v.first) || !std::isfinite(v.second)) s.finite = false;
    lo = std::min(lo, v.first);
    hi = std::max(hi, v.first);
  }
  s.spread = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  return s;
}

LevelSetReport levelset_profile_check(const Field& u, const Cylinder& q, double s, double tau,
                                      const Weight& w, double C, const QuadratureSpec& spec) {
  if (!(s > 0.0 && s < tau && tau <= 1.0)) throw PreconditionError("levelset_profile_check needs 0 < s < tau <= 1");
  const auto& ex = w.exponents();
  const double p = ex.p, L = ex.L;
  const int n = ex.n;
  const Grid& g = u.grid();
  LevelSetReport rep;
  auto& prof = rep.profile;

  const Cylinder qt = scaled_cylinder(q, tau);
  const auto nodes = nonempty_nodes(g, qt, false);
  double M = -std::numeric_limits<double>::infinity();
  for (const auto& nd : nodes) M = std::max(M, u.at(nd.m, nd.k));
  prof.M_tau = M;

  // Cutoff: 0 on Q^s, 1 on the parabolic boundary of Q^tau, linear between.
  std::vector<double> shifted(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto x = g.point(nodes[i].k);
    const double t = g.time(nodes[i].m);
    double d = 0.0;
    for (int a = 0; a < n; ++a) d = std::max(d, std::abs(x[a] - q.x0[a]));
    const double xs = std::clamp((d - s * q.R) / ((tau - s) * q.R), 0.0, 1.0);
    const double ts = std::clamp(((q.t0 - s * q.T) - t) / ((tau - s) * q.T), 0.0, 1.0);
    shifted[i] = u.at(nodes[i].m, nodes[i].k) - M * std::max(xs, ts);
  }

  const int count = 64;
  for (int j = 0; j < count; ++j) {
    const double lk = std::log(1e-3) + (std::log(0.98) - std::log(1e-3)) * j / (count - 1);
    const double k = M * std::exp(lk);
    double y = 0.0, meas = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const double v = shifted[i] - k;
      if (v > 0.0) {
        y += nodes[i].weight * v;
        meas += nodes[i].weight;
      }
    }
    prof.ks.push_back(k);
    prof.y.push_back(y);
    prof.measures.push_back(meas);
  }
  for (std::size_t j = 1; j < prof.y.size(); ++j) {
    if (prof.y[j] > prof.y[j - 1]) rep.monotone = false;
  }
  if (!rep.monotone) {
    rep.smoothed = true;
    for (std::size_t j = 1; j < prof.y.size(); ++j) prof.y[j] = std::min(prof.y[j], prof.y[j - 1]);
  }
  // Rounding in the sums for y is bounded by a small multiple of the total
  // mass of |u - M xi|; the slope tolerance scales it by the level gap.
  double mass = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) mass += nodes[i].weight * std::abs(shifted[i]);
  for (std::size_t j = 0; j + 1 < prof.y.size(); ++j) {
    const double gap = prof.ks[j + 1] - prof.ks[j];
    const double slope = (prof.y[j + 1] - prof.y[j]) / gap;
    const double tol = 1e-12 * (mass / gap + prof.measures[j]);
    if (slope < -prof.measures[j] - tol || slope > -prof.measures[j + 1] + tol)
      rep.slopes_consistent = false;
  }

  const auto dist = w.singular_distance_fn();
  const auto wa = cylinder_integral(w.omega_alpha_fn(), q, spec, dist);
  const auto sr = cylinder_integral(w.sigma_r_fn(), q, spec, dist);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (wa.converged && sr.converged) {
    const double omega_norm = std::pow(wa.value, 1.0 / ex.alpha);
    const double sigma_norm = std::pow(sr.value, 1.0 / ex.r);
    rep.B = omega_norm * std::pow(sigma_norm, n * (p - 1.0) / (n + p)) / std::pow(q.R, p);
    rep.identity_raw = std::pow(rep.B, 1.0 / (p * (L - 1.0))) * q.volume();
    const double geometric = C * q.spatial_volume() / std::pow(q.R, n);
    rep.identity_normalized = rep.identity_raw / std::pow(geometric, 1.0 / ((n + p) * (L - 1.0)));
    const double product = std::pow(wa.value / q.volume(), 1.0 / ex.alpha) *
                           std::pow(sr.value / q.volume(), (p - 1.0) / ex.r);
    rep.muckenhoupt_factor = std::pow(product, n / (p * (n + p) * (L - 1.0)));
  } else {
    rep.B = rep.identity_raw = rep.identity_normalized = rep.muckenhoupt_factor = nan;
  }

  rep.min_constant = 0.0;
  for (std::size_t j = 0; j < prof.y.size(); ++j) {
    if (prof.measures[j] <= 0.0 || prof.y[j] <= 0.0) continue;
    const double c = prof.y[j] * (tau - s) /
                     (std::pow(rep.B, 1.0 / p) * M * std::pow(prof.measures[j], L));
    rep.min_constant = std::max(rep.min_constant, c);
  }
  return rep;
}

double median_level(const Field& u, const Cylinder& lower) {
  const auto nodes = cylinder_nodes(u.grid(), lower, true);
  if (nodes.empty()) throw PreconditionError("median_level: empty cylinder");
  std::vector<double> vals;
  vals.reserve(nodes.size());
  for (const auto& nd : nodes) vals.push_back(u.at(nd.m, nd.k));
  const std::size_t mid = vals.size() / 2;
  std::nth_element(vals.begin(), vals.begin() + static_cast<std::ptrdiff_t>(mid), vals.end());
  return vals[mid];
}

std::vector<double> log_levels(const Field& u, const Cylinder& q, int count) {
  const auto up = harnack_cylinders(q).upper;
  double kmax = 0.0;
  for (const auto& nd : cylinder_nodes(u.grid(), up, false)) {
    const double v = u.at(nd.m, nd.k);
    if (!(v > 0.0)) throw PreconditionError("log_levels needs u > 0");
    kmax = std::max(kmax, -std::log(v));
  }
  const double hi = kmax > 0.0 ? 0.999 * kmax : 1.0;
  const double lo = 1e-3 * hi;
  std::vector<double> ks;
  for (int j = 0; j < count; ++j)
    ks.push_back(std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * j / (count - 1)));
  return ks;
}

LogLevelReport log_levelset_check(const Field& u, const Cylinder& q, const std::vector<double>& ks) {
  const auto up = harnack_cylinders(q).upper;
  const auto nodes = nonempty_nodes(u.grid(), up, false);
  std::vector<std::pair<double, double>> vals;  // (ln(1/u), weight)
  for (const auto& nd : nodes) {
    const double v = u.at(nd.m, nd.k);
    if (!(v > 0.0)) throw PreconditionError("log_levelset_check needs u > 0");
    vals.emplace_back(-std::log(v), nd.weight);
  }
  LogLevelReport rep;
  rep.ks = ks;
  for (double k : ks) {
    if (!(k > 0.0)) throw PreconditionError("log_levelset_check needs positive levels");
    double meas = 0.0;
    for (const auto& [l, wt] : vals)
      if (l > k) meas += wt;
    rep.measures.push_back(meas);
    const double c = k * meas / q.volume();
    if (c > rep.constant) {
      rep.constant = c;
      rep.attaining_k = k;
    }
  }
  return rep;
}

HarnackReport harnack_check(const Field& u, const Cylinder& q) {
  const auto hc = harnack_cylinders(q);
  HarnackReport rep;
  rep.sup_lower = ess_sup(u, hc.lower);
  rep.inf_upper = std::numeric_limits<double>::infinity();
  for (const auto& nd : nonempty_nodes(u.grid(), hc.upper, true)) {
    const double v = u.at(nd.m, nd.k);
    if (v < rep.inf_upper) {
      rep.inf_upper = v;
      rep.witness_m = nd.m;
      rep.witness_k = nd.k;
    }
  }
  if (rep.inf_upper <= 0.0) {
    rep.touches_zero = true;
    rep.ratio = std::numeric_limits<double>::infinity();
  } else {
    rep.ratio = rep.sup_lower / rep.inf_upper;
  }
  rep.resolution = resolution_of(u.grid());
  return rep;
}

}  // namespace hlab
