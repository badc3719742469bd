#include <cmath>
#include <random>

#include "doctest.h"
#include "hlab/estimates.hpp"
#include "hlab/solver.hpp"
#include "oracles.hpp"

using namespace hlab;

namespace {

const Exponents kRef = make_exponents(2, 1, 4, 2);

Grid make_grid(const Cylinder& q, int cells, int steps) {
  Grid g;
  g.cylinder = q;
  g.cells = cells;
  g.steps = steps;
  return g;
}

Field constant(const Grid& g, double c) {
  return sample_field(g, BoundaryKind::dirichlet, [c](double, const SpacePoint&) { return c; });
}

// A positive heat solution on Q = K_1 x (0, 1).
Field heat_field(int cells) {
  const Weight w = make_weight({"unit", {}}, kRef);
  const SpaceTimeFn d = [](double t, const SpacePoint& x) { return 0.2 + oracle::heat_kernel(t, x[0] - 0.3); };
  const auto r = solve(make_grid(Cylinder{1.0, {0.0, 0.0}, 1.0, 1.0, 1}, cells, 2 * cells),
                       BoundaryKind::dirichlet, d, d, model_flux(w), w);
  REQUIRE(r.ok);
  return r.field;
}

}  // namespace

TEST_CASE("node weights integrate constants exactly") {
  const Cylinder q{1.0, {0.0, 0.0}, 1.0, 2.0, 1};
  const Grid g = make_grid(q, 16, 16);
  double s = 0.0;
  for (const auto& nd : cylinder_nodes(g, q, false)) s += nd.weight;
  CHECK(s == doctest::Approx(q.volume()).epsilon(1e-13));
  const Cylinder sub{0.5, {0.25, 0.0}, 0.5, 1.0, 1};
  s = 0.0;
  for (const auto& nd : cylinder_nodes(g, sub, false)) s += nd.weight;
  CHECK(s == doctest::Approx(sub.volume()).epsilon(1e-13));
  const Grid g2 = make_grid(Cylinder{1.0, {0.0, 0.0}, 1.0, 2.0, 2}, 8, 4);
  s = 0.0;
  for (const auto& nd : cylinder_nodes(g2, g2.cylinder, false)) s += nd.weight;
  CHECK(s == doctest::Approx(g2.cylinder.volume()).epsilon(1e-13));
}

TEST_CASE("Moser quotient of a constant") {
  const Cylinder q{1.0, {0.0, 0.0}, 1.0, 1.0, 1};
  const Field u = constant(make_grid(q, 32, 32), 1.0);
  const auto reps = moser_check(u, q, {0.25, 0.5}, {{0.5, 1.0}}, kRef.L);
  for (const auto& r : reps) {
    CHECK(r.lhs == 1.0);
    CHECK(r.rhs_core == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(r.implied_C == doctest::Approx(std::pow(0.5, 1.0 / (r.delta * (kRef.L - 1.0)))).epsilon(1e-12));
    CHECK(r.implied_C <= 1.0);
  }
  CHECK_THROWS_AS(moser_check(u.map([](double v) { return v - 2.0; }), q, {0.5}, {{0.5, 1.0}}, kRef.L),
                  PreconditionError);
}

TEST_CASE("Moser quotient is scale invariant and stable on a heat run") {
  const Field u = heat_field(64);
  const Cylinder& q = u.grid().cylinder;
  const std::vector<std::pair<double, double>> pairs{{0.5, 0.75}, {0.5, 1.0}, {0.75, 1.0}};
  const auto a = moser_check(u, q, {0.25, 0.5, 0.75}, pairs, kRef.L);
  const auto b = moser_check(u.scaled(17.3), q, {0.25, 0.5, 0.75}, pairs, kRef.L);
  for (std::size_t i = 0; i < a.size(); ++i)
    CHECK(std::abs(a[i].implied_C / b[i].implied_C - 1.0) <= 1e-12);
  const auto s = summarize(a);
  CHECK(s.finite);
  CHECK(s.spread <= 2.0);
}

TEST_CASE("level-set profile of a constant has exact slopes") {
  const Cylinder q{1.0, {0.0, 0.0}, 1.0, 1.0, 1};
  const Weight w = make_weight({"unit", {}}, kRef);
  const Field u = constant(make_grid(q, 32, 32), 2.0);
  const auto r = levelset_profile_check(u, q, 0.5, 0.75, w, 1.0, {});
  CHECK(r.slopes_consistent);
  CHECK(r.monotone);
  CHECK(r.profile.M_tau == 2.0);
  // The unit weight on its intrinsic cylinder: normalized identity is 1,
  // the raw value carries the cube factor 2^{1/((n+p)(L-1))} = 2^{8/3}.
  CHECK(r.identity_normalized == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(r.identity_raw == doctest::Approx(std::pow(2.0, 8.0 / 3.0)).epsilon(1e-6));
  CHECK(r.muckenhoupt_factor == doctest::Approx(1.0).epsilon(1e-6));
  for (std::size_t j = 0; j + 1 < r.profile.y.size(); ++j) CHECK(r.profile.y[j + 1] <= r.profile.y[j]);
}

TEST_CASE("median level: constant, ramp, normalization and monotonicity") {
  const Cylinder q{1.0, {0.0, 0.0}, 1.0, 1.0, 1};
  const Grid g = make_grid(q, 64, 64);
  const auto lower = harnack_cylinders(q).lower;
  CHECK(median_level(constant(g, 5.0), lower) == 5.0);

  const Field ramp = sample_field(g, BoundaryKind::dirichlet, [](double t, const SpacePoint& x) { return 3.0 * t + x[0]; });
  std::vector<double> vals;
  for (int m = 0; m <= g.steps; ++m)
    for (std::size_t k = 0; k < g.space_nodes(); ++k)
      if (g.boundary_layer(k) >= 2 && lower.contains_point(g.time(m), g.point(k), 1e-12)) vals.push_back(ramp.at(m, k));
  const double l = median_level(ramp, lower);
  CHECK(l == oracle::sorted_median(vals));
  CHECK(median_level(ramp.scaled(1.0 / l), lower) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(median_level(ramp.map([](double v) { return v + 0.1; }), lower) >= l);
}

TEST_CASE("log level sets against a node count") {
  const Cylinder q{1.0, {0.0, 0.0}, 1.0, 1.0, 1};
  const Grid g = make_grid(q, 64, 64);
  CHECK(log_levelset_check(constant(g, 1.0), q, {0.1, 1.0, 5.0}).constant == 0.0);

  const auto f = [](double t, const SpacePoint& x) { return std::exp(-std::clamp(4.0 * t + 2.0 * x[0], 0.0, 3.0)); };
  const Field u = sample_field(g, BoundaryKind::dirichlet, f);
  const auto up = harnack_cylinders(q).upper;  // K_{1/4} x (3/4, 1)
  // Trapezoid weights on the upper cylinder, faces halved.
  std::vector<double> vals, wts;
  const double h = g.h(), dt = g.dt();
  for (int m = 48; m <= 64; ++m) {
    for (int i = 24; i <= 40; ++i) {
      double wt = h * dt;
      if (m == 48 || m == 64) wt *= 0.5;
      if (i == 24 || i == 40) wt *= 0.5;
      vals.push_back(-std::log(u.at(m, g.node(i))));
      wts.push_back(wt);
    }
  }
  const std::vector<double> ks{0.5, 1.0, 2.0, 2.9};
  const auto r = log_levelset_check(u, q, ks);
  double c = 0.0;
  for (std::size_t j = 0; j < ks.size(); ++j) {
    const double meas = oracle::count_above(vals, wts, ks[j]);
    CHECK(r.measures[j] == doctest::Approx(meas).epsilon(1e-13));
    c = std::max(c, ks[j] * meas / q.volume());
  }
  CHECK(r.constant == doctest::Approx(c).epsilon(1e-13));
  CHECK(up.R == 0.25);
  CHECK_THROWS_AS(log_levelset_check(constant(g, 0.0), q, ks), PreconditionError);
}

TEST_CASE("Harnack ratio: constant, scaling and zero witness") {
  const Cylinder q{1.0, {0.0, 0.0}, 1.0, 1.0, 1};
  const Grid g = make_grid(q, 32, 32);
  CHECK(harnack_check(constant(g, 4.0), q).ratio == 1.0);
  const Field u = heat_field(32);
  const double a = harnack_check(u, q).ratio;
  CHECK(std::abs(harnack_check(u.scaled(0.37), q).ratio / a - 1.0) <= 1e-12);
  Field z = constant(g, 1.0);
  const std::size_t k = g.node(16);
  z.at(30, k) = 0.0;
  const auto r = harnack_check(z, q);
  CHECK(r.touches_zero);
  CHECK(std::isinf(r.ratio));
  CHECK(r.witness_m == 30);
  CHECK(r.witness_k == k);
}

TEST_CASE("Bombieri: trivial, constructed and heat-run inputs") {
  const Cylinder q{1.0, {0.0, 0.0}, 1.0, 1.0, 1};
  const Grid g = make_grid(q, 32, 32);
  const std::vector<std::pair<double, double>> pairs{{0.5, 0.75}, {0.5, 1.0}, {0.75, 1.0}};
  const Field one = constant(g, 1.0);
  BombieriInput in;
  in.u = &one;
  in.q1 = q;
  auto r = bombieri_check(in, pairs);
  CHECK(r.hypotheses_hold);
  CHECK(r.C2 == 0.0);
  CHECK(r.conclusion_holds);

  const Field e = sample_field(g, BoundaryKind::dirichlet, [](double t, const SpacePoint& x) {
    return std::exp(0.3 * std::sin(2.0 * x[0] + 1.0) * (1.0 + t));
  });
  in.u = &e;
  r = bombieri_check(in, pairs);
  CHECK(r.hypotheses_hold);
  CHECK(r.C1 > 0.0);
  for (const auto& p : r.pairs) CHECK(p.margin > 0.0);

  const Field u = heat_field(64);
  const auto l = median_level(u, harnack_cylinders(q).lower);
  const Field inv = u.map([l](double v) { return l / v; });
  in.u = &inv;
  r = bombieri_check(in, pairs);
  CHECK(r.hypotheses_hold);
  CHECK(r.conclusion_holds);

  Field neg = one;
  neg.at(3, 3) = -1.0;
  in.u = &neg;
  CHECK_FALSE(bombieri_check(in, pairs).hypotheses_hold);
}

TEST_CASE("iteration lemma") {
  CHECK(iteration_constant(0.0, 2.0) == 1.0);
  for (double a : {0.1, 0.5, 0.9})
    for (double b : {0.5, 1.0, 3.0}) CHECK(iteration_constant(a, b) <= iteration_constant_midpoint(a, b));

  std::vector<double> s;
  for (int j = 0; j < 30; ++j) s.push_back(j / 30.0);
  // f(s) = A / (1 - s)^beta on [0, 29/30] satisfies the hypothesis for any alpha.
  std::vector<double> f;
  for (double x : s) f.push_back(2.0 / std::pow(1.0 - x, 1.5));
  auto r = iteration_check(s, f, 0.0, 2.0, 1.5);
  CHECK(r.applicable);
  CHECK(r.conclusion_holds);
  CHECK(r.worst_margin >= 0.0);

  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 20; ++i) {
    const double alpha = 0.9 * u(rng), beta = 0.5 + 2.0 * u(rng);
    const auto g = back_propagated_sample(s, alpha, 1.0, beta, rng());
    const auto c = iteration_check(s, g, alpha, 1.0, beta);
    CHECK(c.applicable);
    CHECK(c.conclusion_holds);
  }
  std::vector<double> big(s.size(), 1e6);
  CHECK_FALSE(iteration_check(s, big, 0.5, 1.0, 1.0).applicable);
  CHECK_THROWS_AS(iteration_constant(1.0, 1.0), PreconditionError);
}

TEST_CASE("Mamedov inequality") {
  const Cylinder q{1.0, {0.0, 0.0}, 1.0, 1.0, 1};
  const Grid g = make_grid(q, 32, 32);
  const auto z = mamedov_check(constant(g, -1.0), q, 0.75);
  CHECK(z.lhs == 0.0);
  CHECK(z.top_term == 0.0);
  CHECK(z.pass);

  const auto c = mamedov_check(constant(g, 2.0), q, 0.75);
  const Cylinder qs = scaled_cylinder(q, 0.75);
  CHECK(c.lhs == doctest::Approx(2.0 * qs.volume()).epsilon(1e-12));
  CHECK(c.top_term == doctest::Approx(q.T * 2.0 * qs.spatial_volume()).epsilon(1e-12));
  CHECK(c.pass);

  for (std::uint64_t seed = 1; seed <= 30; ++seed)
    CHECK(mamedov_check(random_mamedov_field(g, seed), q, 0.6).pass);

  // A field decreasing in time and constant in space: only the left side is
  // nonzero, so the inequality fails.
  const Field dec = sample_field(g, BoundaryKind::dirichlet, [](double t, const SpacePoint&) { return 1.0 - t; });
  CHECK_FALSE(mamedov_check(dec, q, 0.75).pass);
}

TEST_CASE("interpolation ratio: tent, homogeneity and dilation") {
  Box d;
  d.dims = 1;
  d.lo = {-1.0, 0.0, 0.0};
  d.hi = {1.0, 0.0, 0.0};
  const auto tent = sample_on_box(d, 64, [](const SpacePoint& x) { return 1.0 - std::abs(x[0]); });
  CHECK(interpolation_check(tent, 3.0, 2.0) == doctest::Approx(oracle::tent_interpolation_ratio(3.0, 2.0)).epsilon(1e-6));
  CHECK(oracle::tent_interpolation_ratio(3.0, 2.0) == doctest::Approx(std::cbrt(3.0 / 8.0)).epsilon(1e-14));

  auto f = random_compact_sample(d, 200, 5);
  const double r0 = interpolation_check(f, 2.0, 2.0);
  auto g = f;
  for (double& v : g.values) v *= 7.5;
  CHECK(std::abs(interpolation_check(g, 2.0, 2.0) / r0 - 1.0) <= 1e-12);

  Box big = d;
  big.lo[0] = -3.0;
  big.hi[0] = 3.0;
  CHECK(std::abs(interpolation_check(random_compact_sample(big, 200, 5), 2.0, 2.0) / r0 - 1.0) <= 1e-6);

  Box sq;
  sq.dims = 2;
  sq.lo = {-1.0, -1.0, 0.0};
  sq.hi = {1.0, 1.0, 0.0};
  Box sq2 = sq;
  sq2.lo = {-0.25, -0.25, 0.0};
  sq2.hi = {0.25, 0.25, 0.0};
  const double a = interpolation_check(random_compact_sample(sq, 32, 8), 2.0, 2.0);
  const double b = interpolation_check(random_compact_sample(sq2, 32, 8), 2.0, 2.0);
  CHECK(std::abs(a / b - 1.0) <= 1e-6);
  CHECK_THROWS_AS(interpolation_check(f, 3.5, 2.0), PreconditionError);
  CHECK_THROWS_AS(interpolation_check(f, 0.5, 2.0), PreconditionError);
}

TEST_CASE("Steklov averages") {
  const Cylinder q{1.0, {0.0, 0.0}, 1.0, 1.0, 1};
  const Grid g = make_grid(q, 8, 64);
  const Field c = sample_field(g, BoundaryKind::dirichlet, [](double, const SpacePoint& x) { return x[0] * x[0]; });
  const Field ch = steklov_average(c, 0.25);
  CHECK(ch.grid().steps == 48);
  for (int m = 0; m <= 48; ++m)
    for (std::size_t k = 0; k < g.space_nodes(); ++k) CHECK(ch.at(m, k) == doctest::Approx(c.at(m, k)).epsilon(1e-14));

  const Field lin = sample_field(g, BoundaryKind::dirichlet, [](double t, const SpacePoint&) { return t; });
  const double h = 0.1;
  const Field lh = steklov_average(lin, h);
  for (int m = 0; m <= lh.grid().steps; ++m) CHECK(lh.at(m, 3) == doctest::Approx(g.time(m) + h / 2).epsilon(1e-13));
  const auto e = steklov_errors(lin, lh, 2.0);
  CHECK(e.sup_lp == doctest::Approx(h / 2 * std::sqrt(2.0)).epsilon(1e-12));
  CHECK(e.gradient_lp <= 1e-12);
  CHECK_THROWS_AS(steklov_average(lin, 1.0), PreconditionError);
}
