#include <cmath>

#include "doctest.h"
#include "generators.hpp"
#include "hlab/exponents.hpp"
#include "hlab/flux.hpp"
#include "hlab/quadrature.hpp"
#include "hlab/weight.hpp"
#include "oracles.hpp"

using namespace hlab;

TEST_CASE("exponent closed forms agree on random admissible sets") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 1000; ++i) {
    const auto raw = gen::admissible(rng);
    const auto e = make_exponents(raw.p, raw.n, raw.alpha, raw.r);
    CHECK(e.L > 1.0);
    CHECK(std::abs(moser_excess_from_sum(e) - moser_excess_closed(e)) <= 1e-12);
    CHECK(std::abs(moser_excess_closed(e) - oracle::moser_excess(raw.p, raw.n, raw.alpha, raw.r)) <= 1e-12);
  }
}

TEST_CASE("reference exponents give L = 9/8") {
  const auto e = make_exponents(2, 1, 4, 2);
  CHECK(e.L == doctest::Approx(1.125).epsilon(1e-15));
  CHECK(e.p_prime == doctest::Approx(2.0));
}

TEST_CASE("each admissibility inequality is reported") {
  CHECK(admissible_exponents(1.0, 1, 4, 2).violation == ExponentViolation::p_not_above_one);
  CHECK(admissible_exponents(2, 0, 4, 2).violation == ExponentViolation::n_not_positive);
  CHECK(admissible_exponents(2, 1, 1.5, 2).violation == ExponentViolation::alpha_too_small);
  CHECK(admissible_exponents(2, 1, 4, 0.5).violation == ExponentViolation::r_too_small);
  // alpha, r individually fine but the balance fails: 3/(2*2) + 1/(2*1) >= 1.
  CHECK(admissible_exponents(2, 1, 2, 1).violation == ExponentViolation::balance);
  CHECK_THROWS_AS(make_exponents(2, 1, 2, 1), PreconditionError);
}

TEST_CASE("catalog weights evaluate and have positive duals") {
  const auto ex = make_exponents(2, 1, 4, 2);
  const SpacePoint x{0.3, 0.0};
  for (const auto& label : catalog_labels()) {
    const Weight w = make_weight({label, {}}, ex);
    const double om = w.omega(0.7, x);
    CHECK(om >= 0.0);
    if (om > 0.0) CHECK(w.sigma(0.7, x) == doctest::Approx(std::pow(om, -ex.sigma_power())));
  }
  const Weight r = make_weight({"radial_spacetime", {}}, ex);
  CHECK(r.omega(0.4, {0.3, 0.0}) == doctest::Approx(0.5));
  const Weight px = make_weight({"power_x", {{"gamma", 2.0}}}, ex);
  CHECK(px.omega(5.0, {-0.5, 0.0}) == doctest::Approx(0.25));
  CHECK_THROWS_AS(make_weight({"no_such_weight", {}}, ex), PreconditionError);
}

TEST_CASE("user weights register and unregister") {
  const auto ex = make_exponents(2, 1, 4, 2);
  register_user_weight("twice", [](double, const SpacePoint&, const std::map<std::string, double>& p) {
    return 2.0 * (p.count("k") ? p.at("k") : 1.0);
  });
  CHECK(make_weight({"twice", {{"k", 3.0}}}, ex).omega(0, {}) == doctest::Approx(6.0));
  unregister_user_weight("twice");
  CHECK_THROWS(make_weight({"twice", {}}, ex));
}

TEST_CASE("quadrature integrates polynomials and flags divergence") {
  Box b;
  b.dims = 2;
  b.lo = {0.0, -1.0, 0.0};
  b.hi = {1.0, 1.0, 0.0};
  QuadratureSpec spec;
  spec.rule = QuadratureRule::gauss;
  const auto r = integrate_box([](const std::array<double, 3>& z) { return z[0] * z[0] * z[1] * z[1]; }, b, spec);
  CHECK(r.converged);
  CHECK(r.value == doctest::Approx(2.0 / 9.0).epsilon(1e-12));

  // 1/|x| on [-1, 1] x [0, 1] diverges logarithmically.
  Box c;
  c.dims = 2;
  c.lo = {0.0, -1.0, 0.0};
  c.hi = {1.0, 1.0, 0.0};
  QuadratureSpec fine;
  fine.levels = 10;
  const auto d = integrate_box([](const std::array<double, 3>& z) { return 1.0 / std::abs(z[1]); }, c, fine,
                               [](const std::array<double, 3>& z) { return std::abs(z[1]); });
  CHECK_FALSE(d.converged);

  QuadratureSpec bad;
  bad.levels = 0;
  CHECK_THROWS_AS(bad.validate(), PreconditionError);
}

TEST_CASE("model flux meets its growth constants") {
  const auto ex = make_exponents(3, 2, 6, 3);
  const Weight w = make_weight({"product", {}}, ex);
  const auto audit = audit_growth(model_flux(w), w, 2000, 5);
  CHECK(audit.pass);
  CHECK(audit.c1 == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(audit.c2 == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("a flux below its declared coercivity is caught with a witness") {
  const auto ex = make_exponents(2, 1, 4, 2);
  const Weight w = make_weight({"unit", {}}, ex);
  Flux f = model_flux(w);
  auto inner = f.A;
  f.A = [inner](double t, const SpacePoint& x, double xi, const Vec& eta) {
    Vec a = inner(t, x, xi, eta);
    for (double& c : a) c *= 0.5;
    return a;
  };
  f.linearize = {};
  const auto audit = audit_growth(f, w, 200, 3);
  CHECK_FALSE(audit.pass);
  REQUIRE(audit.witness.has_value());
  CHECK(audit.witness->condition == "coercivity");
}
