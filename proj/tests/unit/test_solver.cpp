#include <cmath>
#include <filesystem>
#include <random>

#include "doctest.h"
#include "hlab/solver.hpp"
#include "oracles.hpp"

using namespace hlab;

namespace {

struct Setup {
  Exponents ex;
  Weight w;
  Flux f;
  explicit Setup(double p, const std::string& label = "unit", int n = 1)
      : ex(make_exponents(p, n, n == 1 ? 4.0 : 8.0, n == 1 ? 2.0 : 4.0)),
        w(make_weight({label, {}}, ex)),
        f(model_flux(w)) {}
};

Grid make_grid(const Cylinder& q, int cells, int steps) {
  Grid g;
  g.cylinder = q;
  g.cells = cells;
  g.steps = steps;
  return g;
}

double max_error(const Field& u, const SpaceTimeFn& exact) {
  const Grid& g = u.grid();
  double e = 0.0;
  for (int m = 0; m <= g.steps; ++m)
    for (std::size_t k = 0; k < g.space_nodes(); ++k)
      e = std::max(e, std::abs(u.at(m, k) - exact(g.time(m), g.point(k))));
  return e;
}

}  // namespace

TEST_CASE("heat run converges in space") {
  Setup s(2.0);
  const SpaceTimeFn exact = [](double t, const SpacePoint& x) { return oracle::heat_kernel(t, x[0]); };
  const Cylinder q{0.2, {0.0, 0.0}, 1.0, 0.2, 1};
  double e[2];
  int i = 0;
  for (int N : {16, 32}) {
    const auto r = solve(make_grid(q, N, 4096), BoundaryKind::dirichlet, exact, exact, s.f, s.w);
    REQUIRE(r.ok);
    e[i++] = max_error(r.field, exact);
  }
  CHECK(std::log2(e[0] / e[1]) >= 1.8);
}

TEST_CASE("p-eigenvalue matches the closed form") {
  for (double p : {1.5, 2.0, 3.0, 4.0}) {
    const auto ep = p_eigenpair_1d(p, 0.0, 1.0, 1e-12, 8192);
    CHECK(ep.mu == doctest::Approx(oracle::p_eigenvalue(p, 1.0)).epsilon(1e-7));
    CHECK(ep.lambda == doctest::Approx(ep.mu / (p - 1.0)));
    CHECK(ep(0.5) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(std::abs(ep(0.0)) <= 1e-12);
  }
  CHECK(p_eigenpair_1d(2.0, 0.0, 2.0).mu == doctest::Approx(M_PI * M_PI / 4.0).epsilon(1e-7));
}

TEST_CASE("p = 3 separable solution") {
  Setup s(3.0);
  const auto ep = p_eigenpair_1d(3.0, 0.0, 1.0, 1e-12, 8192);
  const Cylinder q{0.05, {0.5, 0.0}, 0.5, 0.05, 1};
  const SpaceTimeFn exact = [&](double t, const SpacePoint& x) { return std::exp(-ep.lambda * t) * ep(x[0]); };
  const Grid g = make_grid(q, 64, 256);
  const auto r = solve(g, BoundaryKind::dirichlet, exact, exact, s.f, s.w);
  REQUIRE(r.ok);
  CHECK(max_error(r.field, exact) <= 5.0 * (g.h() + g.dt()));
}

TEST_CASE("homogeneity, constants, comparison and mass") {
  Setup s(3.0, "radial_spacetime");
  const Cylinder q{1.0, {0.0, 0.0}, 1.0, 0.5, 1};
  const Grid g = make_grid(q, 48, 48);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::vector<double> u0(g.space_nodes());
  for (std::size_t k = 0; k < u0.size(); ++k) {
    const double x = g.point(k)[0];
    u0[k] = 1.0 + 0.5 * std::sin(3.0 * x) + 0.1 * u01(rng);
  }
  const SpaceTimeFn bc = [](double, const SpacePoint& x) { return 1.0 + 0.5 * std::sin(3.0 * x[0]); };

  SUBCASE("homogeneity") {
    const double lambda = 3.7;
    std::vector<double> v0 = u0;
    for (double& v : v0) v *= lambda;
    const SpaceTimeFn bcl = [&](double t, const SpacePoint& x) { return lambda * bc(t, x); };
    const auto a = solve(g, BoundaryKind::dirichlet, u0, bc, s.f, s.w);
    const auto b = solve(g, BoundaryKind::dirichlet, v0, bcl, s.f, s.w);
    REQUIRE(a.ok);
    REQUIRE(b.ok);
    double e = 0.0;
    for (std::size_t i = 0; i < a.field.values().size(); ++i)
      e = std::max(e, std::abs(lambda * a.field.values()[i] - b.field.values()[i]) / (lambda * a.field.max()));
    CHECK(e <= 1e-8);
  }
  SUBCASE("constant fixed point") {
    const std::vector<double> c(g.space_nodes(), 2.5);
    const auto r = solve(g, BoundaryKind::neumann, c, {}, s.f, s.w);
    REQUIRE(r.ok);
    for (double v : r.field.values()) CHECK(std::abs(v - 2.5) <= 1e-13);
  }
  SUBCASE("comparison") {
    std::vector<double> v0 = u0;
    for (double& v : v0) v += 0.2 * u01(rng);
    const SpaceTimeFn bcv = [&](double t, const SpacePoint& x) { return bc(t, x) + 0.1; };
    const auto a = solve(g, BoundaryKind::dirichlet, u0, bc, s.f, s.w);
    const auto b = solve(g, BoundaryKind::dirichlet, v0, bcv, s.f, s.w);
    int violations = 0;
    for (std::size_t i = 0; i < a.field.values().size(); ++i)
      violations += a.field.values()[i] > b.field.values()[i] + 1e-12;
    CHECK(violations == 0);
  }
  SUBCASE("periodic mass") {
    const auto r = solve(g, BoundaryKind::periodic, u0, {}, s.f, s.w);
    REQUIRE(r.ok);
    const double m0 = discrete_mass(g, BoundaryKind::periodic, r.field.slice(0), 3.0);
    for (int m = 1; m <= g.steps; ++m)
      CHECK(std::abs(discrete_mass(g, BoundaryKind::periodic, r.field.slice(m), 3.0) - m0) <= 1e-10 * m0);
  }
}

TEST_CASE("two-dimensional run keeps constants and homogeneity") {
  Setup s(2.5, "product", 2);
  const Cylinder q{1.0, {0.0, 0.0}, 1.0, 0.25, 2};
  const Grid g = make_grid(q, 12, 8);
  const auto c = solve(g, BoundaryKind::neumann, std::vector<double>(g.space_nodes(), 1.5), {}, s.f, s.w);
  REQUIRE(c.ok);
  for (double v : c.field.values()) CHECK(std::abs(v - 1.5) <= 1e-13);
  const SpaceTimeFn init = [](double, const SpacePoint& x) { return 1.0 + x[0] * x[0] + 0.5 * x[1]; };
  const auto a = solve(g, BoundaryKind::dirichlet, init, init, s.f, s.w);
  const SpaceTimeFn init2 = [&](double t, const SpacePoint& x) { return 2.0 * init(t, x); };
  const auto b = solve(g, BoundaryKind::dirichlet, init2, init2, s.f, s.w);
  REQUIRE(a.ok);
  REQUIRE(b.ok);
  for (std::size_t i = 0; i < a.field.values().size(); ++i)
    CHECK(b.field.values()[i] == doctest::Approx(2.0 * a.field.values()[i]).epsilon(1e-8));
}

TEST_CASE("positivity mode keeps data positive") {
  Setup s(2.0);
  const Cylinder q{1.0, {0.0, 0.0}, 1.0, 1.0, 1};
  SolverOptions opt;
  opt.positivity = true;
  const SpaceTimeFn d = [](double, const SpacePoint& x) { return 0.01 + std::exp(-50.0 * x[0] * x[0]); };
  const auto r = solve(make_grid(q, 64, 64), BoundaryKind::dirichlet, d, d, s.f, s.w, opt);
  REQUIRE(r.ok);
  CHECK(r.field.min() > 0.0);
  for (const auto& rep : r.reports) CHECK(rep.positivity_preserved);
}

TEST_CASE("a failed step keeps the trajectory and fills NaN") {
  Setup s(2.0);
  const Cylinder q{1.0, {0.0, 0.0}, 1.0, 1.0, 1};
  SolverOptions opt;
  opt.max_newton = 0;
  const SpaceTimeFn d = [](double, const SpacePoint& x) { return 1.0 + x[0] * x[0]; };
  const auto r = solve(make_grid(q, 16, 8), BoundaryKind::dirichlet, d, d, s.f, s.w, opt);
  CHECK_FALSE(r.ok);
  CHECK(r.failed_step == 0);
  CHECK(std::isnan(r.field.at(1, 3)));
  CHECK(r.field.at(0, 3) == doctest::Approx(d(0.0, r.field.grid().point(3))));
}

TEST_CASE("weak residual: consistent, refining and sign-sensitive") {
  Setup s(2.0);
  const Cylinder q{0.2, {0.0, 0.0}, 1.0, 0.2, 1};
  const SpaceTimeFn exact = [](double t, const SpacePoint& x) { return oracle::heat_kernel(t, x[0]); };
  const auto tests = random_test_functions(q, 5, 9);
  double prev = 1e300;
  for (int N : {16, 32, 64}) {
    const auto r = solve(make_grid(q, N, N), BoundaryKind::dirichlet, exact, exact, s.f, s.w);
    REQUIRE(r.ok);
    double worst = 0.0;
    for (const auto& v : tests) worst = std::max(worst, std::abs(weak_residual(r.field, s.f, v, 2.0)));
    CHECK(worst < prev);
    prev = worst;
  }
  // u - kappa (t - t_bottom) is a strict sub-solution of the heat equation and
  // u + kappa (t - t_bottom) a strict super-solution: residual signs follow.
  const double kappa = 0.5;
  const Grid g = make_grid(q, 64, 64);
  const Field u = sample_field(g, BoundaryKind::dirichlet, exact);
  const Field sub = sample_field(g, BoundaryKind::dirichlet, [&](double t, const SpacePoint& x) {
    return exact(t, x) - kappa * (t - q.bottom());
  });
  const Field super = sample_field(g, BoundaryKind::dirichlet, [&](double t, const SpacePoint& x) {
    return exact(t, x) + kappa * (t - q.bottom());
  });
  for (const auto& v : tests) {
    const double r0 = std::abs(weak_residual(u, s.f, v, 2.0));
    CHECK(weak_residual(sub, s.f, v, 2.0) > 10.0 * r0);
    CHECK(weak_residual(super, s.f, v, 2.0) < -10.0 * r0);
  }

  const Field c = sample_field(make_grid(q, 16, 16), BoundaryKind::dirichlet,
                               [](double, const SpacePoint&) { return 3.0; });
  CHECK(std::abs(weak_residual(c, s.f, tests[0], 2.0)) <= 1e-12);

  TestFunction bad;
  bad.v = [](double, const SpacePoint&) { return 1.0; };
  bad.grad = [](double, const SpacePoint&) { return Vec{}; };
  CHECK_THROWS_AS(weak_residual(c, s.f, bad, 2.0), PreconditionError);
}

TEST_CASE("field files round trip") {
  Grid g = make_grid(Cylinder{1.0, {0.1, 0.0}, 0.5, 0.3, 1}, 8, 4);
  Field f = sample_field(g, BoundaryKind::neumann, [](double t, const SpacePoint& x) { return t + x[0]; });
  f.weight_label = "power_x";
  const auto dir = std::filesystem::temp_directory_path() / "hlab_field_test";
  std::filesystem::create_directories(dir);
  write_field(f, (dir / "f").string());
  const Field r = read_field((dir / "f").string());
  CHECK(r.values() == f.values());
  CHECK(r.boundary() == BoundaryKind::neumann);
  CHECK(r.weight_label == "power_x");
  CHECK(r.grid().cylinder.x0[0] == 0.1);
  std::filesystem::remove_all(dir);
}
