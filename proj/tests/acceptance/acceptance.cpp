// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "generators.hpp"
#include "hlab/harness.hpp"
#include "hlab/muckenhoupt.hpp"
#include "oracles.hpp"

using namespace hlab;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

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

Outcome exponent_algebra() {
  std::mt19937_64 rng(2024);
  double worst = 0.0;
  bool above = true;
  for (int i = 0; i < 1000; ++i) {
    const auto raw = gen::admissible(rng);
    const auto e = make_exponents(raw.p, raw.n, raw.alpha, raw.r);
    worst = std::max(worst, std::abs(moser_excess_from_sum(e) - moser_excess_closed(e)));
    above = above && e.L > 1.0;
  }
  return {worst <= 1e-12 && above, "max |diff| " + fmt("%.2e", worst) + ", all L > 1: " + (above ? "yes" : "no")};
}

Outcome intrinsic_height_check() {
  const auto ex = make_exponents(2, 1, 4, 2);
  const Weight unit = make_weight({"unit", {}}, ex);
  double worst_unit = 0.0, worst_res = 0.0;
  for (double R : {0.1, 0.3, 1.0, 2.5})
    for (double C : {0.5, 1.0, 4.0}) {
      const auto h = intrinsic_height(unit, 1.0, {0.2, 0.0}, R, C, {});
      worst_unit = std::max(worst_unit, std::abs(h.T - C * R * R) / (C * R * R));
      worst_res = std::max(worst_res, std::abs(h.residual));
    }
  double worst_forms = 0.0;
  for (const auto& label : catalog_labels()) {
    const Weight w = make_weight({label, {}}, ex);
    for (int i = 1; i <= 10; ++i) {
      const double R = 0.1 * i;
      const auto h = intrinsic_height(w, 1.5, {0.3, 0.0}, R, 1.0, {});
      const double s = intrinsic_height_supform(w, 1.5, {0.3, 0.0}, R, 1.0, {});
      worst_forms = std::max(worst_forms, std::abs(s - h.T) / h.T);
    }
  }
  return {worst_unit == 0.0 && worst_res <= 1e-10 && worst_forms <= 1e-8,
          "unit |T - CR^p|/T " + fmt("%.1e", worst_unit) + ", residual " + fmt("%.1e", worst_res) +
              ", root vs sup " + fmt("%.1e", worst_forms)};
}

Outcome muckenhoupt_check() {
  const auto ex = make_exponents(2, 1, 4, 2);
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.05, 2.0);
  std::vector<Cylinder> fam;
  for (int i = 0; i < 50; ++i) fam.push_back(Cylinder{u(rng), {u(rng) - 1.0, 0.0}, u(rng), u(rng), 1});
  const auto m1 = muckenhoupt_constant(make_weight({"unit", {}}, ex), fam, {});

  const Weight w = make_weight({"radial_spacetime", {}}, ex);
  QuadratureSpec coarse, fine;
  coarse.levels = 6;
  fine.levels = 7;
  std::vector<Cylinder> intrinsic;
  const std::vector<std::pair<double, double>> centers{{1.0, 0.0}, {1.5, 0.5}, {2.0, -0.5}, {0.5, 1.0}, {3.0, 0.0}};
  for (const auto& [t0, x0] : centers)
    for (int i = 1; i <= 10; ++i) {
      const double R = 0.1 * i;
      intrinsic.push_back(Cylinder{t0, {x0, 0.0}, R, intrinsic_height(w, t0, {x0, 0.0}, R, 1.0, coarse).T, 1});
    }
  const auto a = muckenhoupt_constant(w, intrinsic, coarse);
  const auto b = muckenhoupt_constant(w, intrinsic, fine);
  const double drift = std::abs(b.constant / a.constant - 1.0);
  const bool ok = std::abs(m1.constant - 1.0) <= 1e-6 && m1.inadmissible == 0 && std::isfinite(a.constant) &&
                  a.converged && b.converged && drift <= 0.05;
  return {ok, "unit " + fmt("%.12f", m1.constant) + "; radial " + fmt("%.6g", a.constant) + " -> " +
                  fmt("%.6g", b.constant) + " (drift " + fmt("%.2e", drift) + ", " +
                  std::to_string(a.inadmissible) + "/" + std::to_string(a.samples) +
                  " cylinders through the origin excluded)"};
}

Outcome solver_oracles() {
  const auto ex2 = make_exponents(2, 1, 4, 2);
  const Weight unit = make_weight({"unit", {}}, ex2);
  const Flux heat = model_flux(unit);
  const SpaceTimeFn exact = [](double t, const SpacePoint& x) { return oracle::heat_kernel(t, x[0]); };
  const Cylinder q{0.2, {0.0, 0.0}, 1.0, 0.2, 1};
  std::vector<double> es, et;
  for (int N : {16, 32, 64})
    es.push_back(max_error(solve(make_grid(q, N, 1 << 15), BoundaryKind::dirichlet, exact, exact, heat, unit).field, exact));
  for (int M : {8, 16, 32})
    et.push_back(max_error(solve(make_grid(q, 1024, M), BoundaryKind::dirichlet, exact, exact, heat, unit).field, exact));
  const double s1 = std::log2(es[0] / es[1]), s2 = std::log2(es[1] / es[2]);
  const double t1 = std::log2(et[0] / et[1]), t2 = std::log2(et[1] / et[2]);

  const auto ex3 = make_exponents(3, 1, 4, 2);
  const Weight w3 = make_weight({"unit", {}}, ex3);
  const auto ep = p_eigenpair_1d(3.0, 0.0, 1.0, 1e-12, 8192);
  const SpaceTimeFn sep = [&](double t, const SpacePoint& x) { return std::exp(-ep.lambda * t) * ep(x[0]); };
  const Grid g3 = make_grid(Cylinder{0.05, {0.5, 0.0}, 0.5, 0.05, 1}, 64, 256);
  const auto r3 = solve(g3, BoundaryKind::dirichlet, sep, sep, model_flux(w3), w3);
  const double e3 = max_error(r3.field, sep);
  const double bound = 5.0 * (g3.h() + g3.dt()) * r3.field.max();
  const bool ok = std::min(s1, s2) >= 1.9 && std::min(t1, t2) >= 0.9 && r3.ok && e3 <= bound &&
                  std::abs(ep.mu - oracle::p_eigenvalue(3.0, 1.0)) <= 1e-7 * ep.mu;
  return {ok, "space orders " + fmt("%.3f", s1) + "/" + fmt("%.3f", s2) + ", time orders " + fmt("%.3f", t1) +
                  "/" + fmt("%.3f", t2) + ", p=3 error " + fmt("%.2e", e3) + " <= " + fmt("%.2e", bound)};
}

Outcome structural_invariants() {
  double hom = 0.0, fixed = 0.0, mass = 0.0;
  int violations = 0;
  for (int n : {1, 2}) {
    const auto ex = n == 1 ? make_exponents(3, 1, 4, 2) : make_exponents(3, 2, 8, 4);
    const Weight w = make_weight({n == 1 ? "radial_spacetime" : "product", {{"ct", -0.5}}}, ex);
    const Flux f = model_flux(w);
    const Grid g = make_grid(Cylinder{1.0, {0.0, 0.0}, 1.0, 0.5, n}, n == 1 ? 64 : 16, n == 1 ? 64 : 16);
    std::mt19937_64 rng(5 + n);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::vector<double> u0(g.space_nodes()), v0(g.space_nodes());
    for (std::size_t k = 0; k < u0.size(); ++k) {
      const auto x = g.point(k);
      u0[k] = 1.0 + 0.5 * std::sin(3.0 * x[0] + x[1]) + 0.2 * u01(rng);
      v0[k] = u0[k] + 0.3 * u01(rng);
    }
    const SpaceTimeFn bc = [](double t, const SpacePoint& x) { return 1.0 + 0.5 * std::sin(3.0 * x[0] + x[1]) + t; };
    const SpaceTimeFn bcv = [&](double t, const SpacePoint& x) { return bc(t, x) + 0.05; };
    const double lambda = 2.75;
    std::vector<double> l0 = u0;
    for (double& v : l0) v *= lambda;
    const SpaceTimeFn bcl = [&](double t, const SpacePoint& x) { return lambda * bc(t, x); };

    const auto a = solve(g, BoundaryKind::dirichlet, u0, bc, f, w);
    const auto b = solve(g, BoundaryKind::dirichlet, l0, bcl, f, w);
    const auto c = solve(g, BoundaryKind::dirichlet, v0, bcv, f, w);
    if (!a.ok || !b.ok || !c.ok) return {false, "a structural run failed"};
    for (std::size_t i = 0; i < a.field.values().size(); ++i) {
      hom = std::max(hom, std::abs(lambda * a.field.values()[i] - b.field.values()[i]) / (lambda * a.field.max()));
      violations += a.field.values()[i] > c.field.values()[i] + 1e-12;
    }
    for (double cst : {0.3, 2.0}) {
      const auto r = solve(g, BoundaryKind::neumann, std::vector<double>(g.space_nodes(), cst), {}, f, w);
      for (double v : r.field.values()) fixed = std::max(fixed, std::abs(v - cst) / cst);
    }
    const auto pr = solve(g, BoundaryKind::periodic, u0, {}, f, w);
    if (!pr.ok) return {false, "periodic run failed"};
    const double m0 = discrete_mass(g, BoundaryKind::periodic, pr.field.slice(0), ex.p);
    for (int m = 1; m <= g.steps; ++m)
      mass = std::max(mass, std::abs(discrete_mass(g, BoundaryKind::periodic, pr.field.slice(m), ex.p) - m0) / m0);
  }
  return {hom <= 1e-8 && fixed <= 1e-13 && violations == 0 && mass <= 1e-10,
          "homogeneity " + fmt("%.1e", hom) + ", constants " + fmt("%.1e", fixed) + ", comparison violations " +
              std::to_string(violations) + ", mass drift " + fmt("%.1e", mass)};
}

Outcome weak_formulation() {
  const auto ex = make_exponents(2, 1, 4, 2);
  const Weight w = make_weight({"unit", {}}, ex);
  const Flux f = model_flux(w);
  const SpaceTimeFn exact = [](double t, const SpacePoint& x) { return oracle::heat_kernel(t, x[0]); };
  const Cylinder q{0.2, {0.0, 0.0}, 1.0, 0.2, 1};
  const auto tests = random_test_functions(q, 20, 31);
  const std::vector<int> Ns{16, 32, 64, 128};
  std::vector<std::vector<double>> res(tests.size());
  for (int N : Ns) {
    const auto r = solve(make_grid(q, N, N), BoundaryKind::dirichlet, exact, exact, f, w);
    if (!r.ok) return {false, "solve failed"};
    for (std::size_t i = 0; i < tests.size(); ++i) res[i].push_back(std::abs(weak_residual(r.field, f, tests[i], ex.p)));
  }
  // Observed order per test function: least-squares slope of log2|res| over the refinements.
  double worst = 1e300;
  bool decreasing = true;
  for (const auto& r : res) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t j = 0; j < r.size(); ++j) {
      const double x = j, y = std::log2(r[j]);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      if (j > 0 && r[j] >= r[j - 1]) decreasing = false;
    }
    const double k = r.size();
    worst = std::min(worst, -(k * sxy - sx * sy) / (k * sxx - sx * sx));
  }
  return {decreasing && worst >= 1.0, "20 test functions, min observed order " + fmt("%.3f", worst) +
                                          ", monotone decrease: " + (decreasing ? "yes" : "no")};
}

Outcome moser_check_criterion() {
  const auto ex = make_exponents(2, 1, 4, 2);
  const Weight w = make_weight({"unit", {}}, ex);
  const SpaceTimeFn d = [](double t, const SpacePoint& x) { return 0.2 + oracle::heat_kernel(t, x[0] - 0.3); };
  const Cylinder q{1.0, {0.0, 0.0}, 1.0, 1.0, 1};
  const std::vector<double> deltas{0.25, 0.5, 0.75};
  const std::vector<std::pair<double, double>> pairs{{0.5, 0.75}, {0.5, 1.0}, {0.75, 1.0}, {0.625, 0.875}};
  std::vector<MoserSummary> sums;
  double inv = 0.0;
  for (int N : {64, 128}) {
    const auto r = solve(make_grid(q, N, 2 * N), BoundaryKind::dirichlet, d, d, model_flux(w), w);
    if (!r.ok) return {false, "solve failed"};
    const auto a = moser_check(r.field, q, deltas, pairs, ex.L);
    const auto b = moser_check(r.field.scaled(13.7), q, deltas, pairs, ex.L);
    for (std::size_t i = 0; i < a.size(); ++i) inv = std::max(inv, std::abs(a[i].implied_C / b[i].implied_C - 1.0));
    sums.push_back(summarize(a));
  }
  double drift = 0.0;
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    drift = std::max(drift, std::abs(sums[1].max_implied_C[i] / sums[0].max_implied_C[i] - 1.0));
    drift = std::max(drift, std::abs(sums[1].max_constant[i] / sums[0].max_constant[i] - 1.0));
  }
  const double spread = std::max(sums[0].spread, sums[1].spread);
  return {sums[0].finite && sums[1].finite && spread <= 2.0 && drift <= 0.15 && inv <= 1e-12,
          "spread of C^delta across delta " + fmt("%.4f", spread) + ", refinement drift " + fmt("%.2e", drift) +
              ", scaling error " + fmt("%.1e", inv)};
}

Outcome harnack_criterion() {
  bool ok = true;
  double worst_rep = 0.0, max_ratio = 0.0, max_t1 = 0.0;
  for (const char* label : {"unit", "radial_spacetime"}) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      double ratio[2];
      for (int refine = 0; refine < 2; ++refine) {
        ExperimentConfig c = config_from_json(Json::object());
        c.weight = WeightSpec{label, {}};
        c.seed = seed;
        c.refine = refine;
        const auto rep = run_harnack_pipeline(c);
        const auto* h = rep.find("harnack");
        const auto* d = rep.find("doubling");
        ok = ok && h && d && h->pass && d->pass && std::isfinite(h->constant);
        ratio[refine] = h ? h->constant : NAN;
        max_ratio = std::max(max_ratio, ratio[refine]);
        if (d) max_t1 = std::max(max_t1, d->constant);
      }
      worst_rep = std::max(worst_rep, std::abs(ratio[1] / ratio[0] - 1.0));
    }
  }
  ok = ok && worst_rep <= 0.10;
  return {ok, "10 pipelines x 2 resolutions, max ratio " + fmt("%.4f", max_ratio) + ", repeatability " +
                  fmt("%.2e", worst_rep) + ", max T1/T " + fmt("%.4f", max_t1)};
}

Outcome lemma_suites() {
  const auto vs = run_lemma_suite(1);
  bool ok = true;
  std::string detail;
  for (const auto& v : vs) {
    ok = ok && v.pass;
    detail += v.check + (v.pass ? " ok" : " FAILED") + "; ";
  }
  return {ok, detail};
}

Outcome determinism() {
  namespace fs = std::filesystem;
  ExperimentConfig c = config_from_json(Json::object());
  c.weight = WeightSpec{"radial_spacetime", {}};
  c.seed = 99;
  const auto base = fs::temp_directory_path() / "hlab_acceptance_determinism";
  fs::remove_all(base);
  std::string bytes[2], csv[2];
  for (int i = 0; i < 2; ++i) {
    const auto rep = run_harnack_pipeline(c);
    const auto path = emit_report(rep, ReportFormat::json, (base / std::to_string(i)).string());
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    bytes[i] = s.str();
    csv[i] = render_report(rep, ReportFormat::csv);
  }
  Json l[2];
  for (int i = 0; i < 2; ++i)
    for (const auto& v : run_lemma_suite(7)) l[i].push_back(to_json(v));
  fs::remove_all(base);
  const bool ok = !bytes[0].empty() && bytes[0] == bytes[1] && csv[0] == csv[1] && l[0].dump() == l[1].dump();
  return {ok, "json report " + std::to_string(bytes[0].size()) + " bytes, identical: " +
                  (bytes[0] == bytes[1] ? "yes" : "no") + "; lemma suite identical: " +
                  (l[0].dump() == l[1].dump() ? "yes" : "no")};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"exponent algebra", exponent_algebra},
      {"intrinsic height", intrinsic_height_check},
      {"Muckenhoupt engine", muckenhoupt_check},
      {"solver oracles", solver_oracles},
      {"structural invariants", structural_invariants},
      {"weak formulation", weak_formulation},
      {"Moser inequality", moser_check_criterion},
      {"Harnack pipeline", harnack_criterion},
      {"lemma suites", lemma_suites},
      {"determinism", determinism}};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !o.pass;
    std::printf("criterion %2zu %s  %-22s %s [%.1f s]\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first.c_str(),
                o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
