#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "hlab/harness.hpp"
#include "hlab/muckenhoupt.hpp"

namespace hlab {

// --- weight survey ------------------------------------------------------------

std::vector<ExperimentConfig> default_survey_configs(const ExperimentConfig& base) {
  std::vector<ExperimentConfig> out;
  for (const char* label : {"unit", "power_x", "radial_spacetime", "power_t", "product"}) {
    ExperimentConfig c = base;
    c.weight = WeightSpec{label, {}};
    out.push_back(c);
  }
  return out;
}

std::string run_weight_survey(const std::vector<ExperimentConfig>& cfgs, int radii) {
  if (radii < 1) throw PreconditionError("run_weight_survey needs at least one radius");
  std::ostringstream s;
  s << "weight,t0,x0,p,n,alpha,r,admissible,muckenhoupt,R,T,T_over_Rp,residual,iterations,status\n";
  auto num = [](double v) { return Json(v).dump(); };
  for (const auto& cfg : cfgs) {
    const auto chk = admissible_exponents(cfg.p, cfg.n, cfg.alpha, cfg.r);
    std::ostringstream head;
    head << cfg.weight.label << ',' << num(cfg.t0) << ',' << num(cfg.x0[0]) << ',' << num(cfg.p) << ','
         << cfg.n << ',' << num(cfg.alpha) << ',' << num(cfg.r) << ',';
    if (!chk.accepted()) {
      // Reported, not fatal: the row carries the violated condition.
      for (int i = 1; i <= radii; ++i)
        s << head.str() << "false,," << num(cfg.R * i / radii) << ",,,,," << to_string(chk.violation) << '\n';
      continue;
    }
    const Weight w = hlab::make_weight(cfg.weight, *chk.exponents);
    const auto spec = cfg.quadrature();
    std::vector<HeightSolve> hs;
    std::vector<Cylinder> family;
    for (int i = 1; i <= radii; ++i) {
      const double R = cfg.R * i / radii;
      hs.push_back(intrinsic_height(w, cfg.t0, cfg.x0, R, cfg.C, spec));
      family.push_back(Cylinder{cfg.t0, cfg.x0, R, hs.back().T, cfg.n});
    }
    const auto mk = muckenhoupt_constant(w, family, spec);
    const std::string mconst = mk.samples > mk.inadmissible ? num(mk.constant) : std::string("inf");
    for (int i = 0; i < radii; ++i) {
      const auto& h = hs[i];
      const double R = family[i].R;
      s << head.str() << "true," << mconst << ',' << num(R) << ',' << num(h.T) << ','
        << num(h.T / std::pow(R, cfg.p)) << ',' << num(h.residual) << ',' << h.iterations << ','
        << to_string(h.status) << '\n';
    }
  }
  return s.str();
}

// --- Bombieri reference family -------------------------------------------------

const std::vector<std::pair<double, double>>& bombieri_pairs() {
  static const std::vector<std::pair<double, double>> pairs{
      {0.5, 0.625}, {0.5, 0.75}, {0.5, 1.0}, {0.625, 0.875}, {0.75, 1.0}, {0.875, 1.0}};
  return pairs;
}

BombieriReference bombieri_reference_family(int cells) {
  BombieriReference ref;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    ExperimentConfig cfg;
    cfg.seed = seed;
    cfg.cells = cells;
    cfg.steps = 2 * cells;
    const auto run = run_experiment(cfg);
    if (!run.solution.ok) throw NumericalError("Bombieri reference run failed: " + run.solution.failure);
    ref.q = run.q;
    const Field& u = run.solution.field;
    const double l = median_level(u, harnack_cylinders(run.q).lower);
    ref.inverse.push_back(u.map([l](double v) { return l / v; }));
  }
  return ref;
}

// --- lemma suites ---------------------------------------------------------------

namespace {

Verdict mamedov_suite(std::uint64_t seed, int refine) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  int violations = 0, fields = 200;
  double worst = std::numeric_limits<double>::infinity();
  for (int i = 0; i < fields; ++i) {
    Grid g;
    const int n = i % 4 == 3 ? 2 : 1;
    g.cylinder = Cylinder{1.0, {0.0, 0.0}, 0.5 + u01(rng), 0.5 + u01(rng), n};
    g.cells = (n == 2 ? 16 : 48) << refine;
    g.steps = 32 << refine;
    const Field v = random_mamedov_field(g, rng());
    const double s = 0.55 + 0.4 * u01(rng);
    const auto r = mamedov_check(v, g.cylinder, s);
    const double rhs = r.gradient_term + r.top_term + r.slack;
    if (!r.pass) ++violations;
    if (r.lhs > 0.0) worst = std::min(worst, (rhs - r.lhs) / r.lhs);
  }
  return Verdict{"mamedov", {{"fields", fields}, {"violations", violations}}, double(violations), worst,
                 Json::object(), violations == 0};
}

Verdict iteration_suite(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  int held = 0, applicable = 0;
  const int samples = 100;
  double worst = std::numeric_limits<double>::infinity();
  for (int i = 0; i < samples; ++i) {
    const double alpha = 0.95 * u01(rng);
    const double beta = 0.5 + 2.5 * u01(rng);
    const double A = 0.1 + 10.0 * u01(rng);
    std::vector<double> s;
    for (int j = 0; j <= 40; ++j) s.push_back(j / 40.0);
    const auto f = back_propagated_sample(s, alpha, A, beta, rng());
    const auto r = iteration_check(s, f, alpha, A, beta);
    applicable += r.applicable;
    held += r.applicable && r.conclusion_holds;
    worst = std::min(worst, r.worst_margin);
  }
  return Verdict{"iteration",
                 {{"samples", samples}, {"applicable", applicable}, {"conclusion_holds", held}},
                 double(held), worst, Json::object(), held == samples};
}

Verdict bombieri_suite(std::uint64_t seed) {
  const auto ref = bombieri_reference_family();
  int runs = 0, held = 0;
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& inv : ref.inverse) {
    BombieriInput bi;
    bi.u = &inv;
    bi.q1 = ref.q;
    const auto r = bombieri_check(bi, bombieri_pairs());
    ++runs;
    held += r.hypotheses_hold && r.conclusion_holds;
    for (const auto& p : r.pairs) worst = std::min(worst, p.margin);
  }
  // Constructed positive fields exp(g) with g bounded and seeded.
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  int built = 0, built_held = 0;
  for (int i = 0; i < 5; ++i) {
    Grid g;
    g.cylinder = ref.q;
    g.cells = 48;
    g.steps = 48;
    const double a = 0.5 * u01(rng), kx = 1.0 + 2.0 * u01(rng), ph = 6.0 * u01(rng);
    const Field u = sample_field(g, BoundaryKind::dirichlet, [&](double t, const SpacePoint& x) {
      return std::exp(a * std::sin(kx * x[0] + ph) * (1.0 + 0.5 * t));
    });
    BombieriInput bi;
    bi.u = &u;
    bi.q1 = g.cylinder;
    const auto r = bombieri_check(bi, bombieri_pairs());
    ++built;
    built_held += r.hypotheses_hold && r.conclusion_holds;
  }
  return Verdict{"bombieri",
                 {{"calibrated_runs", runs},
                  {"calibrated_held", held},
                  {"constructed", built},
                  {"constructed_held", built_held},
                  {"C_theta", kBombieriCTheta}},
                 kBombieriCTheta, worst, Json::object(), held == runs};
}

Verdict interpolation_suite(std::uint64_t seed) {
  const double p = 2.0;
  Json per = Json::array();
  double drift = 0.0;
  for (int n : {1, 2}) {
    const double q = (n + p) / n;
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (double a : {0.5, 1.0, 4.0}) {
      Box d;
      d.dims = n;
      for (int k = 0; k < n; ++k) {
        d.lo[k] = -a;
        d.hi[k] = a;
      }
      double mx = 0.0;
      for (int i = 0; i < 100; ++i) {
        const auto f = random_compact_sample(d, n == 2 ? 48 : 256, seed * 1000 + i);
        mx = std::max(mx, interpolation_check(f, q, p));
      }
      per.push_back({{"n", n}, {"half_side", a}, {"max_ratio", mx}});
      lo = std::min(lo, mx);
      hi = std::max(hi, mx);
    }
    drift = std::max(drift, hi / lo - 1.0);
  }
  return Verdict{"interpolation", {{"sizes", per}, {"samples_per_size", 100}}, drift, 0.10 - drift,
                 Json::object(), drift <= 0.10};
}

Verdict steklov_suite(int refine) {
  ExperimentConfig cfg;
  cfg.cells = 64 << refine;
  cfg.steps = 256 << refine;
  const auto run = run_experiment(cfg);
  const Field& v = run.solution.field;
  const Weight w = cfg.make_weight();
  Json rows = Json::array();
  bool monotone = run.solution.ok;
  double prev_sup = std::numeric_limits<double>::infinity(), prev_grad = prev_sup;
  for (int div : {8, 16, 32}) {
    const double h = run.q.T / div;
    const auto e = steklov_errors(v, steklov_average(v, h), cfg.p, &w);
    rows.push_back({{"h", h}, {"sup_lp", e.sup_lp}, {"gradient_lp", e.gradient_lp}});
    monotone = monotone && e.sup_lp < prev_sup && e.gradient_lp < prev_grad;
    prev_sup = e.sup_lp;
    prev_grad = e.gradient_lp;
  }
  return Verdict{"steklov", {{"errors", rows}}, prev_sup, 0.0, resolution_of(run.grid), monotone};
}

}  // namespace

std::vector<Verdict> run_lemma_suite(std::uint64_t seed, int refine) {
  return {mamedov_suite(seed, refine), iteration_suite(seed), bombieri_suite(seed),
          interpolation_suite(seed), steklov_suite(refine)};
}

}  // namespace hlab
