#include "hlab/harness.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "hlab/muckenhoupt.hpp"

namespace hlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

class Stopwatch {
 public:
  explicit Stopwatch(std::vector<std::pair<std::string, double>>& sink) : sink_(sink) {}
  void lap(const std::string& name) {
    const auto now = std::chrono::steady_clock::now();
    sink_.emplace_back(name, std::chrono::duration<double>(now - last_).count());
    last_ = now;
  }

 private:
  std::vector<std::pair<std::string, double>>& sink_;
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

Json cylinder_json(const Cylinder& q) {
  Json x0 = Json::array();
  for (int a = 0; a < q.n; ++a) x0.push_back(q.x0[a]);
  return Json{{"t0", q.t0}, {"x0", x0}, {"R", q.R}, {"T", q.T}};
}

Json height_json(const HeightSolve& h) {
  return Json{{"T", h.T},
              {"residual", h.residual},
              {"iterations", h.iterations},
              {"C", h.C},
              {"raw_constant", h.raw_constant},
              {"status", to_string(h.status)},
              {"monotone", h.monotone}};
}

Json pairs_json(const std::vector<std::pair<double, double>>& pairs) {
  Json a = Json::array();
  for (const auto& [s, t] : pairs) a.push_back({s, t});
  return a;
}

Json moser_json(const MoserSummary& s) {
  return Json{{"deltas", s.deltas},
              {"max_constant", s.max_constant},
              {"max_implied_C", s.max_implied_C},
              {"spread", s.spread},
              {"finite", s.finite}};
}

// Ties go to the earliest time, then to the lexicographically smallest
// (x index, y index).
struct Argmax {
  double value = -kInf;
  int m = -1;
  std::size_t k = 0;
};

Argmax locate_max(const Field& u, const Cylinder& c) {
  const Grid& g = u.grid();
  Argmax best;
  for (const auto& nd : cylinder_nodes(g, c, true)) {
    const double v = u.at(nd.m, nd.k);
    bool take = v > best.value;
    if (!take && v == best.value) {
      const auto a = g.axis_index(nd.k), b = g.axis_index(best.k);
      take = nd.m < best.m || (nd.m == best.m && (a[0] < b[0] || (a[0] == b[0] && a[1] < b[1])));
    }
    if (take) best = {v, nd.m, nd.k};
  }
  if (best.m < 0) throw PreconditionError("lower Harnack cylinder holds no interior node");
  return best;
}

const std::vector<double> kMoserDeltas{0.25, 0.5, 0.75};
const std::vector<std::pair<double, double>> kMoserPairs{{0.5, 0.75}, {0.5, 1.0}, {0.75, 1.0}, {0.625, 0.875}};
const std::vector<std::pair<double, double>> kTildePairs{{0.125, 0.1875}, {0.125, 0.25}, {0.1875, 0.25}};
const std::vector<double> kDelta1Grid{0.25, 0.5, 0.75, 1.0, 1.5, 2.0};

}  // namespace

bool RunReport::all_pass() const {
  for (const auto& v : verdicts)
    if (!v.pass) return false;
  return true;
}

const Verdict* RunReport::find(const std::string& check) const {
  for (const auto& v : verdicts)
    if (v.check == check) return &v;
  return nullptr;
}

ExperimentRun run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const Weight w = cfg.make_weight();
  const Flux flux = cfg.make_flux(w);
  ExperimentRun run;
  run.height = intrinsic_height(w, cfg.t0, cfg.x0, cfg.R, cfg.C, cfg.quadrature());
  run.q = Cylinder{cfg.t0, cfg.x0, cfg.R, run.height.T, cfg.n};
  run.grid.cylinder = run.q;
  run.grid.cells = cfg.refined_cells();
  run.grid.steps = cfg.refined_steps();
  const auto data = experiment_data(cfg, run.q);
  SolverOptions opt;
  opt.positivity = true;
  run.solution = solve(run.grid, cfg.boundary, data, data, flux, w, opt);
  run.solution.field.weight_label = w.label();
  run.solution.field.flux_label = flux.label;
  return run;
}

RunReport run_harnack_pipeline(const ExperimentConfig& cfg) {
  RunReport rep;
  rep.config = to_json(cfg);
  Stopwatch clock(rep.timings);
  const Weight w = cfg.make_weight();
  const auto& ex = w.exponents();
  const auto spec = cfg.quadrature();
  std::vector<Verdict> all;
  auto verdict = [&](const std::string& name, Json params, double constant, double margin, bool pass,
                     Json resolution = Json::object()) {
    all.push_back(Verdict{name, std::move(params), constant, margin, std::move(resolution), pass});
  };

  // Intrinsic height and the solve on Q_T.
  const ExperimentRun run = run_experiment(cfg);
  const Cylinder& q = run.q;
  const Grid& g = run.grid;
  const Json res = resolution_of(g);
  rep.height = height_json(run.height);
  verdict("height", {{"cylinder", cylinder_json(q)}, {"status", to_string(run.height.status)}},
          run.height.T, 1e-10 - std::abs(run.height.residual),
          run.height.status == HeightStatus::ok && std::abs(run.height.residual) <= 1e-10);
  clock.lap("height+solve");

  // Muckenhoupt product over intrinsic cylinders at four radii.
  std::vector<Cylinder> family;
  for (double f : {0.25, 0.5, 0.75, 1.0}) {
    const auto h = intrinsic_height(w, cfg.t0, cfg.x0, f * cfg.R, cfg.C, spec);
    family.push_back(Cylinder{cfg.t0, cfg.x0, f * cfg.R, h.T, cfg.n});
  }
  const auto mk = muckenhoupt_constant(w, family, spec);
  rep.muckenhoupt = {{"constant", mk.constant},
                     {"samples", mk.samples},
                     {"inadmissible", mk.inadmissible},
                     {"converged", mk.converged},
                     {"worst_cylinder", cylinder_json(mk.worst_cylinder)}};
  verdict("muckenhoupt", {{"radii", {0.25, 0.5, 0.75, 1.0}}}, mk.constant, 0.0,
          mk.converged && std::isfinite(mk.constant) && mk.inadmissible == 0);
  clock.lap("muckenhoupt");

  const auto& sol = run.solution;
  bool positive = true;
  int newton = 0;
  for (const auto& r : sol.reports) {
    positive = positive && r.positivity_preserved;
    newton = std::max(newton, r.newton_iterations);
  }
  verdict("solve", {{"failed_step", sol.failed_step}, {"failure", sol.failure}, {"max_newton", newton}},
          sol.field.min(), sol.field.min(), sol.ok && positive && sol.field.min() > 0.0, res);
  if (!sol.ok) {
    // Nothing downstream is meaningful without a trajectory.
    for (const auto& name : pipeline_checks()) {
      bool have = false;
      for (const auto& v : all) have = have || v.check == name;
      if (!have) verdict(name, {{"skipped", "solve failed"}}, std::nan(""), std::nan(""), false, res);
    }
  } else {
    const Field& u = sol.field;
    const auto hc = harnack_cylinders(q);

    const auto ls = levelset_profile_check(u, q, 0.5, 0.75, w, cfg.C, spec);
    verdict("levelset",
            {{"s", 0.5},
             {"tau", 0.75},
             {"slopes_consistent", ls.slopes_consistent},
             {"smoothed", ls.smoothed},
             {"B", ls.B},
             {"identity_raw", ls.identity_raw},
             {"identity_normalized", ls.identity_normalized},
             {"muckenhoupt_factor", ls.muckenhoupt_factor}},
            ls.min_constant, 0.0,
            std::isfinite(ls.min_constant) && ls.slopes_consistent &&
                std::abs(ls.identity_normalized / ls.muckenhoupt_factor - 1.0) <= 1e-6,
            res);

    // Median normalization: afterwards the median level is 1.
    const double l = median_level(u, hc.lower);
    const Field un = u.scaled(1.0 / l);
    rep.details["median_level"] = l;
    clock.lap("levelset+median");

    // Infimum side: logarithmic level sets, Moser and Bombieri on 1/u.
    const auto ks = log_levels(un, q);
    const auto lg = log_levelset_check(un, q, ks);
    verdict("log_levelset", {{"levels", ks.size()}, {"attaining_k", lg.attaining_k}}, lg.constant, 0.0,
            std::isfinite(lg.constant), res);
    const Field inv = un.map([](double v) { return 1.0 / v; });
    const auto mi = summarize(moser_check(inv, q, kMoserDeltas, kMoserPairs, ex.L));
    verdict("moser_inverse", {{"pairs", pairs_json(kMoserPairs)}, {"summary", moser_json(mi)}},
            mi.max_constant.empty() ? 0.0 : *std::max_element(mi.max_constant.begin(), mi.max_constant.end()),
            2.0 - mi.spread, mi.finite && mi.spread <= 2.0, res);
    BombieriInput bi;
    bi.u = &inv;
    bi.q1 = q;
    const auto br = bombieri_check(bi, bombieri_pairs());
    double worst = kInf;
    for (const auto& p : br.pairs) worst = std::min(worst, p.margin);
    verdict("bombieri",
            {{"C1", br.C1},
             {"C2", br.C2},
             {"theta", br.theta},
             {"C_theta", br.C_theta},
             {"C1_attained_at", {{"delta", br.C1_delta}, {"s", br.C1_s}, {"r", br.C1_r}}},
             {"hypotheses_hold", br.hypotheses_hold}},
            br.C_theta, br.hypotheses_hold ? worst : std::nan(""),
            br.hypotheses_hold && br.conclusion_holds, res);
    clock.lap("infimum side");

    // Supremum side: the secondary cylinder at the maximum point.
    const Argmax mx = locate_max(un, hc.lower);
    const double tp = g.time(mx.m);
    const SpacePoint xp = g.point(mx.k);
    Json xpj = Json::array();
    for (int a = 0; a < cfg.n; ++a) xpj.push_back(xp[a]);
    rep.details["max_point"] = {{"t", tp}, {"x", xpj}, {"value", mx.value}};

    double C1 = cfg.C1 ? *cfg.C1 : cfg.C / 8.0;
    Json attempts = Json::array();
    HeightSolve h1;
    DoublingReport dbl;
    Cylinder q1;
    bool below = false;
    for (int attempt = 0; attempt < 2; ++attempt) {
      h1 = intrinsic_height(w, tp, cfg.x0, cfg.R, C1, spec);
      below = h1.T < q.T / 4.0;
      // When T1 is too large the cylinder is cut at the bottom of Q_T.
      q1 = Cylinder{tp, cfg.x0, cfg.R, std::min(h1.T, tp - q.bottom()), cfg.n};
      dbl = doubling_estimate(w, q1, q, ex.p, kDelta1Grid, spec);
      Json table = Json::array();
      for (std::size_t i = 0; i < dbl.delta1.size(); ++i) {
        const double d = dbl.delta1[i], c2 = dbl.C2[i];
        const double boundA = c2 * std::pow(0.25, ex.p - 1.0 + d);
        const double boundB = c2 * std::pow(0.25, 1.0 / ex.p_prime + d / ex.p);
        table.push_back({{"delta1", d},
                         {"C2", c2},
                         {"bound_p_minus_1", boundA},
                         {"contradiction_p_minus_1", C1 < boundA},
                         {"bound_conjugate", boundB},
                         {"contradiction_conjugate", C1 < boundB}});
      }
      attempts.push_back({{"C1", C1},
                          {"height", height_json(h1)},
                          {"T1_over_T", h1.T / q.T},
                          {"T1_below_quarter", below},
                          {"doubling",
                           {{"exponent", dbl.exponent},
                            {"inner_mass", dbl.inner_mass},
                            {"outer_mass", dbl.outer_mass},
                            {"volume_ratio", dbl.volume_ratio},
                            {"converged", dbl.converged},
                            {"table", table}}}});
      if (below) break;
      C1 *= 0.5;
    }
    rep.details["secondary_cylinder"] = attempts;
    verdict("t1_height", {{"C1", C1}, {"cylinder", cylinder_json(q1)}, {"status", to_string(h1.status)}},
            h1.T, 1e-10 - std::abs(h1.residual),
            h1.status == HeightStatus::ok && std::abs(h1.residual) <= 1e-10);
    verdict("doubling", {{"C1", C1}, {"attempts", attempts.size()}, {"T", q.T}, {"T1", h1.T}},
            h1.T / q.T, 0.25 - h1.T / q.T, below && dbl.converged, res);

    const auto mt = summarize(moser_check(un, q1, kMoserDeltas, kTildePairs, ex.L));
    const Cylinder quarter = scaled_cylinder(q1, 0.25);
    const bool covered = quarter.contains_point(tp, xp, 1e-9 * q.T);
    verdict("moser_t1",
            {{"pairs", pairs_json(kTildePairs)}, {"summary", moser_json(mt)}, {"max_point_covered", covered}},
            mt.max_constant.empty() ? 0.0 : *std::max_element(mt.max_constant.begin(), mt.max_constant.end()),
            2.0 - mt.spread, mt.finite && mt.spread <= 2.0 && covered, res);
    clock.lap("supremum side");

    const auto hr = harnack_check(un, q);
    const SpacePoint wx = g.point(hr.witness_k);
    Json wxj = Json::array();
    for (int a = 0; a < cfg.n; ++a) wxj.push_back(wx[a]);
    verdict("harnack",
            {{"sup_lower", hr.sup_lower},
             {"inf_upper", hr.inf_upper},
             {"touches_zero", hr.touches_zero},
             {"witness", {{"t", g.time(hr.witness_m)}, {"x", wxj}}}},
            hr.ratio, 0.0, std::isfinite(hr.ratio) && !hr.touches_zero, hr.resolution);
    clock.lap("harnack");
  }

  const auto requested = cfg.checks.empty() ? pipeline_checks() : cfg.checks;
  for (const auto& v : all)
    if (std::find(requested.begin(), requested.end(), v.check) != requested.end()) rep.verdicts.push_back(v);
  return rep;
}

ReportFormat format_from_string(const std::string& s) {
  if (s == "json") return ReportFormat::json;
  if (s == "csv") return ReportFormat::csv;
  throw ConfigError("--format", "expected json or csv, got '" + s + "'");
}

namespace {

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string render_report(const RunReport& r, ReportFormat f) {
  if (f == ReportFormat::json) {
    Json j;
    j["config"] = r.config;
    j["height"] = r.height;
    j["muckenhoupt"] = r.muckenhoupt;
    Json vs = Json::array();
    for (const auto& v : r.verdicts) vs.push_back(to_json(v));
    j["verdicts"] = vs;
    j["details"] = r.details;
    j["pass"] = r.all_pass();
    return j.dump(2) + "\n";
  }
  std::ostringstream s;
  s << "check,pass,constant,margin,parameters,resolution\n";
  for (const auto& v : r.verdicts) {
    s << v.check << ',' << (v.pass ? "true" : "false") << ',' << Json(v.constant).dump() << ','
      << Json(v.margin).dump() << ',' << csv_quote(v.parameters.dump()) << ','
      << csv_quote(v.resolution.dump()) << '\n';
  }
  return s.str();
}

std::string emit_report(const RunReport& r, ReportFormat f, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::exists(dir)) {
    if (!fs::create_directories(dir, ec) || ec)
      throw std::runtime_error("cannot create output directory '" + dir + "': " + ec.message());
    std::clog << "created output directory " << dir << '\n';
  }
  const std::string path = (fs::path(dir) / (f == ReportFormat::json ? "report.json" : "report.csv")).string();
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << render_report(r, f);
  }
  Json t = Json::object();
  for (const auto& [k, v] : r.timings) t[k] = v;
  std::ofstream tout((fs::path(dir) / "timings.json").string(), std::ios::binary);
  if (!tout) throw std::runtime_error("cannot write timings into '" + dir + "'");
  tout << t.dump(2) << '\n';
  return path;
}

}  // namespace hlab
