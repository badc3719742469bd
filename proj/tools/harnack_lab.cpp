// Command-line front end: one subcommand per experiment, every run ends in a
// report file under --out. Exit status is 0 iff every verdict passes, 2 on
// configuration errors and 1 on other failures.
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "hlab/harness.hpp"
#include "hlab/muckenhoupt.hpp"

using namespace hlab;

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format = "json";
  std::optional<int> refine;
};

ExperimentConfig resolve(const Options& o) {
  ExperimentConfig cfg = o.config.empty() ? config_from_json(Json::object()) : load_config(o.config);
  if (o.seed) cfg.seed = *o.seed;
  if (!o.out.empty()) cfg.output = o.out;
  if (o.refine) cfg.refine = *o.refine;
  cfg.validate();
  return cfg;
}

int finish(const RunReport& rep, const ExperimentConfig& cfg, ReportFormat f) {
  const auto path = emit_report(rep, f, cfg.output);
  for (const auto& v : rep.verdicts)
    std::cout << (v.pass ? "PASS " : "FAIL ") << v.check << "  constant=" << Json(v.constant).dump() << '\n';
  std::cout << "report: " << path << '\n';
  return rep.all_pass() ? 0 : 1;
}

void write_text(const std::string& dir, const std::string& name, const std::string& text) {
  std::filesystem::create_directories(dir);
  std::ofstream out(std::filesystem::path(dir) / name, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + name + " into " + dir);
  out << text;
}

RunReport base_report(const ExperimentConfig& cfg) {
  RunReport rep;
  rep.config = to_json(cfg);
  return rep;
}

int cmd_muckenhoupt(const ExperimentConfig& cfg, ReportFormat f) {
  RunReport rep = base_report(cfg);
  const Weight w = cfg.make_weight();
  const auto spec = cfg.quadrature();
  std::vector<Cylinder> family;
  for (int i = 1; i <= 10; ++i) {
    const double R = cfg.R * i / 10.0;
    family.push_back(Cylinder{cfg.t0, cfg.x0, R, intrinsic_height(w, cfg.t0, cfg.x0, R, cfg.C, spec).T, cfg.n});
  }
  const auto mk = muckenhoupt_constant(w, family, spec);
  Json entries = Json::array();
  for (const auto& e : mk.entries)
    entries.push_back({{"R", e.cylinder.R},
                       {"T", e.cylinder.T},
                       {"product", e.product},
                       {"error", e.error},
                       {"admissible", e.admissible},
                       {"reason", e.reason}});
  rep.muckenhoupt = {{"constant", mk.constant}, {"samples", mk.samples}, {"inadmissible", mk.inadmissible},
                     {"converged", mk.converged}, {"entries", entries}};
  rep.verdicts.push_back(Verdict{"muckenhoupt", {{"radii", 10}}, mk.constant, 0.0, Json::object(),
                                 mk.converged && std::isfinite(mk.constant) && mk.inadmissible < mk.samples});
  return finish(rep, cfg, f);
}

int cmd_height(const ExperimentConfig& cfg, ReportFormat f) {
  RunReport rep = base_report(cfg);
  const Weight w = cfg.make_weight();
  std::string csv = "R,T,residual,iterations\n";
  bool ok = true;
  double worst = 0.0;
  for (int i = 1; i <= 10; ++i) {
    const double R = cfg.R * i / 10.0;
    const auto h = intrinsic_height(w, cfg.t0, cfg.x0, R, cfg.C, cfg.quadrature());
    const double sup = intrinsic_height_supform(w, cfg.t0, cfg.x0, R, cfg.C, cfg.quadrature());
    ok = ok && h.status == HeightStatus::ok;
    worst = std::max(worst, std::abs(sup - h.T) / h.T);
    csv += Json(R).dump() + "," + Json(h.T).dump() + "," + Json(h.residual).dump() + "," +
           std::to_string(h.iterations) + "\n";
  }
  write_text(cfg.output, "height.csv", csv);
  rep.verdicts.push_back(Verdict{"height", {{"radii", 10}, {"table", "height.csv"}}, worst, 1e-8 - worst,
                                 Json::object(), ok && worst <= 1e-8});
  return finish(rep, cfg, f);
}

int cmd_solve(const ExperimentConfig& cfg, ReportFormat f) {
  RunReport rep = base_report(cfg);
  const auto run = run_experiment(cfg);
  std::filesystem::create_directories(cfg.output);
  write_field(run.solution.field, (std::filesystem::path(cfg.output) / "field").string());
  int newton = 0;
  bool positive = true;
  for (const auto& r : run.solution.reports) {
    newton = std::max(newton, r.newton_iterations);
    positive = positive && r.positivity_preserved;
  }
  rep.verdicts.push_back(Verdict{"solve",
                                 {{"T", run.q.T}, {"max_newton", newton}, {"failure", run.solution.failure}},
                                 run.solution.field.min(), 0.0, resolution_of(run.grid),
                                 run.solution.ok && positive});
  return finish(rep, cfg, f);
}

int cmd_moser(const ExperimentConfig& cfg, ReportFormat f) {
  RunReport rep = base_report(cfg);
  const auto run = run_experiment(cfg);
  if (!run.solution.ok) throw NumericalError("solve failed: " + run.solution.failure);
  const std::vector<std::pair<double, double>> pairs{{0.5, 0.75}, {0.5, 1.0}, {0.75, 1.0}};
  const auto reps = moser_check(run.solution.field, run.q, {0.25, 0.5, 0.75}, pairs,
                                cfg.exponents().L);
  const auto s = summarize(reps);
  Json rows = Json::array();
  for (const auto& r : reps)
    rows.push_back({{"delta", r.delta}, {"s", r.s}, {"tau", r.tau}, {"lhs", r.lhs},
                    {"rhs_core", r.rhs_core}, {"implied_C", r.implied_C}});
  const double top = s.max_constant.empty() ? 0.0 : *std::max_element(s.max_constant.begin(), s.max_constant.end());
  rep.verdicts.push_back(Verdict{"moser", {{"rows", rows}, {"spread", s.spread}}, top, 2.0 - s.spread,
                                 resolution_of(run.grid), s.finite && s.spread <= 2.0});
  return finish(rep, cfg, f);
}

int cmd_survey(const ExperimentConfig& cfg, ReportFormat f) {
  RunReport rep = base_report(cfg);
  const auto csv = run_weight_survey(default_survey_configs(cfg));
  write_text(cfg.output, "survey.csv", csv);
  const auto rows = std::count(csv.begin(), csv.end(), '\n') - 1;
  rep.verdicts.push_back(Verdict{"survey", {{"rows", rows}, {"table", "survey.csv"}}, double(rows), 0.0,
                                 Json::object(), rows == 50});
  return finish(rep, cfg, f);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical laboratory for weighted degenerate parabolic equations"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--config", o.config, "JSON experiment config")->check(CLI::ExistingFile);
  app.add_option("--seed", o.seed, "seed override");
  app.add_option("--out", o.out, "output directory override");
  app.add_option("--format", o.format, "report format")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--refine", o.refine, "number of grid doublings");
  app.add_flag_callback(
      "--print-config-reference", [] {
        std::cout << config_reference();
        std::exit(0);
      },
      "print every config key with its default");

  const std::vector<std::pair<std::string, std::string>> subs{
      {"muckenhoupt", "Muckenhoupt constant over intrinsic cylinders at 10 radii"},
      {"height", "intrinsic height table T(R), root and sup forms"},
      {"solve", "solve on the intrinsic cylinder and write the field"},
      {"moser", "Moser quotients of the solution"},
      {"harnack", "full Harnack pipeline"},
      {"verify-lemmas", "randomized lemma suites"},
      {"survey", "weight survey CSV"},
      {"report", "Harnack pipeline plus lemma suites in one report"}};
  for (const auto& [name, help] : subs) {
    auto* sc = app.add_subcommand(name, help);
    sc->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  const std::string cmd = app.get_subcommands().front()->get_name();
  ExperimentConfig cfg;
  ReportFormat fmt;
  try {
    cfg = resolve(o);
    fmt = format_from_string(o.format);
  } catch (const ConfigError& e) {
    const auto rec = error_record("config", e.field(), e.what());
    std::cerr << rec.dump(2) << '\n';
    if (!o.out.empty()) write_text(o.out, "error.json", rec.dump(2) + "\n");
    return 2;
  }

  try {
    if (cmd == "muckenhoupt") return cmd_muckenhoupt(cfg, fmt);
    if (cmd == "height") return cmd_height(cfg, fmt);
    if (cmd == "solve") return cmd_solve(cfg, fmt);
    if (cmd == "moser") return cmd_moser(cfg, fmt);
    if (cmd == "survey") return cmd_survey(cfg, fmt);
    if (cmd == "harnack") return finish(run_harnack_pipeline(cfg), cfg, fmt);
    RunReport rep = cmd == "report" ? run_harnack_pipeline(cfg) : base_report(cfg);
    for (auto& v : run_lemma_suite(cfg.seed, cfg.refine)) rep.verdicts.push_back(std::move(v));
    return finish(rep, cfg, fmt);
  } catch (const ConfigError& e) {
    std::cerr << error_record("config", e.field(), e.what()).dump(2) << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << error_record("runtime", cmd, e.what()).dump(2) << '\n';
    return 1;
  }
}
