#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hlab/estimates.hpp"
#include "hlab/flux.hpp"
#include "hlab/solver.hpp"

namespace hlab {

/// A rejected configuration. `field` names the offending key path.
class ConfigError : public PreconditionError {
 public:
  ConfigError(std::string field, const std::string& message)
      : PreconditionError(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Positive space-time data: base + sum of Gaussian bumps whose heights
/// oscillate in time. Used for the initial slice and the boundary values.
struct DataSpec {
  double base = 1.0;
  int bumps = 3;
  double amplitude = 1.0;
  double width = 0.25;  // bump width relative to R
};

struct ExperimentConfig {
  WeightSpec weight;
  double p = 2.0;
  int n = 1;
  double alpha = 4.0;
  double r = 2.0;
  double t0 = 1.0;
  SpacePoint x0{};
  double R = 1.0;
  double C = 1.0;
  int cells = 128;
  int steps = 256;
  std::string flux = "model";
  BoundaryKind boundary = BoundaryKind::dirichlet;
  DataSpec data;
  std::vector<std::string> checks;  // empty means every pipeline check
  std::uint64_t seed = 1;
  std::string output = "out";
  std::optional<double> C1;  // height constant of the secondary cylinder; C / 8 if unset
  int quadrature_levels = 6;
  int refine = 0;  // cells and steps are doubled this many times

  Exponents exponents() const;  // throws ConfigError when inadmissible
  Weight make_weight() const;
  Flux make_flux(const Weight& w) const;
  QuadratureSpec quadrature() const;
  int refined_cells() const { return cells << refine; }
  int refined_steps() const { return steps << refine; }
  /// Throws ConfigError on the first invalid field.
  void validate() const;
};

/// Names accepted in ExperimentConfig::checks, in pipeline order.
const std::vector<std::string>& pipeline_checks();

ExperimentConfig config_from_json(const Json& j);
ExperimentConfig load_config(const std::string& path);
Json to_json(const ExperimentConfig& cfg);
/// Markdown table of every config key with its default.
std::string config_reference();

/// Structured error record written instead of a report when a run cannot start.
Json error_record(const std::string& kind, const std::string& field, const std::string& message);

/// The seeded positive data of the config on cylinder q.
SpaceTimeFn experiment_data(const ExperimentConfig& cfg, const Cylinder& q);

struct RunReport {
  Json config;
  Json height = Json::object();
  Json muckenhoupt = Json::object();
  std::vector<Verdict> verdicts;
  Json details = Json::object();
  std::vector<std::pair<std::string, double>> timings;  // seconds, written to a sidecar only

  bool all_pass() const;
  const Verdict* find(const std::string& check) const;
};

/// Intrinsic cylinder, grid and positivity-constrained solve of the config.
struct ExperimentRun {
  HeightSolve height;
  Cylinder q;
  Grid grid;
  SolveResult solution;
};

ExperimentRun run_experiment(const ExperimentConfig& cfg);

/// Harnack pipeline: intrinsic height, solve, median normalization, log level
/// sets and Moser on 1/u (infimum side), Bombieri, secondary cylinder at the
/// maximum point with doubling audit, Moser on u (supremum side), and the
/// final ratio.
RunReport run_harnack_pipeline(const ExperimentConfig& cfg);

/// One CSV row per (weight, radius): admissibility, Muckenhoupt constant over
/// the intrinsic cylinders of the radius grid, and the height table.
std::string run_weight_survey(const std::vector<ExperimentConfig>& cfgs, int radii = 10);

/// Five catalog weights at the reference center.
std::vector<ExperimentConfig> default_survey_configs(const ExperimentConfig& base);

/// Randomized lemma suites (Mamedov, iteration, Bombieri, interpolation,
/// Steklov), one verdict each.
std::vector<Verdict> run_lemma_suite(std::uint64_t seed, int refine = 0);

/// Reference family for the Bombieri constant: unit weight, p = 2, five data
/// seeds. Returns the median-normalized reciprocal 1/u of each run on Q.
struct BombieriReference {
  Cylinder q;
  std::vector<Field> inverse;
};
BombieriReference bombieri_reference_family(int cells = 64);
const std::vector<std::pair<double, double>>& bombieri_pairs();

enum class ReportFormat { json, csv };
ReportFormat format_from_string(const std::string& s);

std::string render_report(const RunReport& r, ReportFormat f);
/// Writes report.{json,csv} and timings.json into `dir`, creating it when
/// missing. Returns the report path.
std::string emit_report(const RunReport& r, ReportFormat f, const std::string& dir);

}  // namespace hlab
