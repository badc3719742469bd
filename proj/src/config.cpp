#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "hlab/harness.hpp"

namespace hlab {

const std::vector<std::string>& pipeline_checks() {
  static const std::vector<std::string> names{
      "height",   "muckenhoupt", "solve",    "levelset", "log_levelset", "moser_inverse",
      "bombieri", "t1_height",   "doubling", "moser_t1", "harnack"};
  return names;
}

Exponents ExperimentConfig::exponents() const {
  const auto chk = admissible_exponents(p, n, alpha, r);
  if (!chk.accepted()) throw ConfigError("exponents", chk.message);
  return *chk.exponents;
}

Weight ExperimentConfig::make_weight() const {
  try {
    return hlab::make_weight(weight, exponents());
  } catch (const ConfigError&) {
    throw;
  } catch (const PreconditionError& e) {
    throw ConfigError("weight", e.what());
  }
}

Flux ExperimentConfig::make_flux(const Weight& w) const {
  if (flux == "model") return model_flux(w);
  throw ConfigError("flux", "unknown flux '" + flux + "' (known: model)");
}

QuadratureSpec ExperimentConfig::quadrature() const {
  QuadratureSpec s;
  s.levels = quadrature_levels;
  return s;
}

void ExperimentConfig::validate() const {
  exponents();
  if (n != 1 && n != 2) throw ConfigError("exponents.n", "only n = 1 and n = 2 are supported");
  const auto labels = catalog_labels();
  if (std::find(labels.begin(), labels.end(), weight.label) == labels.end())
    throw ConfigError("weight.label", "unknown weight '" + weight.label + "'");
  make_weight();
  if (flux != "model") throw ConfigError("flux", "unknown flux '" + flux + "' (known: model)");
  if (!(R > 0.0) || !std::isfinite(R)) throw ConfigError("cylinder.R", "must be positive");
  if (!(C > 0.0) || !std::isfinite(C)) throw ConfigError("cylinder.C", "must be positive");
  if (!std::isfinite(t0)) throw ConfigError("cylinder.t0", "must be finite");
  if (C1 && !(*C1 > 0.0)) throw ConfigError("C1", "must be positive");
  if (cells < 8) throw ConfigError("grid.cells", "must be at least 8");
  if (steps < 8) throw ConfigError("grid.steps", "must be at least 8");
  if (refine < 0 || refine > 4) throw ConfigError("refine", "must lie in 0..4");
  if (n == 2 && refined_cells() > 256) throw ConfigError("grid.cells", "2-D grids are capped at 256 cells per axis");
  if (quadrature_levels < 2 || quadrature_levels > 14) throw ConfigError("quadrature.levels", "must lie in 2..14");
  if (!(data.base > 0.0)) throw ConfigError("boundary.base", "must be positive so the data stay positive");
  if (!(data.amplitude >= 0.0)) throw ConfigError("boundary.amplitude", "must be nonnegative");
  if (data.bumps < 0 || data.bumps > 16) throw ConfigError("boundary.bumps", "must lie in 0..16");
  if (!(data.width > 0.0)) throw ConfigError("boundary.width", "must be positive");
  for (const auto& c : checks) {
    const auto& all = pipeline_checks();
    if (std::find(all.begin(), all.end(), c) == all.end())
      throw ConfigError("checks", "unknown check '" + c + "'");
  }
}

namespace {

void reject_unknown(const Json& j, const std::string& path, const std::set<std::string>& known) {
  if (!j.is_object()) throw ConfigError(path.empty() ? "<root>" : path, "expected an object");
  for (const auto& [k, v] : j.items()) {
    if (!known.count(k)) throw ConfigError(path.empty() ? k : path + "." + k, "unknown key");
  }
}

template <class T>
void read(const Json& j, const char* key, const std::string& path, T& out) {
  if (!j.contains(key)) return;
  const std::string field = path.empty() ? key : path + "." + key;
  try {
    const auto& v = j.at(key);
    if constexpr (std::is_same_v<T, int> || std::is_same_v<T, std::uint64_t>) {
      if (!v.is_number_integer()) throw ConfigError(field, "expected an integer");
      if constexpr (std::is_same_v<T, std::uint64_t>) {
        if (v.is_number_unsigned() || v.get<long long>() >= 0) out = v.get<std::uint64_t>();
        else throw ConfigError(field, "expected a nonnegative integer");
      } else {
        out = v.get<int>();
      }
    } else if constexpr (std::is_same_v<T, double>) {
      if (!v.is_number()) throw ConfigError(field, "expected a number");
      out = v.get<double>();
    } else {
      if (!v.is_string()) throw ConfigError(field, "expected a string");
      out = v.get<std::string>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(field, e.what());
  }
}

}  // namespace

ExperimentConfig config_from_json(const Json& j) {
  ExperimentConfig c;
  reject_unknown(j, "", {"weight", "exponents", "cylinder", "grid", "flux", "boundary", "checks",
                         "seed", "output", "C1", "quadrature", "refine"});
  if (j.contains("weight")) {
    const auto& w = j["weight"];
    reject_unknown(w, "weight", {"label", "params"});
    read(w, "label", "weight", c.weight.label);
    if (w.contains("params")) {
      if (!w["params"].is_object()) throw ConfigError("weight.params", "expected an object");
      for (const auto& [k, v] : w["params"].items()) {
        if (!v.is_number()) throw ConfigError("weight.params." + k, "expected a number");
        c.weight.params[k] = v.get<double>();
      }
    }
  }
  if (j.contains("exponents")) {
    const auto& e = j["exponents"];
    reject_unknown(e, "exponents", {"p", "n", "alpha", "r"});
    read(e, "p", "exponents", c.p);
    read(e, "n", "exponents", c.n);
    read(e, "alpha", "exponents", c.alpha);
    read(e, "r", "exponents", c.r);
  }
  if (j.contains("cylinder")) {
    const auto& q = j["cylinder"];
    reject_unknown(q, "cylinder", {"t0", "x0", "R", "C"});
    read(q, "t0", "cylinder", c.t0);
    read(q, "R", "cylinder", c.R);
    read(q, "C", "cylinder", c.C);
    if (q.contains("x0")) {
      const auto& x = q["x0"];
      if (!x.is_array() || x.size() > 2) throw ConfigError("cylinder.x0", "expected an array of at most 2 numbers");
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (!x[i].is_number()) throw ConfigError("cylinder.x0", "expected numbers");
        c.x0[i] = x[i].get<double>();
      }
    }
  }
  if (j.contains("grid")) {
    const auto& g = j["grid"];
    reject_unknown(g, "grid", {"cells", "steps"});
    read(g, "cells", "grid", c.cells);
    read(g, "steps", "grid", c.steps);
  }
  read(j, "flux", "", c.flux);
  if (j.contains("boundary")) {
    const auto& b = j["boundary"];
    reject_unknown(b, "boundary", {"kind", "base", "bumps", "amplitude", "width"});
    std::string kind = to_string(c.boundary);
    read(b, "kind", "boundary", kind);
    try {
      c.boundary = boundary_from_string(kind);
    } catch (const std::exception& e) {
      throw ConfigError("boundary.kind", e.what());
    }
    read(b, "base", "boundary", c.data.base);
    read(b, "bumps", "boundary", c.data.bumps);
    read(b, "amplitude", "boundary", c.data.amplitude);
    read(b, "width", "boundary", c.data.width);
  }
  if (j.contains("checks")) {
    if (!j["checks"].is_array()) throw ConfigError("checks", "expected an array of names");
    for (const auto& v : j["checks"]) {
      if (!v.is_string()) throw ConfigError("checks", "expected names");
      c.checks.push_back(v.get<std::string>());
    }
  }
  read(j, "seed", "", c.seed);
  read(j, "output", "", c.output);
  if (j.contains("C1")) {
    double v = 0.0;
    read(j, "C1", "", v);
    c.C1 = v;
  }
  if (j.contains("quadrature")) {
    reject_unknown(j["quadrature"], "quadrature", {"levels"});
    read(j["quadrature"], "levels", "quadrature", c.quadrature_levels);
  }
  read(j, "refine", "", c.refine);
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot open '" + path + "'");
  Json j;
  try {
    j = Json::parse(in, nullptr, true, true);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("--config", std::string("parse error: ") + e.what());
  }
  return config_from_json(j);
}

Json to_json(const ExperimentConfig& c) {
  Json j;
  Json params = Json::object();
  for (const auto& [k, v] : c.weight.params) params[k] = v;
  j["weight"] = {{"label", c.weight.label}, {"params", params}};
  j["exponents"] = {{"p", c.p}, {"n", c.n}, {"alpha", c.alpha}, {"r", c.r}};
  Json x0 = Json::array();
  for (int a = 0; a < c.n; ++a) x0.push_back(c.x0[a]);
  j["cylinder"] = {{"t0", c.t0}, {"x0", x0}, {"R", c.R}, {"C", c.C}};
  j["grid"] = {{"cells", c.cells}, {"steps", c.steps}};
  j["flux"] = c.flux;
  j["boundary"] = {{"kind", to_string(c.boundary)},
                   {"base", c.data.base},
                   {"bumps", c.data.bumps},
                   {"amplitude", c.data.amplitude},
                   {"width", c.data.width}};
  j["checks"] = c.checks.empty() ? Json(pipeline_checks()) : Json(c.checks);
  j["seed"] = c.seed;
  j["output"] = c.output;
  j["C1"] = c.C1 ? *c.C1 : c.C / 8.0;
  j["quadrature"] = {{"levels", c.quadrature_levels}};
  j["refine"] = c.refine;
  return j;
}

std::string config_reference() {
  const ExperimentConfig d;
  std::ostringstream s;
  s << "| key | default | meaning |\n|---|---|---|\n";
  auto row = [&](const std::string& k, const std::string& v, const std::string& m) {
    s << "| `" << k << "` | `" << v << "` | " << m << " |\n";
  };
  auto num = [](double v) { return Json(v).dump(); };
  row("weight.label", d.weight.label, "catalog label: unit, power_x, radial_spacetime, power_t, product, slab");
  row("weight.params", "{}", "overrides of the catalog defaults (scale, gamma, beta, theta, cx, cy, ct, t_low, t_high)");
  row("exponents.p", num(d.p), "growth exponent, p > 1");
  row("exponents.n", std::to_string(d.n), "space dimension, 1 or 2");
  row("exponents.alpha", num(d.alpha), "integrability exponent of omega");
  row("exponents.r", num(d.r), "integrability exponent of sigma");
  row("cylinder.t0", num(d.t0), "top time of the intrinsic cylinder");
  row("cylinder.x0", "[0]", "spatial center");
  row("cylinder.R", num(d.R), "half side of the cube K_R");
  row("cylinder.C", num(d.C), "constant of the intrinsic height equation");
  row("grid.cells", std::to_string(d.cells), "cells per space axis");
  row("grid.steps", std::to_string(d.steps), "time steps across the cylinder");
  row("flux", d.flux, "flux label; `model` is omega |grad u|^{p-2} grad u");
  row("boundary.kind", "dirichlet", "dirichlet, neumann or periodic");
  row("boundary.base", num(d.data.base), "constant part of the positive data");
  row("boundary.bumps", std::to_string(d.data.bumps), "number of seeded Gaussian bumps");
  row("boundary.amplitude", num(d.data.amplitude), "largest bump height");
  row("boundary.width", num(d.data.width), "bump width relative to R");
  row("checks", "all", "subset of: height, muckenhoupt, solve, levelset, log_levelset, moser_inverse, "
                       "bombieri, t1_height, doubling, moser_t1, harnack");
  row("seed", std::to_string(d.seed), "seed of the data generator");
  row("output", d.output, "output directory");
  row("C1", "C / 8", "height constant of the secondary cylinder at the maximum point");
  row("quadrature.levels", std::to_string(d.quadrature_levels), "finest quadrature level (2^l cells per axis)");
  row("refine", std::to_string(d.refine), "doublings of cells and steps");
  return s.str();
}

Json error_record(const std::string& kind, const std::string& field, const std::string& message) {
  return Json{{"error", {{"kind", kind}, {"field", field}, {"message", message}}}};
}

SpaceTimeFn experiment_data(const ExperimentConfig& cfg, const Cylinder& q) {
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  struct Bump {
    std::array<double, 2> c;
    double a, freq, phase;
  };
  std::vector<Bump> bumps;
  for (int b = 0; b < cfg.data.bumps; ++b) {
    Bump bp{};
    for (int a = 0; a < 2; ++a) bp.c[a] = q.x0[a] + q.R * (2.0 * u01(rng) - 1.0);
    bp.a = cfg.data.amplitude * (0.2 + 0.8 * u01(rng));
    bp.freq = 0.5 + 1.5 * u01(rng);
    bp.phase = 2.0 * M_PI * u01(rng);
    bumps.push_back(bp);
  }
  const double base = cfg.data.base;
  const double width = cfg.data.width * q.R;
  const int n = q.n;
  return [=](double t, const SpacePoint& x) {
    const double tau = (t - q.bottom()) / q.T;
    double v = base;
    for (const auto& b : bumps) {
      double d2 = 0.0;
      for (int a = 0; a < n; ++a) d2 += (x[a] - b.c[a]) * (x[a] - b.c[a]);
      v += b.a * std::exp(-d2 / (2.0 * width * width)) *
           (1.0 + 0.5 * std::sin(2.0 * M_PI * b.freq * tau + b.phase));
    }
    return v;
  };
}

}  // namespace hlab
