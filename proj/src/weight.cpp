#include "hlab/weight.hpp"

#include <cmath>
#include <limits>
#include <mutex>

namespace hlab {

Weight::Weight(std::string label, Exponents exponents, SpaceTimeFn omega,
               SpaceTimeFn singular_distance)
    : label_(std::move(label)),
      exponents_(exponents),
      omega_(std::move(omega)),
      singular_distance_(std::move(singular_distance)) {
  if (!omega_) throw PreconditionError("weight '" + label_ + "' has no evaluation callback");
}

double Weight::sigma(double t, const SpacePoint& x) const {
  return std::pow(omega_(t, x), -exponents_.sigma_power());
}

double Weight::omega_pow(double t, const SpacePoint& x, double e) const {
  return std::pow(omega_(t, x), e);
}

double Weight::singular_distance(double t, const SpacePoint& x) const {
  if (!singular_distance_) return std::numeric_limits<double>::infinity();
  return singular_distance_(t, x);
}

SpaceTimeFn Weight::omega_alpha_fn() const { return omega_pow_fn(exponents_.alpha); }

SpaceTimeFn Weight::sigma_r_fn() const {
  return omega_pow_fn(-exponents_.sigma_power() * exponents_.r);
}

SpaceTimeFn Weight::omega_pow_fn(double e) const {
  return [w = omega_, e](double t, const SpacePoint& x) { return std::pow(w(t, x), e); };
}

Weight Weight::scaled(double lambda) const {
  if (!(lambda > 0.0)) throw PreconditionError("weight scale must be positive");
  return Weight(label_, exponents_,
                [w = omega_, lambda](double t, const SpacePoint& x) { return lambda * w(t, x); },
                singular_distance_);
}

Weight Weight::with_exponents(const Exponents& e) const {
  return Weight(label_, e, omega_, singular_distance_);
}

namespace {

std::mutex& registry_mutex() {
  static std::mutex m;
  return m;
}

std::map<std::string, UserWeightFn>& registry() {
  static std::map<std::string, UserWeightFn> r;
  return r;
}

double param(const std::map<std::string, double>& p, const std::string& key, double fallback) {
  auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

double space_dist(const SpacePoint& x, const SpacePoint& c, int n) {
  double s = 0.0;
  for (int k = 0; k < n; ++k) s += (x[k] - c[k]) * (x[k] - c[k]);
  return std::sqrt(s);
}

}  // namespace

std::map<std::string, double> catalog_defaults(const std::string& label) {
  if (label == "unit") return {{"scale", 1.0}};
  if (label == "power_x") return {{"scale", 1.0}, {"gamma", 0.25}, {"cx", 0.0}, {"cy", 0.0}};
  if (label == "radial_spacetime")
    return {{"scale", 1.0}, {"beta", 1.0}, {"cx", 0.0}, {"cy", 0.0}, {"ct", 0.0}};
  if (label == "power_t") return {{"scale", 1.0}, {"theta", 0.25}, {"ct", 0.0}};
  if (label == "product")
    return {{"scale", 1.0}, {"gamma", 0.25}, {"theta", 0.25}, {"cx", 0.0}, {"cy", 0.0}, {"ct", 0.0}};
  if (label == "slab") return {{"scale", 1.0}, {"t_low", 0.0}, {"t_high", 0.0}};
  return {};
}

std::vector<std::string> catalog_labels() {
  std::vector<std::string> labels{"unit", "power_x", "radial_spacetime", "power_t", "product", "slab"};
  std::lock_guard lock(registry_mutex());
  for (const auto& [k, v] : registry()) labels.push_back(k);
  return labels;
}

void register_user_weight(const std::string& label, UserWeightFn fn) {
  std::lock_guard lock(registry_mutex());
  registry()[label] = std::move(fn);
}

void unregister_user_weight(const std::string& label) {
  std::lock_guard lock(registry_mutex());
  registry().erase(label);
}

Weight make_weight(const WeightSpec& spec, const Exponents& ex) {
  auto p = catalog_defaults(spec.label);
  for (const auto& [k, v] : spec.params) p[k] = v;
  const int n = ex.n;
  const double scale = param(p, "scale", 1.0);
  if (!(scale > 0.0)) throw PreconditionError("weight scale must be positive");
  const SpacePoint c{param(p, "cx", 0.0), param(p, "cy", 0.0)};
  const double ct = param(p, "ct", 0.0);

  if (spec.label == "unit") {
    return Weight("unit", ex, [scale](double, const SpacePoint&) { return scale; });
  }
  if (spec.label == "power_x") {
    const double gamma = p["gamma"];
    return Weight(
        "power_x", ex,
        [=](double, const SpacePoint& x) { return scale * std::pow(space_dist(x, c, n), gamma); },
        [=](double, const SpacePoint& x) { return space_dist(x, c, n); });
  }
  if (spec.label == "radial_spacetime") {
    const double beta = p["beta"];
    auto dist = [=](double t, const SpacePoint& x) {
      const double d = space_dist(x, c, n);
      return std::sqrt(d * d + (t - ct) * (t - ct));
    };
    return Weight(
        "radial_spacetime", ex,
        [=](double t, const SpacePoint& x) { return scale * std::pow(dist(t, x), beta); }, dist);
  }
  if (spec.label == "power_t") {
    const double theta = p["theta"];
    return Weight(
        "power_t", ex,
        [=](double t, const SpacePoint&) { return scale * std::pow(std::abs(t - ct), theta); },
        [=](double t, const SpacePoint&) { return std::abs(t - ct); });
  }
  if (spec.label == "product") {
    const double gamma = p["gamma"];
    const double theta = p["theta"];
    return Weight(
        "product", ex,
        [=](double t, const SpacePoint& x) {
          return scale * std::pow(space_dist(x, c, n), gamma) * std::pow(std::abs(t - ct), theta);
        },
        [=](double t, const SpacePoint& x) {
          return std::min(space_dist(x, c, n), std::abs(t - ct));
        });
  }
  if (spec.label == "slab") {
    const double lo = p["t_low"];
    const double hi = p["t_high"];
    return Weight("slab", ex, [=](double t, const SpacePoint&) {
      return (t > lo && t < hi) ? 0.0 : scale;
    });
  }

  UserWeightFn user;
  {
    std::lock_guard lock(registry_mutex());
    auto it = registry().find(spec.label);
    if (it != registry().end()) user = it->second;
  }
  if (!user) throw PreconditionError("unknown weight label '" + spec.label + "'");
  return Weight(spec.label, ex,
                [user, p](double t, const SpacePoint& x) { return user(t, x, p); });
}

}  // namespace hlab
