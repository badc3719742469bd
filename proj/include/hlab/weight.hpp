#pragma once

#include <map>
#include <string>
#include <vector>

#include "hlab/core.hpp"
#include "hlab/exponents.hpp"

namespace hlab {

/// A weight omega(t, x) > 0 with its dual sigma = omega^{-p'/p}.
///
/// The optional singular-distance callback returns the distance of (t, x)
/// to the set where omega vanishes or blows up; quadrature uses it to clip
/// nodes closer than the configured tolerance. Weights without a singular
/// set leave it empty.
class Weight {
 public:
  Weight(std::string label, Exponents exponents, SpaceTimeFn omega,
         SpaceTimeFn singular_distance = {});

  double omega(double t, const SpacePoint& x) const { return omega_(t, x); }
  double sigma(double t, const SpacePoint& x) const;
  /// omega^e, with 0^e and inf^e handled without producing NaN.
  double omega_pow(double t, const SpacePoint& x, double e) const;
  double singular_distance(double t, const SpacePoint& x) const;
  bool has_singular_set() const { return static_cast<bool>(singular_distance_); }

  const Exponents& exponents() const { return exponents_; }
  const std::string& label() const { return label_; }

  SpaceTimeFn omega_fn() const { return omega_; }
  SpaceTimeFn singular_distance_fn() const { return singular_distance_; }
  /// (t, x) -> omega^alpha
  SpaceTimeFn omega_alpha_fn() const;
  /// (t, x) -> sigma^r
  SpaceTimeFn sigma_r_fn() const;
  /// (t, x) -> omega^e
  SpaceTimeFn omega_pow_fn(double e) const;

  /// lambda * omega, same singular set.
  Weight scaled(double lambda) const;
  Weight with_exponents(const Exponents& e) const;

 private:
  std::string label_;
  Exponents exponents_;
  SpaceTimeFn omega_;
  SpaceTimeFn singular_distance_;
};

/// Catalog entry: label plus named parameters, as read from a config file.
struct WeightSpec {
  std::string label = "unit";
  std::map<std::string, double> params;
};

/// Builds a catalog weight. Labels:
///   unit              omega = scale
///   power_x           omega = scale * |x - c|^gamma
///   radial_spacetime  omega = scale * (|x - c|^2 + (t - t_c)^2)^{beta/2}
///   power_t           omega = scale * |t - t_c|^theta
///   product           omega = scale * |x - c|^gamma * |t - t_c|^theta
///   slab              omega = 0 on t_low < t < t_high, scale elsewhere
/// plus every label registered with register_user_weight. Parameters not
/// given take the defaults listed by catalog_defaults.
Weight make_weight(const WeightSpec& spec, const Exponents& exponents);

std::map<std::string, double> catalog_defaults(const std::string& label);
std::vector<std::string> catalog_labels();

/// Registers a user weight under `label`. The callback receives (t, x) and
/// the WeightSpec parameters. Registering an existing label replaces it.
using UserWeightFn =
    std::function<double(double, const SpacePoint&, const std::map<std::string, double>&)>;
void register_user_weight(const std::string& label, UserWeightFn fn);
void unregister_user_weight(const std::string& label);

}  // namespace hlab
