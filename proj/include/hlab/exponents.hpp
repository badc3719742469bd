#pragma once

#include <optional>
#include <string>

namespace hlab {

/// Validated exponent set (p, n, alpha, r) together with the derived
/// conjugate p' and the Moser exponent L.
struct Exponents {
  double p = 2.0;
  int n = 1;
  double alpha = 4.0;
  double r = 2.0;
  double p_prime = 2.0;
  double L = 1.125;

  double alpha_prime() const { return alpha / (alpha - 1.0); }
  double r_prime() const { return r / (r - 1.0); }
  /// sigma = omega^{-sigma_power()}
  double sigma_power() const { return p_prime / p; }
};

enum class ExponentViolation {
  none,
  p_not_above_one,
  n_not_positive,
  alpha_too_small,  // alpha <= (n + p) / p
  r_too_small,      // r <= n (p - 1) / p
  balance,          // n (p - 1) / (p r) + (n + p) / (p alpha) >= 1
};

struct ExponentCheck {
  std::optional<Exponents> exponents;
  ExponentViolation violation = ExponentViolation::none;
  std::string message;

  bool accepted() const { return exponents.has_value(); }
};

/// Checks the three admissibility inequalities in order and computes L.
ExponentCheck admissible_exponents(double p, int n, double alpha, double r);

/// Like admissible_exponents but throws PreconditionError on rejection.
Exponents make_exponents(double p, int n, double alpha, double r);

/// L - 1 from the defining sum L = p/(n+p) + 1/(p alpha') + n/(p'(n+p) r').
double moser_excess_from_sum(const Exponents& e);

/// L - 1 = (1 - (n+p)/(p alpha) - n(p-1)/(p r)) / (n + p).
double moser_excess_closed(const Exponents& e);

const char* to_string(ExponentViolation v);

}  // namespace hlab
