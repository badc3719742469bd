#include "hlab/exponents.hpp"

#include <cmath>
#include <sstream>

#include "hlab/core.hpp"

namespace hlab {

namespace {

double moser_exponent(double p, int n, double alpha, double r) {
  const double pp = p / (p - 1.0);
  const double ap = alpha / (alpha - 1.0);
  const double rp = r / (r - 1.0);
  const double np = n + p;
  return p / np + 1.0 / (p * ap) + n / (pp * np * rp);
}

ExponentCheck reject(ExponentViolation v, std::string msg) {
  ExponentCheck c;
  c.violation = v;
  c.message = std::move(msg);
  return c;
}

}  // namespace

ExponentCheck admissible_exponents(double p, int n, double alpha, double r) {
  std::ostringstream os;
  if (!(p > 1.0) || !std::isfinite(p)) {
    os << "p = " << p << " is not > 1";
    return reject(ExponentViolation::p_not_above_one, os.str());
  }
  if (n < 1) {
    os << "n = " << n << " is not a positive integer";
    return reject(ExponentViolation::n_not_positive, os.str());
  }
  const double alpha_min = (n + p) / p;
  if (!(alpha > alpha_min) || !std::isfinite(alpha)) {
    os << "alpha = " << alpha << " is not > (n+p)/p = " << alpha_min;
    return reject(ExponentViolation::alpha_too_small, os.str());
  }
  const double r_min = n * (p - 1.0) / p;
  if (!(r > r_min) || !std::isfinite(r)) {
    os << "r = " << r << " is not > n(p-1)/p = " << r_min;
    return reject(ExponentViolation::r_too_small, os.str());
  }
  const double balance = n * (p - 1.0) / (p * r) + (n + p) / (p * alpha);
  if (!(balance < 1.0)) {
    os << "n(p-1)/(p r) + (n+p)/(p alpha) = " << balance << " is not < 1";
    return reject(ExponentViolation::balance, os.str());
  }
  // r <= 1 is admissible when n(p-1)/p < 1; r' is then infinite or negative
  // and the sum form of L still agrees with the closed form.
  Exponents e;
  e.p = p;
  e.n = n;
  e.alpha = alpha;
  e.r = r;
  e.p_prime = p / (p - 1.0);
  e.L = moser_exponent(p, n, alpha, r);
  ExponentCheck c;
  c.exponents = e;
  return c;
}

Exponents make_exponents(double p, int n, double alpha, double r) {
  auto c = admissible_exponents(p, n, alpha, r);
  if (!c.accepted()) throw PreconditionError("inadmissible exponents: " + c.message);
  return *c.exponents;
}

double moser_excess_from_sum(const Exponents& e) {
  return moser_exponent(e.p, e.n, e.alpha, e.r) - 1.0;
}

double moser_excess_closed(const Exponents& e) {
  const double np = e.n + e.p;
  return (1.0 - np / (e.p * e.alpha) - e.n * (e.p - 1.0) / (e.p * e.r)) / np;
}

const char* to_string(ExponentViolation v) {
  switch (v) {
    case ExponentViolation::none: return "none";
    case ExponentViolation::p_not_above_one: return "p_not_above_one";
    case ExponentViolation::n_not_positive: return "n_not_positive";
    case ExponentViolation::alpha_too_small: return "alpha_too_small";
    case ExponentViolation::r_too_small: return "r_too_small";
    case ExponentViolation::balance: return "balance";
  }
  return "unknown";
}

}  // namespace hlab
