#include <cmath>
#include <random>

#include "hlab/solver.hpp"

namespace hlab {

std::vector<TestFunction> random_test_functions(const Cylinder& q, std::size_t count,
                                                std::uint64_t seed) {
  q.validate();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::uniform_int_distribution<int> freq(1, 3);
  std::vector<TestFunction> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double c1 = u01(rng);          // time ramp curvature
    const double c3 = u01(rng) - 0.5;    // time modulation
    std::array<double, 2> amp{u01(rng) - 0.5, u01(rng) - 0.5};
    std::array<double, 2> phase{2.0 * M_PI * u01(rng), 2.0 * M_PI * u01(rng)};
    std::array<int, 2> k{freq(rng), freq(rng)};
    const int n = q.n;

    // v = tau (1 + c1 tau) prod_k (1 - xi_k^2) exp(c3 tau + sum_k a_k sin(pi k_k xi_k + phi_k))
    auto parts = [=](double t, const SpacePoint& x, double& ramp, double& bubble, double& mod,
                     std::array<double, 2>& dbubble, std::array<double, 2>& dmod) {
      const double tau = (t - q.bottom()) / q.T;
      ramp = tau * (1.0 + c1 * tau);
      bubble = 1.0;
      double e = c3 * tau;
      std::array<double, 2> xi{};
      for (int a = 0; a < n; ++a) {
        xi[a] = (x[a] - q.x0[a]) / q.R;
        bubble *= 1.0 - xi[a] * xi[a];
        e += amp[a] * std::sin(M_PI * k[a] * xi[a] + phase[a]);
      }
      mod = std::exp(e);
      for (int a = 0; a < n; ++a) {
        double others = 1.0;
        for (int b = 0; b < n; ++b)
          if (b != a) others *= 1.0 - xi[b] * xi[b];
        dbubble[a] = -2.0 * xi[a] / q.R * others;
        dmod[a] = mod * amp[a] * std::cos(M_PI * k[a] * xi[a] + phase[a]) * M_PI * k[a] / q.R;
      }
    };

    TestFunction tf;
    tf.label = "random-" + std::to_string(i);
    tf.v = [parts](double t, const SpacePoint& x) {
      double r, b, m;
      std::array<double, 2> db{}, dm{};
      parts(t, x, r, b, m, db, dm);
      return r * b * m;
    };
    tf.grad = [parts, n](double t, const SpacePoint& x) {
      double r, b, m;
      std::array<double, 2> db{}, dm{};
      parts(t, x, r, b, m, db, dm);
      Vec g{};
      for (int a = 0; a < n; ++a) g[a] = r * (db[a] * m + b * dm[a]);
      return g;
    };
    out.push_back(std::move(tf));
  }
  return out;
}

}  // namespace hlab
