#include "hlab/solver.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <limits>

namespace hlab {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using VecX = Eigen::VectorXd;

struct Element {
  std::array<std::size_t, 3> nodes{};
  std::array<Vec, 3> grad{};  // gradient of each local basis function
  int count = 2;
  double meas = 0.0;
  SpacePoint center{};
};

struct Mesh {
  std::vector<Element> elements;
  std::vector<std::size_t> canonical;  // node -> representative node
  std::vector<long> unknown;           // node -> unknown index, -1 if fixed
  std::vector<std::size_t> free_nodes;  // unknown index -> node
  std::vector<double> volume;           // lumped volume per node (0 for duplicates)
};

Mesh build_mesh(const Grid& g, BoundaryKind kind) {
  g.validate();
  Mesh mesh;
  const int N = g.cells;
  const double h = g.h();
  const std::size_t nn = g.space_nodes();
  mesh.canonical.resize(nn);
  for (std::size_t k = 0; k < nn; ++k) {
    auto ij = g.axis_index(k);
    if (kind == BoundaryKind::periodic) {
      ij[0] %= N;
      if (g.n() == 2) ij[1] %= N;
    }
    mesh.canonical[k] = g.node(ij[0], ij[1]);
  }
  auto canon = [&](int i, int j) { return mesh.canonical[g.node(i, j)]; };

  if (g.n() == 1) {
    for (int e = 0; e < N; ++e) {
      Element el;
      el.count = 2;
      el.nodes = {canon(e, 0), canon(e + 1, 0), 0};
      el.grad[0] = {-1.0 / h, 0.0};
      el.grad[1] = {1.0 / h, 0.0};
      el.meas = h;
      el.center = {g.coord(0, e) + 0.5 * h, 0.0};
      mesh.elements.push_back(el);
    }
  } else {
    for (int j = 0; j < N; ++j) {
      for (int i = 0; i < N; ++i) {
        const double xi = g.coord(0, i), yj = g.coord(1, j);
        Element t1;
        t1.count = 3;
        t1.nodes = {canon(i, j), canon(i + 1, j), canon(i + 1, j + 1)};
        t1.grad = {Vec{-1.0 / h, 0.0}, Vec{1.0 / h, -1.0 / h}, Vec{0.0, 1.0 / h}};
        t1.meas = 0.5 * h * h;
        t1.center = {xi + 2.0 * h / 3.0, yj + h / 3.0};
        mesh.elements.push_back(t1);
        Element t2;
        t2.count = 3;
        t2.nodes = {canon(i, j), canon(i + 1, j + 1), canon(i, j + 1)};
        t2.grad = {Vec{0.0, -1.0 / h}, Vec{1.0 / h, 0.0}, Vec{-1.0 / h, 1.0 / h}};
        t2.meas = 0.5 * h * h;
        t2.center = {xi + h / 3.0, yj + 2.0 * h / 3.0};
        mesh.elements.push_back(t2);
      }
    }
  }

  mesh.volume.assign(nn, 0.0);
  for (const auto& el : mesh.elements)
    for (int l = 0; l < el.count; ++l) mesh.volume[el.nodes[l]] += el.meas / el.count;

  mesh.unknown.assign(nn, -1);
  for (std::size_t k = 0; k < nn; ++k) {
    if (mesh.canonical[k] != k) continue;
    if (kind == BoundaryKind::dirichlet && g.on_boundary(k)) continue;
    mesh.unknown[k] = static_cast<long>(mesh.free_nodes.size());
    mesh.free_nodes.push_back(k);
  }
  return mesh;
}

double bpow(double u, double p) { return u == 0.0 ? 0.0 : std::pow(std::abs(u), p - 2.0) * u; }

struct Evaluation {
  VecX R;
  SpMat H;
  double J = 0.0;
  bool has_energy = false;
  double res = 0.0;  // scaled max-norm residual
};

class StepProblem {
 public:
  StepProblem(const Grid& g, const Mesh& mesh, const std::vector<double>& um, double t1, double dt,
              const Flux& flux, double p, double eps, double bscale)
      : g_(g), mesh_(mesh), um_(um), t1_(t1), dt_(dt), flux_(flux), p_(p), eps_(eps),
        bscale_(bscale) {}

  Evaluation evaluate(const std::vector<double>& u, bool jacobian) const {
    const std::size_t m = mesh_.free_nodes.size();
    const int n = g_.n();
    Evaluation ev;
    ev.R = VecX::Zero(static_cast<Eigen::Index>(m));
    ev.has_energy = static_cast<bool>(flux_.linearize);
    std::vector<Eigen::Triplet<double>> trip;
    if (jacobian) trip.reserve(m + mesh_.elements.size() * 9);

    for (std::size_t I = 0; I < m; ++I) {
      const std::size_t k = mesh_.free_nodes[I];
      const double w = mesh_.volume[k];
      const double bm = bpow(um_[k], p_);
      ev.R[static_cast<Eigen::Index>(I)] += w * (bpow(u[k], p_) - bm) / dt_;
      ev.J += w * (std::pow(std::abs(u[k]), p_) / p_ - bm * u[k]) / dt_;
      if (jacobian) {
        const double d = u[k] == 0.0 ? 0.0 : (p_ - 1.0) * std::pow(std::abs(u[k]), p_ - 2.0);
        trip.emplace_back(I, I, w * d / dt_);
      }
    }

    for (const auto& el : mesh_.elements) {
      Vec grad{};
      double xi = 0.0;
      for (int l = 0; l < el.count; ++l) {
        const double ul = u[el.nodes[l]];
        xi += ul / el.count;
        for (int c = 0; c < n; ++c) grad[c] += ul * el.grad[l][c];
      }
      Vec A{};
      std::array<Vec, 2> dA{};
      if (flux_.linearize) {
        const auto L = flux_.linearize(t1_, el.center, grad, eps_);
        A = L.A;
        dA = L.dA;
        ev.J += el.meas * L.potential;
      } else {
        A = flux_.A(t1_, el.center, xi, grad);
        if (jacobian) {
          const double step = 1e-7 * std::max(norm(grad, n), eps_);
          for (int c = 0; c < n; ++c) {
            Vec gp = grad, gm = grad;
            gp[c] += step;
            gm[c] -= step;
            const Vec ap = flux_.A(t1_, el.center, xi, gp);
            const Vec am = flux_.A(t1_, el.center, xi, gm);
            for (int r = 0; r < n; ++r) dA[r][c] = (ap[r] - am[r]) / (2.0 * step);
          }
        }
      }
      for (int l = 0; l < el.count; ++l) {
        const long I = mesh_.unknown[el.nodes[l]];
        if (I < 0) continue;
        ev.R[I] += el.meas * dot(A, el.grad[l], n);
        if (!jacobian) continue;
        for (int q = 0; q < el.count; ++q) {
          const long K = mesh_.unknown[el.nodes[q]];
          if (K < 0) continue;
          double v = 0.0;
          for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) v += el.grad[l][r] * dA[r][c] * el.grad[q][c];
          trip.emplace_back(I, K, el.meas * v);
        }
      }
    }

    double worst = 0.0;
    for (std::size_t I = 0; I < m; ++I)
      worst = std::max(worst, std::abs(ev.R[static_cast<Eigen::Index>(I)]) /
                                  mesh_.volume[mesh_.free_nodes[I]]);
    ev.res = worst * dt_ / bscale_;
    if (!std::isfinite(ev.res)) ev.res = std::numeric_limits<double>::infinity();

    if (jacobian) {
      ev.H.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
      ev.H.setFromTriplets(trip.begin(), trip.end());
    }
    return ev;
  }

 private:
  const Grid& g_;
  const Mesh& mesh_;
  const std::vector<double>& um_;
  double t1_, dt_;
  const Flux& flux_;
  double p_, eps_, bscale_;
};

bool solve_linear(const SpMat& H, const VecX& rhs, bool symmetric, VecX& out) {
  if (symmetric) {
    Eigen::SimplicialLDLT<SpMat> ldlt(H);
    if (ldlt.info() == Eigen::Success) {
      out = ldlt.solve(rhs);
      if (ldlt.info() == Eigen::Success && out.allFinite()) return true;
    }
  }
  Eigen::SparseLU<SpMat> lu;
  lu.analyzePattern(H);
  lu.factorize(H);
  if (lu.info() != Eigen::Success) return false;
  out = lu.solve(rhs);
  return lu.info() == Eigen::Success && out.allFinite();
}

void sync_duplicates(const Mesh& mesh, std::vector<double>& u) {
  for (std::size_t k = 0; k < u.size(); ++k)
    if (mesh.canonical[k] != k) u[k] = u[mesh.canonical[k]];
}

}  // namespace

std::vector<double> nodal_volumes(const Grid& grid, BoundaryKind boundary) {
  return build_mesh(grid, boundary).volume;
}

double discrete_mass(const Grid& grid, BoundaryKind boundary, const std::vector<double>& u,
                     double p) {
  const auto vol = nodal_volumes(grid, boundary);
  double s = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) s += vol[k] * bpow(u[k], p);
  return s;
}

StepResult step(const Grid& grid, BoundaryKind boundary, const std::vector<double>& um, double t,
                double dt, const Flux& flux, const Weight& w, const SpaceTimeFn& bc,
                const SolverOptions& opt) {
  if (um.size() != grid.space_nodes()) throw PreconditionError("step: slice size does not match grid");
  if (!(dt > 0.0)) throw PreconditionError("step: dt must be positive");
  if (boundary == BoundaryKind::dirichlet && !bc) throw PreconditionError("step: Dirichlet run without boundary data");
  if (!flux.A && !flux.linearize) throw PreconditionError("step: flux has no callback");
  for (double v : um) {
    if (!std::isfinite(v)) throw PreconditionError("step: u^m is not finite");
    if (opt.positivity && !(v > 0.0)) throw PreconditionError("step: positivity mode needs u^m > 0");
  }
  const double p = w.exponents().p;
  const double t1 = t + dt;
  const Mesh mesh = build_mesh(grid, boundary);

  StepResult out;
  out.u = um;
  if (boundary == BoundaryKind::dirichlet) {
    for (std::size_t k = 0; k < um.size(); ++k)
      if (grid.on_boundary(k)) out.u[k] = bc(t1, grid.point(k));
  }
  sync_duplicates(mesh, out.u);

  double umax = 0.0, bmax = 0.0;
  for (std::size_t k = 0; k < um.size(); ++k) {
    umax = std::max({umax, std::abs(um[k]), std::abs(out.u[k])});
    bmax = std::max({bmax, std::abs(bpow(um[k], p)), std::abs(bpow(out.u[k], p))});
  }
  const double R = grid.cylinder.R;
  const double eps =
      umax > 0.0 ? std::max(opt.eps_floor, grid.h() / R) * umax / R : opt.eps_floor;
  const double bscale = bmax > 0.0 ? bmax : 1.0;
  StepProblem prob(grid, mesh, um, t1, dt, flux, p, eps, bscale);

  auto& rep = out.report;
  const bool symmetric = static_cast<bool>(flux.linearize);
  Evaluation ev = prob.evaluate(out.u, true);
  for (int it = 0; it <= opt.max_newton; ++it) {
    rep.residual_norm = ev.res;
    if (ev.res <= opt.tolerance) {
      rep.converged = true;
      break;
    }
    if (it == opt.max_newton) {
      rep.message = "Newton iteration limit reached";
      break;
    }
    ++rep.newton_iterations;
    VecX delta;
    if (!solve_linear(ev.H, -ev.R, symmetric, delta)) {
      rep.message = "singular Newton system";
      break;
    }
    double theta = 1.0;
    if (opt.positivity) {
      for (std::size_t I = 0; I < mesh.free_nodes.size(); ++I) {
        const double d = delta[static_cast<Eigen::Index>(I)];
        const double u = out.u[mesh.free_nodes[I]];
        if (d < 0.0) theta = std::min(theta, 0.9 * u / -d);
      }
    }
    const double slope = ev.R.dot(delta);
    std::vector<double> trial = out.u;
    bool accepted = false;
    Evaluation tev;
    for (int ls = 0; ls < 40; ++ls) {
      for (std::size_t I = 0; I < mesh.free_nodes.size(); ++I)
        trial[mesh.free_nodes[I]] = out.u[mesh.free_nodes[I]] + theta * delta[static_cast<Eigen::Index>(I)];
      sync_duplicates(mesh, trial);
      tev = prob.evaluate(trial, false);
      const bool energy_ok = ev.has_energy && tev.J <= ev.J + 1e-4 * theta * slope;
      const bool residual_ok = tev.res < (1.0 - 1e-4 * theta) * ev.res;
      if (std::isfinite(tev.res) && (energy_ok || residual_ok)) {
        accepted = true;
        break;
      }
      theta *= 0.5;
    }
    if (!accepted) {
      rep.message = "line search failed";
      break;
    }
    const double upd = theta * delta.lpNorm<Eigen::Infinity>();
    double unorm = 0.0;
    for (double v : trial) unorm = std::max(unorm, std::abs(v));
    out.u = trial;
    ev = prob.evaluate(out.u, true);
    // Updates at the roundoff level cannot reduce the residual further.
    if (upd <= 1e-14 * unorm) {
      rep.residual_norm = ev.res;
      rep.converged = ev.res <= std::sqrt(opt.tolerance);
      rep.message = rep.converged ? "stopped at roundoff floor" : "stagnated";
      break;
    }
  }

  for (double v : out.u) {
    if (!(v > 0.0)) rep.positivity_preserved = false;
  }
  if (opt.positivity && !rep.positivity_preserved) {
    rep.converged = false;
    rep.message = "positivity lost";
  }
  if (!rep.converged && rep.message.empty()) rep.message = "not converged";
  return out;
}

SolveResult solve(const Grid& grid, BoundaryKind boundary, const std::vector<double>& u0,
                  const SpaceTimeFn& bc, const Flux& flux, const Weight& w,
                  const SolverOptions& opt) {
  grid.validate();
  if (grid.n() != w.exponents().n) throw PreconditionError("solve: grid and weight dimensions differ");
  SolveResult res;
  res.field = Field(grid, boundary, std::numeric_limits<double>::quiet_NaN());
  res.field.weight_label = w.label();
  res.field.flux_label = flux.label;
  std::vector<double> u = u0;
  if (boundary == BoundaryKind::periodic) sync_duplicates(build_mesh(grid, boundary), u);
  res.field.set_slice(0, u);
  for (int m = 0; m < grid.steps; ++m) {
    auto sr = step(grid, boundary, u, grid.time(m), grid.dt(), flux, w, bc, opt);
    res.reports.push_back(sr.report);
    if (!sr.report.converged) {
      res.ok = false;
      res.failed_step = m;
      res.failure = "step " + std::to_string(m) + ": " + sr.report.message;
      break;
    }
    u = std::move(sr.u);
    res.field.set_slice(m + 1, u);
  }
  return res;
}

double weak_residual(const Field& u, const Flux& flux, const TestFunction& v, double p) {
  if (!v.v || !v.grad) throw PreconditionError("weak_residual: incomplete test function");
  if (!flux.A) throw PreconditionError("weak_residual: flux has no callback");
  const Grid& g = u.grid();
  const int n = g.n();
  const std::size_t nn = g.space_nodes();
  const Mesh mesh = build_mesh(g, BoundaryKind::neumann);

  // v must vanish on the bottom slice and on the lateral boundary.
  double vmax = 0.0, vgamma = 0.0;
  for (int m = 0; m <= g.steps; ++m) {
    for (std::size_t k = 0; k < nn; ++k) {
      const double val = std::abs(v.v(g.time(m), g.point(k)));
      vmax = std::max(vmax, val);
      if (m == 0 || g.on_boundary(k)) vgamma = std::max(vgamma, val);
    }
  }
  if (vgamma > 1e-12 * std::max(vmax, 1.0))
    throw PreconditionError("weak_residual: test function does not vanish on the parabolic boundary");

  auto slice_b = [&](int m) {
    std::vector<double> b(nn);
    for (std::size_t k = 0; k < nn; ++k) b[k] = bpow(u.at(m, k), p);
    return b;
  };

  double top = 0.0, flux_term = 0.0, time_term = 0.0;
  std::vector<double> b0 = slice_b(0), vm(nn);
  for (std::size_t k = 0; k < nn; ++k) vm[k] = v.v(g.time(0), g.point(k));
  for (int m = 0; m < g.steps; ++m) {
    const double t1 = g.time(m + 1);
    const double tmid = 0.5 * (g.time(m) + t1);
    std::vector<double> b1 = slice_b(m + 1), v1(nn);
    for (std::size_t k = 0; k < nn; ++k) {
      v1[k] = v.v(t1, g.point(k));
      time_term += mesh.volume[k] * 0.5 * (b0[k] + b1[k]) * (v1[k] - vm[k]);
    }
    for (const auto& el : mesh.elements) {
      Vec grad{};
      double xi = 0.0;
      for (int l = 0; l < el.count; ++l) {
        const double ul = u.at(m + 1, el.nodes[l]);
        xi += ul / el.count;
        for (int c = 0; c < n; ++c) grad[c] += ul * el.grad[l][c];
      }
      const Vec A = flux.A(t1, el.center, xi, grad);
      flux_term += el.meas * g.dt() * dot(A, v.grad(tmid, el.center), n);
    }
    b0 = std::move(b1);
    vm = std::move(v1);
  }
  for (std::size_t k = 0; k < nn; ++k) top += mesh.volume[k] * b0[k] * vm[k];
  return -top - flux_term + time_term;
}

SolveResult solve(const Grid& grid, BoundaryKind boundary, const SpaceTimeFn& init,
                  const SpaceTimeFn& bc, const Flux& flux, const Weight& w,
                  const SolverOptions& opt) {
  std::vector<double> u0(grid.space_nodes());
  for (std::size_t k = 0; k < u0.size(); ++k) u0[k] = init(grid.time(0), grid.point(k));
  return solve(grid, boundary, u0, bc, flux, w, opt);
}

}  // namespace hlab
