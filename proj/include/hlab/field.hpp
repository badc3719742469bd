#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "hlab/core.hpp"

namespace hlab {

enum class BoundaryKind { dirichlet, neumann, periodic };

const char* to_string(BoundaryKind k);
BoundaryKind boundary_from_string(const std::string& s);

/// Uniform space-time lattice covering a cylinder exactly: `cells` intervals
/// per spatial axis over (x0 - R, x0 + R) and `steps` intervals over
/// (t0 - T, t0). Spatial nodes are numbered i + j (cells + 1).
struct Grid {
  Cylinder cylinder;
  int cells = 128;
  int steps = 256;

  int n() const { return cylinder.n; }
  int nodes_per_axis() const { return cells + 1; }
  std::size_t space_nodes() const;
  double h() const { return 2.0 * cylinder.R / cells; }
  double dt() const { return cylinder.T / steps; }
  double time(int m) const { return cylinder.bottom() + m * dt(); }
  double coord(int axis, int i) const { return cylinder.x0[axis] - cylinder.R + i * h(); }
  /// Axis indices (i, j) of a spatial node.
  std::array<int, 2> axis_index(std::size_t k) const;
  std::size_t node(int i, int j = 0) const;
  SpacePoint point(std::size_t k) const;
  bool on_boundary(std::size_t k) const;
  /// Distance of a node from the boundary, in cells along the nearest axis.
  int boundary_layer(std::size_t k) const;

  void validate() const;
};

/// Node values on a Grid, time-major: values[m * space_nodes() + k].
/// Periodic fields store the duplicated end nodes with equal values.
class Field {
 public:
  Field() = default;
  Field(Grid grid, BoundaryKind boundary, double fill = 0.0);

  const Grid& grid() const { return grid_; }
  BoundaryKind boundary() const { return boundary_; }

  double& at(int m, std::size_t k) { return values_[m * grid_.space_nodes() + k]; }
  double at(int m, std::size_t k) const { return values_[m * grid_.space_nodes() + k]; }

  std::vector<double> slice(int m) const;
  void set_slice(int m, const std::vector<double>& s);

  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  /// Pointwise map, keeping the grid.
  template <class F>
  Field map(F f) const {
    Field out = *this;
    for (double& v : out.values_) v = f(v);
    return out;
  }
  Field scaled(double lambda) const;

  double min() const;
  double max() const;

  std::string weight_label = "unit";
  std::string flux_label = "model";

 private:
  Grid grid_;
  BoundaryKind boundary_ = BoundaryKind::dirichlet;
  std::vector<double> values_;
};

/// Samples f at every lattice node.
Field sample_field(const Grid& grid, BoundaryKind boundary, const SpaceTimeFn& f);

/// Writes `<base>.bin` (raw little-endian doubles, time-major) and
/// `<base>.json` (grid, cylinder, boundary, labels).
void write_field(const Field& f, const std::string& base);
Field read_field(const std::string& base);

/// CSV of one time slice: columns x (and y for n = 2) then u.
void write_slice_csv(const Field& f, int m, const std::string& path);

}  // namespace hlab
