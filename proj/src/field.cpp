#include "hlab/field.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>

#include "json.hpp"

namespace hlab {

const char* to_string(BoundaryKind k) {
  switch (k) {
    case BoundaryKind::dirichlet: return "dirichlet";
    case BoundaryKind::neumann: return "neumann";
    case BoundaryKind::periodic: return "periodic";
  }
  return "unknown";
}

BoundaryKind boundary_from_string(const std::string& s) {
  if (s == "dirichlet") return BoundaryKind::dirichlet;
  if (s == "neumann") return BoundaryKind::neumann;
  if (s == "periodic") return BoundaryKind::periodic;
  throw PreconditionError("unknown boundary kind '" + s + "'");
}

std::size_t Grid::space_nodes() const {
  std::size_t m = 1;
  for (int k = 0; k < n(); ++k) m *= static_cast<std::size_t>(cells + 1);
  return m;
}

std::array<int, 2> Grid::axis_index(std::size_t k) const {
  const auto npa = static_cast<std::size_t>(nodes_per_axis());
  return {static_cast<int>(k % npa), n() == 2 ? static_cast<int>(k / npa) : 0};
}

std::size_t Grid::node(int i, int j) const {
  return static_cast<std::size_t>(i) + static_cast<std::size_t>(j) * nodes_per_axis();
}

SpacePoint Grid::point(std::size_t k) const {
  const auto ij = axis_index(k);
  SpacePoint x{coord(0, ij[0]), 0.0};
  if (n() == 2) x[1] = coord(1, ij[1]);
  return x;
}

int Grid::boundary_layer(std::size_t k) const {
  const auto ij = axis_index(k);
  int d = std::min(ij[0], cells - ij[0]);
  if (n() == 2) d = std::min(d, std::min(ij[1], cells - ij[1]));
  return d;
}

bool Grid::on_boundary(std::size_t k) const { return boundary_layer(k) == 0; }

void Grid::validate() const {
  cylinder.validate();
  if (cells < 2) throw PreconditionError("grid needs at least 2 cells per axis");
  if (steps < 1) throw PreconditionError("grid needs at least 1 time step");
}

Field::Field(Grid grid, BoundaryKind boundary, double fill)
    : grid_(grid), boundary_(boundary) {
  grid_.validate();
  values_.assign(static_cast<std::size_t>(grid_.steps + 1) * grid_.space_nodes(), fill);
}

std::vector<double> Field::slice(int m) const {
  const auto N = grid_.space_nodes();
  auto first = values_.begin() + static_cast<std::ptrdiff_t>(m * N);
  return {first, first + static_cast<std::ptrdiff_t>(N)};
}

void Field::set_slice(int m, const std::vector<double>& s) {
  if (s.size() != grid_.space_nodes()) throw PreconditionError("slice size does not match grid");
  std::copy(s.begin(), s.end(), values_.begin() + static_cast<std::ptrdiff_t>(m * s.size()));
}

Field Field::scaled(double lambda) const {
  return map([lambda](double v) { return lambda * v; });
}

double Field::min() const { return *std::min_element(values_.begin(), values_.end()); }
double Field::max() const { return *std::max_element(values_.begin(), values_.end()); }

Field sample_field(const Grid& grid, BoundaryKind boundary, const SpaceTimeFn& f) {
  Field out(grid, boundary);
  for (int m = 0; m <= grid.steps; ++m) {
    const double t = grid.time(m);
    for (std::size_t k = 0; k < grid.space_nodes(); ++k) out.at(m, k) = f(t, grid.point(k));
  }
  return out;
}

void write_field(const Field& f, const std::string& base) {
  const std::filesystem::path p(base);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  const auto& g = f.grid();
  nlohmann::ordered_json h;
  h["format"] = "float64-le time-major";
  h["cylinder"] = {{"t0", g.cylinder.t0},
                   {"x0", {g.cylinder.x0[0], g.cylinder.x0[1]}},
                   {"R", g.cylinder.R},
                   {"T", g.cylinder.T},
                   {"n", g.cylinder.n}};
  h["grid"] = {{"cells", g.cells}, {"steps", g.steps}, {"h", g.h()}, {"dt", g.dt()}};
  h["boundary"] = to_string(f.boundary());
  h["weight"] = f.weight_label;
  h["flux"] = f.flux_label;
  h["count"] = f.values().size();
  std::ofstream js(base + ".json");
  if (!js) throw std::runtime_error("cannot write " + base + ".json");
  js << std::setw(2) << h << "\n";
  std::ofstream bin(base + ".bin", std::ios::binary);
  if (!bin) throw std::runtime_error("cannot write " + base + ".bin");
  bin.write(reinterpret_cast<const char*>(f.values().data()),
            static_cast<std::streamsize>(f.values().size() * sizeof(double)));
}

Field read_field(const std::string& base) {
  std::ifstream js(base + ".json");
  if (!js) throw std::runtime_error("cannot read " + base + ".json");
  const auto h = nlohmann::json::parse(js);
  Grid g;
  g.cylinder.t0 = h["cylinder"]["t0"];
  g.cylinder.x0 = {h["cylinder"]["x0"][0], h["cylinder"]["x0"][1]};
  g.cylinder.R = h["cylinder"]["R"];
  g.cylinder.T = h["cylinder"]["T"];
  g.cylinder.n = h["cylinder"]["n"];
  g.cells = h["grid"]["cells"];
  g.steps = h["grid"]["steps"];
  Field f(g, boundary_from_string(h["boundary"]));
  f.weight_label = h["weight"];
  f.flux_label = h["flux"];
  if (h["count"].get<std::size_t>() != f.values().size())
    throw std::runtime_error("field header count does not match grid");
  std::ifstream bin(base + ".bin", std::ios::binary);
  if (!bin) throw std::runtime_error("cannot read " + base + ".bin");
  bin.read(reinterpret_cast<char*>(f.values().data()),
           static_cast<std::streamsize>(f.values().size() * sizeof(double)));
  if (!bin) throw std::runtime_error(base + ".bin is truncated");
  return f;
}

void write_slice_csv(const Field& f, int m, const std::string& path) {
  const auto& g = f.grid();
  if (m < 0 || m > g.steps) throw PreconditionError("slice index out of range");
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << std::setprecision(17);
  out << (g.n() == 2 ? "x,y,u\n" : "x,u\n");
  for (std::size_t k = 0; k < g.space_nodes(); ++k) {
    const auto x = g.point(k);
    out << x[0] << ',';
    if (g.n() == 2) out << x[1] << ',';
    out << f.at(m, k) << '\n';
  }
}

}  // namespace hlab
