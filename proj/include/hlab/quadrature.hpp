#pragma once

#include <vector>

#include "hlab/core.hpp"

namespace hlab {

enum class QuadratureRule { midpoint, gauss };

struct QuadratureSpec {
  /// Finest level; level l uses 2^l cells per axis.
  int levels = 6;
  QuadratureRule rule = QuadratureRule::midpoint;
  /// Nodes closer than this to the weight's singular set are clipped.
  double singular_tolerance = 1e-12;

  void validate() const;
};

/// Outcome of a refinement sequence. `value` is the finest-level estimate;
/// when `converged` is false the value is NaN and `sequence` shows the trend
/// that triggered the divergence verdict.
struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  bool converged = true;
  std::vector<double> sequence;
  std::size_t clipped_nodes = 0;
};

/// Axis-aligned box in up to three coordinates (time first for cylinders).
struct Box {
  std::array<double, 3> lo{};
  std::array<double, 3> hi{};
  int dims = 1;
  double volume() const;
};

using BoxFn = std::function<double(const std::array<double, 3>&)>;

/// Single-level composite rule on a box. Nodes where `distance` is below
/// `tol`, or where f is not finite, are skipped and counted in *clipped.
double integrate_box_level(const BoxFn& f, const Box& box, int level, QuadratureRule rule,
                           const BoxFn& distance = {}, double tol = 0.0,
                           std::size_t* clipped = nullptr);

/// Refinement sequence over levels max(1, L-3)..L with divergence detection
/// and a tail error estimate.
QuadratureResult integrate_box(const BoxFn& f, const Box& box, const QuadratureSpec& spec,
                               const BoxFn& distance = {});

Box cylinder_box(const Cylinder& q);

/// Integral of f over Q at a single level.
double cylinder_integral_level(const SpaceTimeFn& f, const Cylinder& q, int level,
                               QuadratureRule rule, const SpaceTimeFn& distance = {},
                               double tol = 0.0);

QuadratureResult cylinder_integral(const SpaceTimeFn& f, const Cylinder& q,
                                   const QuadratureSpec& spec, const SpaceTimeFn& distance = {});

/// (1/|Q|) * integral of f over Q.
QuadratureResult cylinder_average(const SpaceTimeFn& f, const Cylinder& q,
                                  const QuadratureSpec& spec, const SpaceTimeFn& distance = {});

/// Analyses a refinement sequence: returns {converged, error estimate}.
std::pair<bool, double> assess_sequence(const std::vector<double>& seq);

}  // namespace hlab
