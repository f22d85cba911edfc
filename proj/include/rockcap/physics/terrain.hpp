#pragma once

#include <vector>

namespace rockcap::physics {

// Ground elevation sampled at nodes x_origin + i * cell_size, linear in between.
struct TerrainField {
  double cell_size = 0.05;
  double x_origin = -15.0;
  std::vector<double> heights;

  static TerrainField flat(double x_min, double x_max, double cell_size, double z = 0.0);

  std::size_t size() const { return heights.size(); }
  double x_at(std::size_t i) const { return x_origin + static_cast<double>(i) * cell_size; }
  double x_max() const { return x_at(heights.empty() ? 0 : heights.size() - 1); }
  bool contains(double x) const { return x >= x_origin && x <= x_max(); }
  // Linear interpolation; clamps to the end heights outside the span.
  double height_at(double x) const;
  // dz/dx of the segment containing x.
  double slope_at(double x) const;
  // Total soil cross-section above `datum` (m^2).
  double area_above(double datum) const;
  bool all_finite() const;

  bool operator==(const TerrainField&) const = default;
};

}  // namespace rockcap::physics
