#include "rockcap/physics/terrain.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rockcap::physics {

TerrainField TerrainField::flat(double x_min, double x_max, double cell_size, double z) {
  if (!(cell_size > 0.0) || !(x_max > x_min)) throw std::invalid_argument("terrain: bad extent");
  TerrainField t;
  t.cell_size = cell_size;
  t.x_origin = x_min;
  const auto n = static_cast<std::size_t>(std::ceil((x_max - x_min) / cell_size - 1e-9)) + 1;
  t.heights.assign(n, z);
  return t;
}

double TerrainField::height_at(double x) const {
  if (heights.empty()) return 0.0;
  const double u = (x - x_origin) / cell_size;
  if (u <= 0.0) return heights.front();
  const auto last = heights.size() - 1;
  if (u >= static_cast<double>(last)) return heights.back();
  const auto i = static_cast<std::size_t>(u);
  const double f = u - static_cast<double>(i);
  return heights[i] + f * (heights[i + 1] - heights[i]);
}

double TerrainField::slope_at(double x) const {
  if (heights.size() < 2) return 0.0;
  const double u = (x - x_origin) / cell_size;
  const auto last = heights.size() - 1;
  if (u < 0.0 || u >= static_cast<double>(last)) return 0.0;
  const auto i = static_cast<std::size_t>(u);
  return (heights[i + 1] - heights[i]) / cell_size;
}

double TerrainField::area_above(double datum) const {
  double a = 0.0;
  for (std::size_t i = 0; i + 1 < heights.size(); ++i)
    a += 0.5 * ((heights[i] - datum) + (heights[i + 1] - datum)) * cell_size;
  return a;
}

bool TerrainField::all_finite() const {
  return std::all_of(heights.begin(), heights.end(), [](double h) { return std::isfinite(h); });
}

}  // namespace rockcap::physics
