#pragma once

#include <string>
#include <string_view>

#include "rockcap/physics/polygon.hpp"

namespace rockcap::physics {

enum class RockFamily { I, II, III, IV };

std::string_view to_string(RockFamily f);
RockFamily rock_family_from_string(std::string_view s);

struct RockShape {
  RockFamily family = RockFamily::I;
  Polygon vertices;              // rock-local, centred on the centroid, CCW
  double density = 2000.0;       // kg/m^3
  double effective_depth = 0.8;  // out-of-plane thickness, m

  double area() const { return signed_area(vertices); }
  double mass() const { return density * area() * effective_depth; }
  double inertia() const { return density * effective_depth * polar_moment_about_centroid(vertices); }
  // Largest vertex distance from the centroid.
  double clearance_radius() const { return max_radius(vertices, Vec2{}); }

  void validate() const;
};

// Fixed convex outlines for the four families; density is filled in by the caller.
RockShape rock_fixture(RockFamily family, double density = 2000.0);

}  // namespace rockcap::physics
