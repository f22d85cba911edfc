#pragma once

#include <array>
#include <filesystem>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "rockcap/core/vec2.hpp"
#include "rockcap/physics/polygon.hpp"

namespace rockcap::physics {

using Vec3 = std::array<double, 3>;

enum Joint : int { kBoom = 0, kArm = 1, kBucket = 2 };

// Affine actuator map: joint angle = offset + slope * extension.
// For the boom the angle is absolute (from +x, counter-clockwise); arm and bucket are relative to
// the preceding link.
struct ActuatorMap {
  double offset = 0.0;  // rad
  double slope = 1.0;   // rad/m
  double min_ext = -1.0;
  double max_ext = 1.0;

  double angle(double ext) const { return offset + slope * ext; }
  bool within(double ext) const { return ext >= min_ext && ext <= max_ext; }
  double clamp(double ext) const;
};

struct ExcavatorGeometry {
  std::string version;
  Vec2 base_anchor;                 // boom foot pin in the base frame
  Vec3 link_lengths{};              // boom, arm, bucket (pivot to tip)
  std::array<ActuatorMap, 3> actuators;
  Polygon bucket_polygon;           // bucket-local: +u from pivot to tip, CCW winding
  double bucket_wall_thickness = 0.08;
  double bucket_width = 1.8;        // out-of-plane, m
  Vec3 max_speeds{0.3, 0.3, 0.2};   // m/s
  Vec3 link_masses{2000.0, 1000.0, 1000.0};
  double bucket_capacity = 3.8;     // m^3
  double machine_mass = 65960.0;
  double machine_com_x = 0.3;       // base-frame x of the machine centre of mass
  double track_half_length = 2.9;   // forward track edge sits at x = -track_half_length
  double track_half_width = 1.7;

  // Throws std::invalid_argument describing the first violated invariant.
  void validate() const;
};

// The calibrated geometry fixture shipped in config/geometry.cfg.
ExcavatorGeometry default_geometry();
ExcavatorGeometry load_geometry(const std::filesystem::path& path);
ExcavatorGeometry geometry_from_json(const nlohmann::json& j);
nlohmann::json geometry_to_json(const ExcavatorGeometry& g);

}  // namespace rockcap::physics
