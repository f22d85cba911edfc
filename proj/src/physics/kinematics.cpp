#include "rockcap/physics/kinematics.hpp"

#include <stdexcept>
#include <string>

namespace rockcap::physics {

KinematicPose forward_kinematics(const ExcavatorGeometry& g, const Vec3& ext) {
  static const char* names[3] = {"boom", "arm", "bucket"};
  for (int i = 0; i < 3; ++i) {
    if (!std::isfinite(ext[i]) || !g.actuators[i].within(ext[i]))
      throw std::domain_error(std::string("forward_kinematics: ") + names[i] +
                              " extension outside actuator limits");
  }
  KinematicPose p;
  for (int i = 0; i < 3; ++i) p.joint_angles[i] = g.actuators[i].angle(ext[i]);
  p.link_angles[0] = p.joint_angles[0];
  p.link_angles[1] = p.link_angles[0] + p.joint_angles[1];
  p.link_angles[2] = p.link_angles[1] + p.joint_angles[2];

  p.boom_foot = g.base_anchor;
  p.arm_pivot = p.boom_foot + unit_from_angle(p.link_angles[0]) * g.link_lengths[0];
  p.bucket_pivot = p.arm_pivot + unit_from_angle(p.link_angles[1]) * g.link_lengths[1];
  p.bucket_frame = Pose2{p.bucket_pivot, p.link_angles[2]};
  p.bucket_tip = p.bucket_frame.apply({g.link_lengths[2], 0.0});
  p.bucket_polygon_world = transformed(g.bucket_polygon, p.bucket_frame);
  p.bucket_center = centroid(p.bucket_polygon_world);
  return p;
}

std::array<Vec2, 3> point_jacobian(const ExcavatorGeometry& g, const KinematicPose& pose,
                                   Vec2 point, Joint link) {
  std::array<Vec2, 3> j{};
  const Vec2 pivots[3] = {pose.boom_foot, pose.arm_pivot, pose.bucket_pivot};
  for (int i = 0; i <= static_cast<int>(link); ++i)
    j[i] = perp(point - pivots[i]) * g.actuators[i].slope;
  return j;
}

std::vector<Polygon> bucket_wall_plates(const ExcavatorGeometry& g, const Pose2& frame) {
  const Polygon& local = g.bucket_polygon;
  std::vector<Polygon> plates;
  // Edges 0..n-2 form the shell; the closing edge (last vertex back to the pivot) is the opening.
  for (std::size_t i = 0; i + 1 < local.size(); ++i) {
    const Vec2 a = local[i];
    const Vec2 b = local[i + 1];
    const Vec2 out = edge_normal(local, static_cast<int>(i)) * g.bucket_wall_thickness;
    // CCW plate: inner face a->b is the shell surface, outer face offset outward.
    Polygon plate = {a, a + out, b + out, b};
    if (signed_area(plate) < 0) plate = {a, b, b + out, a + out};
    plates.push_back(transformed(plate, frame));
  }
  return plates;
}

}  // namespace rockcap::physics
