#pragma once

#include <array>
#include <vector>

#include "rockcap/physics/geometry.hpp"

namespace rockcap::physics {

struct KinematicPose {
  Vec3 joint_angles{};     // boom absolute, arm and bucket relative (rad)
  Vec3 link_angles{};      // absolute angle of each link from +x
  Vec2 boom_foot;
  Vec2 arm_pivot;          // boom tip
  Vec2 bucket_pivot;       // arm tip
  Vec2 bucket_tip;
  Pose2 bucket_frame;      // origin at bucket pivot, +u towards the tip
  Polygon bucket_polygon_world;
  Vec2 bucket_center;      // centroid of bucket_polygon_world
};

// Throws std::domain_error if any extension is outside its actuator limits.
KinematicPose forward_kinematics(const ExcavatorGeometry& geometry, const Vec3& actuator_ext);

// d(point)/d(extension_i) for a point rigidly attached to `link` (kBoom, kArm or kBucket).
std::array<Vec2, 3> point_jacobian(const ExcavatorGeometry& geometry, const KinematicPose& pose,
                                   Vec2 point, Joint link);

// Thin convex plates along the bucket shell; the open chord from tip back to pivot has none.
std::vector<Polygon> bucket_wall_plates(const ExcavatorGeometry& geometry,
                                        const Pose2& bucket_frame);

}  // namespace rockcap::physics
