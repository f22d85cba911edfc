#pragma once

#include <span>
#include <vector>

#include "rockcap/core/vec2.hpp"

namespace rockcap::physics {

// Planar rigid body. inv_mass == 0 marks a static or kinematic body; a kinematic body still
// carries a velocity that contacts see.
struct RigidBody {
  Vec2 position;
  double angle = 0.0;
  Vec2 velocity;
  double omega = 0.0;
  double inv_mass = 0.0;
  double inv_inertia = 0.0;

  Vec2 point_velocity(Vec2 world_point) const {
    return velocity + cross(omega, world_point - position);
  }
};

struct Contact {
  RigidBody* a = nullptr;  // normal points from a to b
  RigidBody* b = nullptr;
  Vec2 point;
  Vec2 normal;
  double separation = 0.0;
  double friction = 0.0;
  int tag = 0;             // caller-defined source (terrain, bucket, ...)

  // Solver state.
  Vec2 ra, rb;
  double normal_mass = 0.0;
  double tangent_mass = 0.0;
  double target_normal_velocity = 0.0;
  double normal_impulse = 0.0;
  double tangent_impulse = 0.0;
};

struct ContactSolverSettings {
  int iterations = 20;
  double restitution = 0.0;
};

// Sequential impulses with accumulated clamping. Separated contacts (separation > 0) are
// speculative: the bodies may approach by at most separation / dt this step. Penetration is left
// to position projection, so the velocity pass never adds energy.
void solve_contact_velocities(std::span<Contact> contacts, double dt,
                              const ContactSolverSettings& settings = {});

// One nonlinear Gauss-Seidel push-out along the contact normal for contacts whose penetration
// exceeds `slop`; returns the largest penetration seen.
double project_contact_positions(std::span<Contact> contacts, double slop, double max_correction,
                                 double factor);

}  // namespace rockcap::physics
