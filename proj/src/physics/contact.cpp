#include "rockcap/physics/contact.hpp"

#include <algorithm>
#include <cmath>

namespace rockcap::physics {

namespace {

double effective_mass(const RigidBody& a, const RigidBody& b, Vec2 ra, Vec2 rb, Vec2 dir) {
  const double rna = cross(ra, dir);
  const double rnb = cross(rb, dir);
  const double k = a.inv_mass + b.inv_mass + a.inv_inertia * rna * rna + b.inv_inertia * rnb * rnb;
  return k > 0.0 ? 1.0 / k : 0.0;
}

void apply_impulse(RigidBody& a, RigidBody& b, Vec2 ra, Vec2 rb, Vec2 impulse) {
  a.velocity -= impulse * a.inv_mass;
  a.omega -= a.inv_inertia * cross(ra, impulse);
  b.velocity += impulse * b.inv_mass;
  b.omega += b.inv_inertia * cross(rb, impulse);
}

Vec2 relative_velocity(const RigidBody& a, const RigidBody& b, Vec2 ra, Vec2 rb) {
  return b.velocity + cross(b.omega, rb) - a.velocity - cross(a.omega, ra);
}

}  // namespace

void solve_contact_velocities(std::span<Contact> contacts, double dt,
                              const ContactSolverSettings& settings) {
  for (Contact& c : contacts) {
    c.ra = c.point - c.a->position;
    c.rb = c.point - c.b->position;
    c.normal_mass = effective_mass(*c.a, *c.b, c.ra, c.rb, c.normal);
    c.tangent_mass = effective_mass(*c.a, *c.b, c.ra, c.rb, perp(c.normal));
    const double vn = dot(relative_velocity(*c.a, *c.b, c.ra, c.rb), c.normal);
    c.target_normal_velocity = 0.0;
    if (c.separation > 0.0) c.target_normal_velocity = -c.separation / dt;
    if (settings.restitution > 0.0 && vn < -1.0)
      c.target_normal_velocity = std::max(c.target_normal_velocity, -settings.restitution * vn);
    c.normal_impulse = 0.0;
    c.tangent_impulse = 0.0;
  }

  for (int it = 0; it < settings.iterations; ++it) {
    for (Contact& c : contacts) {
      if (c.normal_mass == 0.0) continue;
      const Vec2 t = perp(c.normal);

      // Friction first so the normal pass has the final word on penetration.
      if (c.friction > 0.0 && c.tangent_mass > 0.0) {
        const double vt = dot(relative_velocity(*c.a, *c.b, c.ra, c.rb), t);
        const double limit = c.friction * c.normal_impulse;
        const double old = c.tangent_impulse;
        c.tangent_impulse = std::clamp(old - c.tangent_mass * vt, -limit, limit);
        apply_impulse(*c.a, *c.b, c.ra, c.rb, t * (c.tangent_impulse - old));
      }

      const double vn = dot(relative_velocity(*c.a, *c.b, c.ra, c.rb), c.normal);
      const double old = c.normal_impulse;
      c.normal_impulse = std::max(0.0, old - c.normal_mass * (vn - c.target_normal_velocity));
      apply_impulse(*c.a, *c.b, c.ra, c.rb, c.normal * (c.normal_impulse - old));
    }
  }
}

double project_contact_positions(std::span<Contact> contacts, double slop, double max_correction,
                                 double factor) {
  double worst = 0.0;
  for (Contact& c : contacts) {
    RigidBody& a = *c.a;
    RigidBody& b = *c.b;
    const double penetration = -c.separation;
    worst = std::max(worst, penetration);
    if (penetration <= slop) continue;
    const Vec2 ra = c.point - a.position;
    const Vec2 rb = c.point - b.position;
    const double k = effective_mass(a, b, ra, rb, c.normal);
    if (k == 0.0) continue;
    const double correction = std::min(factor * (penetration - slop), max_correction);
    const Vec2 p = c.normal * (k * correction);
    a.position -= p * a.inv_mass;
    a.angle -= a.inv_inertia * cross(ra, p);
    b.position += p * b.inv_mass;
    b.angle += b.inv_inertia * cross(rb, p);
  }
  return worst;
}

}  // namespace rockcap::physics
