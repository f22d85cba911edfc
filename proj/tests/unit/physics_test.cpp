#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "doctest.h"
#include "rockcap/physics/world.hpp"

using namespace rockcap;
using namespace rockcap::physics;

namespace {

struct TableRow {
  Vec3 ext;
  double midpoint;
  double rock_x;  // a representative spawn x inside the row
};

// Initial manipulator configurations keyed on the rock's x; open-ended rows use their boundary.
const TableRow kRows[] = {
    {{0.13, 0.24, -0.88}, -8.0, -8.0},     {{0.08, 0.11, -0.80}, -8.25, -8.25},
    {{0.06, -0.03, -0.74}, -8.75, -8.75},  {{0.03, -0.15, -0.74}, -9.25, -9.25},
    {{-0.01, -0.33, -0.70}, -9.75, -9.75}, {{-0.03, -0.39, -0.70}, -10.25, -10.25},
    {{-0.10, -0.57, -0.70}, -10.75, -10.75}, {{-0.10, -0.70, -0.70}, -11.25, -11.25},
    {{-0.16, -0.80, -0.78}, -11.5, -11.5},
};

WorldModel make_model() {
  WorldModel m;
  m.geometry = default_geometry();
  m.material = dirt();
  m.rock = rock_fixture(RockFamily::I, 2000.0);
  return m;
}

WorldState make_world(const WorldModel& m, Vec3 ext, double rock_x) {
  WorldState s;
  s.terrain = default_terrain();
  s.actuator_ext = ext;
  s.rock_pose = rock_on_terrain_spawn(m.rock, rock_x, s.terrain);
  s.joint_forces = static_joint_forces(s, m);
  return s;
}

}  // namespace

TEST_CASE("polygon helpers") {
  const Polygon square = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  CHECK(signed_area(square) == doctest::Approx(1.0));
  CHECK(centroid(square).x == doctest::Approx(0.5));
  CHECK(polar_moment_about_centroid(square) == doctest::Approx(1.0 / 6.0));
  CHECK(is_convex(square));
  const Polygon bowtie = {{0, 0}, {1, 1}, {1, 0}, {0, 1}};
  CHECK_FALSE(is_simple(bowtie));
}

TEST_CASE("collide_convex reports penetration along the separating axis") {
  const Polygon a = {{0, 0}, {2, 0}, {2, 1}, {0, 1}};
  const Polygon b = {{0.5, 0.9}, {1.5, 0.9}, {1.5, 1.9}, {0.5, 1.9}};
  const Manifold m = collide_convex(a, b, 0.0);
  REQUIRE(m.count == 2);
  CHECK(m.normal.z == doctest::Approx(1.0));
  CHECK(m.points[0].separation == doctest::Approx(-0.1));
  const Manifold none = collide_convex(a, b, -0.2);
  CHECK(none.count == 0);
}

TEST_CASE("geometry fixture invariants") {
  const ExcavatorGeometry g = default_geometry();
  CHECK_NOTHROW(g.validate());
  for (const TableRow& row : kRows)
    for (int i = 0; i < 3; ++i) CHECK(g.actuators[i].within(row.ext[i]));
  CHECK(g.max_speeds == Vec3{0.3, 0.3, 0.2});
}

TEST_CASE("rock fixtures") {
  const double radii[] = {0.50, 0.45, 0.60, 0.55};
  int k = 0;
  for (RockFamily f : {RockFamily::I, RockFamily::II, RockFamily::III, RockFamily::IV}) {
    const RockShape r = rock_fixture(f, 2000.0);
    CHECK(is_convex(r.vertices));
    CHECK(r.mass() > 0.0);
    CHECK(r.inertia() > 0.0);
    CHECK(r.clearance_radius() == doctest::Approx(radii[k++]).epsilon(1e-12));
    CHECK(std::abs(centroid(r.vertices).x) < 1e-12);
  }
  CHECK(rock_family_from_string("III") == RockFamily::III);
  CHECK_THROWS(rock_family_from_string("V"));
}

TEST_CASE("forward_kinematics") {
  const ExcavatorGeometry g = default_geometry();

  SUBCASE("reference pose matches the frozen fixture evaluation") {
    const KinematicPose p = forward_kinematics(g, {0.0, 0.0, 0.0});
    CHECK(p.bucket_center.x == doctest::Approx(-7.098229379876325).epsilon(1e-12));
    CHECK(p.bucket_center.z == doctest::Approx(2.2977403693651444).epsilon(1e-12));
    CHECK(p.link_angles[1] == doctest::Approx(4.6501).epsilon(1e-12));
    CHECK(p.link_angles[2] == doctest::Approx(5.9841).epsilon(1e-12));
  }

  SUBCASE("deterministic") {
    const KinematicPose a = forward_kinematics(g, {0.13, 0.24, -0.88});
    const KinematicPose b = forward_kinematics(g, {0.13, 0.24, -0.88});
    CHECK(a.bucket_center == b.bucket_center);
    CHECK(a.bucket_polygon_world == b.bucket_polygon_world);
    CHECK(a.bucket_center.x == doctest::Approx(-7.473529264740775).epsilon(1e-12));
  }

  SUBCASE("bucket starts behind and above the rock for every table row") {
    const RockShape big = rock_fixture(RockFamily::III);
    for (const TableRow& row : kRows) {
      const KinematicPose p = forward_kinematics(g, row.ext);
      CHECK(p.bucket_center.x > row.midpoint);
      const double rock_top = 0.5 + 2.0 * big.clearance_radius();
      CHECK(p.bucket_center.z > rock_top);
    }
  }

  SUBCASE("out-of-limit extension is a domain error") {
    CHECK_THROWS_AS(forward_kinematics(g, {2.0, 0.0, 0.0}), std::domain_error);
    CHECK_THROWS_AS(forward_kinematics(g, {0.0, 0.0, -5.0}), std::domain_error);
  }

  SUBCASE("bucket stays on the workspace side over the reachable set") {
    double max_x = -1e9;
    for (int i = 0; i <= 10; ++i)
      for (int j = 0; j <= 10; ++j)
        for (int k = 0; k <= 10; ++k) {
          Vec3 q;
          const int idx[3] = {i, j, k};
          for (int d = 0; d < 3; ++d)
            q[d] = g.actuators[d].min_ext +
                   (g.actuators[d].max_ext - g.actuators[d].min_ext) * idx[d] / 10.0;
          max_x = std::max(max_x, forward_kinematics(g, q).bucket_center.x);
        }
    CHECK(max_x <= 0.0);
  }

  SUBCASE("point jacobian matches finite differences") {
    const Vec3 q{0.1, -0.2, 0.3};
    const KinematicPose p = forward_kinematics(g, q);
    const auto jac = point_jacobian(g, p, p.bucket_tip, kBucket);
    for (int i = 0; i < 3; ++i) {
      Vec3 qp = q, qm = q;
      qp[i] += 1e-6;
      qm[i] -= 1e-6;
      const Vec2 fd =
          (forward_kinematics(g, qp).bucket_tip - forward_kinematics(g, qm).bucket_tip) / 2e-6;
      CHECK(jac[i].x == doctest::Approx(fd.x).epsilon(1e-6));
      CHECK(jac[i].z == doctest::Approx(fd.z).epsilon(1e-6));
    }
  }
}

TEST_CASE("soil_reaction") {
  const TerrainField flat = TerrainField::flat(-15.0, 1.0, 0.05, 0.0);
  // 1 m wide blade-like box whose bottom sits `depth` under the surface.
  auto box = [](double depth) {
    return Polygon{{-9.51, -depth}, {-8.49, -depth}, {-8.49, 2.0 - depth}, {-9.51, 2.0 - depth}};
  };

  SUBCASE("no contact gives zero force and volume") {
    const SoilReaction r = soil_reaction(box(-0.5), {-0.3, 0.0}, flat, dirt());
    CHECK(r.force == Vec2{});
    CHECK(r.removed_volume == 0.0);
  }

  SUBCASE("force opposes velocity") {
    const SoilReaction r = soil_reaction(box(0.3), {-0.3, 0.0}, flat, dirt());
    CHECK(r.force.x > 0.0);
    CHECK(std::abs(r.force.z) < 1e-9);
  }

  SUBCASE("cohesionless sand pushes back no harder than dirt") {
    const SoilReaction s = soil_reaction(box(0.3), {-0.3, 0.0}, flat, sand());
    const SoilReaction d = soil_reaction(box(0.3), {-0.3, 0.0}, flat, dirt());
    CHECK(s.force.norm() <= d.force.norm());
  }

  SUBCASE("swept volume is analytic and linear in speed") {
    SoilToolParams p;
    const double depth = 0.3;
    const SoilReaction r1 = soil_reaction(box(depth), {-0.3, 0.0}, flat, dirt(), p);
    const SoilReaction r2 = soil_reaction(box(depth), {-0.6, 0.0}, flat, dirt(), p);
    // Rectangle edge moving horizontally: depth * |v| * dt * width.
    CHECK(r1.removed_volume == doctest::Approx(depth * 0.3 * p.dt * p.tool_width).epsilon(1e-12));
    CHECK(r2.removed_volume == doctest::Approx(2.0 * r1.removed_volume).epsilon(1e-12));
  }

  SUBCASE("force is monotone in depth, cohesion and friction") {
    for (Vec2 v : {Vec2{-0.3, 0.0}, Vec2{-0.2, -0.2}, Vec2{0.1, -0.3}}) {
      double previous = 0.0;
      for (int k = 0; k <= 40; ++k) {
        const double f = soil_reaction(box(0.02 * k), v, flat, dirt()).force.norm();
        CHECK(f >= previous);
        previous = f;
      }
    }
    SoilMaterial m = dirt();
    double last = 0.0;
    for (double c : {0.0, 500.0, 2100.0, 5000.0}) {
      m.cohesion = c;
      const double f = soil_reaction(box(0.3), {-0.3, 0.0}, flat, m).force.norm();
      CHECK(f >= last);
      last = f;
    }
    m = dirt();
    last = 0.0;
    for (double phi : {0.2, 0.5, 0.7, 1.0}) {
      m.internal_friction_angle = phi;
      const double f = soil_reaction(box(0.3), {-0.3, 0.0}, flat, m).force.norm();
      CHECK(f >= last);
      last = f;
    }
  }

  SUBCASE("carving lowers the terrain by at most the requested area") {
    TerrainField t = flat;
    const double before = t.area_above(-5.0);
    const double removed = carve_terrain(t, box(0.3), 0.01);
    CHECK(removed == doctest::Approx(0.01));
    CHECK(before - t.area_above(-5.0) == doctest::Approx(0.01).epsilon(1e-9));
    TerrainField t2 = flat;
    const double all = carve_terrain(t2, box(0.3), 100.0);
    CHECK(all == doctest::Approx(0.3 * 21 * 0.05).epsilon(1e-9));
  }
}

TEST_CASE("rock_on_terrain_spawn") {
  const RockShape rock = rock_fixture(RockFamily::I);
  TerrainField t = default_terrain();
  const RockPose p = rock_on_terrain_spawn(rock, -9.0, t);
  CHECK(p.z == doctest::Approx(0.5 + rock.clearance_radius()));
  CHECK(p.angle == 0.0);
  CHECK(rock_on_terrain_spawn(rock, -9.0, t) == p);
  for (double& h : t.heights) h += 0.2;
  CHECK(rock_on_terrain_spawn(rock, -9.0, t).z - p.z == doctest::Approx(0.2).epsilon(1e-12));
  CHECK_THROWS_AS(rock_on_terrain_spawn(rock, -40.0, t), std::domain_error);
}

TEST_CASE("step: ballistic free fall follows the semi-implicit Euler closed form") {
  WorldModel m = make_model();
  WorldState s = make_world(m, kRows[2].ext, -9.0);
  s.rock_pose.z = 20.0;  // far from everything
  s.rock_pose.x = -5.0;
  const double z0 = s.rock_pose.z;
  RandomStream rng(1);
  const double dt = kDefaultDt;
  const int k = 30;
  for (int i = 0; i < k; ++i) s = step(s, {0, 0, 0}, m, dt, rng);
  const double g = m.params.gravity;
  CHECK(s.rock_vel.vz == doctest::Approx(-g * k * dt).epsilon(1e-12));
  CHECK(z0 - s.rock_pose.z == doctest::Approx(g * dt * dt * k * (k + 1) / 2.0).epsilon(1e-12));
}

TEST_CASE("step: resting rock settles to a fixed point") {
  WorldModel m = make_model();
  WorldState s = make_world(m, kRows[3].ext, -9.0);
  RandomStream rng(3);
  for (int i = 0; i < 600; ++i) s = step(s, {0, 0, 0}, m, kDefaultDt, rng);
  CHECK(std::abs(s.rock_vel.vx) < 1e-6);
  CHECK(std::abs(s.rock_vel.vz) < 1e-6);
  CHECK(std::abs(s.rock_vel.omega) < 1e-6);
  CHECK(std::abs(s.cabin_pitch) < 1e-6);
  CHECK(std::abs(s.cabin_roll) < 1e-6);
  for (double v : s.actuator_vel) CHECK(v == 0.0);
  const WorldState after = step(s, {0, 0, 0}, m, kDefaultDt, rng);
  CHECK(std::abs(after.rock_pose.x - s.rock_pose.x) < 1e-6);
  CHECK(std::abs(after.rock_pose.z - s.rock_pose.z) < 1e-6);
  CHECK(std::abs(after.rock_pose.angle - s.rock_pose.angle) < 1e-6);
  CHECK(terrain_penetration(after, m.rock) <= m.params.max_penetration);
}

TEST_CASE("step: determinism") {
  WorldModel m = make_model();
  auto run = [&] {
    WorldState s = make_world(m, kRows[3].ext, -9.1);
    RandomStream rng(42);
    RandomStream actions(7);
    for (int i = 0; i < 500; ++i) {
      const Vec3 cmd{actions.uniform(-0.3, 0.3), actions.uniform(-0.3, 0.3),
                     actions.uniform(-0.2, 0.2)};
      s = step(s, cmd, m, kDefaultDt, rng);
    }
    return s;
  };
  CHECK(run() == run());
}

TEST_CASE("step: actuators respect their limits and never return NaN") {
  WorldModel m = make_model();
  WorldState s = make_world(m, kRows[3].ext, -9.1);
  RandomStream rng(5);
  for (int i = 0; i < 800; ++i) s = step(s, {0.3, 0.3, 0.2}, m, kDefaultDt, rng);
  for (int j = 0; j < 3; ++j) CHECK(s.actuator_ext[j] == m.geometry.actuators[j].max_ext);
  CHECK(s.all_finite());
  WorldState bad = s;
  bad.rock_pose.x = std::nan("");
  CHECK_THROWS_AS(step(bad, {0, 0, 0}, m, kDefaultDt, rng), std::logic_error);
}

TEST_CASE("world state serialises exactly") {
  WorldModel m = make_model();
  WorldState s = make_world(m, kRows[3].ext, -9.1);
  RandomStream rng(9);
  for (int i = 0; i < 50; ++i) s = step(s, {0.1, -0.2, 0.1}, m, kDefaultDt, rng);
  CHECK(world_from_json(world_to_json(s)) == s);
}

TEST_CASE("invariant: penetration stays within the contact slop under random actions") {
  WorldModel m = make_model();
  double worst_terrain = 0.0, worst_bucket = 0.0;
  int bucket_steps = 0;
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    RandomStream pick(seed);
    const TableRow& row = kRows[pick.uniform_index(9)];
    WorldState s = make_world(m, row.ext, row.rock_x);
    RandomStream rng(seed + 100);
    Vec3 cmd{};
    for (int i = 0; i < 500; ++i) {
      if (i % 15 == 0)
        for (int j = 0; j < 3; ++j)
          cmd[j] = pick.uniform(-1.0, 1.0) * m.geometry.max_speeds[j];
      StepDiagnostics d;
      s = step(s, cmd, m, kDefaultDt, rng, &d);
      worst_terrain = std::max(worst_terrain, terrain_penetration(s, m.rock));
      worst_bucket = std::max(worst_bucket, bucket_penetration(s, m));
      if (d.rock_on_bucket) ++bucket_steps;
      REQUIRE(s.all_finite());
      REQUIRE(std::abs(s.cabin_pitch) < M_PI / 2);
      REQUIRE(std::abs(s.cabin_roll) < M_PI / 2);
      for (int j = 0; j < 3; ++j) REQUIRE(m.geometry.actuators[j].within(s.actuator_ext[j]));
    }
  }
  MESSAGE("steps with bucket contact: " << bucket_steps);
  CHECK(worst_terrain <= 0.01);
  CHECK(worst_bucket <= 0.01);
}

TEST_CASE("invariant: frictionless cohesionless contact never adds energy") {
  WorldModel m = make_model();
  m.material = sand();
  m.material.cohesion = 0.0;
  m.params.friction_rock_bucket = 0.0;
  m.params.friction_rock_terrain = 0.0;
  for (double spin : {0.0, 2.0, -3.0}) {
    WorldState s = make_world(m, kRows[0].ext, -10.0);
    s.rock_vel = {0.8, 0.0, spin};
    RandomStream rng(11);
    const double e0 = rock_mechanical_energy(s, m.rock, m.params.gravity);
    double e = e0;
    double worst = -1e300;
    for (int i = 0; i < 500; ++i) {
      s = step(s, {0, 0, 0}, m, kDefaultDt, rng);
      const double e1 = rock_mechanical_energy(s, m.rock, m.params.gravity);
      worst = std::max(worst, e1 - e);
      e = e1;
    }
    CHECK(worst <= 1e-6 * e0);
  }
}

TEST_CASE("invariant: frictionless gravity-off collision conserves linear momentum") {
  const RockShape rock = rock_fixture(RockFamily::II);
  const ExcavatorGeometry g = default_geometry();
  const Polygon plate_local = bucket_wall_plates(g, Pose2{{0.0, 0.0}, 0.0})[0];
  const Vec2 plate_c = centroid(plate_local);

  RigidBody a;  // bucket wall, free for this test
  a.position = {0.0, 0.0};
  a.angle = 0.0;
  a.velocity = {0.5, 0.0};
  a.inv_mass = 1.0 / 1000.0;
  a.inv_inertia = 1.0 / (1000.0 * polar_moment_about_centroid(plate_local) /
                         std::abs(signed_area(plate_local)));
  RigidBody b;
  b.position = {plate_c.x + 1.0, plate_c.z + 0.1};
  b.velocity = {-1.0, 0.05};
  b.omega = 0.3;
  b.inv_mass = 1.0 / rock.mass();
  b.inv_inertia = 1.0 / rock.inertia();

  auto momentum = [&] { return a.velocity.x / a.inv_mass + b.velocity.x / b.inv_mass; };
  const double p0 = momentum();
  const double dt = kDefaultDt;
  int touching = 0;
  for (int i = 0; i < 120; ++i) {
    const Polygon pa = transformed(
        [&] {
          Polygon local;
          for (Vec2 v : plate_local) local.push_back(v - plate_c);
          return local;
        }(),
        Pose2{a.position, a.angle});
    const Polygon pb = transformed(rock.vertices, Pose2{b.position, b.angle});
    const Manifold mf = collide_convex(pa, pb, 0.05 + (a.velocity - b.velocity).norm() * dt);
    std::vector<Contact> contacts;
    for (int k = 0; k < mf.count; ++k) {
      Contact c;
      c.a = &a;
      c.b = &b;
      c.point = mf.points[k].point;
      c.normal = mf.normal;
      c.separation = mf.points[k].separation;
      c.friction = 0.0;
      contacts.push_back(c);
    }
    solve_contact_velocities(contacts, dt, {});
    for (const Contact& c : contacts)
      if (c.normal_impulse > 0.0) ++touching;
    a.position += a.velocity * dt;
    a.angle += a.omega * dt;
    b.position += b.velocity * dt;
    b.angle += b.omega * dt;
  }
  CHECK(touching > 0);
  CHECK(std::abs(momentum() - p0) <= 1e-6 * std::abs(p0) + 1e-9);
}
