#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/core.h>

#include "rockcap/cli/cli.hpp"
#include "rockcap/env/config.hpp"
#include "rockcap/env/env.hpp"
#include "rockcap/env/record.hpp"
#include "rockcap/eval/scenario.hpp"
#include "rockcap/nn/mlp.hpp"
#include "rockcap/ppo/gae.hpp"
#include "rockcap/ppo/trainer.hpp"
#include "rockcap/teleop/session.hpp"

using namespace rockcap;
using namespace rockcap::physics;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  enum Status { kPass, kFail, kSkip } status = kFail;
  std::string detail;
};

Outcome pass_if(bool ok, std::string detail) {
  return {ok ? Outcome::kPass : Outcome::kFail, std::move(detail)};
}

// Collects failed sub-checks so one line can report them all.
struct Checks {
  int total = 0;
  std::vector<std::string> failures;
  void expect(bool ok, const std::string& what) {
    ++total;
    if (!ok) failures.push_back(what);
  }
  Outcome outcome(const std::string& extra = "") const {
    std::string d = fmt::format("{}/{} checks", total - static_cast<int>(failures.size()), total);
    if (!extra.empty()) d += ", " + extra;
    for (std::size_t i = 0; i < failures.size() && i < 3; ++i) d += "; failed: " + failures[i];
    return pass_if(failures.empty(), d);
  }
};

bool close(double a, double b, double tol) { return std::abs(a - b) <= tol; }

// ---------------------------------------------------------------- reward

Outcome reward_oracle() {
  const env::RewardWeights w;
  Checks c;
  const Vec2 goal{-7.0, 1.5};
  const env::Action zero{};
  const Vec3 nof{};
  auto g = [&](double xr, double zr, Vec2 gl, env::Action a, Vec3 f, env::Action ap, double th,
               double ph) { return env::guidance_reward(xr, zr, gl, a, f, ap, th, ph, w); };

  c.expect(g(-7.0, 1.5, goal, zero, nof, zero, 0, 0) == 0.0, "at goal, idle");
  c.expect(g(-7.0, 1.5, goal, zero, {250, -80, 30}, zero, 0, 0) == 0.0, "at goal, forces ignored");
  c.expect(close(g(-8.0, 1.0, goal, zero, nof, zero, 0, 0), -1.0 / 13 - 0.25 / 8, 1e-12),
           "position example");
  c.expect(close(g(-8.0, 1.0, goal, zero, nof, zero, 0, 0), -0.10817307692307693, 1e-12),
           "position example value");
  c.expect(close(g(-7.0, 1.5, goal, {1, 0, 0}, {200, 0, 0}, {1, 0, 0}, 0, 0), -1.0 / 3, 1e-12),
           "energy example");

  // Single-term cases.
  for (double dx : {0.1, -0.5, 2.0, -6.0}) {
    c.expect(close(g(-7.0 + dx, 1.5, goal, zero, nof, zero, 0, 0), -dx * dx / 13, 1e-12),
             fmt::format("x term {}", dx));
  }
  for (double dz : {0.3, -1.2, 4.0}) {
    c.expect(close(g(-7.0, 1.5 + dz, goal, zero, nof, zero, 0, 0), -dz * dz / 8, 1e-12),
             fmt::format("z term {}", dz));
  }
  c.expect(close(g(-7.0, 1.5, goal, {0.5, -1, 0.25}, {100, 50, -300}, {0.5, -1, 0.25}, 0, 0),
                 -(2500.0 + 2500.0 + 5625.0) / 120000.0, 1e-12),
           "energy three joints");
  c.expect(close(g(-7.0, 1.5, goal, {1, 0, 0}, nof, {-1, 0, 0}, 0, 0), -4.0 / 12, 1e-12),
           "smoothness reversal");
  c.expect(close(g(-7.0, 1.5, goal, {0.2, 0.4, -0.6}, nof, {0, 0, 0}, 0, 0), -0.56 / 12, 1e-12),
           "smoothness from rest");
  c.expect(close(g(-7.0, 1.5, goal, zero, nof, zero, 0.1, -0.2), -0.05, 1e-12), "tilt");
  c.expect(close(g(-7.0, 1.5, goal, zero, nof, zero, -0.3, 0.0), -0.09, 1e-12), "pitch only");

  // Everything at once.
  {
    const env::Action a{0.5, -0.25, 1.0}, ap{0.0, 0.25, 0.5};
    const Vec3 f{40, -120, 200};
    const double expect = -(1.5 * 1.5) / 13 - (0.7 * 0.7) / 8 -
                          (20.0 * 20.0 + 30.0 * 30.0 + 200.0 * 200.0) / 120000.0 -
                          (0.25 + 0.25 + 0.25) / 12 - (0.04 + 0.01) / 1;
    c.expect(close(g(-8.5, 2.2, goal, a, f, ap, 0.2, -0.1), expect, 1e-12), "all terms");
    const env::GuidanceTerms t =
        env::guidance_terms(-8.5, 2.2, goal, a, f, ap, 0.2, -0.1, w);
    c.expect(close(t.sum(), expect, 1e-12), "terms sum");
    c.expect(t.x_error <= 0 && t.z_error <= 0 && t.energy <= 0 && t.smoothness <= 0 && t.tilt <= 0,
             "terms non-positive");
  }

  c.expect(env::goal_reward(true, w) == 5.0, "goal 1");
  c.expect(env::goal_reward(false, w) == 0.0, "goal 0");
  c.expect(env::goal_reward(true, w) == env::goal_reward(true, w), "goal idempotent");
  c.expect(env::total_reward(0.0, 5.0) == 5.0, "total (0,5)");
  c.expect(env::total_reward(-0.1, 0.0) == -0.1, "total (-0.1,0)");
  c.expect(close(env::total_reward(-0.108173, 5.0), 4.891827, 1e-12), "total (-0.108173,5)");
  c.expect(close(env::total_reward(g(-8.0, 1.0, goal, zero, nof, zero, 0, 0), 5.0),
                 5.0 - 0.10817307692307693, 1e-12),
           "total of example");
  return c.outcome();
}

// ---------------------------------------------------------------- conditions

Outcome conditions() {
  const env::RewardWeights w;
  Checks c;
  for (bool p : {false, true})
    for (bool t : {false, true})
      c.expect(env::c_goal(p, t) == (p && t), fmt::format("c_goal({},{})", p, t));

  const Vec2 goal{-7.0, 1.5};
  const double d = w.delta_prox;
  c.expect(env::c_proximity(-7.0, 1.5, goal, d), "prox at goal");
  c.expect(!env::c_proximity(-7.25, 1.5, goal, d), "prox dx 0.25");
  // Exact boundary on a dyadic grid so the difference is exactly delta.
  c.expect(!env::c_proximity(0.25, 0.0, {0.0, 0.0}, 0.25), "prox boundary x");
  c.expect(!env::c_proximity(0.0, -0.25, {0.0, 0.0}, 0.25), "prox boundary z");
  c.expect(env::c_proximity(std::nextafter(0.25, 0.0), 0.0, {0.0, 0.0}, 0.25), "prox just inside");
  c.expect(!env::c_proximity(-7.0, 1.5 + 0.3, goal, d), "prox dz 0.3");
  c.expect(env::c_proximity(-7.19, 1.31, goal, d), "prox corner inside");
  c.expect(!env::c_proximity(-7.19, 1.71, goal, d), "prox z outside");

  c.expect(env::c_tilting(0.0, 0.0, w.delta_tilt), "tilt zero");
  c.expect(!env::c_tilting(0.1, 0.0, 0.1), "tilt theta boundary");
  c.expect(!env::c_tilting(0.0, -0.1, 0.1), "tilt phi boundary");
  c.expect(env::c_tilting(0.05, -0.09, 0.1), "tilt inside");
  c.expect(env::c_tilting(std::nextafter(0.1, 0.0), 0.0, 0.1), "tilt just inside");
  c.expect(!env::c_tilting(0.0, 0.2, 0.1), "tilt phi outside");

  c.expect(env::c_truncate(-9.0, 1.2, w), "trunc y 1.2");
  c.expect(env::c_truncate(-9.0, -1.2, w), "trunc y -1.2");
  c.expect(env::c_truncate(-13.5, 0.0, w), "trunc x -13.5");
  c.expect(!env::c_truncate(-9.0, 0.0, w), "trunc inside");
  c.expect(!env::c_truncate(-13.0, 0.0, w), "trunc x boundary");
  c.expect(!env::c_truncate(-9.0, 1.0, w), "trunc y boundary");
  c.expect(env::c_truncate(std::nextafter(-13.0, -14.0), 0.0, w), "trunc x just outside");
  c.expect(env::c_truncate(-9.0, std::nextafter(1.0, 2.0), w), "trunc y just outside");
  return c.outcome();
}

// ---------------------------------------------------------------- GAE

std::vector<double> brute_force_gae(const std::vector<double>& r, const std::vector<double>& v,
                                    double bootstrap, const std::vector<bool>& terminal,
                                    double gamma, double lambda) {
  const std::size_t n = r.size();
  std::vector<double> delta(n);
  for (std::size_t t = 0; t < n; ++t) {
    const double next = t + 1 < n ? v[t + 1] : bootstrap;
    delta[t] = r[t] + gamma * (terminal[t] ? 0.0 : next) - v[t];
  }
  std::vector<double> adv(n, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    double w = 1.0;
    for (std::size_t k = t; k < n; ++k) {
      adv[t] += w * delta[k];
      if (terminal[k]) break;
      w *= gamma * lambda;
    }
  }
  return adv;
}

Outcome gae() {
  Checks c;
  RandomStream rng(2024);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng.uniform_index(50));
    std::vector<double> r(n), v(n);
    std::vector<bool> term(n);
    for (int i = 0; i < n; ++i) {
      r[i] = rng.normal();
      v[i] = rng.normal();
      term[i] = rng.uniform() < 0.1;
    }
    const double gamma = rng.uniform(0.5, 0.999), lambda = rng.uniform(0.0, 1.0);
    const double boot = rng.normal();
    const ppo::GaeResult g = ppo::compute_gae(r, v, boot, term, gamma, lambda);
    const std::vector<double> bf = brute_force_gae(r, v, boot, term, gamma, lambda);
    for (int i = 0; i < n; ++i) {
      worst = std::max(worst, std::abs(g.advantages[i] - bf[i]));
      worst = std::max(worst, std::abs(g.returns[i] - (bf[i] + v[i])));
    }

    // lambda = 0: exactly the one-step residual.
    const ppo::GaeResult g0 = ppo::compute_gae(r, v, boot, term, gamma, 0.0);
    bool exact = true;
    for (int i = 0; i < n; ++i) {
      const double next = i + 1 < n ? v[i + 1] : boot;
      exact &= g0.advantages[i] == r[i] + gamma * (term[i] ? 0.0 : next) - v[i];
    }
    c.expect(exact, fmt::format("lambda=0 sequence {}", trial));
  }
  c.expect(worst < 1e-10, fmt::format("brute force worst {:.2e}", worst));

  for (bool terminal : {false, true}) {
    const double r = 0.7, v = -0.3, boot = 1.1, gamma = 0.97;
    const ppo::GaeResult g = ppo::compute_gae({r}, {v}, boot, {terminal}, gamma, 0.95);
    const double expect = r + gamma * (terminal ? 0.0 : boot) - v;
    c.expect(g.advantages[0] == expect && g.returns[0] == expect + v,
             fmt::format("single step terminal={}", terminal));
  }
  {
    const ppo::GaeResult g = ppo::compute_gae({1.0}, {0.0}, 0.0, {true}, 0.99, 0.95);
    c.expect(g.advantages[0] == 1.0 && g.returns[0] == 1.0, "single terminal step r=1");
    const ppo::GaeResult h =
        ppo::compute_gae({0.0, 1.0}, {0.5, 0.5}, 0.0, {false, true}, 0.99, 0.95);
    c.expect(close(h.advantages[0], 0.465250, 1e-12) && close(h.advantages[1], 0.5, 1e-15),
             "two-step hand recursion");
  }
  return c.outcome(fmt::format("worst {:.1e}", worst));
}

// ---------------------------------------------------------------- gradients

Outcome gradients() {
  RandomStream rng(77);
  const double h = 1e-5;
  double worst = 0.0;
  long compared = 0;
  for (int net = 0; net < 100; ++net) {
    const int layers = 1 + net % 3;
    std::vector<int> sizes{static_cast<int>(1 + rng.uniform_index(8))};
    for (int l = 0; l < layers; ++l) sizes.push_back(static_cast<int>(1 + rng.uniform_index(8)));
    nn::Mlp m(sizes);
    for (nn::DenseLayer& l : m.layers()) {
      for (int i = 0; i < l.weight.size(); ++i) l.weight.data()[i] = 0.6 * rng.normal();
      for (int i = 0; i < l.bias.size(); ++i) l.bias[i] = 0.3 * rng.normal();
    }
    nn::Vector x(sizes.front()), c(sizes.back());
    for (int i = 0; i < x.size(); ++i) x[i] = rng.normal();
    for (int i = 0; i < c.size(); ++i) c[i] = rng.normal();

    nn::MlpCache cache;
    m.forward(nn::Matrix(x), &cache);
    nn::Vector grad = nn::Vector::Zero(m.parameter_count());
    const nn::Matrix dx = m.backward(cache, nn::Matrix(c), grad);
    auto loss = [&](const nn::Mlp& net_, const nn::Vector& in) { return c.dot(net_.forward(in)); };
    auto rel = [](double a, double b) {
      return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6});
    };

    nn::Vector p = m.flat();
    for (int i = 0; i < p.size(); ++i) {
      const double keep = p[i];
      p[i] = keep + h;
      m.set_flat(p);
      const double lp = loss(m, x);
      p[i] = keep - h;
      m.set_flat(p);
      const double lm = loss(m, x);
      p[i] = keep;
      m.set_flat(p);
      worst = std::max(worst, rel(grad[i], (lp - lm) / (2 * h)));
      ++compared;
    }
    for (int i = 0; i < x.size(); ++i) {
      nn::Vector xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      worst = std::max(worst, rel(dx(i, 0), (loss(m, xp) - loss(m, xm)) / (2 * h)));
      ++compared;
    }
  }
  return pass_if(worst < 1e-4,
                 fmt::format("100 nets, {} partials, worst rel. error {:.2e} (< 1e-4)", compared, worst));
}

// ---------------------------------------------------------------- physics

struct TableRow {
  Vec3 ext;
  double midpoint;
};

const TableRow kRows[] = {
    {{0.13, 0.24, -0.88}, -8.0},    {{0.08, 0.11, -0.80}, -8.25},  {{0.06, -0.03, -0.74}, -8.75},
    {{0.03, -0.15, -0.74}, -9.25},  {{-0.01, -0.33, -0.70}, -9.75}, {{-0.03, -0.39, -0.70}, -10.25},
    {{-0.10, -0.57, -0.70}, -10.75}, {{-0.10, -0.70, -0.70}, -11.25}, {{-0.16, -0.80, -0.78}, -11.5},
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

Outcome physics_invariants() {
  Checks c;

  // Penetration under random commands across families and start rows.
  double worst_pen = 0.0;
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    WorldModel m = make_model();
    m.rock = rock_fixture(static_cast<RockFamily>(seed % 4), 2000.0 + 100.0 * seed);
    RandomStream pick(seed);
    const std::size_t row = seed % 9;
    WorldState s = make_world(m, kRows[row].ext, kRows[row].midpoint - 0.1);
    RandomStream rng(seed + 100);
    Vec3 cmd{};
    for (int i = 0; i < 500; ++i) {
      if (i % 15 == 0)
        for (int j = 0; j < 3; ++j) cmd[j] = pick.uniform(-1.0, 1.0) * m.geometry.max_speeds[j];
      s = step(s, cmd, m, kDefaultDt, rng);
      worst_pen = std::max({worst_pen, terrain_penetration(s, m.rock), bucket_penetration(s, m)});
      if (!s.all_finite()) break;
    }
    c.expect(s.all_finite(), fmt::format("finite state seed {}", seed));
  }
  c.expect(worst_pen <= 0.01, fmt::format("penetration {:.4f} m", worst_pen));

  // Dissipative contact never adds energy.
  double worst_gain = -1e300;
  for (double friction : {0.0, 0.5}) {
    for (double spin : {0.0, 2.0, -3.0}) {
      WorldModel m = make_model();
      m.material = sand();
      m.material.cohesion = 0.0;
      m.params.friction_rock_bucket = friction;
      m.params.friction_rock_terrain = friction;
      WorldState s = make_world(m, kRows[0].ext, -10.0);
      s.rock_vel = {0.8, 0.0, spin};
      RandomStream rng(11);
      const double e0 = rock_mechanical_energy(s, m.rock, m.params.gravity);
      double e = e0;
      for (int i = 0; i < 500; ++i) {
        s = step(s, {0, 0, 0}, m, kDefaultDt, rng);
        const double e1 = rock_mechanical_energy(s, m.rock, m.params.gravity);
        worst_gain = std::max(worst_gain, (e1 - e) / std::abs(e0));
        e = e1;
      }
    }
  }
  c.expect(worst_gain <= 1e-6, fmt::format("energy gain {:.2e} rel/step", worst_gain));

  // Momentum through a frictionless, gravity-free plate collision.
  double momentum_err = 0.0;
  for (double vz : {0.0, 0.05, -0.1}) {
    const RockShape rock = rock_fixture(RockFamily::II);
    const ExcavatorGeometry g = default_geometry();
    const Polygon plate_local = bucket_wall_plates(g, Pose2{{0.0, 0.0}, 0.0})[0];
    const Vec2 plate_c = centroid(plate_local);
    Polygon plate_centered;
    for (Vec2 v : plate_local) plate_centered.push_back(v - plate_c);

    RigidBody a;
    a.velocity = {0.5, 0.0};
    a.inv_mass = 1.0 / 1000.0;
    a.inv_inertia = 1.0 / (1000.0 * polar_moment_about_centroid(plate_local) /
                           std::abs(signed_area(plate_local)));
    RigidBody b;
    b.position = {plate_c.x + 1.0, plate_c.z + 0.1};
    b.velocity = {-1.0, vz};
    b.omega = 0.3;
    b.inv_mass = 1.0 / rock.mass();
    b.inv_inertia = 1.0 / rock.inertia();
    auto momentum = [&] {
      return Vec2{a.velocity.x / a.inv_mass + b.velocity.x / b.inv_mass,
                  a.velocity.z / a.inv_mass + b.velocity.z / b.inv_mass};
    };
    const Vec2 p0 = momentum();
    const double dt = kDefaultDt;
    int touching = 0;
    for (int i = 0; i < 120; ++i) {
      const Polygon pa = transformed(plate_centered, Pose2{a.position, a.angle});
      const Polygon pb = transformed(rock.vertices, Pose2{b.position, b.angle});
      const Manifold mf = collide_convex(pa, pb, 0.05 + (a.velocity - b.velocity).norm() * dt);
      std::vector<Contact> contacts;
      for (int k = 0; k < mf.count; ++k) {
        Contact ct;
        ct.a = &a;
        ct.b = &b;
        ct.point = mf.points[k].point;
        ct.normal = mf.normal;
        ct.separation = mf.points[k].separation;
        ct.friction = 0.0;
        contacts.push_back(ct);
      }
      solve_contact_velocities(contacts, dt, {});
      for (const Contact& ct : contacts)
        if (ct.normal_impulse > 0.0) ++touching;
      a.position += a.velocity * dt;
      a.angle += a.omega * dt;
      b.position += b.velocity * dt;
      b.angle += b.omega * dt;
    }
    c.expect(touching > 0, "bodies collided");
    momentum_err = std::max(momentum_err, (momentum() - p0).norm() / p0.norm());
  }
  c.expect(momentum_err <= 1e-6, fmt::format("momentum {:.2e}", momentum_err));

  // Soil force grid: monotone in depth for several velocities, in cohesion and friction angle.
  const TerrainField flat = TerrainField::flat(-15.0, 1.0, 0.05, 0.0);
  auto box = [](double depth) {
    return Polygon{{-9.51, -depth}, {-8.49, -depth}, {-8.49, 2.0 - depth}, {-9.51, 2.0 - depth}};
  };
  int grid_bad = 0, grid = 0;
  for (Vec2 v : {Vec2{-0.3, 0.0}, Vec2{-0.2, -0.1}, Vec2{-0.5, 0.2}, Vec2{0.1, -0.3}}) {
    for (const SoilMaterial& base : {dirt(), sand()}) {
      double prev = 0.0;
      for (int k = 0; k <= 40; ++k) {
        const double f = soil_reaction(box(0.02 * k), v, flat, base).force.norm();
        ++grid;
        if (f < prev) ++grid_bad;
        prev = f;
      }
    }
  }
  {
    SoilMaterial m = dirt();
    double prev = 0.0;
    for (double coh : {0.0, 500.0, 2100.0, 5000.0, 12000.0}) {
      m.cohesion = coh;
      const double f = soil_reaction(box(0.3), {-0.3, 0.0}, flat, m).force.norm();
      ++grid;
      if (f < prev) ++grid_bad;
      prev = f;
    }
    m = dirt();
    prev = 0.0;
    for (double phi : {0.2, 0.5, 0.7, 1.0}) {
      m.internal_friction_angle = phi;
      const double f = soil_reaction(box(0.3), {-0.3, 0.0}, flat, m).force.norm();
      ++grid;
      if (f < prev) ++grid_bad;
      prev = f;
    }
  }
  c.expect(grid_bad == 0, fmt::format("soil grid {} of {} non-monotone", grid_bad, grid));

  // Start poses: bucket behind and above the biggest rock for every row.
  const ExcavatorGeometry g = default_geometry();
  const RockShape big = rock_fixture(RockFamily::III);
  int rows_ok = 0;
  for (const TableRow& row : kRows) {
    const KinematicPose p = forward_kinematics(g, row.ext);
    if (p.bucket_center.x > row.midpoint && p.bucket_center.z > 0.5 + 2.0 * big.clearance_radius())
      ++rows_ok;
  }
  c.expect(rows_ok == 9, fmt::format("{}/9 start rows", rows_ok));
  return c.outcome(fmt::format("pen {:.4f} m, dE {:.1e}, dp {:.1e}, soil {}/{}, rows {}/9",
                               worst_pen, worst_gain, momentum_err, grid - grid_bad, grid,
                               rows_ok));
}

// ---------------------------------------------------------------- determinism

std::vector<env::StepResult> rollout(std::uint64_t seed) {
  env::RockCaptureEnv e(env::default_episode_config());
  e.reset(seed);
  RandomStream actions(seed ^ 0x5eed);
  std::vector<env::StepResult> out;
  for (int i = 0; i < 500; ++i) {
    env::Action a;
    for (double& v : a) v = actions.uniform(-1.0, 1.0);
    out.push_back(e.step(a));
    if (out.back().done()) e.reset(actions.next_u64());
  }
  return out;
}

bool same_results(const std::vector<env::StepResult>& a, const std::vector<env::StepResult>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].raw_obs != b[i].raw_obs || a[i].obs != b[i].obs || a[i].reward != b[i].reward ||
        a[i].terminated != b[i].terminated || a[i].truncated != b[i].truncated ||
        a[i].info.reward_terms != b[i].info.reward_terms)
      return false;
  }
  return true;
}

int invoke(std::vector<std::string> args, std::string* out_text = nullptr) {
  std::vector<const char*> argv{"rockcap"};
  for (const std::string& s : args) argv.push_back(s.c_str());
  std::ostringstream out, err;
  const int code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  if (out_text) *out_text = out.str() + err.str();
  return code;
}

std::string config_dir() {
  if (const char* d = std::getenv("ROCKCAP_CONFIG_DIR")) return d;
  return ROCKCAP_CONFIG_DIR;
}

Outcome determinism(const fs::path& work) {
  Checks c;
  c.expect(same_results(rollout(4242), rollout(4242)), "500-step rollout");
  c.expect(!same_results(rollout(4242), rollout(4243)), "different seeds differ");

  ppo::PpoConfig pc;
  pc.n_envs = 2;
  pc.n_steps = 256;
  pc.checkpoint_every = 0;
  pc.total_timesteps = 2 * pc.rollout_size();
  auto train = [&] {
    ppo::TrainOptions o;
    o.seed = 5;
    ppo::Trainer t(pc,
                   ppo::rock_env_factory(env::default_episode_config(), default_geometry(), dirt()),
                   o);
    t.run();
    nn::Checkpoint k = t.checkpoint();
    k.metadata.extra.clear();
    return std::make_pair(t.curve(), nn::encode_checkpoint(k));
  };
  const auto a = train(), b = train();
  bool curves = a.first.size() == 2 && b.first.size() == 2;
  for (std::size_t i = 0; curves && i < 2; ++i) curves = a.first[i].same_except_wall_time(b.first[i]);
  c.expect(curves, "2-iteration curve");
  c.expect(a.second == b.second, "2-iteration weights");

  // Logs from every producer replay bitwise.
  const fs::path dir = work / "determinism";
  fs::remove_all(dir);
  int replayed = 0;
  auto check_log = [&](const fs::path& p, const std::string& what) {
    std::string text;
    const int code = invoke({"replay", p.string()}, &text);
    c.expect(code == 0 && text.rfind("match", 0) == 0, what + ": " + text.substr(0, 80));
    ++replayed;
  };
  const std::string cfg = config_dir();
  c.expect(invoke({"train", "--config-dir", cfg, "--steps", "4096", "--seed", "3", "--out",
                   (dir / "train").string()}) == 0,
           "train subcommand");
  check_log(dir / "train" / "final_episode.jsonl", "train log");
  c.expect(invoke({"eval", "--config-dir", cfg, "--scenario", "training-condition", "--episodes",
                   "2", "--checkpoint", (dir / "train" / "final.bin").string(), "--out",
                   (dir / "eval").string(), "--no-export"}) == 0,
           "eval subcommand");
  for (const fs::directory_entry& e : fs::recursive_directory_iterator(dir / "eval"))
    if (e.path().extension() == ".jsonl" && e.path().filename() != "metrics.jsonl")
      check_log(e.path(), "eval log " + e.path().filename().string());

  // A human trial driven through the session with scripted keys.
  const cli::RunConfig rc = cli::load_run_config({fs::path(cfg) / "geometry.cfg",
                                                  fs::path(cfg) / "materials.cfg",
                                                  fs::path(cfg) / "env.json",
                                                  fs::path(cfg) / "ppo.json"});
  teleop::SessionConfig sc = teleop::session_config(teleop::Mode::evaluation);
  sc.trials = 1;
  teleop::TeleopSession session(sc, rc.env, rc.geometry, rc.material(rc.env.material), rc.hash());
  session.start_trial();
  for (int i = 0; !session.finished(); ++i) {
    teleop::KeyStates keys{};
    keys[teleop::kArmIn] = i < 120;
    keys[teleop::kBucketIn] = i >= 60 && i < 200;
    keys[teleop::kBoomUp] = i >= 200 && i < 260;
    session.step(keys);
  }
  fs::create_directories(dir / "human");
  {
    std::ofstream f(dir / "human" / "trial.jsonl");
    env::write_record(f, session.records().at(0));
  }
  check_log(dir / "human" / "trial.jsonl", "human log");
  return c.outcome(fmt::format("{} logs replayed", replayed));
}

// ---------------------------------------------------------------- training

struct CurveSummary {
  std::vector<ppo::CurveRow> rows;
  std::vector<double> smoothed;
};

CurveSummary read_curve_file(const fs::path& p) {
  std::ifstream f(p);
  CurveSummary s;
  s.rows = ppo::read_curve(f);
  std::vector<double> returns;
  for (const ppo::CurveRow& r : s.rows) returns.push_back(r.mean_cumreward);
  s.smoothed = eval::smooth(returns, 0.9);
  return s;
}

// Smoothed value at the first rollout reaching `step`.
double smoothed_at(const CurveSummary& s, double step) {
  for (std::size_t i = 0; i < s.rows.size(); ++i)
    if (static_cast<double>(s.rows[i].total_steps) >= step) return s.smoothed[i];
  return s.smoothed.back();
}

Outcome training(const fs::path& dir, const std::string& env_file, std::uint64_t steps,
                 double min_success, double reference_step, const std::string& seed) {
  fs::remove_all(dir);
  std::string text;
  const int code =
      invoke({"train", "--config-dir", config_dir(), "--env",
              (fs::path(config_dir()) / env_file).string(), "--steps", std::to_string(steps),
              "--seed", seed, "--out", dir.string()},
             &text);
  if (code != 0) return {Outcome::kFail, "train failed: " + text.substr(0, 200)};
  const CurveSummary s = read_curve_file(dir / "curve.csv");
  if (s.rows.empty()) return {Outcome::kFail, "empty curve"};
  const ppo::CurveRow& last = s.rows.back();
  const double ref = smoothed_at(s, reference_step);
  const bool rises = s.smoothed.back() > ref;
  const bool ok = last.success_rate >= min_success && rises;
  return pass_if(ok, fmt::format("{} steps, success_rate_100 {:.2f} (>= {:.1f}), smoothed return "
                                 "{:.2f} vs {:.2f} at {:.0f}, checkpoint {}",
                                 last.total_steps, last.success_rate, min_success,
                                 s.smoothed.back(), ref, reference_step,
                                 (dir / "final.bin").string()));
}

// ---------------------------------------------------------------- scenario harness

Outcome scenario_harness(const fs::path& work, const fs::path& smoke_checkpoint) {
  Checks c;
  fs::path checkpoint = smoke_checkpoint;
  if (!fs::exists(checkpoint)) {
    checkpoint = work / "harness_train" / "final.bin";
    fs::remove_all(work / "harness_train");
    c.expect(invoke({"train", "--config-dir", config_dir(), "--steps", "8192", "--out",
                     (work / "harness_train").string()}) == 0,
             "short training run");
  }
  const fs::path out = work / "harness";
  fs::remove_all(out);
  std::string text;
  const int code = invoke({"eval", "--config-dir", config_dir(), "--scenario", "all",
                           "--episodes", "10", "--checkpoint", checkpoint.string(), "--out",
                           out.string()},
                          &text);
  c.expect(code == 0, "eval exit code");
  for (eval::Scenario sc : eval::agent_scenarios()) {
    const std::string name(eval::to_string(sc));
    bool row = false;
    std::istringstream lines(text);
    for (std::string line; std::getline(lines, line);)
      row |= line.rfind(name, 0) == 0 && line.find("/10") != std::string::npos &&
             line.find("+-") != std::string::npos;
    c.expect(row, fmt::format("report row {}", name));
  }
  c.expect(fs::exists(out / "report.txt"), "report.txt");

  const fs::path store = out / "store";
  auto families = [&](eval::Scenario s) {
    std::set<std::string> fam, mat;
    int n = 0;
    for (const env::EpisodeRecord& r : eval::load_records(store, s)) {
      fam.insert(r.rock_family);
      mat.insert(r.material.value("name", std::string{}));
      ++n;
    }
    return std::make_tuple(fam, mat, n);
  };
  {
    const auto [fam, mat, n] = families(eval::Scenario::training_condition);
    c.expect(n == 10, "10 training-condition episodes");
    c.expect(fam.size() >= 1 && !fam.count("III") && !fam.count("IV") && mat == std::set<std::string>{"dirt"},
             "training condition uses I/II on dirt");
  }
  {
    const auto [fam, mat, n] = families(eval::Scenario::unseen_rocks);
    c.expect(n == 10, "10 unseen-rocks episodes");
    bool only = !fam.empty();
    for (const std::string& f : fam) only &= f == "III" || f == "IV";
    c.expect(only && mat == std::set<std::string>{"dirt"}, "unseen rocks use III/IV on dirt");
  }
  {
    const auto [fam, mat, n] = families(eval::Scenario::unseen_material);
    c.expect(n == 10, "10 unseen-material episodes");
    c.expect(mat == std::set<std::string>{"sand"} && !fam.count("III") && !fam.count("IV"),
             "unseen material uses sand");
  }
  return c.outcome();
}

// ---------------------------------------------------------------- driver

struct Criterion {
  std::string name;
  double limit_s;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks, one line per criterion"};
  bool extended = std::getenv("ROCKCAP_EXTENDED_ACCEPTANCE") != nullptr;
  std::vector<std::string> only;
  fs::path work = "acceptance_runs";
  app.add_flag("--extended", extended, "Also run the full-randomization training");
  app.add_option("--only", only, "Run just these criteria");
  app.add_option("--work-dir", work, "Scratch directory")->capture_default_str();
  CLI11_PARSE(app, argc, argv);
  fs::create_directories(work);

  const fs::path smoke_dir = work / "training_smoke";
  std::vector<Criterion> criteria{
      {"reward_oracle", 1.0, reward_oracle},
      {"conditions", 1.0, conditions},
      {"gae", 5.0, gae},
      {"gradients", 30.0, gradients},
      {"physics_invariants", 60.0, physics_invariants},
      {"determinism", 60.0, [&] { return determinism(work); }},
      {"training_smoke", 45.0 * 60,
       [&] { return training(smoke_dir, "env_simplified.json", 200000, 0.5, 2e4, "1"); }},
      {"full_randomization", 8.0 * 3600,
       [&]() -> Outcome {
         if (!extended) return {Outcome::kSkip, "extended run; pass --extended"};
         return training(work / "full_randomization", "env.json", 2000000, 0.4, 5e5, "1");
       }},
      {"scenario_harness", 600.0,
       [&] { return scenario_harness(work, smoke_dir / "final.bin"); }},
  };

  int failed = 0;
  for (const Criterion& cr : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), cr.name) == only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = cr.run();
    } catch (const std::exception& e) {
      o = {Outcome::kFail, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (o.status != Outcome::kSkip && secs > cr.limit_s) {
      o.status = Outcome::kFail;
      o.detail += fmt::format("; over time limit");
    }
    const char* tag = o.status == Outcome::kPass ? "PASS" : o.status == Outcome::kSkip ? "SKIP" : "FAIL";
    if (o.status == Outcome::kFail) ++failed;
    std::cout << fmt::format("[{}] {}: {} ({:.1f} s, limit {:.0f} s)\n", tag, cr.name, o.detail,
                             secs, cr.limit_s)
              << std::flush;
  }
  return failed == 0 ? 0 : 1;
}
