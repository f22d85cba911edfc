#include "rockcap/physics/rock.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace rockcap::physics {

std::string_view to_string(RockFamily f) {
  switch (f) {
    case RockFamily::I: return "I";
    case RockFamily::II: return "II";
    case RockFamily::III: return "III";
    case RockFamily::IV: return "IV";
  }
  return "?";
}

RockFamily rock_family_from_string(std::string_view s) {
  if (s == "I") return RockFamily::I;
  if (s == "II") return RockFamily::II;
  if (s == "III") return RockFamily::III;
  if (s == "IV") return RockFamily::IV;
  throw std::invalid_argument("unknown rock family: " + std::string(s));
}

void RockShape::validate() const {
  if (!is_convex(vertices) || !(signed_area(vertices) > 0.0))
    throw std::invalid_argument("rock polygon must be convex and counter-clockwise");
  if (!(density > 0.0) || !(effective_depth > 0.0))
    throw std::invalid_argument("rock density and depth must be > 0");
  if (!(mass() > 0.0) || !(inertia() > 0.0))
    throw std::invalid_argument("rock mass and inertia must be > 0");
}

namespace {

struct Outline {
  double radius;  // clearance radius after centring
  std::vector<std::pair<double, double>> polar;  // (angle deg, relative radius)
};

Outline outline(RockFamily family) {
  switch (family) {
    case RockFamily::I:  // rounded boulder
      return {0.50, {{0, 1.0}, {50, 0.86}, {105, 0.95}, {160, 0.82}, {210, 0.92}, {265, 0.86},
                     {315, 0.96}}};
    case RockFamily::II:  // elongated
      return {0.45, {{0, 1.0}, {40, 0.72}, {100, 0.62}, {165, 0.95}, {215, 0.70}, {290, 0.63}}};
    case RockFamily::III:  // flat slab
      return {0.60, {{0, 1.0}, {70, 0.50}, {150, 0.78}, {200, 0.85}, {290, 0.48}}};
    case RockFamily::IV:  // angular block
      return {0.55, {{20, 1.0}, {95, 0.80}, {140, 0.92}, {200, 0.75}, {250, 0.95}, {320, 0.78}}};
  }
  throw std::invalid_argument("unknown rock family");
}

}  // namespace

RockShape rock_fixture(RockFamily family, double density) {
  const Outline o = outline(family);
  Polygon raw;
  for (const auto& [deg, r] : o.polar) {
    const double a = deg * std::numbers::pi / 180.0;
    raw.push_back({r * std::cos(a), r * std::sin(a)});
  }
  const Vec2 c = centroid(raw);
  for (Vec2& p : raw) p -= c;
  const double scale = o.radius / max_radius(raw, Vec2{});
  for (Vec2& p : raw) p *= scale;
  RockShape rock;
  rock.family = family;
  rock.vertices = std::move(raw);
  rock.density = density;
  rock.validate();
  return rock;
}

}  // namespace rockcap::physics
