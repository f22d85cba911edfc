#include "rockcap/physics/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace rockcap::physics {

using nlohmann::json;

double ActuatorMap::clamp(double ext) const { return std::clamp(ext, min_ext, max_ext); }

void ExcavatorGeometry::validate() const {
  for (int i = 0; i < 3; ++i) {
    const ActuatorMap& a = actuators[i];
    if (!(a.slope != 0.0 && std::isfinite(a.slope)))
      throw std::invalid_argument("geometry: actuator map slope must be nonzero");
    if (!(a.min_ext < a.max_ext)) throw std::invalid_argument("geometry: empty actuator range");
    if (!(link_lengths[i] > 0.0)) throw std::invalid_argument("geometry: link length must be > 0");
    if (!(max_speeds[i] > 0.0)) throw std::invalid_argument("geometry: max speed must be > 0");
    if (!(link_masses[i] >= 0.0)) throw std::invalid_argument("geometry: link mass must be >= 0");
  }
  if (bucket_polygon.size() < 3 || !is_simple(bucket_polygon) ||
      !(signed_area(bucket_polygon) > 0.0))
    throw std::invalid_argument("geometry: bucket polygon must be simple, CCW, non-degenerate");
  if (!(machine_mass > 0.0) || !(track_half_length > 0.0) || !(track_half_width > 0.0))
    throw std::invalid_argument("geometry: machine mass and track dimensions must be > 0");
  if (!(machine_com_x > -track_half_length))
    throw std::invalid_argument("geometry: machine centre of mass ahead of the track edge");
  if (!(bucket_wall_thickness > 0.0) || !(bucket_width > 0.0) || !(bucket_capacity > 0.0))
    throw std::invalid_argument("geometry: bucket dimensions must be > 0");
}

ExcavatorGeometry default_geometry() {
  ExcavatorGeometry g;
  g.version = "planar-cat365-v1";
  g.base_anchor = {-1.469, 2.2543};
  g.link_lengths = {7.3, 3.5, 1.6};
  g.actuators[kBoom] = {2.5209, -0.9, -0.9, 0.9};
  g.actuators[kArm] = {2.1292, 1.0, -1.2, 1.1};
  g.actuators[kBucket] = {1.334, 2.2, -1.1, 0.8};
  g.bucket_polygon = {{0.0, 0.0}, {0.0, -0.7}, {0.4, -1.2}, {1.1, -1.15}, {1.6, 0.0}};
  return g;
}

namespace {

Vec2 vec2_from(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }
json vec2_to(const Vec2& v) { return json::array({v.x, v.z}); }

}  // namespace

ExcavatorGeometry geometry_from_json(const json& j) {
  ExcavatorGeometry g = default_geometry();
  g.version = j.value("version", g.version);
  if (j.contains("base_anchor")) g.base_anchor = vec2_from(j.at("base_anchor"));
  if (j.contains("link_lengths")) g.link_lengths = j.at("link_lengths").get<Vec3>();
  if (j.contains("actuators")) {
    const json& acts = j.at("actuators");
    const char* names[3] = {"boom", "arm", "bucket"};
    for (int i = 0; i < 3; ++i) {
      const json& a = acts.at(names[i]);
      g.actuators[i] = {a.at("offset").get<double>(), a.at("slope").get<double>(),
                        a.at("min_ext").get<double>(), a.at("max_ext").get<double>()};
    }
  }
  if (j.contains("bucket_polygon")) {
    g.bucket_polygon.clear();
    for (const json& p : j.at("bucket_polygon")) g.bucket_polygon.push_back(vec2_from(p));
  }
  g.bucket_wall_thickness = j.value("bucket_wall_thickness", g.bucket_wall_thickness);
  g.bucket_width = j.value("bucket_width", g.bucket_width);
  if (j.contains("max_speeds")) g.max_speeds = j.at("max_speeds").get<Vec3>();
  if (j.contains("link_masses")) g.link_masses = j.at("link_masses").get<Vec3>();
  g.bucket_capacity = j.value("bucket_capacity", g.bucket_capacity);
  g.machine_mass = j.value("machine_mass", g.machine_mass);
  g.machine_com_x = j.value("machine_com_x", g.machine_com_x);
  g.track_half_length = j.value("track_half_length", g.track_half_length);
  g.track_half_width = j.value("track_half_width", g.track_half_width);
  g.validate();
  return g;
}

json geometry_to_json(const ExcavatorGeometry& g) {
  json acts;
  const char* names[3] = {"boom", "arm", "bucket"};
  for (int i = 0; i < 3; ++i) {
    const ActuatorMap& a = g.actuators[i];
    acts[names[i]] = {{"offset", a.offset}, {"slope", a.slope}, {"min_ext", a.min_ext},
                      {"max_ext", a.max_ext}};
  }
  json poly = json::array();
  for (const Vec2& p : g.bucket_polygon) poly.push_back(vec2_to(p));
  return {{"version", g.version},
          {"base_anchor", vec2_to(g.base_anchor)},
          {"link_lengths", g.link_lengths},
          {"actuators", acts},
          {"bucket_polygon", poly},
          {"bucket_wall_thickness", g.bucket_wall_thickness},
          {"bucket_width", g.bucket_width},
          {"max_speeds", g.max_speeds},
          {"link_masses", g.link_masses},
          {"bucket_capacity", g.bucket_capacity},
          {"machine_mass", g.machine_mass},
          {"machine_com_x", g.machine_com_x},
          {"track_half_length", g.track_half_length},
          {"track_half_width", g.track_half_width}};
}

ExcavatorGeometry load_geometry(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open geometry file: " + path.string());
  return geometry_from_json(json::parse(in, nullptr, true, true));
}

}  // namespace rockcap::physics
