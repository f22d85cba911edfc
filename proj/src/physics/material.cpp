#include "rockcap/physics/material.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace rockcap::physics {

using nlohmann::json;

void SoilMaterial::validate() const {
  const double fields[] = {cohesion,        density,         max_density,  youngs_modulus,
                           dilatancy_angle, swell_factor,    repose_compaction_rate};
  for (double f : fields)
    if (!(f >= 0.0) || !std::isfinite(f))
      throw std::invalid_argument("material '" + name + "': fields must be finite and >= 0");
  if (!(internal_friction_angle > 0.0 && internal_friction_angle < std::numbers::pi / 2))
    throw std::invalid_argument("material '" + name + "': friction angle must lie in (0, pi/2)");
}

SoilMaterial dirt() {
  return {"dirt", 2100.0, 1474.0, 2000.0, 1.0e6, 0.70, 0.23, 1.10, 24.0};
}

SoilMaterial sand() {
  return {"sand", 0.0, 1474.0, 1800.0, 4.5e6, 0.68, 0.16, 1.0, 1.0};
}

SoilMaterial material_from_json(const json& j) {
  SoilMaterial m;
  m.name = j.value("name", std::string{});
  m.cohesion = j.at("cohesion").get<double>();
  m.density = j.at("density").get<double>();
  m.max_density = j.at("max_density").get<double>();
  m.youngs_modulus = j.at("youngs_modulus").get<double>();
  m.internal_friction_angle = j.at("internal_friction_angle").get<double>();
  m.dilatancy_angle = j.at("dilatancy_angle").get<double>();
  m.swell_factor = j.at("swell_factor").get<double>();
  m.repose_compaction_rate = j.at("repose_compaction_rate").get<double>();
  m.validate();
  return m;
}

json material_to_json(const SoilMaterial& m) {
  return {{"name", m.name},
          {"cohesion", m.cohesion},
          {"density", m.density},
          {"max_density", m.max_density},
          {"youngs_modulus", m.youngs_modulus},
          {"internal_friction_angle", m.internal_friction_angle},
          {"dilatancy_angle", m.dilatancy_angle},
          {"swell_factor", m.swell_factor},
          {"repose_compaction_rate", m.repose_compaction_rate}};
}

SoilMaterial load_material(const std::filesystem::path& path, const std::string& name) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open materials file: " + path.string());
  const json j = json::parse(in, nullptr, true, true);
  if (!j.contains(name)) throw std::invalid_argument("materials file has no entry '" + name + "'");
  json entry = j.at(name);
  entry["name"] = name;
  return material_from_json(entry);
}

SoilMaterial material_by_name(const std::string& name) {
  if (name == "dirt") return dirt();
  if (name == "sand") return sand();
  throw std::invalid_argument("unknown material: " + name);
}

}  // namespace rockcap::physics
