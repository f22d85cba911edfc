#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json_fwd.hpp>

namespace rockcap::physics {

struct SoilMaterial {
  std::string name;
  double cohesion = 0.0;                 // Pa
  double density = 0.0;                  // kg/m^3
  double max_density = 0.0;              // kg/m^3
  double youngs_modulus = 0.0;           // Pa
  double internal_friction_angle = 0.5;  // rad
  double dilatancy_angle = 0.0;          // rad
  double swell_factor = 1.0;
  double repose_compaction_rate = 1.0;

  void validate() const;
};

// Cohesive dirt used for training.
SoilMaterial dirt();
// Cohesionless sand used for the unseen-material scenario.
SoilMaterial sand();

SoilMaterial material_from_json(const nlohmann::json& j);
nlohmann::json material_to_json(const SoilMaterial& m);
// materials.cfg holds an object keyed by material name.
SoilMaterial load_material(const std::filesystem::path& path, const std::string& name);
SoilMaterial material_by_name(const std::string& name);

}  // namespace rockcap::physics
