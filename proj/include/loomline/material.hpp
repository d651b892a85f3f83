#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>

namespace loomline {

/// Textile material classes. The integer value is the dataset label.
enum class MaterialClass : int {
  cotton = 0,
  polyester = 1,
  wool = 2,
  silk = 3,
  viscose = 4,
};

inline constexpr std::size_t kMaterialCount = 5;

inline constexpr std::array<MaterialClass, kMaterialCount> kAllMaterials = {
    MaterialClass::cotton, MaterialClass::polyester, MaterialClass::wool,
    MaterialClass::silk, MaterialClass::viscose};

constexpr int label_of(MaterialClass m) { return static_cast<int>(m); }

/// Throws std::out_of_range for labels outside [0, 5).
MaterialClass material_from_label(int label);

std::string_view name_of(MaterialClass m);
std::optional<MaterialClass> material_from_name(std::string_view name);

/// Hard components the laser station cuts away before repurposing.
enum class HardComponent { button, zipper };

std::string_view name_of(HardComponent c);
std::optional<HardComponent> component_from_name(std::string_view name);

/// Processing stations in pipeline order, plus the output bins.
enum class Station { conveyor, camera, arm, laser, bin };

inline constexpr std::array<Station, 4> kProcessingStations = {
    Station::conveyor, Station::camera, Station::arm, Station::laser};

std::string_view name_of(Station s);
std::optional<Station> station_from_name(std::string_view name);

/// Index of a processing station in kProcessingStations. Not valid for bin.
constexpr std::size_t station_index(Station s) {
  return static_cast<std::size_t>(s);
}

}  // namespace loomline
