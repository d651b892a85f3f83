#include "loomline/material.hpp"

#include <stdexcept>
#include <string>

namespace loomline {

namespace {

constexpr std::array<std::string_view, kMaterialCount> kMaterialNames = {
    "cotton", "polyester", "wool", "silk", "viscose"};

constexpr std::array<std::string_view, 2> kComponentNames = {"button", "zipper"};

constexpr std::array<std::string_view, 5> kStationNames = {
    "conveyor", "camera", "arm", "laser", "bin"};

}  // namespace

MaterialClass material_from_label(int label) {
  if (label < 0 || label >= static_cast<int>(kMaterialCount)) {
    throw std::out_of_range("material label out of range [0,5): " +
                            std::to_string(label));
  }
  return static_cast<MaterialClass>(label);
}

std::string_view name_of(MaterialClass m) {
  return kMaterialNames.at(static_cast<std::size_t>(m));
}

std::optional<MaterialClass> material_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kMaterialNames.size(); ++i) {
    if (kMaterialNames[i] == name) return static_cast<MaterialClass>(i);
  }
  return std::nullopt;
}

std::string_view name_of(HardComponent c) {
  return kComponentNames.at(static_cast<std::size_t>(c));
}

std::optional<HardComponent> component_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kComponentNames.size(); ++i) {
    if (kComponentNames[i] == name) return static_cast<HardComponent>(i);
  }
  return std::nullopt;
}

std::string_view name_of(Station s) {
  return kStationNames.at(static_cast<std::size_t>(s));
}

std::optional<Station> station_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kStationNames.size(); ++i) {
    if (kStationNames[i] == name) return static_cast<Station>(i);
  }
  return std::nullopt;
}

}  // namespace loomline
