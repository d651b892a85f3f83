#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "loomline/material.hpp"
#include "loomline/random.hpp"
#include "loomline/spectral.hpp"

namespace loomline {

inline constexpr double kDefaultComponentRate = 0.5;

/// One textile item entering the line.
struct Garment {
  std::uint64_t id = 0;
  MaterialClass true_class = MaterialClass::cotton;
  std::vector<HardComponent> hard_components;
  std::shared_ptr<const SpectralCube> cube;
};

/// Draws `count` garments with ids 0..count-1. Each garment's class comes
/// from `priors`; a button and a zipper are each attached independently
/// with probability component_rate. Throws std::invalid_argument when
/// priors or component_rate are out of range.
std::vector<Garment> generate_garments(std::size_t count, std::span<const double> priors,
                                       double component_rate, RandomStream& rng);

/// Attaches a synthetic spectral cube of each garment's true class.
void attach_cubes(std::vector<Garment>& garments, double noise_sigma,
                  std::size_t cube_size, RandomStream& rng);

}  // namespace loomline
