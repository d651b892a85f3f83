#include "loomline/garment.hpp"

#include <cmath>
#include <stdexcept>

namespace loomline {

std::vector<Garment> generate_garments(std::size_t count, std::span<const double> priors,
                                       double component_rate, RandomStream& rng) {
  if (priors.size() != kMaterialCount) {
    throw std::invalid_argument("generate_garments: priors must have 5 entries");
  }
  double sum = 0.0;
  for (double p : priors) {
    if (!(p >= 0.0)) throw std::invalid_argument("generate_garments: negative prior");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw std::invalid_argument("generate_garments: priors must sum to 1");
  }
  if (!(component_rate >= 0.0 && component_rate <= 1.0)) {
    throw std::invalid_argument("generate_garments: component_rate must be in [0,1]");
  }

  std::vector<Garment> garments;
  garments.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Garment g;
    g.id = i;
    g.true_class = static_cast<MaterialClass>(rng.categorical(priors));
    if (rng.bernoulli(component_rate)) g.hard_components.push_back(HardComponent::button);
    if (rng.bernoulli(component_rate)) g.hard_components.push_back(HardComponent::zipper);
    garments.push_back(std::move(g));
  }
  return garments;
}

void attach_cubes(std::vector<Garment>& garments, double noise_sigma,
                  std::size_t cube_size, RandomStream& rng) {
  for (auto& g : garments) {
    g.cube = std::make_shared<const SpectralCube>(
        synth_spectral_cube(g.true_class, noise_sigma, cube_size, cube_size, rng));
  }
}

}  // namespace loomline
