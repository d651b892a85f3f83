#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "loomline/material.hpp"
#include "loomline/random.hpp"

namespace loomline {

inline constexpr std::size_t kBandCount = 151;
inline constexpr double kFirstWavelengthNm = 950.0;
inline constexpr double kWavelengthStepNm = 5.0;
inline constexpr double kLastWavelengthNm = 1700.0;

/// Wavelength of band i on the 950..1700 nm grid.
constexpr double wavelength_of_band(std::size_t i) {
  return kFirstWavelengthNm + kWavelengthStepNm * static_cast<double>(i);
}

/// One spectral band: its wavelength and a row-major height x width grid.
struct SpectralBand {
  double wavelength_nm = 0.0;
  std::vector<double> intensity;
};

/// Hyperspectral image stack on the fixed 151-band grid. Immutable once
/// built; construction enforces the grid and non-negativity.
class SpectralCube {
 public:
  /// Throws std::invalid_argument when the band count, wavelength grid,
  /// grid sizes or intensity signs are wrong.
  SpectralCube(std::size_t height, std::size_t width, std::vector<SpectralBand> bands);

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  const std::vector<SpectralBand>& bands() const { return bands_; }

  /// Mean intensity of band i over the spatial grid.
  double band_mean(std::size_t i) const;
  std::array<double, kBandCount> band_means() const;

 private:
  std::size_t height_;
  std::size_t width_;
  std::vector<SpectralBand> bands_;
};

/// Base reflectance curve of each material: a unit-amplitude Gaussian bump
/// (sigma 60 nm) centred at 1050/1200/1350/1500/1650 nm for labels 0..4.
using Signature = std::array<double, kBandCount>;

const Signature& base_signature(MaterialClass m);
double signature_center_nm(MaterialClass m);

inline constexpr std::size_t kDefaultCubeSize = 8;

/// Base signature of `material` on every pixel plus N(0, noise_sigma) noise,
/// clamped at zero.
SpectralCube synth_spectral_cube(MaterialClass material, double noise_sigma,
                                 std::size_t height, std::size_t width,
                                 RandomStream& rng);

}  // namespace loomline
