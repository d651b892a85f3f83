#include "loomline/spectral.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace loomline {

namespace {

constexpr double kSignatureWidthNm = 60.0;
constexpr std::array<double, kMaterialCount> kCentersNm = {1050.0, 1200.0, 1350.0,
                                                           1500.0, 1650.0};

std::array<Signature, kMaterialCount> build_signatures() {
  std::array<Signature, kMaterialCount> out{};
  for (std::size_t c = 0; c < kMaterialCount; ++c) {
    for (std::size_t b = 0; b < kBandCount; ++b) {
      const double d = (wavelength_of_band(b) - kCentersNm[c]) / kSignatureWidthNm;
      out[c][b] = std::exp(-0.5 * d * d);
    }
  }
  return out;
}

}  // namespace

SpectralCube::SpectralCube(std::size_t height, std::size_t width,
                           std::vector<SpectralBand> bands)
    : height_(height), width_(width), bands_(std::move(bands)) {
  if (height_ == 0 || width_ == 0) {
    throw std::invalid_argument("spectral cube: height and width must be positive");
  }
  if (bands_.size() != kBandCount) {
    throw std::invalid_argument(
        fmt::format("spectral cube: expected {} bands, got {}", kBandCount, bands_.size()));
  }
  for (std::size_t i = 0; i < bands_.size(); ++i) {
    const auto& band = bands_[i];
    if (band.wavelength_nm != wavelength_of_band(i)) {
      throw std::invalid_argument(fmt::format(
          "spectral cube: band {} has wavelength {} nm, expected {} nm", i,
          band.wavelength_nm, wavelength_of_band(i)));
    }
    if (band.intensity.size() != height_ * width_) {
      throw std::invalid_argument(
          fmt::format("spectral cube: band {} grid size mismatch", i));
    }
    for (double v : band.intensity) {
      if (!(v >= 0.0)) {
        throw std::invalid_argument(
            fmt::format("spectral cube: band {} has negative intensity", i));
      }
    }
  }
}

double SpectralCube::band_mean(std::size_t i) const {
  const auto& grid = bands_.at(i).intensity;
  double sum = 0.0;
  for (double v : grid) sum += v;
  return sum / static_cast<double>(grid.size());
}

std::array<double, kBandCount> SpectralCube::band_means() const {
  std::array<double, kBandCount> out{};
  for (std::size_t i = 0; i < kBandCount; ++i) out[i] = band_mean(i);
  return out;
}

const Signature& base_signature(MaterialClass m) {
  static const auto signatures = build_signatures();
  return signatures.at(static_cast<std::size_t>(m));
}

double signature_center_nm(MaterialClass m) {
  return kCentersNm.at(static_cast<std::size_t>(m));
}

SpectralCube synth_spectral_cube(MaterialClass material, double noise_sigma,
                                 std::size_t height, std::size_t width,
                                 RandomStream& rng) {
  if (!(noise_sigma >= 0.0)) {
    throw std::invalid_argument("synth_spectral_cube: noise_sigma must be >= 0");
  }
  const auto& signature = base_signature(material);
  std::vector<SpectralBand> bands(kBandCount);
  for (std::size_t b = 0; b < kBandCount; ++b) {
    bands[b].wavelength_nm = wavelength_of_band(b);
    bands[b].intensity.resize(height * width);
    for (double& v : bands[b].intensity) {
      const double noise = noise_sigma > 0.0 ? rng.normal(0.0, noise_sigma) : 0.0;
      v = std::max(0.0, signature[b] + noise);
    }
  }
  return SpectralCube(height, width, std::move(bands));
}

}  // namespace loomline
