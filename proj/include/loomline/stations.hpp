#pragma once

#include <cstddef>
#include <optional>

#include "loomline/material.hpp"
#include "loomline/random.hpp"
#include "loomline/scenario.hpp"

namespace loomline {

/// Service-time law of one station. Nominal time per garment is
/// base_time / speed; stochastic stations scale it by u ~ U[1-j, 1+j].
struct StationParams {
  Station station = Station::conveyor;
  double base_time = 1.0;
  int speed = 1;
  double jitter_fraction = 0.0;
  bool deterministic = true;
};

/// Throws std::invalid_argument unless base_time > 0, speed >= 1,
/// jitter in [0,1) and deterministic stations have zero jitter.
void validate_station_params(const StationParams& params);

/// Seconds charged for one service at the station. Deterministic stations
/// do not touch the stream.
double service_time(const StationParams& params, RandomStream& rng);

/// True with probability error_percent / 100. Always consumes one draw.
bool inject_error(double error_percent, RandomStream& rng);

/// Per-station modelling choices that are not part of the scenario file.
struct StationModel {
  double base_time = 1.0;       // seconds at speed 1
  double jitter_fraction = 0.0;
  bool retry_on_error = true;   // an injected error re-runs the service once
};

struct PipelineOptions {
  StationModel conveyor{5.0, 0.25, true};
  StationModel arm{8.0, 0.25, true};
  StationModel laser{5.0, 0.0, false};
  // Capture time comes from the scenario; errors are logged without a
  // second capture unless this is set.
  bool camera_retry_on_error = false;

  double component_rate = 0.5;
  /// Noise of the synthetic cubes attached to each garment. Cubes are
  /// attached when this is set or the classifier needs them.
  std::optional<double> cube_noise_sigma;
  std::size_t cube_size = 8;

  bool parallel_repetitions = false;
};

inline constexpr double kDefaultCubeNoiseSigma = 0.05;

/// Service law of a processing station under a scenario. Camera and laser
/// are deterministic; conveyor and arm are jittered.
StationParams station_params(Station station, const ScenarioConfig& scenario,
                             const PipelineOptions& options);

bool retries_on_error(Station station, const PipelineOptions& options);

}  // namespace loomline
