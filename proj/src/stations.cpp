#include "loomline/stations.hpp"

#include <fmt/format.h>

#include <stdexcept>

namespace loomline {

void validate_station_params(const StationParams& p) {
  if (!(p.base_time > 0.0)) {
    throw std::invalid_argument(
        fmt::format("{}: base_time must be > 0, got {}", name_of(p.station), p.base_time));
  }
  if (p.speed < 1) {
    throw std::invalid_argument(
        fmt::format("{}: speed must be >= 1, got {}", name_of(p.station), p.speed));
  }
  if (!(p.jitter_fraction >= 0.0 && p.jitter_fraction < 1.0)) {
    throw std::invalid_argument(fmt::format("{}: jitter_fraction must be in [0,1), got {}",
                                            name_of(p.station), p.jitter_fraction));
  }
  if (p.deterministic && p.jitter_fraction != 0.0) {
    throw std::invalid_argument(
        fmt::format("{}: deterministic station with non-zero jitter", name_of(p.station)));
  }
}

double service_time(const StationParams& params, RandomStream& rng) {
  const double nominal = params.base_time / params.speed;
  if (params.deterministic) return nominal;
  const double j = params.jitter_fraction;
  return nominal * rng.uniform(1.0 - j, 1.0 + j);
}

bool inject_error(double error_percent, RandomStream& rng) {
  return rng.bernoulli(error_percent / 100.0);
}

StationParams station_params(Station station, const ScenarioConfig& scenario,
                             const PipelineOptions& options) {
  StationParams p;
  p.station = station;
  switch (station) {
    case Station::conveyor:
      p.base_time = options.conveyor.base_time;
      p.speed = scenario.conveyor_speed;
      p.jitter_fraction = options.conveyor.jitter_fraction;
      p.deterministic = false;
      break;
    case Station::camera:
      p.base_time = scenario.camera_capture_time;
      p.speed = 1;
      break;
    case Station::arm:
      p.base_time = options.arm.base_time;
      p.speed = scenario.arm_speed;
      p.jitter_fraction = options.arm.jitter_fraction;
      p.deterministic = false;
      break;
    case Station::laser:
      p.base_time = options.laser.base_time;
      p.speed = scenario.laser_speed;
      p.jitter_fraction = options.laser.jitter_fraction;
      break;
    case Station::bin:
      throw std::invalid_argument("bins have no service time");
  }
  validate_station_params(p);
  return p;
}

bool retries_on_error(Station station, const PipelineOptions& options) {
  switch (station) {
    case Station::conveyor: return options.conveyor.retry_on_error;
    case Station::camera: return options.camera_retry_on_error;
    case Station::arm: return options.arm.retry_on_error;
    case Station::laser: return options.laser.retry_on_error;
    case Station::bin: return false;
  }
  return false;
}

}  // namespace loomline
