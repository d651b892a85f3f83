#pragma once

#include "loomline/classifier.hpp"
#include "loomline/pipeline.hpp"
#include "loomline/scenario.hpp"

namespace loomline::fixture {

inline ScenarioConfig scenario(std::int64_t n, double error_percent = 0.0,
                               std::int64_t repetitions = 1, std::uint64_t seed = 11) {
  ScenarioConfig s;
  s.conveyor_speed = 5;
  s.arm_speed = 5;
  s.camera_capture_time = 3;
  s.laser_speed = 5;
  s.error_percent = error_percent;
  s.garment_count = n;
  s.repetitions = repetitions;
  s.seed = seed;
  return s;
}

inline PipelineOptions no_jitter() {
  PipelineOptions o;
  o.conveyor.jitter_fraction = 0.0;
  o.arm.jitter_fraction = 0.0;
  return o;
}

inline ClassifierProfile identity_profile() {
  ClassifierProfile p;
  p.name = "identity";
  p.layer_count = 1;
  p.parameter_count = 1;
  for (std::size_t i = 0; i < kMaterialCount; ++i) p.confusion_probabilities[i][i] = 1.0;
  return p;
}

inline StochasticClassifier default_classifier() {
  for (auto& p : default_profiles()) {
    if (p.name == kDefaultProfileName) return StochasticClassifier(p);
  }
  throw std::logic_error("default profile missing");
}

}  // namespace loomline::fixture
