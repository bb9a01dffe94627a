#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "lorecast/features/feature_vector.hpp"
#include "lorecast/predictor/model.hpp"

namespace lorecast::predictor {

/// A generated RTL module and the implementation settings drawn for it.
struct SyntheticDesign {
  std::string name;
  std::string source;
  features::EdaParams eda;
};

/// One random synthesizable module named `name`. Size and operator mix vary
/// widely between draws so the extracted features cover a broad range.
std::string random_module(std::mt19937_64& rng, const std::string& name);

std::vector<SyntheticDesign> synthetic_designs(std::size_t count, std::uint64_t seed);

struct SynthTargetOptions {
  std::size_t count = 500;
  std::uint64_t seed = 0;
  double noise = 0.01;  // relative standard deviation of the target noise
};

/// Reference targets for synthetic data: each is linear in three features.
double synthetic_power(const features::FeatureVector& fv);
double synthetic_tns(const features::FeatureVector& fv);

/// Generates designs, extracts their features and labels them with the
/// reference targets times (1 + noise * N(0, 1)).
Dataset synthetic_dataset(const SynthTargetOptions& opts);

}  // namespace lorecast::predictor
