#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "alle/dataset.hpp"
#include "alle/matrix.hpp"
#include "alle/synthgen.hpp"

namespace alle::test {

inline std::filesystem::path fixture(const std::string& name) {
  return std::filesystem::path(ALLE_FIXTURE_DIR) / name;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("alle_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// Generator config with a random quadratic response per sensor.
inline GeneratorConfig random_config(std::uint64_t seed, StateKind state = StateKind::d,
                                     double noise = 0.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  GeneratorConfig c;
  c.state = state;
  c.grid = table_grid(state);
  const double span = c.grid.back() - c.grid.front();
  for (std::size_t k = 0; k < kSensorCount; ++k) {
    c.response[k] = {u(rng), u(rng) / span, u(rng) / (span * span)};
    c.oscillation_gain[k] = 0.05 * (u(rng) + 1.0);
  }
  c.noise_sigma = noise;
  c.seed = seed;
  return c;
}

/// Quadratic responses with the vertex strictly inside the grid, so no
/// sensor is monotone and C1 values do not tie.
inline GeneratorConfig closure_config(std::uint64_t seed, StateKind state = StateKind::d) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  GeneratorConfig c;
  c.state = state;
  c.grid = table_grid(state);
  const double lo = c.grid[1];
  const double hi = c.grid[c.grid.size() - 2];
  const double span = c.grid.back() - c.grid.front();
  for (std::size_t k = 0; k < kSensorCount; ++k) {
    const double vertex = lo + (hi - lo) * u(rng);
    const double a2 = (u(rng) < 0.5 ? -1.0 : 1.0) * (0.5 + u(rng)) / (span * span);
    c.response[k] = {4.0 * u(rng) - 2.0, -2.0 * a2 * vertex, a2};
    c.oscillation_gain[k] = 0.2 * u(rng);
  }
  c.seed = seed;
  return c;
}

/// Assembled (smoothed) sample set from generated recordings.
inline SampleSet generated_set(const GeneratorConfig& config, std::size_t per_recording) {
  const auto data = generate(config);
  std::vector<Recording> smoothed;
  for (const auto& r : data.recordings) smoothed.push_back(smooth(r, SmoothingParams{}));
  return assemble(smoothed, per_recording, config.grid);
}

inline FeatureMatrix random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  FeatureMatrix x(rows, cols);
  for (auto& v : x.values) v = n(rng);
  return x;
}

}  // namespace alle::test
