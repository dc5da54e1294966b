#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "alle/dataset.hpp"
#include "alle/sensor.hpp"
#include "alle/state.hpp"

namespace alle {

/// Synthetic wake-pressure generator. Channel k at parameter value theta is
///   a_k0 + a_k1 theta + a_k2 theta^2 + b_k sin(2 pi f_osc t + k pi / 9) + N(0, sigma^2).
struct GeneratorConfig {
  StateKind state = StateKind::d;
  std::vector<double> grid = table_grid(StateKind::d);
  /// Quadratic mean response {a_k0, a_k1, a_k2} per sensor.
  std::array<std::array<double, 3>, kSensorCount> response{};
  /// Oscillation amplitude b_k per sensor.
  std::array<double, kSensorCount> oscillation_gain{};
  double oscillation_hz = 1.0;
  double noise_sigma = 0.0;
  double sample_rate_hz = 50.0;
  std::size_t steps_per_recording = 300;
  double flume_speed_mps = 0.175;
  std::uint64_t seed = 0;

  /// Throws ArgumentError when the configuration is unusable.
  void validate() const;

  double mean_response(std::size_t sensor, double theta) const noexcept {
    const auto& a = response[sensor];
    return a[0] + a[1] * theta + a[2] * theta * theta;
  }
};

/// Closed-form sensitivity criteria of the noise-free mean response.
struct GroundTruth {
  /// mean_response[i][k] = mu_k(theta_i)
  std::vector<std::array<double, kSensorCount>> mean_response;
  std::array<double, kSensorCount> c1{};
  std::array<double, kSensorCount> c2{};
  SensorList order_c1;
  SensorList order_c2;
};

struct GeneratedData {
  std::vector<Recording> recordings;  ///< sorted by (parameter, recording)
  GroundTruth truth;
};

GroundTruth analytic_criteria(const GeneratorConfig& config);

/// Emits five recordings per grid value. Each recording's noise stream is
/// derived from (seed, state, parameter, recording, channel), so the output
/// does not depend on how recordings are scheduled.
GeneratedData generate(const GeneratorConfig& config);

Recording generate_recording(const GeneratorConfig& config, std::size_t parameter_index,
                             std::size_t recording_index);

void to_json(nlohmann::json& j, const GeneratorConfig& config);
void from_json(const nlohmann::json& j, GeneratorConfig& config);
void to_json(nlohmann::json& j, const GroundTruth& truth);

}  // namespace alle
