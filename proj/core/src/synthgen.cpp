#include "alle/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include <nlohmann/json.hpp>

#include "alle/error.hpp"
#include "alle/parallel.hpp"
#include "alle/random.hpp"

namespace alle {
using nlohmann::json;

namespace {

SensorList descending_order(const std::array<double, kSensorCount>& values) {
  SensorList order(all_sensors().begin(), all_sensors().end());
  std::stable_sort(order.begin(), order.end(),
                   [&](SensorId a, SensorId b) { return values[index(a)] > values[index(b)]; });
  return order;
}

}  // namespace

void GeneratorConfig::validate() const {
  if (grid.empty()) throw ArgumentError("generator grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!std::isfinite(grid[i])) throw ArgumentError("generator grid has a non-finite value");
    if (i > 0 && !(grid[i] > grid[i - 1]))
      throw ArgumentError("generator grid must be strictly increasing");
  }
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma))
    throw ArgumentError("noise_sigma must be finite and >= 0");
  bool any_signal = false;
  for (std::size_t k = 0; k < kSensorCount; ++k) {
    for (double a : response[k])
      if (!std::isfinite(a)) throw ArgumentError("response coefficients must be finite");
    if (!std::isfinite(oscillation_gain[k]))
      throw ArgumentError("oscillation gains must be finite");
    any_signal = any_signal || response[k][1] != 0.0;
  }
  if (!any_signal) throw ArgumentError("at least one sensor needs a nonzero linear response a_k1");
  if (!(sample_rate_hz > 0.0) || !std::isfinite(sample_rate_hz))
    throw ArgumentError("sample_rate_hz must be positive");
  if (!std::isfinite(oscillation_hz)) throw ArgumentError("oscillation_hz must be finite");
  if (steps_per_recording == 0) throw ArgumentError("steps_per_recording must be positive");
}

GroundTruth analytic_criteria(const GeneratorConfig& config) {
  config.validate();
  const std::size_t p = config.grid.size();
  GroundTruth truth;
  truth.mean_response.resize(p);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t k = 0; k < kSensorCount; ++k)
      truth.mean_response[i][k] = config.mean_response(k, config.grid[i]);

  for (std::size_t k = 0; k < kSensorCount; ++k) {
    double lo = truth.mean_response[0][k], hi = lo, total = 0.0;
    for (std::size_t i = 0; i < p; ++i) {
      lo = std::min(lo, truth.mean_response[i][k]);
      hi = std::max(hi, truth.mean_response[i][k]);
      if (i + 1 < p) total += std::abs(truth.mean_response[i + 1][k] - truth.mean_response[i][k]);
    }
    const double steps = p > 1 ? static_cast<double>(p - 1) : 1.0;
    truth.c2[k] = p > 1 ? total / steps : 0.0;
    truth.c1[k] = (p > 1 && hi > lo) ? total / (hi - lo) / steps : 0.0;
  }
  truth.order_c1 = descending_order(truth.c1);
  truth.order_c2 = descending_order(truth.c2);
  return truth;
}

Recording generate_recording(const GeneratorConfig& config, std::size_t parameter_index,
                             std::size_t recording_index) {
  if (parameter_index < 1 || parameter_index > config.grid.size())
    throw ArgumentError("parameter index outside the generator grid");
  Recording rec;
  rec.state = config.state;
  rec.parameter_index = parameter_index;
  rec.parameter_value = config.grid[parameter_index - 1];
  rec.recording_index = recording_index;
  rec.sample_rate_hz = config.sample_rate_hz;
  const std::size_t n = config.steps_per_recording;
  rec.time.resize(n);
  for (std::size_t t = 0; t < n; ++t) rec.time[t] = static_cast<double>(t) / config.sample_rate_hz;

  const double theta = rec.parameter_value;
  for (std::size_t k = 0; k < kSensorCount; ++k) {
    auto& ch = rec.channels[k];
    ch.resize(n);
    const double mu = config.mean_response(k, theta);
    const double gain = config.oscillation_gain[k];
    const double phase = static_cast<double>(k) * std::numbers::pi / 9.0;
    Rng rng = make_rng(config.seed, {state_index(config.state), parameter_index, recording_index, k});
    std::normal_distribution<double> noise(0.0, config.noise_sigma > 0.0 ? config.noise_sigma : 1.0);
    for (std::size_t t = 0; t < n; ++t) {
      double v = mu;
      if (gain != 0.0)
        v += gain * std::sin(2.0 * std::numbers::pi * config.oscillation_hz * rec.time[t] + phase);
      if (config.noise_sigma > 0.0) v += noise(rng);
      ch[t] = v;
    }
  }
  return rec;
}

GeneratedData generate(const GeneratorConfig& config) {
  config.validate();
  GeneratedData out;
  const std::size_t p = config.grid.size();
  out.recordings.resize(p * kRecordingsPerParameter);
  parallel_for(out.recordings.size(), [&](std::size_t slot) {
    out.recordings[slot] = generate_recording(config, slot / kRecordingsPerParameter + 1,
                                              slot % kRecordingsPerParameter + 1);
  });
  out.truth = analytic_criteria(config);
  return out;
}

void to_json(json& j, const GeneratorConfig& c) {
  json response = json::array();
  for (const auto& row : c.response) response.push_back(row);
  j = json{{"state_kind", std::string(tag(c.state))},
           {"grid", c.grid},
           {"response", response},
           {"oscillation_gain", c.oscillation_gain},
           {"oscillation_hz", c.oscillation_hz},
           {"noise_sigma", c.noise_sigma},
           {"sample_rate_hz", c.sample_rate_hz},
           {"steps_per_recording", c.steps_per_recording},
           {"flume_speed_mps", c.flume_speed_mps},
           {"seed", c.seed}};
}

void from_json(const json& j, GeneratorConfig& c) {
  c = GeneratorConfig{};
  std::string kind = j.at("state_kind").get<std::string>();
  auto state = state_from_tag(kind);
  if (!state) throw ArgumentError("unknown state_kind '" + kind + "'");
  c.state = *state;
  c.grid = j.contains("grid") ? j.at("grid").get<std::vector<double>>() : table_grid(c.state);
  const auto& response = j.at("response");
  if (!response.is_array() || response.size() != kSensorCount)
    throw ArgumentError("response must list 9 rows of {a0, a1, a2}");
  for (std::size_t k = 0; k < kSensorCount; ++k) {
    const auto& row = response.at(k);
    if (!row.is_array() || row.size() != 3) throw ArgumentError("response rows need 3 coefficients");
    for (std::size_t q = 0; q < 3; ++q) c.response[k][q] = row.at(q).get<double>();
  }
  if (j.contains("oscillation_gain")) {
    const auto& g = j.at("oscillation_gain");
    if (!g.is_array() || g.size() != kSensorCount)
      throw ArgumentError("oscillation_gain must list 9 values");
    for (std::size_t k = 0; k < kSensorCount; ++k) c.oscillation_gain[k] = g.at(k).get<double>();
  }
  c.oscillation_hz = j.value("oscillation_hz", c.oscillation_hz);
  c.noise_sigma = j.value("noise_sigma", c.noise_sigma);
  c.sample_rate_hz = j.value("sample_rate_hz", c.sample_rate_hz);
  c.steps_per_recording = j.value("steps_per_recording", c.steps_per_recording);
  c.flume_speed_mps = j.value("flume_speed_mps", c.flume_speed_mps);
  c.seed = j.value("seed", c.seed);
}

void to_json(json& j, const GroundTruth& t) {
  json means = json::array();
  for (const auto& row : t.mean_response) means.push_back(row);
  j = json{{"mean_response", means},
           {"c1", t.c1},
           {"c2", t.c2},
           {"order_c1", labels(t.order_c1)},
           {"order_c2", labels(t.order_c2)},
           {"sensors", labels(all_sensors())}};
}

}  // namespace alle
