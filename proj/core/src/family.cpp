#include "alle/family.hpp"

#include <nlohmann/json.hpp>

#include "alle/error.hpp"

namespace alle {
using nlohmann::json;

std::string_view tag(Family family) noexcept {
  switch (family) {
    case Family::rf: return "rf";
    case Family::bpnn: return "bpnn";
    case Family::svr: return "svr";
    case Family::reg: return "reg";
  }
  return "?";
}

Family family_from_tag(std::string_view text) {
  for (Family f : all_families())
    if (tag(f) == text) return f;
  throw ArgumentError("unknown model family '" + std::string(text) + "' (expected rf|bpnn|svr|reg)");
}

const std::vector<Family>& all_families() noexcept {
  static const std::vector<Family> families = {Family::rf, Family::bpnn, Family::svr, Family::reg};
  return families;
}

BpnnParams FamilyOptions::bpnn_for(StateKind state) const {
  const BpnnPreset preset = bpnn_preset(state);
  BpnnParams p;
  p.hidden = bpnn_hidden.value_or(preset.hidden);
  p.iterations = bpnn_iterations.value_or(preset.iterations);
  p.learning_rate = bpnn_learning_rate;
  return p;
}

double TrainedModel::predict_features(std::span<const double> x) const {
  return std::visit([&](const auto& m) { return m.predict(x); }, model);
}

double TrainedModel::predict(const Sample& sample) const {
  std::array<double, kSensorCount> buffer{};
  for (std::size_t c = 0; c < sensors.size(); ++c) buffer[c] = sample.x[index(sensors[c])];
  return predict_features(std::span<const double>(buffer.data(), sensors.size()));
}

std::vector<double> TrainedModel::predict(const SampleSet& set) const {
  std::vector<double> out(set.size());
  for (std::size_t r = 0; r < set.size(); ++r) out[r] = predict(set.samples[r]);
  return out;
}

TrainedModel train(const SampleSet& set, Family family, const SensorList& sensors,
                   const FamilyOptions& options, std::uint64_t seed) {
  if (sensors.empty()) throw ArgumentError("at least one sensor is required");
  check_distinct(sensors);
  if (set.empty()) throw ArgumentError("cannot train on an empty sample set");

  TrainedModel out;
  out.family = family;
  out.state = set.state;
  out.sensors = sensors;
  out.seed = seed;
  const FeatureMatrix x = feature_matrix(set, sensors);
  const std::vector<double> y = label_vector(set);
  switch (family) {
    case Family::rf: {
      ForestParams p = options.forest;
      p.seed = seed;
      out.model = fit_forest(x, y, p);
      break;
    }
    case Family::bpnn: {
      BpnnParams p = options.bpnn_for(set.state);
      p.seed = seed;
      out.model = fit_bpnn(x, y, p);
      break;
    }
    case Family::svr:
      out.model = fit_svr(x, y, options.svr);
      break;
    case Family::reg:
      out.model = fit_linreg(x, y, options.f_test_alpha);
      break;
  }
  return out;
}

void to_json(json& j, const TrainedModel& m) {
  j = json{{"family", std::string(tag(m.family))},
           {"state", std::string(tag(m.state))},
           {"sensors", labels(m.sensors)},
           {"seed", m.seed}};
  std::visit([&](const auto& model) { j["model"] = model; }, m.model);
}

void from_json(const json& j, TrainedModel& m) {
  m = TrainedModel{};
  m.family = family_from_tag(j.at("family").get<std::string>());
  auto state = state_from_tag(j.at("state").get<std::string>());
  if (!state) throw DataError("model dump names an unknown state");
  m.state = *state;
  for (const auto& l : j.at("sensors")) {
    auto s = sensor_from_label(l.get<std::string>());
    if (!s) throw DataError("model dump names an unknown sensor");
    m.sensors.push_back(*s);
  }
  m.seed = j.value("seed", std::uint64_t{0});
  const auto& body = j.at("model");
  switch (m.family) {
    case Family::rf: m.model = body.get<Forest>(); break;
    case Family::bpnn: m.model = body.get<Network>(); break;
    case Family::svr: m.model = body.get<SvrModel>(); break;
    case Family::reg: m.model = body.get<LinearModel>(); break;
  }
}

}  // namespace alle
