#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "alle/bpnn.hpp"
#include "alle/dataset.hpp"
#include "alle/forest.hpp"
#include "alle/linreg.hpp"
#include "alle/svr.hpp"

namespace alle {

/// The four regression families compared on the lateral-line data.
enum class Family { rf, bpnn, svr, reg };

std::string_view tag(Family family) noexcept;
/// Throws ArgumentError on an unknown tag.
Family family_from_tag(std::string_view text);
const std::vector<Family>& all_families() noexcept;

/// Hyperparameters for every family. Seeds inside are overwritten by train().
struct FamilyOptions {
  ForestParams forest;
  /// Unset hidden/iterations take the per-state preset.
  std::optional<std::size_t> bpnn_hidden;
  std::optional<std::size_t> bpnn_iterations;
  double bpnn_learning_rate = 0.1;
  SvrParams svr;
  double f_test_alpha = 0.05;

  BpnnParams bpnn_for(StateKind state) const;
};

/// A fitted regressor together with the sensors it reads.
struct TrainedModel {
  Family family = Family::rf;
  StateKind state = StateKind::d;
  SensorList sensors;
  std::uint64_t seed = 0;
  std::variant<Forest, Network, SvrModel, LinearModel> model;

  double predict(const Sample& sample) const;
  /// `x` holds the model's own sensors, in `sensors` order.
  double predict_features(std::span<const double> x) const;
  std::vector<double> predict(const SampleSet& set) const;
};

TrainedModel train(const SampleSet& set, Family family, const SensorList& sensors,
                   const FamilyOptions& options, std::uint64_t seed);

void to_json(nlohmann::json& j, const TrainedModel& model);
void from_json(const nlohmann::json& j, TrainedModel& model);

}  // namespace alle
