#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "alle/matrix.hpp"
#include "alle/standardizer.hpp"
#include "alle/state.hpp"

namespace alle {

struct BpnnParams {
  std::size_t hidden = 10;
  std::size_t iterations = 1000;
  double learning_rate = 0.1;
  std::uint64_t seed = 0;
};

/// Three-layer back-propagation network: z-scored inputs, one sigmoid hidden
/// layer, one linear output. Labels are min-max scaled to [0, 1] for training.
///
/// Parameters are stored flat as [W1 (hidden x inputs, row-major), b1, w2, b2].
struct Network {
  std::size_t inputs = 0;
  std::size_t hidden = 0;
  std::vector<double> weights;
  Standardizer input;
  double label_min = 0.0;
  double label_scale = 1.0;
  /// Full-batch loss after each iteration (non-increasing).
  std::vector<double> loss_history;
  double final_learning_rate = 0.0;

  static std::size_t parameter_count(std::size_t inputs, std::size_t hidden) noexcept {
    return hidden * inputs + 2 * hidden + 1;
  }

  /// Output in scaled label units for an already standardized input.
  double forward_standardized(std::span<const double> z) const;
  /// Prediction in label units. Throws ArgumentError on a width mismatch.
  double predict(std::span<const double> x) const;
};

/// Loss 1/(2n) sum (o - t)^2 over standardized rows `z` and scaled targets
/// `t`. When `gradient` is non-null it receives dLoss/dweights.
double network_loss(const Network& net, const FeatureMatrix& z, std::span<const double> t,
                    std::vector<double>* gradient);

/// Full-batch gradient descent. The step is rejected and the rate halved
/// whenever the loss would increase. Throws StandardizationError for a
/// feature with zero spread.
Network fit_bpnn(const FeatureMatrix& x, std::span<const double> y, const BpnnParams& params);

/// Hidden-node and iteration counts chosen per state from the hyperparameter sweeps.
struct BpnnPreset {
  std::size_t hidden;
  std::size_t iterations;
};
BpnnPreset bpnn_preset(StateKind kind) noexcept;

enum class SweepAxis { hidden, iterations };

struct SweepResult {
  SweepAxis axis = SweepAxis::hidden;
  std::vector<std::size_t> values;
  std::vector<double> r2;             ///< training-set R^2
  std::vector<double> train_seconds;  ///< wall clock
  std::size_t chosen = 0;  ///< the selected grid value (not its index)
  double tolerance = 0.01;
};

/// Trains one network per grid value (the other hyperparameter taken from
/// `base`) and picks the smallest value whose R^2 is within `tolerance` of the
/// sweep maximum. Grid cell g is seeded from (base.seed, g).
SweepResult sweep_bpnn(const FeatureMatrix& x, std::span<const double> y, SweepAxis axis,
                       std::span<const std::size_t> grid, const BpnnParams& base,
                       double tolerance = 0.01);

/// `value,r2,train_seconds`
void write_sweep_csv(const SweepResult& sweep, std::ostream& out);

void to_json(nlohmann::json& j, const Network& net);
void from_json(const nlohmann::json& j, Network& net);

}  // namespace alle
