#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "alle/family.hpp"
#include "alle/metrics.hpp"

namespace alle {

struct ParameterError {
  double value = 0.0;
  std::size_t count = 0;
  double mae = 0.0;
};

/// Accuracy of one fitted model. `mae`/`r2` are held-out (test) metrics;
/// `train_mae`/`train_r2` are measured on the training set.
struct EvalReport {
  Family family = Family::rf;
  StateKind state = StateKind::d;
  SensorList sensors;
  std::uint64_t seed = 0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  double mae = 0.0;
  double r2 = 0.0;
  double train_mae = 0.0;
  double train_r2 = 0.0;
  /// Test MAE per grid value present in the test set.
  std::vector<ParameterError> per_parameter;

  std::size_t m() const noexcept { return sensors.size(); }
};

/// Metrics of an already fitted model.
EvalReport evaluate_model(const TrainedModel& model, const SampleSet& train, const SampleSet& test);

/// Fits `family` on `train` restricted to `sensors` and scores it on `test`.
EvalReport estimate(const SampleSet& train, const SampleSet& test, Family family,
                    const SensorList& sensors, const FamilyOptions& options, std::uint64_t seed);

/// Per-grid-value MAE of `predictions` against `set`'s labels.
std::vector<ParameterError> per_parameter_mae(const SampleSet& set,
                                              std::span<const double> predictions);

struct NamedOrdering {
  std::string name;
  SensorList order;
};

struct CompareOptions {
  FamilyOptions family;
  double train_fraction = 0.8;
  double tolerance = 0.02;
  std::uint64_t seed = 0;
};

struct ComparisonCell {
  Family family = Family::rf;
  std::string ordering;
  std::size_t m = 0;
  std::uint64_t seed = 0;
  SensorList sensors;  ///< ordering prefix; the model is fitted on it in index order
  std::optional<EvalReport> report;
  std::string error;  ///< set when the cell failed
};

/// (R^2, MAE, M) at the plateau knee of a family's best ordering.
struct BestTuple {
  Family family = Family::rf;
  std::string ordering;
  double r2 = 0.0;
  double mae = 0.0;
  std::size_t m = 0;
};

struct ComparisonMatrix {
  StateKind state = StateKind::d;
  std::uint64_t seed = 0;
  double tolerance = 0.02;
  std::vector<ComparisonCell> cells;
  std::vector<BestTuple> best;

  const ComparisonCell* find(Family family, std::string_view ordering, std::size_t m) const;
};

/// Seed of a comparison cell. It depends on the sensor set rather than on the
/// ordering's name, so equal feature sets reproduce equal cells.
std::uint64_t cell_seed(std::uint64_t master, Family family, std::span<const SensorId> sensors);

/// Evaluates every (family x ordering x M = 1..9) cell on one stratified
/// split. A failing cell is recorded with its error and the grid completes.
ComparisonMatrix compare_families(const SampleSet& set, std::span<const NamedOrdering> orderings,
                                  std::span<const Family> families, const CompareOptions& options);

/// "(0.972, 3.250 mm, 4)"
std::string format_best_tuple(const BestTuple& best, StateKind state);

/// `family,ordering,M,r2,mae,train_r2,train_mae,seed`
void write_comparison_csv(const ComparisonMatrix& matrix, std::ostream& out);

void to_json(nlohmann::json& j, const ParameterError& e);
void to_json(nlohmann::json& j, const EvalReport& report);
void to_json(nlohmann::json& j, const ComparisonMatrix& matrix);

}  // namespace alle
