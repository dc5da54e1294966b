#include <algorithm>
#include "alle/evaluate.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include <nlohmann/json.hpp>

#include "alle/error.hpp"
#include "alle/random.hpp"

namespace alle {
using nlohmann::json;

namespace {

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string csv_number(double v) { return std::isfinite(v) ? format_double(v) : std::string(); }

}  // namespace

std::vector<ParameterError> per_parameter_mae(const SampleSet& set,
                                              std::span<const double> predictions) {
  if (predictions.size() != set.size())
    throw ArgumentError("prediction count does not match the sample set");
  std::vector<double> total(set.grid.size(), 0.0);
  std::vector<std::size_t> count(set.grid.size(), 0);
  for (std::size_t r = 0; r < set.size(); ++r) {
    const auto g = set.samples[r].parameter_index;
    total[g] += std::abs(predictions[r] - set.samples[r].y);
    ++count[g];
  }
  std::vector<ParameterError> out;
  for (std::size_t g = 0; g < set.grid.size(); ++g)
    if (count[g] > 0) out.push_back({set.grid[g], count[g], total[g] / static_cast<double>(count[g])});
  return out;
}

EvalReport evaluate_model(const TrainedModel& model, const SampleSet& train, const SampleSet& test) {
  if (train.state != test.state)
    throw LabelMismatchError("train and test sets describe different states");
  EvalReport report;
  report.family = model.family;
  report.state = test.state;
  report.sensors = model.sensors;
  report.seed = model.seed;
  report.n_train = train.size();
  report.n_test = test.size();

  const auto train_pred = model.predict(train);
  const auto train_y = label_vector(train);
  report.train_mae = mae(train_pred, train_y);
  report.train_r2 = r_squared(train_pred, train_y);

  const auto test_pred = model.predict(test);
  const auto test_y = label_vector(test);
  report.mae = mae(test_pred, test_y);
  report.r2 = r_squared(test_pred, test_y);
  report.per_parameter = per_parameter_mae(test, test_pred);
  return report;
}

EvalReport estimate(const SampleSet& train_set, const SampleSet& test, Family family,
                    const SensorList& sensors, const FamilyOptions& options, std::uint64_t seed) {
  if (train_set.state != test.state)
    throw LabelMismatchError("train and test sets describe different states");
  if (test.empty()) throw ArgumentError("empty test set");
  const TrainedModel model = train(train_set, family, sensors, options, seed);
  return evaluate_model(model, train_set, test);
}

const ComparisonCell* ComparisonMatrix::find(Family family, std::string_view ordering,
                                             std::size_t m) const {
  for (const auto& cell : cells)
    if (cell.family == family && cell.ordering == ordering && cell.m == m) return &cell;
  return nullptr;
}

std::uint64_t cell_seed(std::uint64_t master, Family family, std::span<const SensorId> sensors) {
  return derive_seed(master, {static_cast<std::uint64_t>(family), sensor_mask(sensors),
                              static_cast<std::uint64_t>(sensors.size())});
}

ComparisonMatrix compare_families(const SampleSet& set, std::span<const NamedOrdering> orderings,
                                  std::span<const Family> families, const CompareOptions& options) {
  if (orderings.empty()) throw ArgumentError("no sensor orderings given");
  if (families.empty()) throw ArgumentError("no model families given");
  for (const auto& o : orderings) {
    if (!is_permutation(o.order))
      throw ArgumentError("ordering '" + o.name + "' is not a permutation of the nine sensors");
  }
  ComparisonMatrix matrix;
  matrix.state = set.state;
  matrix.seed = options.seed;
  matrix.tolerance = options.tolerance;

  const auto [train_set, test_set] =
      split(set, options.train_fraction, derive_seed(options.seed, {0x73706c6974}));

  for (Family family : families) {
    std::optional<BestTuple> best;
    for (const auto& o : orderings) {
      std::vector<double> r2_curve;
      std::vector<double> mae_curve;
      bool complete = true;
      for (std::size_t m = 1; m <= kSensorCount; ++m) {
        ComparisonCell cell;
        cell.family = family;
        cell.ordering = o.name;
        cell.m = m;
        cell.sensors.assign(o.order.begin(), o.order.begin() + static_cast<std::ptrdiff_t>(m));
        cell.seed = cell_seed(options.seed, family, cell.sensors);
        // Fit on the set in canonical order so equal sets give equal cells.
        SensorList canonical = cell.sensors;
        std::sort(canonical.begin(), canonical.end(),
                  [](SensorId a, SensorId b) { return index(a) < index(b); });
        try {
          cell.report = estimate(train_set, test_set, family, canonical, options.family, cell.seed);
          r2_curve.push_back(cell.report->r2);
          mae_curve.push_back(cell.report->mae);
        } catch (const Error& e) {
          cell.error = e.what();
          complete = false;
        }
        matrix.cells.push_back(std::move(cell));
      }
      if (!complete) continue;
      const std::size_t knee = plateau_index(r2_curve, options.tolerance);
      BestTuple candidate{family, o.name, r2_curve[knee], mae_curve[knee], knee + 1};
      if (!best || candidate.r2 > best->r2) best = candidate;
    }
    if (best) matrix.best.push_back(*best);
  }
  return matrix;
}

std::string format_best_tuple(const BestTuple& best, StateKind state) {
  const std::string_view u = unit(state);
  const std::string suffix = u == "degree" ? std::string("°") : " " + std::string(u);
  char buf[128];
  std::snprintf(buf, sizeof buf, "(%.3f, %.3f%s, %zu)", best.r2, best.mae, suffix.c_str(), best.m);
  return buf;
}

void write_comparison_csv(const ComparisonMatrix& matrix, std::ostream& out) {
  out << "family,ordering,M,r2,mae,train_r2,train_mae,seed\n";
  for (const auto& cell : matrix.cells) {
    out << tag(cell.family) << ',' << cell.ordering << ',' << cell.m << ',';
    if (cell.report) {
      const auto& r = *cell.report;
      out << csv_number(r.r2) << ',' << csv_number(r.mae) << ',' << csv_number(r.train_r2) << ','
          << csv_number(r.train_mae);
    } else {
      out << ",,,";
    }
    out << ',' << cell.seed << '\n';
  }
}

void to_json(json& j, const ParameterError& e) {
  j = json{{"value", e.value}, {"count", e.count}, {"mae", e.mae}};
}

void to_json(json& j, const EvalReport& r) {
  j = json{{"family", tag(r.family)},
           {"state", tag(r.state)},
           {"sensors", labels(r.sensors)},
           {"M", r.m()},
           {"seed", r.seed},
           {"n_train", r.n_train},
           {"n_test", r.n_test},
           {"test", {{"mae", number_or_null(r.mae)}, {"r2", number_or_null(r.r2)}}},
           {"train", {{"mae", number_or_null(r.train_mae)}, {"r2", number_or_null(r.train_r2)}}},
           {"per_parameter", r.per_parameter}};
}

void to_json(json& j, const ComparisonMatrix& m) {
  json cells = json::array();
  for (const auto& c : m.cells) {
    json cell{{"family", tag(c.family)},
              {"ordering", c.ordering},
              {"M", c.m},
              {"seed", c.seed},
              {"sensors", labels(c.sensors)}};
    if (c.report) {
      cell["test"] = {{"mae", number_or_null(c.report->mae)}, {"r2", number_or_null(c.report->r2)}};
      cell["train"] = {{"mae", number_or_null(c.report->train_mae)},
                       {"r2", number_or_null(c.report->train_r2)}};
    } else {
      cell["error"] = c.error;
    }
    cells.push_back(std::move(cell));
  }
  json best = json::array();
  for (const auto& b : m.best)
    best.push_back({{"family", tag(b.family)},
                    {"ordering", b.ordering},
                    {"r2", b.r2},
                    {"mae", b.mae},
                    {"M", b.m},
                    {"display", format_best_tuple(b, m.state)}});
  j = json{{"state", tag(m.state)},
           {"seed", m.seed},
           {"tolerance", m.tolerance},
           {"cells", std::move(cells)},
           {"best", std::move(best)}};
}

}  // namespace alle
