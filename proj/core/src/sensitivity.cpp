#include "alle/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>

#include <nlohmann/json.hpp>

#include "alle/error.hpp"
#include "alle/evaluate.hpp"
#include "alle/metrics.hpp"
#include "alle/parallel.hpp"
#include "alle/random.hpp"

namespace alle {
using nlohmann::json;

PerParameterMeans per_parameter_means(const SampleSet& set) {
  PerParameterMeans out;
  out.state = set.state;
  out.grid = set.grid;
  out.means.assign(set.grid.size(), {});
  out.counts.assign(set.grid.size(), 0);
  for (const auto& s : set.samples) {
    if (s.parameter_index >= set.grid.size())
      throw CompletenessError("sample parameter index outside the grid");
    auto& row = out.means[s.parameter_index];
    for (std::size_t k = 0; k < kSensorCount; ++k) row[k] += s.x[k];
    ++out.counts[s.parameter_index];
  }
  for (std::size_t i = 0; i < out.grid.size(); ++i) {
    if (out.counts[i] == 0)
      throw CompletenessError("no samples at " + std::string(tag(set.state)) + " = " +
                              format_double(out.grid[i]));
    for (auto& v : out.means[i]) v /= static_cast<double>(out.counts[i]);
  }
  return out;
}

std::string_view tag(Criterion criterion) noexcept {
  return criterion == Criterion::c1 ? "c1" : "c2";
}

Criterion criterion_from_tag(std::string_view text) {
  if (text == "c1" || text == "C1") return Criterion::c1;
  if (text == "c2" || text == "C2") return Criterion::c2;
  throw ArgumentError("unknown criterion '" + std::string(text) + "' (expected c1 or c2)");
}

SensorList sort_sensors(std::span<const double> values) {
  if (values.size() != kSensorCount)
    throw ArgumentError("expected 9 criterion values, got " + std::to_string(values.size()));
  for (std::size_t k = 0; k < kSensorCount; ++k)
    if (!std::isfinite(values[k]))
      throw ArgumentError("non-finite criterion value for " +
                          std::string(label(all_sensors()[k])));
  std::array<std::size_t, kSensorCount> idx{};
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
  SensorList out;
  for (auto k : idx) out.push_back(all_sensors()[k]);
  return out;
}

SensitivityReport criteria(std::span<const std::array<double, kSensorCount>> means,
                           Criterion chosen) {
  const std::size_t p = means.size();
  if (p < 2) throw ArgumentError("sensitivity criteria need at least two grid values");
  SensitivityReport report;
  report.chosen = chosen;
  for (std::size_t k = 0; k < kSensorCount; ++k) {
    auto& s = report.sensors[k];
    double lo = means[0][k];
    double hi = means[0][k];
    for (std::size_t i = 0; i < p; ++i) {
      if (!std::isfinite(means[i][k])) throw ArgumentError("non-finite mean response");
      lo = std::min(lo, means[i][k]);
      hi = std::max(hi, means[i][k]);
    }
    s.range = hi - lo;
    double sum_delta = 0.0;
    double sum_norm = 0.0;
    for (std::size_t i = 0; i + 1 < p; ++i) {
      const double d = std::abs(means[i + 1][k] - means[i][k]);
      const double n = s.range > 0.0 ? d / s.range : 0.0;
      s.delta.push_back(d);
      s.normalized.push_back(n);
      sum_delta += d;
      sum_norm += n;
    }
    s.c1 = sum_norm / static_cast<double>(p - 1);
    s.c2 = sum_delta / static_cast<double>(p - 1);
    report.c1[k] = s.c1;
    report.c2[k] = s.c2;
  }
  report.order_c1 = sort_sensors(report.c1);
  report.order_c2 = sort_sensors(report.c2);
  return report;
}

SensitivityReport criteria(const PerParameterMeans& means, Criterion chosen) {
  return criteria(std::span<const std::array<double, kSensorCount>>(means.means), chosen);
}

RedundancyCurve m_sweep(const SampleSet& set, const SensorList& ordering, Family family,
                        const SweepOptions& options) {
  if (!is_permutation(ordering))
    throw ArgumentError("the sweep ordering must list all nine sensors once");
  if (!(options.tolerance >= 0.0 && options.tolerance < 1.0))
    throw ArgumentError("plateau tolerance must lie in [0, 1)");
  RedundancyCurve curve;
  curve.family = family;
  curve.ordering = ordering;
  curve.tolerance = options.tolerance;
  curve.seed = options.seed;

  const auto [train_set, test_set] =
      split(set, options.train_fraction, derive_seed(options.seed, {0x73706c6974}));

  std::array<EvalReport, kSensorCount> reports;
  const auto run = [&](std::size_t i) {
    const SensorList prefix(ordering.begin(), ordering.begin() + static_cast<std::ptrdiff_t>(i + 1));
    reports[i] = estimate(train_set, test_set, family, prefix, options.family,
                          derive_seed(options.seed, {i + 1}));
  };
  // The forest already spreads its trees over the workers.
  if (family == Family::rf) {
    for (std::size_t i = 0; i < kSensorCount; ++i) run(i);
  } else {
    parallel_for(kSensorCount, run);
  }
  for (std::size_t i = 0; i < kSensorCount; ++i) {
    curve.mae[i] = reports[i].mae;
    curve.r2[i] = reports[i].r2;
    curve.train_mae[i] = reports[i].train_mae;
    curve.train_r2[i] = reports[i].train_r2;
  }
  curve.m_r = plateau_index(curve.r2, options.tolerance) + 1;
  return curve;
}

RedundancyCurve m_sweep(const SampleSet& set, const SensorList& ordering,
                        std::string_view family_tag, const SweepOptions& options) {
  return m_sweep(set, ordering, family_from_tag(family_tag), options);
}

std::string format_fixed4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

void write_curve_csv(const RedundancyCurve& curve, std::ostream& out) {
  out << "M,r2,mae,train_r2,train_mae\n";
  for (std::size_t i = 0; i < kSensorCount; ++i)
    out << i + 1 << ',' << format_double(curve.r2[i]) << ',' << format_double(curve.mae[i]) << ','
        << format_double(curve.train_r2[i]) << ',' << format_double(curve.train_mae[i]) << '\n';
}

void write_criteria_csv(const SensitivityReport& report, std::ostream& out) {
  out << "sensor,c1,c2\n";
  for (std::size_t k = 0; k < kSensorCount; ++k)
    out << label(all_sensors()[k]) << ',' << format_fixed4(report.c1[k]) << ','
        << format_fixed4(report.c2[k]) << '\n';
}

void to_json(json& j, const PerParameterMeans& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i)
    rows.push_back({{"value", m.grid[i]}, {"count", m.counts[i]}, {"means", m.means[i]}});
  j = json{{"state", tag(m.state)}, {"rows", std::move(rows)}};
}

void to_json(json& j, const SensitivityReport& r) {
  json sensors = json::object();
  for (std::size_t k = 0; k < kSensorCount; ++k) {
    const auto& s = r.sensors[k];
    sensors[std::string(label(all_sensors()[k]))] = {
        {"delta", s.delta},
        {"range", s.range},
        {"normalized_delta", s.normalized},
        {"c1", s.c1},
        {"c2", s.c2},
        {"c1_display", format_fixed4(s.c1)},
        {"c2_display", format_fixed4(s.c2)}};
  }
  j = json{{"chosen", tag(r.chosen)},
           {"ordering", labels(r.ordering())},
           {"order_c1", labels(r.order_c1)},
           {"order_c2", labels(r.order_c2)},
           {"sensors", std::move(sensors)}};
}

void to_json(json& j, const RedundancyCurve& c) {
  j = json{{"family", tag(c.family)},
           {"ordering", labels(c.ordering)},
           {"seed", c.seed},
           {"tolerance", c.tolerance},
           {"M_r", c.m_r},
           {"r2", c.r2},
           {"mae", c.mae},
           {"train_r2", c.train_r2},
           {"train_mae", c.train_mae}};
}

}  // namespace alle
