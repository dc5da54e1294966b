#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "alle/dataset.hpp"
#include "alle/family.hpp"

namespace alle {

/// Row i, column k: mean HPV of sensor k over every sample at grid entry i.
struct PerParameterMeans {
  StateKind state = StateKind::d;
  std::vector<double> grid;
  std::vector<std::array<double, kSensorCount>> means;
  std::vector<std::size_t> counts;

  std::size_t rows() const noexcept { return means.size(); }
};

/// Throws CompletenessError when a grid entry has no samples.
PerParameterMeans per_parameter_means(const SampleSet& set);

enum class Criterion { c1, c2 };

std::string_view tag(Criterion criterion) noexcept;
/// Throws ArgumentError on anything but "c1"/"c2".
Criterion criterion_from_tag(std::string_view text);

struct SensorSensitivity {
  std::vector<double> delta;       ///< |mean(i+1) - mean(i)|
  double range = 0.0;              ///< max - min of the means
  std::vector<double> normalized;  ///< delta / range, 0 when range = 0
  double c1 = 0.0;
  double c2 = 0.0;
};

struct SensitivityReport {
  std::array<SensorSensitivity, kSensorCount> sensors;
  std::array<double, kSensorCount> c1{};
  std::array<double, kSensorCount> c2{};
  SensorList order_c1;
  SensorList order_c2;
  Criterion chosen = Criterion::c2;

  const SensorList& ordering() const noexcept {
    return chosen == Criterion::c1 ? order_c1 : order_c2;
  }
  const SensorList& ordering(Criterion c) const noexcept {
    return c == Criterion::c1 ? order_c1 : order_c2;
  }
  const std::array<double, kSensorCount>& values(Criterion c) const noexcept {
    return c == Criterion::c1 ? c1 : c2;
  }
};

/// Both criteria from a p x 9 means matrix. Throws ArgumentError for p < 2.
SensitivityReport criteria(std::span<const std::array<double, kSensorCount>> means,
                           Criterion chosen = Criterion::c2);
SensitivityReport criteria(const PerParameterMeans& means, Criterion chosen = Criterion::c2);

/// Descending by value, ties by sensor index. Throws ArgumentError unless
/// there are nine finite values.
SensorList sort_sensors(std::span<const double> values);

struct RedundancyCurve {
  Family family = Family::rf;
  SensorList ordering;
  std::array<double, kSensorCount> mae{};
  std::array<double, kSensorCount> r2{};
  std::array<double, kSensorCount> train_mae{};
  std::array<double, kSensorCount> train_r2{};
  std::size_t m_r = kSensorCount;  ///< 1..9
  double tolerance = 0.02;
  std::uint64_t seed = 0;
};

struct SweepOptions {
  FamilyOptions family;
  double tolerance = 0.02;
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
};

/// Fits `family` on the first M sensors of `ordering` for M = 1..9 and scores
/// each fit on a held-out stratified split. M_r is the smallest M with
/// R^2(M) >= max R^2 - tolerance * |max R^2|.
RedundancyCurve m_sweep(const SampleSet& set, const SensorList& ordering, Family family,
                        const SweepOptions& options);
/// As above; throws ArgumentError on an unknown family tag.
RedundancyCurve m_sweep(const SampleSet& set, const SensorList& ordering,
                        std::string_view family_tag, const SweepOptions& options);

/// "0.3165"
std::string format_fixed4(double v);

/// `M,r2,mae,train_r2,train_mae`
void write_curve_csv(const RedundancyCurve& curve, std::ostream& out);
/// `sensor,c1,c2`, values at 4 decimals
void write_criteria_csv(const SensitivityReport& report, std::ostream& out);

void to_json(nlohmann::json& j, const PerParameterMeans& means);
void to_json(nlohmann::json& j, const SensitivityReport& report);
void to_json(nlohmann::json& j, const RedundancyCurve& curve);

}  // namespace alle
