#include "alle/sensor.hpp"

#include <algorithm>

#include "alle/error.hpp"

namespace alle {
namespace {

constexpr std::array<std::string_view, kSensorCount> kLabels = {
    "P0", "PL1", "PL2", "PL3", "PL4", "PR1", "PR2", "PR3", "PR4"};

constexpr std::array<SensorId, kSensorCount> kAll = {
    SensorId::P0,  SensorId::PL1, SensorId::PL2, SensorId::PL3, SensorId::PL4,
    SensorId::PR1, SensorId::PR2, SensorId::PR3, SensorId::PR4};

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

}  // namespace

std::string_view label(SensorId s) noexcept { return kLabels[index(s)]; }

std::optional<SensorId> sensor_from_label(std::string_view text) noexcept {
  for (std::size_t i = 0; i < kSensorCount; ++i)
    if (kLabels[i] == text) return kAll[i];
  return std::nullopt;
}

std::optional<SensorId> sensor_from_index(std::size_t i) noexcept {
  if (i >= kSensorCount) return std::nullopt;
  return kAll[i];
}

const std::array<SensorId, kSensorCount>& all_sensors() noexcept { return kAll; }

std::vector<std::string> labels(std::span<const SensorId> sensors) {
  std::vector<std::string> out;
  out.reserve(sensors.size());
  for (SensorId s : sensors) out.emplace_back(label(s));
  return out;
}

SensorList parse_sensor_list(std::string_view text) {
  text = trim(text);
  if (text == "all") return SensorList(kAll.begin(), kAll.end());
  SensorList out;
  while (!text.empty()) {
    auto comma = text.find(',');
    std::string_view item = trim(text.substr(0, comma));
    auto s = sensor_from_label(item);
    if (!s) throw ArgumentError("unknown sensor label '" + std::string(item) + "'");
    out.push_back(*s);
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  if (out.empty()) throw ArgumentError("empty sensor list");
  check_distinct(out);
  return out;
}

void check_distinct(std::span<const SensorId> sensors) {
  std::array<bool, kSensorCount> seen{};
  for (SensorId s : sensors) {
    if (seen[index(s)])
      throw ArgumentError("sensor " + std::string(label(s)) + " listed twice");
    seen[index(s)] = true;
  }
}

bool is_permutation(std::span<const SensorId> sensors) noexcept {
  if (sensors.size() != kSensorCount) return false;
  return sensor_mask(sensors) == (1u << kSensorCount) - 1u;
}

std::uint32_t sensor_mask(std::span<const SensorId> sensors) noexcept {
  std::uint32_t mask = 0;
  for (SensorId s : sensors) mask |= 1u << index(s);
  return mask;
}

}  // namespace alle
