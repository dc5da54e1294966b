#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace alle {

inline constexpr std::size_t kSensorCount = 9;

/// Pressure sensors of the lateral-line array: the nose sensor P0 and four
/// sensors down each flank.
enum class SensorId : std::uint8_t { P0, PL1, PL2, PL3, PL4, PR1, PR2, PR3, PR4 };

constexpr std::size_t index(SensorId s) noexcept { return static_cast<std::size_t>(s); }

std::string_view label(SensorId s) noexcept;
std::optional<SensorId> sensor_from_label(std::string_view text) noexcept;
std::optional<SensorId> sensor_from_index(std::size_t i) noexcept;

const std::array<SensorId, kSensorCount>& all_sensors() noexcept;

/// A sequence of distinct sensors; either a full permutation (an ordering)
/// or a prefix of one (the sensors fed to a model).
using SensorList = std::vector<SensorId>;

std::vector<std::string> labels(std::span<const SensorId> sensors);

/// Parses "P0,PL1,PR2" or "all". Throws ArgumentError on unknown or repeated labels.
SensorList parse_sensor_list(std::string_view text);

/// Throws ArgumentError unless the list holds distinct sensors.
void check_distinct(std::span<const SensorId> sensors);

/// True when the list is a permutation of all nine sensors.
bool is_permutation(std::span<const SensorId> sensors) noexcept;

/// Bitmask with bit index(s) set for every listed sensor.
std::uint32_t sensor_mask(std::span<const SensorId> sensors) noexcept;

}  // namespace alle
