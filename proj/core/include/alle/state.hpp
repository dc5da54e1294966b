#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

namespace alle {

/// The seven relative states between leader and follower: vertical distance,
/// tail-beat amplitude, frequency, offset, and yaw/pitch/roll.
enum class StateKind { d, A, f, phi, alpha, beta, gamma };

inline constexpr std::size_t kStateCount = 7;

std::string_view tag(StateKind kind) noexcept;
std::string_view unit(StateKind kind) noexcept;
std::size_t state_index(StateKind kind) noexcept;

/// Accepts the ASCII tags ("d", "A", "f", "phi", "alpha", "beta", "gamma")
/// as well as the Greek letters.
std::optional<StateKind> state_from_tag(std::string_view text) noexcept;

/// The experimental parameter grid for the state, strictly increasing.
const std::vector<double>& table_grid(StateKind kind);

const std::vector<StateKind>& all_states() noexcept;

/// Index of `value` in `grid` (exact match within 1e-9 relative), if present.
std::optional<std::size_t> grid_index(const std::vector<double>& grid, double value) noexcept;

}  // namespace alle
