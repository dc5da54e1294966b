#include "alle/state.hpp"

#include <array>
#include <cmath>

namespace alle {
namespace {

std::vector<double> integer_grid(int first, int last, int step) {
  std::vector<double> g;
  for (int v = first; v <= last; v += step) g.push_back(v);
  return g;
}

std::vector<double> make_grid(StateKind kind) {
  switch (kind) {
    case StateKind::d: return integer_grid(-45, 45, 15);
    case StateKind::A: return integer_grid(0, 30, 2);
    case StateKind::f: {
      std::vector<double> g;
      for (int tenths = 5; tenths <= 10; ++tenths) g.push_back(tenths / 10.0);
      return g;
    }
    case StateKind::phi: return integer_grid(-30, 30, 5);
    case StateKind::alpha: return integer_grid(-90, 90, 10);
    case StateKind::beta: return integer_grid(-20, 20, 5);
    case StateKind::gamma: return integer_grid(-50, 50, 10);
  }
  return {};
}

}  // namespace

std::string_view tag(StateKind kind) noexcept {
  switch (kind) {
    case StateKind::d: return "d";
    case StateKind::A: return "A";
    case StateKind::f: return "f";
    case StateKind::phi: return "phi";
    case StateKind::alpha: return "alpha";
    case StateKind::beta: return "beta";
    case StateKind::gamma: return "gamma";
  }
  return "?";
}

std::string_view unit(StateKind kind) noexcept {
  switch (kind) {
    case StateKind::d: return "mm";
    case StateKind::f: return "Hz";
    default: return "degree";
  }
}

std::size_t state_index(StateKind kind) noexcept { return static_cast<std::size_t>(kind); }

std::optional<StateKind> state_from_tag(std::string_view text) noexcept {
  for (StateKind k : all_states())
    if (tag(k) == text) return k;
  if (text == "φ" || text == "ϕ") return StateKind::phi;
  if (text == "α") return StateKind::alpha;
  if (text == "β") return StateKind::beta;
  if (text == "γ") return StateKind::gamma;
  return std::nullopt;
}

const std::vector<double>& table_grid(StateKind kind) {
  static const std::array<std::vector<double>, kStateCount> grids = {
      make_grid(StateKind::d),     make_grid(StateKind::A),    make_grid(StateKind::f),
      make_grid(StateKind::phi),   make_grid(StateKind::alpha), make_grid(StateKind::beta),
      make_grid(StateKind::gamma)};
  return grids[state_index(kind)];
}

const std::vector<StateKind>& all_states() noexcept {
  static const std::vector<StateKind> states = {StateKind::d,   StateKind::A,     StateKind::f,
                                                StateKind::phi, StateKind::alpha, StateKind::beta,
                                                StateKind::gamma};
  return states;
}

std::optional<std::size_t> grid_index(const std::vector<double>& grid, double value) noexcept {
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double scale = std::max({1.0, std::abs(grid[i]), std::abs(value)});
    if (std::abs(grid[i] - value) <= 1e-9 * scale) return i;
  }
  return std::nullopt;
}

}  // namespace alle
