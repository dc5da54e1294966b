#pragma once

#include <span>

namespace alle {

/// Mean absolute error. Throws ArgumentError on empty or mismatched input.
double mae(std::span<const double> predictions, std::span<const double> labels);

/// 1 - SSE/SST. Throws ArgumentError for fewer than two points or mismatched
/// lengths, UndefinedVarianceError when every label is identical.
double r_squared(std::span<const double> predictions, std::span<const double> labels);

/// Smallest index whose value is within `tolerance` (relative to |max|) of
/// the maximum; the plateau knee of an accuracy curve.
std::size_t plateau_index(std::span<const double> values, double tolerance);

}  // namespace alle
