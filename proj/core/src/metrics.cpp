#include "alle/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "alle/error.hpp"

namespace alle {

double mae(std::span<const double> predictions, std::span<const double> labels) {
  if (predictions.size() != labels.size())
    throw ArgumentError("mae: " + std::to_string(predictions.size()) + " predictions for " +
                        std::to_string(labels.size()) + " labels");
  if (labels.empty()) throw ArgumentError("mae of an empty sample");
  double total = 0.0;
  for (std::size_t j = 0; j < labels.size(); ++j) total += std::abs(predictions[j] - labels[j]);
  return total / static_cast<double>(labels.size());
}

double r_squared(std::span<const double> predictions, std::span<const double> labels) {
  if (predictions.size() != labels.size())
    throw ArgumentError("r_squared: " + std::to_string(predictions.size()) + " predictions for " +
                        std::to_string(labels.size()) + " labels");
  if (labels.size() < 2) throw ArgumentError("r_squared needs at least two samples");
  double mean = 0.0;
  for (double v : labels) mean += v;
  mean /= static_cast<double>(labels.size());
  double sse = 0.0, sst = 0.0;
  for (std::size_t j = 0; j < labels.size(); ++j) {
    sse += (labels[j] - predictions[j]) * (labels[j] - predictions[j]);
    sst += (labels[j] - mean) * (labels[j] - mean);
  }
  if (sst == 0.0) throw UndefinedVarianceError("r_squared undefined: all labels are identical");
  return 1.0 - sse / sst;
}

std::size_t plateau_index(std::span<const double> values, double tolerance) {
  if (values.empty()) throw ArgumentError("plateau of an empty curve");
  double best = -INFINITY;
  for (double v : values)
    if (std::isfinite(v)) best = std::max(best, v);
  if (!std::isfinite(best)) return values.size() - 1;
  const double threshold = best - tolerance * std::abs(best);
  for (std::size_t i = 0; i < values.size(); ++i)
    if (std::isfinite(values[i]) && values[i] >= threshold) return i;
  return values.size() - 1;
}

}  // namespace alle
