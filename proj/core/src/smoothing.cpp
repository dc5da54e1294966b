#include <cmath>
#include <string>

#include "alle/dataset.hpp"
#include "alle/error.hpp"

namespace alle {
namespace {

void check_window(std::size_t window, double sigma) {
  if (window == 0 || window % 2 == 0)
    throw ArgumentError("smoothing window must be odd and >= 1, got " + std::to_string(window));
  if (!(sigma > 0.0) || !std::isfinite(sigma))
    throw ArgumentError("smoothing sigma must be positive");
}

}  // namespace

std::vector<double> gaussian_kernel(std::size_t window, double sigma) {
  check_window(window, sigma);
  const auto half = static_cast<long>(window / 2);
  std::vector<double> taps(window);
  double sum = 0.0;
  for (long j = -half; j <= half; ++j) {
    double w = std::exp(-static_cast<double>(j * j) / (2.0 * sigma * sigma));
    taps[static_cast<std::size_t>(j + half)] = w;
    sum += w;
  }
  for (double& w : taps) w /= sum;
  return taps;
}

std::vector<double> smooth_series(std::span<const double> series, std::size_t window, double sigma) {
  check_window(window, sigma);
  if (window > series.size())
    throw ArgumentError("smoothing window " + std::to_string(window) + " exceeds series length " +
                        std::to_string(series.size()));
  const auto taps = gaussian_kernel(window, sigma);
  const auto n = static_cast<long>(series.size());
  const auto half = static_cast<long>(window / 2);
  auto at = [&](long i) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * (n - 1) - i;
    return series[static_cast<std::size_t>(i)];
  };
  std::vector<double> out(series.size());
  for (long i = 0; i < n; ++i) {
    double acc = 0.0;
    for (long j = -half; j <= half; ++j) acc += taps[static_cast<std::size_t>(j + half)] * at(i + j);
    out[static_cast<std::size_t>(i)] = acc;
  }
  return out;
}

Recording smooth(const Recording& recording, const SmoothingParams& params) {
  Recording out = recording;
  for (auto& ch : out.channels) ch = smooth_series(ch, params.window, params.sigma);
  return out;
}

}  // namespace alle
