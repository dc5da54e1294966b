#pragma once

#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "alle/matrix.hpp"

namespace alle {

/// Per-feature z-scoring with statistics taken from training data only.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> stddev;  ///< population standard deviation

  /// Throws StandardizationError naming the first feature with zero spread.
  static Standardizer fit(const FeatureMatrix& x);

  std::size_t width() const noexcept { return mean.size(); }
  void apply(std::span<const double> in, std::span<double> out) const;
  FeatureMatrix apply(const FeatureMatrix& x) const;
};

void to_json(nlohmann::json& j, const Standardizer& s);
void from_json(const nlohmann::json& j, Standardizer& s);

}  // namespace alle
