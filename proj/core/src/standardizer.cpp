#include "alle/standardizer.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "alle/error.hpp"

namespace alle {

Standardizer Standardizer::fit(const FeatureMatrix& x) {
  if (x.rows == 0) throw ArgumentError("cannot standardize an empty matrix");
  Standardizer s;
  s.mean.assign(x.cols, 0.0);
  s.stddev.assign(x.cols, 0.0);
  const double n = static_cast<double>(x.rows);
  for (std::size_t c = 0; c < x.cols; ++c) {
    double sum = 0.0;
    for (std::size_t r = 0; r < x.rows; ++r) sum += x(r, c);
    const double mean = sum / n;
    double ss = 0.0;
    for (std::size_t r = 0; r < x.rows; ++r) ss += (x(r, c) - mean) * (x(r, c) - mean);
    const double sd = std::sqrt(ss / n);
    if (!(sd > 1e-12 * std::max(1.0, std::abs(mean))))
      throw StandardizationError("feature " + x.column_name(c) +
                                 " has zero variance and cannot be standardized");
    s.mean[c] = mean;
    s.stddev[c] = sd;
  }
  return s;
}

void Standardizer::apply(std::span<const double> in, std::span<double> out) const {
  if (in.size() != width() || out.size() != width())
    throw ArgumentError("standardizer expects " + std::to_string(width()) + " features, got " +
                        std::to_string(in.size()));
  for (std::size_t c = 0; c < width(); ++c) out[c] = (in[c] - mean[c]) / stddev[c];
}

FeatureMatrix Standardizer::apply(const FeatureMatrix& x) const {
  FeatureMatrix z(x.rows, x.cols);
  z.names = x.names;
  for (std::size_t r = 0; r < x.rows; ++r) apply(x.row(r), z.row(r));
  return z;
}

void to_json(nlohmann::json& j, const Standardizer& s) {
  j = nlohmann::json{{"mean", s.mean}, {"stddev", s.stddev}};
}

void from_json(const nlohmann::json& j, Standardizer& s) {
  s.mean = j.at("mean").get<std::vector<double>>();
  s.stddev = j.at("stddev").get<std::vector<double>>();
  if (s.mean.size() != s.stddev.size()) throw DataError("standardizer size mismatch");
}

}  // namespace alle
