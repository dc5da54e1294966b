#include "doctest.h"

#include <cmath>
#include <numbers>

#include <nlohmann/json.hpp>

#include "alle/error.hpp"
#include "alle/parallel.hpp"
#include "alle/synthgen.hpp"
#include "support.hpp"

using namespace alle;

TEST_CASE("noise-free channels follow the response model") {
  GeneratorConfig c = test::random_config(5, StateKind::phi);
  c.oscillation_hz = 1.5;
  const Recording rec = generate_recording(c, 4, 2);
  CHECK(rec.parameter_value == c.grid[3]);
  REQUIRE(rec.steps() == c.steps_per_recording);
  for (std::size_t k = 0; k < kSensorCount; ++k) {
    for (std::size_t t : {0u, 17u, 299u}) {
      const double time = static_cast<double>(t) / c.sample_rate_hz;
      const double want =
          c.response[k][0] + c.response[k][1] * c.grid[3] + c.response[k][2] * c.grid[3] * c.grid[3] +
          c.oscillation_gain[k] *
              std::sin(2.0 * std::numbers::pi * 1.5 * time + static_cast<double>(k) * std::numbers::pi / 9.0);
      CHECK(rec.channels[k][t] == doctest::Approx(want).epsilon(1e-13));
    }
  }
}

TEST_CASE("noise streams are seeded and schedule independent") {
  GeneratorConfig c = test::random_config(9, StateKind::beta, 0.5);
  set_worker_count(1);
  const auto serial = generate(c);
  set_worker_count(4);
  const auto threaded = generate(c);
  set_worker_count(0);
  REQUIRE(serial.recordings.size() == c.grid.size() * kRecordingsPerParameter);
  for (std::size_t i = 0; i < serial.recordings.size(); ++i)
    CHECK(serial.recordings[i].channels == threaded.recordings[i].channels);

  c.seed += 1;
  const auto reseeded = generate(c);
  CHECK(reseeded.recordings[0].channels[0] != serial.recordings[0].channels[0]);

  // Residual spread around the noise-free signal matches sigma.
  GeneratorConfig quiet = c;
  quiet.noise_sigma = 0.0;
  const Recording clean = generate_recording(quiet, 2, 3);
  const Recording noisy = generate_recording(c, 2, 3);
  double ss = 0.0;
  std::size_t n = 0;
  for (std::size_t k = 0; k < kSensorCount; ++k)
    for (std::size_t t = 0; t < clean.steps(); ++t, ++n) {
      const double r = noisy.channels[k][t] - clean.channels[k][t];
      ss += r * r;
    }
  CHECK(std::sqrt(ss / static_cast<double>(n)) == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("analytic criteria for linear responses") {
  GeneratorConfig c;
  c.state = StateKind::A;
  c.grid = table_grid(StateKind::A);  // uniform step 2
  for (std::size_t k = 0; k < kSensorCount; ++k)
    c.response[k] = {1.0, (static_cast<double>(k) - 3.5) / 8.0, 0.0};
  const GroundTruth t = analytic_criteria(c);
  const double p1 = static_cast<double>(c.grid.size() - 1);
  for (std::size_t k = 0; k < kSensorCount; ++k) {
    CHECK(t.c2[k] == doctest::Approx(std::abs(c.response[k][1]) * 2.0).epsilon(1e-12));
    CHECK(t.c1[k] == doctest::Approx(1.0 / p1).epsilon(1e-12));
  }
  // |slope| largest for PR4, then the tie P0/PR3 resolved by index.
  CHECK(t.order_c2[0] == SensorId::PR4);
  CHECK(t.order_c2[1] == SensorId::P0);
  CHECK(t.order_c2[2] == SensorId::PR3);
}

TEST_CASE("generator config validation") {
  GeneratorConfig c = test::random_config(1);
  CHECK_NOTHROW(c.validate());
  SUBCASE("grid must increase") {
    c.grid = {1.0, 1.0, 2.0};
    CHECK_THROWS_AS(c.validate(), ArgumentError);
  }
  SUBCASE("negative noise") {
    c.noise_sigma = -1.0;
    CHECK_THROWS_AS(c.validate(), ArgumentError);
  }
  SUBCASE("no linear signal anywhere") {
    for (auto& r : c.response) r[1] = 0.0;
    CHECK_THROWS_AS(c.validate(), ArgumentError);
  }
}

TEST_CASE("generator config JSON round-trip") {
  const GeneratorConfig c = test::random_config(3, StateKind::gamma, 0.25);
  const nlohmann::json j = c;
  const GeneratorConfig back = j.get<GeneratorConfig>();
  CHECK(back.state == c.state);
  CHECK(back.grid == c.grid);
  CHECK(back.response == c.response);
  CHECK(back.oscillation_gain == c.oscillation_gain);
  CHECK(back.noise_sigma == c.noise_sigma);
  CHECK(back.seed == c.seed);
  CHECK(nlohmann::json(back).dump() == j.dump());
}
