#include "doctest.h"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "alle/error.hpp"
#include "alle/sensitivity.hpp"
#include "support.hpp"

using namespace alle;

namespace {

using Column = std::array<double, kSensorCount>;

std::vector<Column> single_column(const std::vector<double>& v) {
  std::vector<Column> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i].fill(0.0), out[i][0] = v[i];
  return out;
}

SensorList labels_to_list(const std::vector<std::string>& names) {
  SensorList out;
  for (const auto& n : names) out.push_back(*sensor_from_label(n));
  return out;
}

std::vector<std::vector<std::string>> read_csv(const std::string& name) {
  std::ifstream in(test::fixture(name));
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

SampleSet tiny_set(std::size_t per_param) {
  SampleSet set;
  set.state = StateKind::d;
  set.grid = {0.0, 1.0};
  for (std::size_t g = 0; g < 2; ++g)
    for (std::size_t j = 0; j < per_param; ++j) {
      Sample s;
      s.x.fill(3.0);
      s.x[1] = static_cast<double>(j + 1);
      s.y = set.grid[g];
      s.parameter_index = g;
      set.samples.push_back(s);
    }
  return set;
}

}  // namespace

TEST_CASE("per-parameter means") {
  const auto m = per_parameter_means(tiny_set(4));
  REQUIRE(m.rows() == 2);
  CHECK(m.means[0][0] == 3.0);
  CHECK(m.means[1][1] == 2.5);
  CHECK(m.counts[1] == 4);

  SampleSet gap = tiny_set(4);
  gap.grid.push_back(2.0);
  CHECK_THROWS_AS(per_parameter_means(gap), CompletenessError);
}

TEST_CASE("criteria by hand") {
  const auto r = criteria(single_column({1.0, 2.0, 4.0}));
  const auto& s = r.sensors[0];
  CHECK(s.delta == std::vector<double>{1.0, 2.0});
  CHECK(s.range == 3.0);
  CHECK(s.c1 == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(s.c2 == doctest::Approx(1.5).epsilon(1e-15));

  const auto flat = criteria(single_column({5.0, 5.0, 5.0}));
  CHECK(flat.c1[0] == 0.0);
  CHECK(flat.c2[0] == 0.0);

  // Absolute steps: a non-monotone column does not cancel.
  const auto zigzag = criteria(single_column({0.0, 2.0, 0.0}));
  CHECK(zigzag.c2[0] == 2.0);
  CHECK(zigzag.c1[0] == 1.0);

  CHECK_THROWS_AS(criteria(single_column({1.0})), ArgumentError);
}

TEST_CASE("sort_sensors examples") {
  const std::vector<double> c1_d = {0.3165, 0.3117, 0.1672, 0.2676, 0.4260, 0.3280, 0.1723, 0.3130, 0.2750};
  CHECK(labels(sort_sensors(c1_d)) ==
        std::vector<std::string>{"PL4", "PR1", "P0", "PR3", "PL1", "PR4", "PL3", "PR2", "PL2"});
  const std::vector<double> c2_d = {11.3143, 2.3996, 1.4778, 0.6341, 1.0560, 2.2620, 1.7180, 0.7541, 0.6398};
  CHECK(labels(sort_sensors(c2_d)) ==
        std::vector<std::string>{"P0", "PL1", "PR1", "PR2", "PL2", "PL4", "PR3", "PR4", "PL3"});
  const std::vector<double> flat(9, 0.7);
  CHECK(sort_sensors(flat) == SensorList(all_sensors().begin(), all_sensors().end()));

  std::vector<double> bad = c1_d;
  bad[3] = std::nan("");
  CHECK_THROWS_AS(sort_sensors(bad), ArgumentError);
  CHECK_THROWS_AS(sort_sensors(std::vector<double>(8, 1.0)), ArgumentError);
}

TEST_CASE("table fixtures: every column sorts to its published order") {
  for (const auto& [values_file, order_file] :
       {std::pair{"c1_table.csv", "c1_order.csv"}, std::pair{"c2_table.csv", "c2_order.csv"}}) {
    const auto table = read_csv(values_file);
    const auto orders = read_csv(order_file);
    REQUIRE(table.size() == 10);
    REQUIRE(orders.size() == 8);
    for (std::size_t c = 1; c < table[0].size(); ++c) {
      std::vector<double> values(kSensorCount);
      for (std::size_t r = 1; r < table.size(); ++r)
        values[index(*sensor_from_label(table[r][0]))] = std::stod(table[r][c]);
      const auto& expected = orders[c];
      CAPTURE(values_file);
      CAPTURE(table[0][c]);
      REQUIRE(expected[0] == table[0][c]);
      CHECK(sort_sensors(values) ==
            labels_to_list(std::vector<std::string>(expected.begin() + 1, expected.end())));
    }
  }
}

TEST_CASE("criteria scale and offset behaviour") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<Column> means(8);
  for (auto& row : means)
    for (auto& v : row) v = n(rng);
  const auto base = criteria(means);

  auto scaled = means;
  for (auto& row : scaled) row[3] *= 7.5;
  const auto s = criteria(scaled);
  CHECK(s.c1[3] == doctest::Approx(base.c1[3]).epsilon(1e-12));
  CHECK(s.c2[3] == doctest::Approx(7.5 * base.c2[3]).epsilon(1e-12));

  auto shifted = means;
  for (auto& row : shifted) row[6] += 123.0;
  const auto o = criteria(shifted);
  CHECK(o.c1[6] == doctest::Approx(base.c1[6]).epsilon(1e-10));
  CHECK(o.c2[6] == doctest::Approx(base.c2[6]).epsilon(1e-10));

  const auto again = criteria(means);
  CHECK(again.order_c1 == base.order_c1);
  CHECK(again.order_c2 == base.order_c2);
  for (std::size_t k = 0; k < kSensorCount; ++k) {
    CHECK(base.c1[k] >= 0.0);
    CHECK(base.c1[k] <= 1.0);
    CHECK(base.c2[k] >= 0.0);
  }
}

TEST_CASE("criteria on noise-free generated data equal the analytic values") {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const GeneratorConfig c = test::closure_config(seed, all_states()[seed]);
    const SampleSet set = test::generated_set(c, 250);
    const auto r = criteria(per_parameter_means(set));
    const auto truth = analytic_criteria(c);
    for (std::size_t k = 0; k < kSensorCount; ++k) {
      CHECK(std::abs(r.c1[k] - truth.c1[k]) < 1e-9);
      CHECK(std::abs(r.c2[k] - truth.c2[k]) < 1e-9);
    }
    CHECK(r.order_c1 == truth.order_c1);
    CHECK(r.order_c2 == truth.order_c2);
  }
}

TEST_CASE("m_sweep finds a single informative sensor") {
  GeneratorConfig c;
  c.state = StateKind::beta;
  c.grid = table_grid(StateKind::beta);
  for (auto& r : c.response) r = {0.5, 0.0, 0.0};
  c.response[index(SensorId::PL2)] = {0.0, 0.05, 0.0};
  c.noise_sigma = 0.02;
  c.seed = 77;
  const SampleSet set = test::generated_set(c, 40);

  SensorList order = {SensorId::PL2, SensorId::P0,  SensorId::PL1, SensorId::PL3, SensorId::PL4,
                      SensorId::PR1, SensorId::PR2, SensorId::PR3, SensorId::PR4};
  SweepOptions options;
  options.seed = 3;
  const auto curve = m_sweep(set, order, Family::reg, options);
  CHECK(curve.m_r == 1);
  CHECK(curve.r2[0] > 0.95);
  const double best = *std::max_element(curve.r2.begin(), curve.r2.end());
  CHECK(curve.r2[curve.m_r - 1] >= best - 0.02 * std::abs(best));

  CHECK_THROWS_AS(m_sweep(set, order, "knn", options), ArgumentError);
  order.pop_back();
  CHECK_THROWS_AS(m_sweep(set, order, Family::reg, options), ArgumentError);
}

TEST_CASE("sensitivity report output") {
  const auto r = criteria(single_column({1.0, 2.0, 4.0}));
  CHECK(format_fixed4(0.31654) == "0.3165");
  CHECK(format_fixed4(11.31426) == "11.3143");
  std::ostringstream csv;
  write_criteria_csv(r, csv);
  CHECK(csv.str().rfind("sensor,c1,c2\nP0,0.5000,1.5000\n", 0) == 0);
  const nlohmann::json j = r;
  CHECK(j["sensors"]["P0"]["c2"].get<double>() == 1.5);
  CHECK(j["sensors"]["P0"]["c1_display"] == "0.5000");
  CHECK(j["ordering"][0] == "P0");
}
