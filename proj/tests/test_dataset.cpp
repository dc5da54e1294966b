#include "doctest.h"

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "alle/dataset.hpp"
#include "alle/error.hpp"
#include "support.hpp"

using namespace alle;
namespace fs = std::filesystem;

namespace {

Recording ramp_recording(StateKind state, std::size_t p, std::size_t r, std::size_t steps) {
  Recording rec;
  rec.state = state;
  rec.parameter_index = p;
  rec.parameter_value = table_grid(state)[p - 1];
  rec.recording_index = r;
  rec.sample_rate_hz = 50.0;
  for (std::size_t t = 0; t < steps; ++t) {
    rec.time.push_back(static_cast<double>(t) / 50.0);
    for (std::size_t k = 0; k < kSensorCount; ++k)
      rec.channels[k].push_back(static_cast<double>(t) + 1000.0 * static_cast<double>(k));
  }
  return rec;
}

std::vector<Recording> full_grid(StateKind state, std::size_t steps) {
  std::vector<Recording> out;
  for (std::size_t p = 1; p <= table_grid(state).size(); ++p)
    for (std::size_t r = 1; r <= kRecordingsPerParameter; ++r)
      out.push_back(ramp_recording(state, p, r, steps));
  return out;
}

// Direct O(n w) evaluation with explicit mirror indexing.
std::vector<double> reference_smooth(const std::vector<double>& x, std::size_t window, double sigma) {
  const long h = static_cast<long>(window / 2);
  const long n = static_cast<long>(x.size());
  std::vector<double> out(x.size());
  for (long i = 0; i < n; ++i) {
    double num = 0.0;
    double den = 0.0;
    for (long j = -h; j <= h; ++j) {
      long m = i + j;
      if (m < 0) m = -m;
      if (m >= n) m = 2 * (n - 1) - m;
      const double w = std::exp(-static_cast<double>(j * j) / (2.0 * sigma * sigma));
      num += w * x[static_cast<std::size_t>(m)];
      den += w;
    }
    out[static_cast<std::size_t>(i)] = num / den;
  }
  return out;
}

}  // namespace

TEST_CASE("gaussian kernel") {
  const auto k = gaussian_kernel(25, 4.0);
  REQUIRE(k.size() == 25);
  double sum = 0.0;
  for (double v : k) sum += v;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
  for (std::size_t j = 0; j < 12; ++j) CHECK(k[j] == doctest::Approx(k[24 - j]).epsilon(1e-15));
  CHECK(k[13] / k[12] == doctest::Approx(std::exp(-1.0 / 32.0)).epsilon(1e-14));
  CHECK_THROWS_AS(gaussian_kernel(24, 4.0), ArgumentError);
  CHECK_THROWS_AS(gaussian_kernel(25, 0.0), ArgumentError);
}

TEST_CASE("smoothing") {
  SUBCASE("constant series is unchanged") {
    std::vector<double> x(60, 3.25);
    for (double v : smooth_series(x, 25, 4.0)) CHECK(v == doctest::Approx(3.25).epsilon(1e-14));
  }
  SUBCASE("interior of a linear ramp is unchanged") {
    std::vector<double> x;
    for (int i = 0; i < 100; ++i) x.push_back(0.5 * i - 7.0);
    const auto y = smooth_series(x, 25, 4.0);
    REQUIRE(y.size() == x.size());
    for (std::size_t i = 12; i < 88; ++i) CHECK(y[i] == doctest::Approx(x[i]).epsilon(1e-12));
  }
  SUBCASE("matches direct mirror-reflected convolution") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> n(0.0, 1.0);
    std::vector<double> x(40);
    for (auto& v : x) v = n(rng);
    for (std::size_t w : {1u, 3u, 9u, 25u}) {
      const double sigma = w == 1 ? 1.0 : (static_cast<double>(w) - 1.0) / 6.0;
      const auto got = smooth_series(x, w, sigma);
      const auto want = reference_smooth(x, w, sigma);
      for (std::size_t i = 0; i < x.size(); ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
    }
  }
  SUBCASE("window longer than the series") {
    std::vector<double> x(10, 1.0);
    CHECK_THROWS_AS(smooth_series(x, 25, 4.0), ArgumentError);
  }
}

TEST_CASE("recording CSV round-trip through files") {
  const auto dir = test::scratch_dir("roundtrip");
  Recording rec = ramp_recording(StateKind::A, 3, 2, 12);
  rec.channels[4][5] = 0.1 + 0.2;  // not exactly representable in short decimal
  const auto csv = export_recording(rec, dir);
  CHECK(csv.filename() == "A_p03_r2.csv");
  CHECK(fs::exists(sidecar_path(csv)));
  const Recording back = ingest_recording(csv, StateKind::A);
  CHECK(back.parameter_index == 3);
  CHECK(back.recording_index == 2);
  CHECK(back.parameter_value == rec.parameter_value);
  CHECK(back.time == rec.time);
  for (std::size_t k = 0; k < kSensorCount; ++k) CHECK(back.channels[k] == rec.channels[k]);
  CHECK_THROWS_AS(ingest_recording(csv, StateKind::d), LabelMismatchError);
}

TEST_CASE("recording CSV columns may be permuted") {
  std::istringstream in("PR4,PR3,PR2,PR1,PL4,PL3,PL2,PL1,P0,t\n9,8,7,6,5,4,3,2,1,0.5\n");
  Recording rec;
  parse_recording_csv(in, rec);
  REQUIRE(rec.steps() == 1);
  CHECK(rec.time[0] == 0.5);
  for (std::size_t k = 0; k < kSensorCount; ++k) CHECK(rec.channels[k][0] == double(k + 1));
}

TEST_CASE("recording CSV errors") {
  SUBCASE("missing column names the column") {
    std::istringstream in("t,P0,PL1,PL2,PL3,PL4,PR1,PR2,PR3\n0,1,2,3,4,5,6,7,8\n");
    Recording rec;
    try {
      parse_recording_csv(in, rec);
      FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
      CHECK(std::string(e.what()).find("PR4") != std::string::npos);
    }
  }
  SUBCASE("non-numeric cell cites its row") {
    std::istringstream in(
        "t,P0,PL1,PL2,PL3,PL4,PR1,PR2,PR3,PR4\n"
        "0,1,2,3,4,5,6,7,8,9\n"
        "1,1,2,3,oops,5,6,7,8,9\n");
    Recording rec;
    try {
      parse_recording_csv(in, rec);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.row() == 2);
      CHECK(std::string(e.what()).find("row 2") != std::string::npos);
    }
  }
  SUBCASE("non-finite cell") {
    std::istringstream in("t,P0,PL1,PL2,PL3,PL4,PR1,PR2,PR3,PR4\n0,nan,2,3,4,5,6,7,8,9\n");
    Recording rec;
    CHECK_THROWS_AS(parse_recording_csv(in, rec), ParseError);
  }
  SUBCASE("missing sidecar") {
    const auto dir = test::scratch_dir("nosidecar");
    std::ofstream(dir / "x.csv") << "t,P0\n";
    CHECK_THROWS_AS(ingest_recording(dir / "x.csv", StateKind::d), SchemaError);
  }
}

TEST_CASE("assemble takes the centered block") {
  CHECK(centered_block_start(300, 250) == 25);
  CHECK(centered_block_start(251, 250) == 0);
  const auto recs = full_grid(StateKind::d, 300);
  const SampleSet set = assemble(recs, 250);
  CHECK(set.size() == table_grid(StateKind::d).size() * 5 * 250);
  for (std::size_t c : set.counts_per_parameter()) CHECK(c == 1250);
  const Sample& first = set.samples.front();
  CHECK(first.x[0] == 25.0);
  CHECK(first.x[3] == 3025.0);
  CHECK(set.samples[249].x[0] == 274.0);
  CHECK(set.samples[250].recording_index == 2);
  CHECK(set.samples.back().y == table_grid(StateKind::d).back());
  std::set<std::size_t> ids;
  for (const auto& s : set.samples) ids.insert(s.id);
  CHECK(ids.size() == set.size());
}

TEST_CASE("assemble completeness") {
  auto recs = full_grid(StateKind::d, 300);
  SUBCASE("missing recording") {
    recs.erase(recs.begin() + 7);
    try {
      (void)assemble(recs, 250);
      FAIL("expected CompletenessError");
    } catch (const CompletenessError& e) {
      CHECK(std::string(e.what()).find("missing parameter 2") != std::string::npos);
    }
  }
  SUBCASE("duplicate recording") {
    recs.push_back(recs.front());
    CHECK_THROWS_AS((void)assemble(recs, 250), CompletenessError);
  }
  SUBCASE("short recording") {
    recs[3] = ramp_recording(StateKind::d, 1, 4, 100);
    CHECK_THROWS_AS((void)assemble(recs, 250), CompletenessError);
  }
  SUBCASE("mixed states") {
    recs.push_back(ramp_recording(StateKind::A, 1, 1, 300));
    CHECK_THROWS_AS((void)assemble(recs, 250), LabelMismatchError);
  }
}

TEST_CASE("stratified split") {
  const SampleSet set = assemble(full_grid(StateKind::beta, 60), 50);
  const auto [train, test] = split(set, 0.8, 42);
  CHECK(train.size() + test.size() == set.size());
  CHECK(train.provenance == Provenance::derived_split);

  std::map<std::size_t, std::size_t> train_counts;
  std::set<std::size_t> ids;
  for (const auto& s : train.samples) {
    ++train_counts[s.parameter_index];
    ids.insert(s.id);
  }
  for (const auto& s : test.samples) CHECK(ids.insert(s.id).second);
  CHECK(ids.size() == set.size());
  for (std::size_t g = 0; g < set.grid.size(); ++g)
    CHECK(train_counts[g] == static_cast<std::size_t>(std::llround(0.8 * 250)));

  for (std::size_t i = 1; i < train.size(); ++i) CHECK(train.samples[i].id > train.samples[i - 1].id);

  const auto again = split(set, 0.8, 42);
  CHECK(again.first.size() == train.size());
  bool same = true;
  for (std::size_t i = 0; i < train.size(); ++i) same &= again.first.samples[i].id == train.samples[i].id;
  CHECK(same);

  const auto other = split(set, 0.8, 43);
  bool differs = false;
  for (std::size_t i = 0; i < train.size(); ++i) differs |= other.first.samples[i].id != train.samples[i].id;
  CHECK(differs);

  CHECK_THROWS_AS(split(set, 1.0, 1), ArgumentError);
  CHECK_THROWS_AS(split(set, 0.0, 1), ArgumentError);
  CHECK_THROWS_AS(split(set, 0.001, 1), StratificationError);
}

TEST_CASE("sample set CSV round-trip") {
  SampleSet set = assemble(full_grid(StateKind::f, 12), 3);
  set.samples[4].x[2] = 1.0 / 3.0;
  std::stringstream buf;
  write_sample_set(set, buf);
  CHECK(buf.str().rfind("# state=f unit=Hz\nY,X1,X2,X3,X4,X5,X6,X7,X8,X9\n", 0) == 0);
  const SampleSet back = read_sample_set(buf);
  CHECK(back.state == StateKind::f);
  CHECK(back.grid == set.grid);
  REQUIRE(back.size() == set.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    CHECK(back.samples[i].x == set.samples[i].x);
    CHECK(back.samples[i].y == set.samples[i].y);
    CHECK(back.samples[i].parameter_index == set.samples[i].parameter_index);
  }

  std::istringstream bad("# state=f unit=mm\nY,X1,X2,X3,X4,X5,X6,X7,X8,X9\n");
  CHECK_THROWS_AS(read_sample_set(bad), SchemaError);
  std::istringstream no_header("Y,X1\n");
  CHECK_THROWS_AS(read_sample_set(no_header), SchemaError);
}

TEST_CASE("feature matrix follows the sensor order") {
  const SampleSet set = assemble(full_grid(StateKind::d, 4), 2);
  const SensorList sensors = {SensorId::PR1, SensorId::P0};
  const FeatureMatrix x = feature_matrix(set, sensors);
  CHECK(x.rows == set.size());
  CHECK(x.cols == 2);
  CHECK(x.names == std::vector<std::string>{"PR1", "P0"});
  CHECK(x(0, 0) == set.samples[0].x[5]);
  CHECK(x(0, 1) == set.samples[0].x[0]);
  CHECK(label_vector(set).size() == set.size());
}
