#include "alle/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "alle/error.hpp"
#include "alle/random.hpp"

namespace alle {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string_view strip(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  return s;
}

bool parse_finite(std::string_view text, double& out) {
  text = strip(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return false;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size() && std::isfinite(out);
}

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open " + path.string());
  return in;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, ptr);
}

std::vector<std::size_t> SampleSet::counts_per_parameter() const {
  std::vector<std::size_t> counts(grid.size(), 0);
  for (const Sample& s : samples)
    if (s.parameter_index < counts.size()) ++counts[s.parameter_index];
  return counts;
}

// ---------------------------------------------------------------------------
// Recording I/O

fs::path sidecar_path(const fs::path& csv) {
  fs::path p = csv;
  p.replace_extension(".json");
  return p;
}

RecordingMeta read_sidecar(const fs::path& json_path) {
  std::ifstream in(json_path);
  if (!in) throw SchemaError("missing sidecar metadata " + json_path.string());
  json j;
  try {
    in >> j;
    RecordingMeta m;
    std::string kind = j.at("state_kind").get<std::string>();
    auto state = state_from_tag(kind);
    if (!state) throw SchemaError("unknown state_kind '" + kind + "' in " + json_path.string());
    m.state = *state;
    m.unit = j.at("unit").get<std::string>();
    m.parameter_value = j.at("parameter_value").get<double>();
    m.parameter_index = j.at("parameter_index").get<std::size_t>();
    m.recording_index = j.at("recording_index").get<std::size_t>();
    m.sample_rate_hz = j.at("sample_rate_hz").get<double>();
    if (m.unit != unit(m.state))
      throw SchemaError("unit '" + m.unit + "' does not match state " + std::string(tag(m.state)));
    return m;
  } catch (const json::exception& e) {
    throw SchemaError("malformed sidecar " + json_path.string() + ": " + e.what());
  }
}

void write_sidecar(const RecordingMeta& meta, const fs::path& json_path) {
  json j = {{"state_kind", std::string(tag(meta.state))},
            {"unit", meta.unit},
            {"parameter_value", meta.parameter_value},
            {"parameter_index", meta.parameter_index},
            {"recording_index", meta.recording_index},
            {"sample_rate_hz", meta.sample_rate_hz}};
  auto out = open_output(json_path);
  out << j.dump(2) << '\n';
}

void parse_recording_csv(std::istream& in, Recording& rec) {
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("empty recording CSV");
  auto header = split_fields(strip(line));

  // Column position for t and each sensor.
  constexpr std::size_t kMissing = static_cast<std::size_t>(-1);
  std::array<std::size_t, kSensorCount + 1> column;
  column.fill(kMissing);
  for (std::size_t c = 0; c < header.size(); ++c) {
    std::string_view name = strip(header[c]);
    if (name == "t") {
      column[0] = c;
    } else if (auto s = sensor_from_label(name)) {
      column[1 + index(*s)] = c;
    }
  }
  if (column[0] == kMissing) throw SchemaError("recording CSV has no column 't'");
  for (std::size_t k = 0; k < kSensorCount; ++k)
    if (column[1 + k] == kMissing)
      throw SchemaError("recording CSV is missing column " +
                        std::string(label(*sensor_from_index(k))));

  rec.time.clear();
  for (auto& ch : rec.channels) ch.clear();
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (strip(line).empty()) continue;
    ++row;
    auto fields = split_fields(strip(line));
    if (fields.size() != header.size())
      throw ParseError("row " + std::to_string(row) + ": expected " +
                           std::to_string(header.size()) + " fields, found " +
                           std::to_string(fields.size()),
                       row);
    double v = 0.0;
    for (std::size_t k = 0; k <= kSensorCount; ++k) {
      std::string_view cell = fields[column[k]];
      if (!parse_finite(cell, v))
        throw ParseError("row " + std::to_string(row) + ": non-numeric value '" +
                             std::string(strip(cell)) + "' in column " +
                             std::string(strip(header[column[k]])),
                         row);
      if (k == 0)
        rec.time.push_back(v);
      else
        rec.channels[k - 1].push_back(v);
    }
  }
}

Recording ingest_recording(const fs::path& csv, StateKind expected) {
  RecordingMeta meta = read_sidecar(sidecar_path(csv));
  if (meta.state != expected)
    throw LabelMismatchError(csv.string() + " is labeled state '" + std::string(tag(meta.state)) +
                             "', expected '" + std::string(tag(expected)) + "'");
  Recording rec;
  rec.state = meta.state;
  rec.parameter_index = meta.parameter_index;
  rec.parameter_value = meta.parameter_value;
  rec.recording_index = meta.recording_index;
  rec.sample_rate_hz = meta.sample_rate_hz;
  auto in = open_input(csv);
  parse_recording_csv(in, rec);
  return rec;
}

void write_recording_csv(const Recording& rec, std::ostream& out) {
  out << "t";
  for (SensorId s : all_sensors()) out << ',' << label(s);
  out << '\n';
  for (std::size_t i = 0; i < rec.steps(); ++i) {
    out << format_double(rec.time[i]);
    for (const auto& ch : rec.channels) out << ',' << format_double(ch[i]);
    out << '\n';
  }
}

std::string recording_stem(const Recording& rec) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_p%02zu_r%zu", std::string(tag(rec.state)).c_str(),
                rec.parameter_index, rec.recording_index);
  return buf;
}

fs::path export_recording(const Recording& rec, const fs::path& dir) {
  fs::path csv = dir / (recording_stem(rec) + ".csv");
  {
    auto out = open_output(csv);
    write_recording_csv(rec, out);
  }
  RecordingMeta meta{rec.state,           std::string(unit(rec.state)), rec.parameter_value,
                     rec.parameter_index, rec.recording_index,          rec.sample_rate_hz};
  write_sidecar(meta, sidecar_path(csv));
  return csv;
}

std::vector<Recording> ingest_directory(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw SchemaError(dir.string() + " is not a directory");
  std::vector<fs::path> csvs;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() == ".csv" && fs::exists(sidecar_path(entry.path())))
      csvs.push_back(entry.path());
  }
  std::sort(csvs.begin(), csvs.end());
  if (csvs.empty()) throw CompletenessError("no recordings with sidecars in " + dir.string());

  StateKind state = read_sidecar(sidecar_path(csvs.front())).state;
  std::vector<Recording> out;
  out.reserve(csvs.size());
  for (const auto& csv : csvs) out.push_back(ingest_recording(csv, state));
  std::sort(out.begin(), out.end(), [](const Recording& a, const Recording& b) {
    return std::tie(a.parameter_index, a.recording_index) <
           std::tie(b.parameter_index, b.recording_index);
  });
  return out;
}

// ---------------------------------------------------------------------------
// Assembly and splitting

std::size_t centered_block_start(std::size_t length, std::size_t block) noexcept {
  return length >= block ? (length - block) / 2 : 0;
}

SampleSet assemble(std::span<const Recording> recordings, std::size_t per_recording) {
  if (recordings.empty()) throw CompletenessError("no recordings to assemble");
  return assemble(recordings, per_recording, table_grid(recordings.front().state));
}

SampleSet assemble(std::span<const Recording> recordings, std::size_t per_recording,
                   const std::vector<double>& grid) {
  if (per_recording == 0) throw ArgumentError("per_recording must be positive");
  if (grid.empty()) throw ArgumentError("empty parameter grid");
  if (recordings.empty()) throw CompletenessError("no recordings to assemble");

  const StateKind state = recordings.front().state;
  const std::size_t p = grid.size();
  // slot[(i, r)] -> recording
  std::vector<const Recording*> slot(p * kRecordingsPerParameter, nullptr);
  std::vector<std::string> problems;

  for (const Recording& rec : recordings) {
    if (rec.state != state)
      throw LabelMismatchError("mixed states in one sample set: " + std::string(tag(state)) +
                               " and " + std::string(tag(rec.state)));
    if (rec.parameter_index < 1 || rec.parameter_index > p || rec.recording_index < 1 ||
        rec.recording_index > kRecordingsPerParameter) {
      problems.push_back("unexpected recording " + recording_stem(rec));
      continue;
    }
    double expected = grid[rec.parameter_index - 1];
    if (!grid_index(grid, rec.parameter_value) ||
        *grid_index(grid, rec.parameter_value) != rec.parameter_index - 1) {
      problems.push_back(recording_stem(rec) + " has value " + format_double(rec.parameter_value) +
                         ", grid expects " + format_double(expected));
      continue;
    }
    auto& cell = slot[(rec.parameter_index - 1) * kRecordingsPerParameter + rec.recording_index - 1];
    if (cell != nullptr) {
      problems.push_back("duplicate recording " + recording_stem(rec));
      continue;
    }
    for (const auto& ch : rec.channels)
      if (ch.size() != rec.steps())
        throw SchemaError(recording_stem(rec) + " has channels of unequal length");
    if (rec.steps() < per_recording) {
      problems.push_back(recording_stem(rec) + " has " + std::to_string(rec.steps()) +
                         " steps, needs " + std::to_string(per_recording));
    }
    cell = &rec;
  }
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t r = 0; r < kRecordingsPerParameter; ++r)
      if (slot[i * kRecordingsPerParameter + r] == nullptr)
        problems.push_back("missing parameter " + std::to_string(i + 1) + " (" +
                           format_double(grid[i]) + ") recording " + std::to_string(r + 1));

  if (!problems.empty()) {
    std::string msg = "incomplete sample set:";
    for (const auto& p_msg : problems) msg += "\n  " + p_msg;
    throw CompletenessError(msg);
  }

  SampleSet set;
  set.state = state;
  set.grid = grid;
  set.samples.reserve(p * kRecordingsPerParameter * per_recording);
  std::size_t id = 0;
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t r = 0; r < kRecordingsPerParameter; ++r) {
      const Recording& rec = *slot[i * kRecordingsPerParameter + r];
      std::size_t start = centered_block_start(rec.steps(), per_recording);
      for (std::size_t t = start; t < start + per_recording; ++t) {
        Sample s;
        for (std::size_t k = 0; k < kSensorCount; ++k) s.x[k] = rec.channels[k][t];
        s.y = grid[i];
        s.parameter_index = i;
        s.recording_index = r + 1;
        s.id = id++;
        set.samples.push_back(s);
      }
    }
  }
  return set;
}

std::pair<SampleSet, SampleSet> split(const SampleSet& set, double train_fraction,
                                      std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw ArgumentError("train fraction must lie strictly between 0 and 1");

  std::vector<std::vector<std::size_t>> strata(set.grid.size());
  for (std::size_t pos = 0; pos < set.samples.size(); ++pos) {
    std::size_t g = set.samples[pos].parameter_index;
    if (g >= strata.size()) throw DataError("sample parameter index outside the grid");
    strata[g].push_back(pos);
  }

  std::vector<char> in_train(set.samples.size(), 0);
  for (std::size_t g = 0; g < strata.size(); ++g) {
    auto& members = strata[g];
    if (members.empty()) continue;
    auto n_train = static_cast<std::size_t>(std::llround(train_fraction * members.size()));
    if (n_train == 0 || n_train == members.size())
      throw StratificationError("fraction " + format_double(train_fraction) +
                                " leaves an empty side for parameter " + format_double(set.grid[g]) +
                                " (" + std::to_string(members.size()) + " samples)");
    Rng rng = make_rng(seed, {g});
    std::shuffle(members.begin(), members.end(), rng);
    for (std::size_t j = 0; j < n_train; ++j) in_train[members[j]] = 1;
  }

  SampleSet train, test;
  for (SampleSet* part : {&train, &test}) {
    part->state = set.state;
    part->grid = set.grid;
    part->provenance = Provenance::derived_split;
  }
  for (std::size_t pos = 0; pos < set.samples.size(); ++pos)
    (in_train[pos] ? train : test).samples.push_back(set.samples[pos]);
  return {std::move(train), std::move(test)};
}

// ---------------------------------------------------------------------------
// SampleSet CSV

void write_sample_set(const SampleSet& set, std::ostream& out) {
  out << "# state=" << tag(set.state) << " unit=" << unit(set.state) << '\n';
  out << "Y";
  for (std::size_t k = 1; k <= kSensorCount; ++k) out << ",X" << k;
  out << '\n';
  for (const Sample& s : set.samples) {
    out << format_double(s.y);
    for (double v : s.x) out << ',' << format_double(v);
    out << '\n';
  }
}

void write_sample_set(const SampleSet& set, const fs::path& path) {
  auto out = open_output(path);
  write_sample_set(set, out);
}

SampleSet read_sample_set(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || strip(line).rfind("#", 0) != 0)
    throw SchemaError("sample set CSV must start with '# state=<kind> unit=<unit>'");

  SampleSet set;
  bool have_state = false;
  std::istringstream comment(std::string(strip(line).substr(1)));
  std::string token;
  while (comment >> token) {
    auto eq = token.find('=');
    if (eq == std::string::npos) continue;
    std::string key = token.substr(0, eq), value = token.substr(eq + 1);
    if (key == "state") {
      auto st = state_from_tag(value);
      if (!st) throw SchemaError("unknown state '" + value + "' in sample set header");
      set.state = *st;
      have_state = true;
    } else if (key == "unit" && have_state && value != unit(set.state)) {
      throw SchemaError("unit '" + value + "' does not match state " + std::string(tag(set.state)));
    }
  }
  if (!have_state) throw SchemaError("sample set comment line lacks state=<kind>");

  if (!std::getline(in, line)) throw SchemaError("sample set CSV has no header row");
  auto header = split_fields(strip(line));
  if (header.size() != kSensorCount + 1 || strip(header[0]) != "Y")
    throw SchemaError("sample set header must be Y,X1,...,X9");
  for (std::size_t k = 1; k <= kSensorCount; ++k)
    if (strip(header[k]) != "X" + std::to_string(k))
      throw SchemaError("sample set header column " + std::to_string(k + 1) + " must be X" +
                        std::to_string(k));

  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (strip(line).empty()) continue;
    ++row;
    auto fields = split_fields(strip(line));
    if (fields.size() != kSensorCount + 1)
      throw ParseError("row " + std::to_string(row) + ": expected 10 fields", row);
    Sample s;
    if (!parse_finite(fields[0], s.y))
      throw ParseError("row " + std::to_string(row) + ": non-numeric label", row);
    for (std::size_t k = 0; k < kSensorCount; ++k)
      if (!parse_finite(fields[k + 1], s.x[k]))
        throw ParseError("row " + std::to_string(row) + ": non-numeric value in X" +
                             std::to_string(k + 1),
                         row);
    s.id = row - 1;
    set.samples.push_back(s);
  }

  std::set<double> distinct;
  for (const Sample& s : set.samples) distinct.insert(s.y);
  set.grid.assign(distinct.begin(), distinct.end());
  for (Sample& s : set.samples)
    s.parameter_index = static_cast<std::size_t>(
        std::lower_bound(set.grid.begin(), set.grid.end(), s.y) - set.grid.begin());
  return set;
}

SampleSet read_sample_set(const fs::path& path) {
  auto in = open_input(path);
  return read_sample_set(in);
}

FeatureMatrix feature_matrix(const SampleSet& set, std::span<const SensorId> sensors) {
  FeatureMatrix m(set.size(), sensors.size());
  m.names = labels(sensors);
  for (std::size_t r = 0; r < set.size(); ++r)
    for (std::size_t c = 0; c < sensors.size(); ++c) m(r, c) = set.samples[r].x[index(sensors[c])];
  return m;
}

std::vector<double> label_vector(const SampleSet& set) {
  std::vector<double> y(set.size());
  for (std::size_t r = 0; r < set.size(); ++r) y[r] = set.samples[r].y;
  return y;
}

}  // namespace alle
