#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "alle/matrix.hpp"
#include "alle/sensor.hpp"
#include "alle/state.hpp"

namespace alle {

/// Recordings taken per experimental parameter.
inline constexpr std::size_t kRecordingsPerParameter = 5;
/// Samples kept from each smoothed recording.
inline constexpr std::size_t kSamplesPerRecording = 250;

/// One raw (or smoothed) 9-channel pressure time series taken at a single
/// experimental parameter value.
struct Recording {
  StateKind state = StateKind::d;
  std::size_t parameter_index = 1;  ///< 1-based position in the state's grid
  double parameter_value = 0.0;
  std::size_t recording_index = 1;  ///< 1..5
  double sample_rate_hz = 0.0;
  std::vector<double> time;
  std::array<std::vector<double>, kSensorCount> channels;

  std::size_t steps() const noexcept { return time.size(); }
};

/// Sidecar metadata stored next to each recording CSV.
struct RecordingMeta {
  StateKind state = StateKind::d;
  std::string unit;
  double parameter_value = 0.0;
  std::size_t parameter_index = 1;
  std::size_t recording_index = 1;
  double sample_rate_hz = 0.0;
};

struct Sample {
  std::array<double, kSensorCount> x{};
  double y = 0.0;
  std::size_t parameter_index = 0;  ///< 0-based row in SampleSet::grid
  std::size_t recording_index = 0;  ///< 1..5, or 0 when unknown
  std::size_t id = 0;               ///< stable identity within the original set
};

enum class Provenance { ingested, synthetic, derived_split };

/// The original sample set O for one state (or a split derived from it).
struct SampleSet {
  StateKind state = StateKind::d;
  std::vector<double> grid;
  std::vector<Sample> samples;
  Provenance provenance = Provenance::ingested;

  std::size_t size() const noexcept { return samples.size(); }
  bool empty() const noexcept { return samples.empty(); }
  /// Sample count per grid entry.
  std::vector<std::size_t> counts_per_parameter() const;
};

// ---------------------------------------------------------------------------
// Recording I/O

/// Path of the JSON sidecar for a recording CSV (same stem, .json extension).
std::filesystem::path sidecar_path(const std::filesystem::path& csv);

RecordingMeta read_sidecar(const std::filesystem::path& json_path);
void write_sidecar(const RecordingMeta& meta, const std::filesystem::path& json_path);

/// Parses a recording CSV (`t,P0,...,PR4`) plus its sidecar. Columns may
/// appear in any order. Errors: SchemaError for a missing column or sidecar,
/// ParseError (1-based data row) for a non-numeric or non-finite cell,
/// LabelMismatchError when the sidecar's state differs from `expected`.
Recording ingest_recording(const std::filesystem::path& csv, StateKind expected);

/// Parses only the CSV body into `rec` (time and channels).
void parse_recording_csv(std::istream& in, Recording& rec);

/// Writes the CSV with shortest round-trip number formatting.
void write_recording_csv(const Recording& rec, std::ostream& out);

/// Writes `<dir>/<stem>.csv` and its sidecar; returns the CSV path.
std::filesystem::path export_recording(const Recording& rec, const std::filesystem::path& dir);

/// Canonical file stem, e.g. "d_p03_r2".
std::string recording_stem(const Recording& rec);

/// Ingests every `*.csv` with a sidecar in `dir`, sorted by (parameter, recording).
std::vector<Recording> ingest_directory(const std::filesystem::path& dir);

// ---------------------------------------------------------------------------
// Smoothing

struct SmoothingParams {
  std::size_t window = 25;
  double sigma = 4.0;  ///< (window - 1) / 6 for the default window

  static SmoothingParams for_window(std::size_t window) {
    return {window, (static_cast<double>(window) - 1.0) / 6.0};
  }
};

/// Discrete Gaussian taps exp(-j^2 / 2 sigma^2), j = -h..h, normalized to sum 1.
std::vector<double> gaussian_kernel(std::size_t window, double sigma);

/// Convolves with the Gaussian kernel; edges are mirror-reflected without
/// repeating the boundary sample, so length is preserved.
std::vector<double> smooth_series(std::span<const double> series, std::size_t window, double sigma);

Recording smooth(const Recording& recording, const SmoothingParams& params);

// ---------------------------------------------------------------------------
// Sample-set construction

/// Builds O from five recordings per grid entry, taking the centered block of
/// `per_recording` consecutive steps from each recording.
SampleSet assemble(std::span<const Recording> recordings, std::size_t per_recording,
                   const std::vector<double>& grid);

/// As above with the state's table grid.
SampleSet assemble(std::span<const Recording> recordings,
                   std::size_t per_recording = kSamplesPerRecording);

/// Start offset of the centered block.
std::size_t centered_block_start(std::size_t length, std::size_t block) noexcept;

/// Stratified (per grid entry) seeded partition into (train, test).
std::pair<SampleSet, SampleSet> split(const SampleSet& set, double train_fraction,
                                      std::uint64_t seed);

// ---------------------------------------------------------------------------
// SampleSet CSV (`# state=<kind> unit=<unit>` then `Y,X1,...,X9`)

void write_sample_set(const SampleSet& set, std::ostream& out);
void write_sample_set(const SampleSet& set, const std::filesystem::path& path);
/// The grid is recovered as the sorted distinct labels.
SampleSet read_sample_set(std::istream& in);
SampleSet read_sample_set(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Model inputs

/// Columns of `set` restricted to `sensors`, in the listed order.
FeatureMatrix feature_matrix(const SampleSet& set, std::span<const SensorId> sensors);
std::vector<double> label_vector(const SampleSet& set);

/// Shortest representation that parses back to the same double.
std::string format_double(double v);

}  // namespace alle
