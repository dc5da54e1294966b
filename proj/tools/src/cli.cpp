#include "alle/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "alle/bpnn.hpp"
#include "alle/error.hpp"
#include "alle/evaluate.hpp"
#include "alle/family.hpp"
#include "alle/random.hpp"
#include "alle/sensitivity.hpp"
#include "alle/synthgen.hpp"

namespace alle::cli {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// File helpers

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("failed writing " + path.string());
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what(), 0);
  }
}

void make_output_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir))
    throw DataError("cannot create output directory " + dir.string());
}

std::string first_line(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open " + path.string());
  std::string line;
  while (std::getline(in, line))
    if (!line.empty() && line != "\r") return line;
  return {};
}

// ---------------------------------------------------------------------------
// Inputs

struct PreprocessFlags {
  std::size_t window = 25;
  double sigma = 4.0;
  std::size_t per_recording = kSamplesPerRecording;

  json echo() const {
    return {{"window", window}, {"sigma", sigma}, {"per_recording", per_recording}};
  }
};

/// The recordings' own grid when every position is covered, else the table grid.
std::vector<double> recordings_grid(const std::vector<Recording>& recs) {
  std::size_t p = 0;
  for (const auto& r : recs) p = std::max(p, r.parameter_index);
  std::vector<std::optional<double>> slots(p);
  for (const auto& r : recs)
    if (r.parameter_index >= 1) slots[r.parameter_index - 1] = r.parameter_value;
  std::vector<double> grid;
  for (const auto& s : slots) {
    if (!s) return table_grid(recs.front().state);
    grid.push_back(*s);
  }
  return grid;
}

SampleSet assemble_directory(const fs::path& dir, const PreprocessFlags& flags,
                             std::vector<Recording>* smoothed_out = nullptr) {
  const auto raw = ingest_directory(dir);
  const SmoothingParams params{flags.window, flags.sigma};
  std::vector<Recording> smoothed;
  smoothed.reserve(raw.size());
  for (const auto& r : raw) smoothed.push_back(smooth(r, params));
  SampleSet set = assemble(smoothed, flags.per_recording, recordings_grid(smoothed));
  if (smoothed_out) *smoothed_out = std::move(smoothed);
  return set;
}

/// A sample-set CSV, a directory holding samples.csv, or a directory of raw
/// recordings (smoothed and assembled with `flags`).
SampleSet load_samples(const fs::path& in, const PreprocessFlags& flags = {}) {
  if (fs::is_directory(in)) {
    if (fs::exists(in / "samples.csv")) return read_sample_set(in / "samples.csv");
    return assemble_directory(in, flags);
  }
  if (!fs::exists(in)) throw SchemaError("input not found: " + in.string());
  return read_sample_set(in);
}

// ---------------------------------------------------------------------------
// Model hyperparameters shared by train/sweep/estimate/compare

struct ModelFlags {
  std::size_t trees = 500;
  std::size_t m_try = 0;
  std::size_t min_node_size = 5;
  std::size_t hidden = 0;
  std::size_t iterations = 0;
  double learning_rate = 0.1;
  double svr_c = 1.0;
  double svr_eps = 0.1;
  double svr_gamma = 0.0;
  double f_alpha = 0.05;

  void attach(CLI::App* app) {
    app->add_option("--trees", trees, "Random-forest tree count")->capture_default_str();
    app->add_option("--mtry", m_try, "Features tried per split (0 = auto)")->capture_default_str();
    app->add_option("--min-node", min_node_size, "Minimum node size")->capture_default_str();
    app->add_option("--hidden", hidden, "BPNN hidden nodes (0 = state preset)")->capture_default_str();
    app->add_option("--iterations", iterations, "BPNN iterations (0 = state preset)")
        ->capture_default_str();
    app->add_option("--learning-rate", learning_rate, "BPNN initial learning rate")
        ->capture_default_str();
    app->add_option("--svr-c", svr_c, "SVR box constraint")->capture_default_str();
    app->add_option("--svr-eps", svr_eps, "SVR tube width")->capture_default_str();
    app->add_option("--svr-gamma", svr_gamma, "RBF gamma (0 = auto)")->capture_default_str();
    app->add_option("--alpha", f_alpha, "F-test significance level")->capture_default_str();
  }

  FamilyOptions options() const {
    FamilyOptions o;
    o.forest.n_trees = trees;
    o.forest.m_try = m_try;
    o.forest.min_node_size = min_node_size;
    if (hidden > 0) o.bpnn_hidden = hidden;
    if (iterations > 0) o.bpnn_iterations = iterations;
    o.bpnn_learning_rate = learning_rate;
    o.svr.c_box = svr_c;
    o.svr.eps_tube = svr_eps;
    o.svr.gamma = svr_gamma;
    o.f_test_alpha = f_alpha;
    return o;
  }

  json echo(StateKind state) const {
    const auto bp = options().bpnn_for(state);
    return {{"rf", {{"trees", trees}, {"m_try", m_try}, {"min_node_size", min_node_size}}},
            {"bpnn",
             {{"hidden", bp.hidden},
              {"iterations", bp.iterations},
              {"learning_rate", learning_rate}}},
            {"svr", {{"c_box", svr_c}, {"eps_tube", svr_eps}, {"gamma", svr_gamma}}},
            {"reg", {{"alpha", f_alpha}}}};
  }
};

/// "c1"/"c2" resolve through the sensitivity criteria of `set`; anything else
/// is an explicit sensor list.
SensorList resolve_ordering(const SampleSet& set, const std::string& text) {
  if (text == "c1" || text == "c2") {
    const auto report = criteria(per_parameter_means(set), criterion_from_tag(text));
    return report.ordering();
  }
  return parse_sensor_list(text);
}

SensorList resolve_sensors(const SampleSet& set, const std::string& sensors,
                           const std::string& ordering, std::size_t m) {
  if (!ordering.empty()) {
    auto order = resolve_ordering(set, ordering);
    if (m < 1 || m > order.size())
      throw ArgumentError("--m must lie in 1.." + std::to_string(order.size()));
    order.resize(m);
    return order;
  }
  return parse_sensor_list(sensors);
}

json config_base(std::string_view command) { return json{{"command", command}}; }

std::string summary_table(const SensitivityReport& r) {
  std::ostringstream s;
  s << "sensor  C1      C2\n";
  for (std::size_t k = 0; k < kSensorCount; ++k) {
    std::string name(label(all_sensors()[k]));
    name.resize(6, ' ');
    s << name << "  " << format_fixed4(r.c1[k]) << "  " << format_fixed4(r.c2[k]) << '\n';
  }
  auto join = [](const SensorList& l) {
    std::string out;
    for (auto id : l) out += (out.empty() ? "" : ", ") + std::string(label(id));
    return out;
  };
  s << "order C1: " << join(r.order_c1) << '\n';
  s << "order C2: " << join(r.order_c2) << '\n';
  return s.str();
}

// ---------------------------------------------------------------------------
// Criterion tables (`sensor,<column>...` with one row per sensor)

bool is_criterion_table(const fs::path& path) {
  const auto line = first_line(path);
  return line.rfind("sensor,", 0) == 0;
}

json sort_criterion_table(const fs::path& path, std::string& summary) {
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  auto split_line = [](const std::string& l) {
    std::vector<std::string> cells;
    std::stringstream ss(l);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
      while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
      cells.push_back(cell);
    }
    return cells;
  };
  const auto header = split_line(line);
  const std::size_t cols = header.size() - 1;
  if (cols == 0) throw SchemaError("criterion table has no value columns");
  std::vector<std::array<double, kSensorCount>> values(cols);
  std::array<bool, kSensorCount> seen{};
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    ++row;
    const auto cells = split_line(line);
    if (cells.size() != header.size())
      throw ParseError("criterion table row " + std::to_string(row) + " has " +
                           std::to_string(cells.size()) + " cells",
                       row);
    const auto id = sensor_from_label(cells[0]);
    if (!id) throw SchemaError("unknown sensor '" + cells[0] + "'");
    if (seen[index(*id)]) throw SchemaError("sensor " + cells[0] + " listed twice");
    seen[index(*id)] = true;
    for (std::size_t c = 0; c < cols; ++c) {
      try {
        std::size_t used = 0;
        values[c][index(*id)] = std::stod(cells[c + 1], &used);
        if (used != cells[c + 1].size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw ParseError("row " + std::to_string(row) + ": '" + cells[c + 1] + "' is not a number",
                         row);
      }
    }
  }
  for (std::size_t k = 0; k < kSensorCount; ++k)
    if (!seen[k])
      throw SchemaError("criterion table misses sensor " + std::string(label(all_sensors()[k])));

  json columns = json::object();
  std::ostringstream s;
  for (std::size_t c = 0; c < cols; ++c) {
    const auto order = sort_sensors(values[c]);
    json vals = json::object();
    for (std::size_t k = 0; k < kSensorCount; ++k)
      vals[std::string(label(all_sensors()[k]))] = values[c][k];
    columns[header[c + 1]] = {{"values", vals}, {"ordering", labels(order)}};
    s << header[c + 1] << ':';
    for (auto id : order) s << ' ' << label(id);
    s << '\n';
  }
  summary = s.str();
  return columns;
}

// ---------------------------------------------------------------------------
// Subcommands

struct Context {
  std::ostream& out;
};

void cmd_generate(const Context& ctx, const fs::path& config_path, const fs::path& out_dir,
                  std::optional<std::uint64_t> seed) {
  const json raw = read_json(config_path);
  GeneratorConfig config;
  try {
    config = raw.get<GeneratorConfig>();
  } catch (const json::exception& e) {
    throw ArgumentError(config_path.string() + ": " + e.what());
  }
  if (seed) {
    config.seed = *seed;
  } else if (!raw.contains("seed")) {
    throw ArgumentError("generator config has no seed; pass --seed");
  }
  config.validate();
  const auto data = generate(config);
  make_output_dir(out_dir);
  for (const auto& rec : data.recordings) export_recording(rec, out_dir);
  json config_echo = config_base("generate");
  config_echo["config_path"] = config_path.string();
  config_echo["generator"] = config;
  write_json(out_dir / "generator_config.json", config);
  write_json(out_dir / "ground_truth.json",
             json{{"config", config_echo}, {"state", tag(config.state)}, {"truth", data.truth}});
  ctx.out << "wrote " << data.recordings.size() << " recordings to " << out_dir.string() << '\n';
}

void cmd_preprocess(const Context& ctx, const fs::path& in, const fs::path& out_dir,
                    const PreprocessFlags& flags) {
  std::vector<Recording> smoothed;
  const SampleSet set = assemble_directory(in, flags, &smoothed);
  make_output_dir(out_dir / "smoothed");
  for (const auto& rec : smoothed) export_recording(rec, out_dir / "smoothed");
  write_sample_set(set, out_dir / "samples.csv");
  json config = config_base("preprocess");
  config["in"] = in.string();
  config["smoothing"] = flags.echo();
  write_json(out_dir / "preprocess.json", json{{"config", config},
                                               {"state", tag(set.state)},
                                               {"grid", set.grid},
                                               {"counts", set.counts_per_parameter()},
                                               {"samples", set.size()}});
  ctx.out << "assembled " << set.size() << " samples (" << tag(set.state) << ") into "
          << (out_dir / "samples.csv").string() << '\n';
}

void cmd_sensitivity(const Context& ctx, const fs::path& in, const fs::path& out_dir,
                     const std::string& criterion_text, const PreprocessFlags& flags) {
  const Criterion criterion = criterion_from_tag(criterion_text);
  json config = config_base("sensitivity");
  config["in"] = in.string();
  config["criterion"] = tag(criterion);

  if (fs::is_regular_file(in) && is_criterion_table(in)) {
    std::string summary;
    const json columns = sort_criterion_table(in, summary);
    make_output_dir(out_dir);
    write_json(out_dir / "sensitivity.json", json{{"config", config}, {"columns", columns}});
    write_text(out_dir / "summary.txt", summary);
    ctx.out << summary;
    return;
  }

  if (fs::is_directory(in) && !fs::exists(in / "samples.csv")) config["smoothing"] = flags.echo();
  const SampleSet set = load_samples(in, flags);
  const auto means = per_parameter_means(set);
  const auto report = criteria(means, criterion);
  make_output_dir(out_dir);
  write_json(out_dir / "sensitivity.json", json{{"config", config},
                                                {"state", tag(set.state)},
                                                {"means", means},
                                                {"report", report},
                                                {"ordering", labels(report.ordering())}});
  std::ostringstream csv;
  write_criteria_csv(report, csv);
  write_text(out_dir / "criteria.csv", csv.str());
  const auto summary = summary_table(report);
  write_text(out_dir / "summary.txt", summary);
  ctx.out << summary;
}

struct TrainFlags {
  std::string family;
  std::string sensors = "all";
  std::string ordering;
  std::size_t m = kSensorCount;
};

void cmd_train(const Context& ctx, const fs::path& in, const fs::path& out_dir,
               const TrainFlags& flags, const ModelFlags& model_flags, std::uint64_t seed) {
  const Family family = family_from_tag(flags.family);
  const SampleSet set = load_samples(in);
  const SensorList sensors = resolve_sensors(set, flags.sensors, flags.ordering, flags.m);
  const TrainedModel model = train(set, family, sensors, model_flags.options(), seed);

  json config = config_base("train");
  config["in"] = in.string();
  config["family"] = tag(family);
  config["sensors"] = labels(sensors);
  config["seed"] = seed;
  config["hyperparameters"] = model_flags.echo(set.state);

  const auto pred = model.predict(set);
  const auto y = label_vector(set);
  const double train_mae = mae(pred, y);
  const double train_r2 = r_squared(pred, y);
  make_output_dir(out_dir);
  write_json(out_dir / "model.json", json{{"config", config}, {"model", model}});
  write_json(out_dir / "train_report.json",
             json{{"config", config},
                  {"state", tag(set.state)},
                  {"n", set.size()},
                  {"train", {{"mae", train_mae}, {"r2", train_r2}}},
                  {"per_parameter", per_parameter_mae(set, pred)}});
  ctx.out << tag(family) << " on " << sensors.size() << " sensors: train R2 "
          << format_fixed4(train_r2) << ", MAE " << format_fixed4(train_mae) << ' '
          << unit(set.state) << '\n';
}

void cmd_importance(const Context& ctx, const fs::path& model_path, const fs::path& in,
                    const fs::path& out_dir, std::uint64_t seed) {
  const json raw = read_json(model_path);
  TrainedModel model;
  try {
    model = (raw.contains("model") ? raw.at("model") : raw).get<TrainedModel>();
  } catch (const json::exception& e) {
    throw SchemaError(model_path.string() + ": " + e.what());
  }
  if (model.family != Family::rf)
    throw ArgumentError("permutation importance needs a random-forest model");
  const auto& forest = std::get<Forest>(model.model);
  const SampleSet set = load_samples(in);
  if (set.state != model.state)
    throw LabelMismatchError("model was trained for state " + std::string(tag(model.state)) +
                             ", data holds " + std::string(tag(set.state)));
  if (set.size() != forest.training_rows())
    throw DataError("importance needs the model's training set (" +
                    std::to_string(forest.training_rows()) + " rows, got " +
                    std::to_string(set.size()) + ")");
  const auto x = feature_matrix(set, model.sensors);
  const auto y = label_vector(set);
  const auto report = permutation_importance(forest, x, y, seed);

  json config = config_base("importance");
  config["model"] = model_path.string();
  config["in"] = in.string();
  config["seed"] = seed;
  std::vector<std::string> ranking;
  for (auto k : report.ranking_by_magnitude()) ranking.push_back(report.feature_names[k]);
  make_output_dir(out_dir);
  write_json(out_dir / "importance.json",
             json{{"config", config}, {"report", report}, {"ranking", ranking}});
  std::ostringstream csv;
  csv << "sensor,importance,mean_delta_mse,standard_error\n";
  for (std::size_t k = 0; k < report.importance.size(); ++k)
    csv << report.feature_names[k] << ',' << format_double(report.importance[k]) << ','
        << format_double(report.mean_delta_mse[k]) << ','
        << format_double(report.standard_error[k]) << '\n';
  write_text(out_dir / "importance.csv", csv.str());
  for (std::size_t k : report.ranking_by_magnitude())
    ctx.out << report.feature_names[k] << ' ' << format_fixed4(report.importance[k]) << '\n';
}

struct SweepFlags {
  std::string family;
  std::string ordering = "c2";
  double tolerance = 0.02;
  double fraction = 0.8;
  std::string bpnn_grid;
  std::string grid_values;
  std::string sensors = "all";
};

std::vector<std::size_t> parse_grid_values(const std::string& text, SweepAxis axis) {
  std::vector<std::size_t> out;
  if (text.empty()) {
    if (axis == SweepAxis::hidden)
      for (std::size_t h = 1; h <= 20; ++h) out.push_back(h);
    else
      for (std::size_t it = 50; it <= 1000; it += 50) out.push_back(it);
    return out;
  }
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      std::size_t used = 0;
      const long long v = std::stoll(cell, &used);
      if (used != cell.size() || v <= 0) throw std::invalid_argument("bad");
      out.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw ArgumentError("bad grid value '" + cell + "'");
    }
  }
  if (out.empty()) throw ArgumentError("empty --grid-values");
  return out;
}

void cmd_sweep(const Context& ctx, const fs::path& in, const fs::path& out_dir,
               const SweepFlags& flags, const ModelFlags& model_flags, std::uint64_t seed) {
  const SampleSet set = load_samples(in);
  json config = config_base("sweep");
  config["in"] = in.string();
  config["seed"] = seed;
  config["hyperparameters"] = model_flags.echo(set.state);

  if (!flags.bpnn_grid.empty()) {
    SweepAxis axis;
    if (flags.bpnn_grid == "hidden")
      axis = SweepAxis::hidden;
    else if (flags.bpnn_grid == "iterations")
      axis = SweepAxis::iterations;
    else
      throw ArgumentError("--bpnn-grid must be hidden or iterations");
    const auto grid = parse_grid_values(flags.grid_values, axis);
    const SensorList sensors = parse_sensor_list(flags.sensors);
    BpnnParams base = model_flags.options().bpnn_for(set.state);
    base.seed = seed;
    const auto x = feature_matrix(set, sensors);
    const auto y = label_vector(set);
    const double tol = flags.tolerance;
    const auto result = sweep_bpnn(x, y, axis, grid, base, tol);
    config["family"] = "bpnn";
    config["bpnn_grid"] = flags.bpnn_grid;
    config["grid_values"] = grid;
    config["sensors"] = labels(sensors);
    config["tolerance"] = tol;
    make_output_dir(out_dir);
    write_json(out_dir / "bpnn_sweep.json", json{{"config", config},
                                                 {"values", result.values},
                                                 {"r2", result.r2},
                                                 {"chosen", result.chosen}});
    std::ostringstream csv;
    write_sweep_csv(result, csv);
    write_text(out_dir / "bpnn_sweep.csv", csv.str());
    ctx.out << flags.bpnn_grid << " chosen: " << result.chosen << '\n';
    return;
  }

  if (flags.family.empty()) throw ArgumentError("sweep needs --family (or --bpnn-grid)");
  const Family family = family_from_tag(flags.family);
  const SensorList ordering = resolve_ordering(set, flags.ordering);
  SweepOptions options;
  options.family = model_flags.options();
  options.tolerance = flags.tolerance;
  options.train_fraction = flags.fraction;
  options.seed = seed;
  const auto curve = m_sweep(set, ordering, family, options);
  config["family"] = tag(family);
  config["ordering"] = flags.ordering;
  config["tolerance"] = flags.tolerance;
  config["fraction"] = flags.fraction;
  make_output_dir(out_dir);
  write_json(out_dir / "sweep.json", json{{"config", config}, {"curve", curve}});
  std::ostringstream csv;
  write_curve_csv(curve, csv);
  write_text(out_dir / "curve.csv", csv.str());
  ctx.out << "M_r = " << curve.m_r << " (R2 " << format_fixed4(curve.r2[curve.m_r - 1]) << ")\n";
}

struct EstimateFlags {
  std::string family;
  double fraction = 0.8;
  std::string sensors = "all";
  std::string ordering;
  std::size_t m = kSensorCount;
};

void cmd_estimate(const Context& ctx, const fs::path& in, const fs::path& out_dir,
                  const EstimateFlags& flags, const ModelFlags& model_flags, std::uint64_t seed) {
  const Family family = family_from_tag(flags.family);
  const SampleSet set = load_samples(in);
  const SensorList sensors = resolve_sensors(set, flags.sensors, flags.ordering, flags.m);
  const auto [train_set, test_set] = split(set, flags.fraction, derive_seed(seed, {0x73706c6974}));
  const auto report = estimate(train_set, test_set, family, sensors, model_flags.options(),
                               derive_seed(seed, {0x6d6f64656c}));
  json config = config_base("estimate");
  config["in"] = in.string();
  config["family"] = tag(family);
  config["fraction"] = flags.fraction;
  config["sensors"] = labels(sensors);
  config["seed"] = seed;
  config["hyperparameters"] = model_flags.echo(set.state);
  make_output_dir(out_dir);
  write_json(out_dir / "estimate.json", json{{"config", config}, {"report", report}});
  ctx.out << "test R2 " << format_fixed4(report.r2) << ", MAE " << format_fixed4(report.mae) << ' '
          << unit(set.state) << '\n';
  for (const auto& p : report.per_parameter)
    ctx.out << "  " << tag(set.state) << " = " << format_double(p.value) << ": MAE "
            << format_fixed4(p.mae) << '\n';
}

struct CompareFlags {
  std::string families = "rf,bpnn,svr,reg";
  double fraction = 0.8;
  double tolerance = 0.02;
  std::size_t random_orderings = 0;
};

void cmd_compare(const Context& ctx, const fs::path& in, const fs::path& out_dir,
                 const CompareFlags& flags, const ModelFlags& model_flags, std::uint64_t seed) {
  const SampleSet set = load_samples(in);
  std::vector<Family> families;
  {
    std::stringstream ss(flags.families);
    std::string cell;
    while (std::getline(ss, cell, ',')) families.push_back(family_from_tag(cell));
  }
  const auto sens = criteria(per_parameter_means(set));
  std::vector<NamedOrdering> orderings = {{"c1", sens.order_c1}, {"c2", sens.order_c2}};
  for (std::size_t r = 0; r < flags.random_orderings; ++r) {
    SensorList order(all_sensors().begin(), all_sensors().end());
    auto rng = make_rng(seed, {0x72616e646f6d, r});
    std::shuffle(order.begin(), order.end(), rng);
    orderings.push_back({"random" + std::to_string(r + 1), order});
  }
  CompareOptions options;
  options.family = model_flags.options();
  options.train_fraction = flags.fraction;
  options.tolerance = flags.tolerance;
  options.seed = seed;
  const auto matrix = compare_families(set, orderings, families, options);

  json config = config_base("compare");
  config["in"] = in.string();
  config["families"] = flags.families;
  config["fraction"] = flags.fraction;
  config["tolerance"] = flags.tolerance;
  config["random_orderings"] = flags.random_orderings;
  config["seed"] = seed;
  config["hyperparameters"] = model_flags.echo(set.state);
  json named = json::object();
  for (const auto& o : orderings) named[o.name] = labels(o.order);
  make_output_dir(out_dir);
  write_json(out_dir / "comparison.json",
             json{{"config", config}, {"orderings", named}, {"matrix", matrix}});
  std::ostringstream csv;
  write_comparison_csv(matrix, csv);
  write_text(out_dir / "comparison.csv", csv.str());
  std::ostringstream best;
  for (const auto& b : matrix.best)
    best << tag(b.family) << ' ' << b.ordering << ' ' << format_best_tuple(b, set.state) << '\n';
  write_text(out_dir / "best.txt", best.str());
  ctx.out << best.str();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Lateral-line relative-state estimation pipeline", "alle"};
  app.require_subcommand(1);

  std::string in, out_dir, config_path, model_path, criterion = "c2";
  std::uint64_t seed = 0;
  std::optional<std::uint64_t> generate_seed;
  PreprocessFlags pre;
  ModelFlags model_flags;
  TrainFlags train_flags;
  SweepFlags sweep_flags;
  EstimateFlags estimate_flags;
  CompareFlags compare_flags;

  auto* gen = app.add_subcommand("generate", "Write synthetic recordings and their ground truth");
  gen->add_option("--config", config_path, "Generator config JSON")->required();
  gen->add_option("--out", out_dir, "Output directory")->required();
  gen->add_option("--seed", generate_seed, "Overrides the config's seed");

  auto* prep = app.add_subcommand("preprocess", "Smooth recordings and assemble samples.csv");
  prep->add_option("--in", in, "Directory of recordings")->required();
  prep->add_option("--out", out_dir, "Output directory")->required();
  prep->add_option("--window", pre.window, "Gaussian window (odd)")->capture_default_str();
  prep->add_option("--sigma", pre.sigma, "Gaussian sigma")->capture_default_str();
  prep->add_option("--per-recording", pre.per_recording, "Samples kept per recording")
      ->capture_default_str();

  auto* sens = app.add_subcommand("sensitivity", "Sensor criteria C1/C2 and orderings");
  sens->add_option("--in", in, "Samples, recordings directory, or criterion table")->required();
  sens->add_option("--criterion", criterion, "c1 or c2")->capture_default_str();
  sens->add_option("--out", out_dir, "Output directory")->required();
  sens->add_option("--window", pre.window, "Gaussian window for raw recordings")
      ->capture_default_str();
  sens->add_option("--sigma", pre.sigma, "Gaussian sigma for raw recordings")->capture_default_str();
  sens->add_option("--per-recording", pre.per_recording, "Samples kept per raw recording")->capture_default_str();

  auto* tr = app.add_subcommand("train", "Fit one model family");
  tr->add_option("--in", in, "Sample set")->required();
  tr->add_option("--family", train_flags.family, "rf|bpnn|svr|reg")->required();
  tr->add_option("--sensors", train_flags.sensors, "Sensor list or 'all'")->capture_default_str();
  tr->add_option("--ordering", train_flags.ordering, "Take a prefix of this ordering (c1|c2|list)");
  tr->add_option("--m", train_flags.m, "Prefix length with --ordering")->capture_default_str();
  tr->add_option("--seed", seed, "Master seed")->required();
  tr->add_option("--out", out_dir, "Output directory")->required();
  model_flags.attach(tr);

  auto* imp = app.add_subcommand("importance", "Permutation importance of a forest");
  imp->add_option("--model", model_path, "model.json from train")->required();
  imp->add_option("--in", in, "The model's training samples")->required();
  imp->add_option("--seed", seed, "Master seed")->required();
  imp->add_option("--out", out_dir, "Output directory")->required();

  auto* sw = app.add_subcommand("sweep", "M-sweep over an ordering, or a BPNN grid sweep");
  sw->add_option("--in", in, "Sample set")->required();
  sw->add_option("--family", sweep_flags.family, "rf|bpnn|svr|reg");
  sw->add_option("--ordering", sweep_flags.ordering, "c1|c2|full sensor list")
      ->capture_default_str();
  sw->add_option("--tolerance", sweep_flags.tolerance, "Plateau tolerance")->capture_default_str();
  sw->add_option("--fraction", sweep_flags.fraction, "Training fraction")->capture_default_str();
  sw->add_option("--bpnn-grid", sweep_flags.bpnn_grid, "hidden|iterations");
  sw->add_option("--grid-values", sweep_flags.grid_values, "Comma-separated grid for --bpnn-grid");
  sw->add_option("--sensors", sweep_flags.sensors, "Sensors for --bpnn-grid")->capture_default_str();
  sw->add_option("--seed", seed, "Master seed")->required();
  sw->add_option("--out", out_dir, "Output directory")->required();
  model_flags.attach(sw);

  auto* est = app.add_subcommand("estimate", "Train/test estimation on a stratified split");
  est->add_option("--in", in, "Sample set")->required();
  est->add_option("--family", estimate_flags.family, "rf|bpnn|svr|reg")->required();
  est->add_option("--fraction", estimate_flags.fraction, "Training fraction")
      ->capture_default_str();
  est->add_option("--sensors", estimate_flags.sensors, "Sensor list or 'all'")
      ->capture_default_str();
  est->add_option("--ordering", estimate_flags.ordering, "Take a prefix of this ordering");
  est->add_option("--m", estimate_flags.m, "Prefix length with --ordering")->capture_default_str();
  est->add_option("--seed", seed, "Master seed")->required();
  est->add_option("--out", out_dir, "Output directory")->required();
  model_flags.attach(est);

  auto* cmp = app.add_subcommand("compare", "Family x ordering x M comparison grid");
  cmp->add_option("--in", in, "Sample set")->required();
  cmp->add_option("--families", compare_flags.families, "Comma-separated families")
      ->capture_default_str();
  cmp->add_option("--fraction", compare_flags.fraction, "Training fraction")->capture_default_str();
  cmp->add_option("--tolerance", compare_flags.tolerance, "Plateau tolerance")
      ->capture_default_str();
  cmp->add_option("--random-orderings", compare_flags.random_orderings,
                  "Extra seeded random orderings")
      ->capture_default_str();
  cmp->add_option("--seed", seed, "Master seed")->required();
  cmp->add_option("--out", out_dir, "Output directory")->required();
  model_flags.attach(cmp);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "alle: " << e.what() << "\n\n" << app.help();
    return kUsage;
  }

  const Context ctx{out};
  try {
    if (*gen) cmd_generate(ctx, config_path, out_dir, generate_seed);
    else if (*prep) cmd_preprocess(ctx, in, out_dir, pre);
    else if (*sens) cmd_sensitivity(ctx, in, out_dir, criterion, pre);
    else if (*tr) cmd_train(ctx, in, out_dir, train_flags, model_flags, seed);
    else if (*imp) cmd_importance(ctx, model_path, in, out_dir, seed);
    else if (*sw) cmd_sweep(ctx, in, out_dir, sweep_flags, model_flags, seed);
    else if (*est) cmd_estimate(ctx, in, out_dir, estimate_flags, model_flags, seed);
    else if (*cmp) cmd_compare(ctx, in, out_dir, compare_flags, model_flags, seed);
  } catch (const ArgumentError& e) {
    err << "alle: argument error: " << e.what() << '\n';
    return kUsage;
  } catch (const ConvergenceError& e) {
    err << "alle: convergence error: " << e.what() << '\n';
    return kConvergence;
  } catch (const Error& e) {
    err << "alle: data error: " << e.what() << '\n';
    return kData;
  } catch (const fs::filesystem_error& e) {
    err << "alle: file error: " << e.what() << '\n';
    return kData;
  } catch (const json::exception& e) {
    err << "alle: malformed JSON: " << e.what() << '\n';
    return kData;
  } catch (const std::exception& e) {
    err << "alle: internal error: " << e.what() << '\n';
    return kInternal;
  }
  return kOk;
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace alle::cli
