#include "alle/bpnn.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>
#include <random>

#include <nlohmann/json.hpp>

#include "alle/dataset.hpp"
#include "alle/error.hpp"
#include "alle/metrics.hpp"
#include "alle/random.hpp"

namespace alle {
using nlohmann::json;

namespace {

double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

}  // namespace

double Network::forward_standardized(std::span<const double> z) const {
  const double* w1 = weights.data();
  const double* b1 = w1 + hidden * inputs;
  const double* w2 = b1 + hidden;
  const double b2 = w2[hidden];
  double out = b2;
  for (std::size_t j = 0; j < hidden; ++j) {
    double a = b1[j];
    for (std::size_t c = 0; c < inputs; ++c) a += w1[j * inputs + c] * z[c];
    out += w2[j] * sigmoid(a);
  }
  return out;
}

double Network::predict(std::span<const double> x) const {
  if (x.size() != inputs)
    throw ArgumentError("network expects " + std::to_string(inputs) + " features, got " +
                        std::to_string(x.size()));
  std::vector<double> z(inputs);
  input.apply(x, z);
  return label_min + label_scale * forward_standardized(z);
}

double network_loss(const Network& net, const FeatureMatrix& z, std::span<const double> t,
                    std::vector<double>* gradient) {
  const std::size_t h = net.hidden, m = net.inputs;
  const double* w1 = net.weights.data();
  const double* b1 = w1 + h * m;
  const double* w2 = b1 + h;
  const double b2 = w2[h];
  double* g_w1 = nullptr;
  if (gradient) {
    gradient->assign(net.weights.size(), 0.0);
    g_w1 = gradient->data();
  }
  double* g_b1 = g_w1 ? g_w1 + h * m : nullptr;
  double* g_w2 = g_b1 ? g_b1 + h : nullptr;

  const double n = static_cast<double>(z.rows);
  std::vector<double> act(h);
  double loss = 0.0;
  for (std::size_t r = 0; r < z.rows; ++r) {
    auto zr = z.row(r);
    double out = b2;
    for (std::size_t j = 0; j < h; ++j) {
      double a = b1[j];
      for (std::size_t c = 0; c < m; ++c) a += w1[j * m + c] * zr[c];
      act[j] = sigmoid(a);
      out += w2[j] * act[j];
    }
    const double err = out - t[r];
    loss += err * err;
    if (!gradient) continue;
    const double delta = err / n;
    for (std::size_t j = 0; j < h; ++j) {
      g_w2[j] += delta * act[j];
      const double back = delta * w2[j] * act[j] * (1.0 - act[j]);
      g_b1[j] += back;
      for (std::size_t c = 0; c < m; ++c) g_w1[j * m + c] += back * zr[c];
    }
    g_w2[h] += delta;
  }
  return loss / (2.0 * n);
}

Network fit_bpnn(const FeatureMatrix& x, std::span<const double> y, const BpnnParams& params) {
  if (params.hidden == 0) throw ArgumentError("hidden layer needs at least one node");
  if (params.iterations == 0) throw ArgumentError("iterations must be >= 1");
  if (!(params.learning_rate > 0.0)) throw ArgumentError("learning rate must be positive");
  if (x.rows == 0 || x.cols == 0) throw ArgumentError("empty training matrix");
  if (y.size() != x.rows) throw ArgumentError("label count does not match feature rows");

  Network net;
  net.inputs = x.cols;
  net.hidden = params.hidden;
  net.input = Standardizer::fit(x);
  const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
  net.label_min = *lo;
  net.label_scale = *hi > *lo ? *hi - *lo : 1.0;

  Rng rng = make_rng(params.seed, {0x62706e6eULL});
  std::uniform_real_distribution<double> init(-0.5, 0.5);
  net.weights.resize(Network::parameter_count(net.inputs, net.hidden));
  for (double& w : net.weights) w = init(rng);

  const FeatureMatrix z = net.input.apply(x);
  std::vector<double> t(y.size());
  for (std::size_t r = 0; r < y.size(); ++r) t[r] = (y[r] - net.label_min) / net.label_scale;

  std::vector<double> grad, trial_grad;
  double loss = network_loss(net, z, t, &grad);
  double rate = params.learning_rate;
  std::vector<double> current = net.weights;
  net.loss_history.reserve(params.iterations);
  for (std::size_t it = 0; it < params.iterations; ++it) {
    for (std::size_t w = 0; w < current.size(); ++w) net.weights[w] = current[w] - rate * grad[w];
    double trial = network_loss(net, z, t, &trial_grad);
    if (trial <= loss) {
      loss = trial;
      current = net.weights;
      grad.swap(trial_grad);
    } else {
      rate *= 0.5;
    }
    net.loss_history.push_back(loss);
  }
  net.weights = current;
  net.final_learning_rate = rate;
  return net;
}

BpnnPreset bpnn_preset(StateKind kind) noexcept {
  switch (kind) {
    case StateKind::d: return {11, 150};
    case StateKind::A: return {10, 250};
    case StateKind::f: return {9, 150};
    case StateKind::phi: return {6, 200};
    case StateKind::alpha: return {13, 400};
    case StateKind::beta: return {6, 150};
    case StateKind::gamma: return {10, 300};
  }
  return {10, 1000};
}

SweepResult sweep_bpnn(const FeatureMatrix& x, std::span<const double> y, SweepAxis axis,
                       std::span<const std::size_t> grid, const BpnnParams& base,
                       double tolerance) {
  if (grid.empty()) throw ArgumentError("sweep grid is empty");
  SweepResult out;
  out.axis = axis;
  out.tolerance = tolerance;
  out.values.assign(grid.begin(), grid.end());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    BpnnParams p = base;
    (axis == SweepAxis::hidden ? p.hidden : p.iterations) = grid[g];
    p.seed = derive_seed(base.seed, {g});
    auto start = std::chrono::steady_clock::now();
    Network net = fit_bpnn(x, y, p);
    auto stop = std::chrono::steady_clock::now();
    std::vector<double> pred(x.rows);
    for (std::size_t r = 0; r < x.rows; ++r) pred[r] = net.predict(x.row(r));
    out.r2.push_back(r_squared(pred, y));
    out.train_seconds.push_back(std::chrono::duration<double>(stop - start).count());
  }
  out.chosen = out.values[plateau_index(out.r2, tolerance)];
  return out;
}

void write_sweep_csv(const SweepResult& sweep, std::ostream& out) {
  out << "value,r2,train_seconds\n";
  for (std::size_t g = 0; g < sweep.values.size(); ++g)
    out << sweep.values[g] << ',' << format_double(sweep.r2[g]) << ','
        << format_double(sweep.train_seconds[g]) << '\n';
}

void to_json(json& j, const Network& net) {
  j = json{{"inputs", net.inputs},
           {"hidden", net.hidden},
           {"weights", net.weights},
           {"standardizer", net.input},
           {"label_min", net.label_min},
           {"label_scale", net.label_scale},
           {"final_loss", net.loss_history.empty() ? 0.0 : net.loss_history.back()},
           {"final_learning_rate", net.final_learning_rate}};
}

void from_json(const json& j, Network& net) {
  net = Network{};
  net.inputs = j.at("inputs").get<std::size_t>();
  net.hidden = j.at("hidden").get<std::size_t>();
  net.weights = j.at("weights").get<std::vector<double>>();
  net.input = j.at("standardizer").get<Standardizer>();
  net.label_min = j.at("label_min").get<double>();
  net.label_scale = j.at("label_scale").get<double>();
  net.final_learning_rate = j.value("final_learning_rate", 0.0);
  if (net.weights.size() != Network::parameter_count(net.inputs, net.hidden) ||
      net.input.width() != net.inputs)
    throw DataError("network dump has inconsistent sizes");
}

}  // namespace alle
