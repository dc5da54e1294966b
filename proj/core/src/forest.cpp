#include "alle/forest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <nlohmann/json.hpp>

#include "alle/error.hpp"
#include "alle/parallel.hpp"
#include "alle/random.hpp"

namespace alle {
using nlohmann::json;

std::size_t default_m_try(std::size_t features) noexcept {
  if (features < 3) return 1;
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(features / 3.0)));
}

std::size_t RegressionTree::leaf_of(std::span<const double> x) const noexcept {
  std::size_t at = 0;
  while (!nodes_[at].is_leaf()) {
    const TreeNode& n = nodes_[at];
    at = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
  }
  return at;
}

double RegressionTree::predict(std::span<const double> x) const noexcept {
  return nodes_[leaf_of(x)].value;
}

double Forest::predict(std::span<const double> x) const {
  if (x.size() != features_)
    throw ArgumentError("forest expects " + std::to_string(features_) + " features, got " +
                        std::to_string(x.size()));
  if (trees_.empty()) throw ArgumentError("forest has no trees");
  double sum = 0.0;
  for (const auto& t : trees_) sum += t.predict(x);
  return sum / static_cast<double>(trees_.size());
}

// ---------------------------------------------------------------------------
// Tree growth

class TreeBuilder {
 public:
  TreeBuilder(const FeatureMatrix& x, std::span<const double> y, std::size_t m_try,
              std::size_t min_node_size, Rng& rng)
      : x_(x), y_(y), m_try_(m_try), min_node_size_(min_node_size), rng_(rng) {
    features_.resize(x.cols);
    std::iota(features_.begin(), features_.end(), 0u);
  }

  RegressionTree grow() {
    const std::size_t n = x_.rows;
    RegressionTree tree;
    tree.bootstrap_.resize(n);
    std::uniform_int_distribution<std::uint32_t> draw(0, static_cast<std::uint32_t>(n - 1));
    std::vector<char> in_bag(n, 0);
    for (auto& b : tree.bootstrap_) {
      b = draw(rng_);
      in_bag[b] = 1;
    }
    for (std::uint32_t i = 0; i < n; ++i)
      if (!in_bag[i]) tree.oob_.push_back(i);

    rows_ = tree.bootstrap_;
    nodes_.clear();
    struct Pending {
      std::size_t node, begin, end;
    };
    std::vector<Pending> stack;
    nodes_.emplace_back();
    stack.push_back({0, 0, rows_.size()});
    while (!stack.empty()) {
      Pending task = stack.back();
      stack.pop_back();
      auto [feature, threshold] = best_split(task.begin, task.end);
      TreeNode& node = nodes_[task.node];
      node.count = static_cast<std::uint32_t>(task.end - task.begin);
      node.value = mean_label(task.begin, task.end);
      if (feature < 0) continue;

      auto first = rows_.begin() + static_cast<std::ptrdiff_t>(task.begin);
      auto last = rows_.begin() + static_cast<std::ptrdiff_t>(task.end);
      auto mid = std::stable_partition(first, last, [&](std::uint32_t r) {
        return x_(r, static_cast<std::size_t>(feature)) <= threshold;
      });
      std::size_t split_at = static_cast<std::size_t>(mid - rows_.begin());

      std::size_t left = nodes_.size();
      nodes_.emplace_back();
      nodes_.emplace_back();
      TreeNode& parent = nodes_[task.node];
      parent.feature = feature;
      parent.threshold = threshold;
      parent.left = static_cast<std::uint32_t>(left);
      parent.right = static_cast<std::uint32_t>(left + 1);
      stack.push_back({left + 1, split_at, task.end});
      stack.push_back({left, task.begin, split_at});
    }
    tree.nodes_ = std::move(nodes_);
    return tree;
  }

 private:
  double mean_label(std::size_t begin, std::size_t end) const {
    double sum = 0.0;
    for (std::size_t i = begin; i < end; ++i) sum += y_[rows_[i]];
    return sum / static_cast<double>(end - begin);
  }

  std::pair<std::int32_t, double> best_split(std::size_t begin, std::size_t end) {
    const std::size_t count = end - begin;
    if (count <= min_node_size_ || count < 2) return {-1, 0.0};
    double total = 0.0;
    bool constant = true;
    const double y0 = y_[rows_[begin]];
    for (std::size_t i = begin; i < end; ++i) {
      total += y_[rows_[i]];
      constant = constant && y_[rows_[i]] == y0;
    }
    if (constant) return {-1, 0.0};

    // Partial Fisher-Yates: the first m_try entries become the candidates.
    for (std::size_t j = 0; j < m_try_; ++j) {
      std::uniform_int_distribution<std::size_t> pick(j, features_.size() - 1);
      std::swap(features_[j], features_[pick(rng_)]);
    }
    candidates_.assign(features_.begin(), features_.begin() + static_cast<std::ptrdiff_t>(m_try_));
    std::sort(candidates_.begin(), candidates_.end());

    const double parent_score = total * total / static_cast<double>(count);
    double best_score = parent_score;
    std::int32_t best_feature = -1;
    double best_threshold = 0.0;

    for (std::uint32_t f : candidates_) {
      pairs_.clear();
      for (std::size_t i = begin; i < end; ++i) pairs_.emplace_back(x_(rows_[i], f), y_[rows_[i]]);
      std::sort(pairs_.begin(), pairs_.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      double left_sum = 0.0;
      for (std::size_t i = 0; i + 1 < count; ++i) {
        left_sum += pairs_[i].second;
        if (pairs_[i].first == pairs_[i + 1].first) continue;
        const double n_left = static_cast<double>(i + 1);
        const double n_right = static_cast<double>(count - i - 1);
        const double right_sum = total - left_sum;
        const double score = left_sum * left_sum / n_left + right_sum * right_sum / n_right;
        if (score > best_score) {
          best_score = score;
          best_feature = static_cast<std::int32_t>(f);
          double mid = 0.5 * (pairs_[i].first + pairs_[i + 1].first);
          best_threshold = mid < pairs_[i + 1].first ? mid : pairs_[i].first;
        }
      }
    }
    return {best_feature, best_threshold};
  }

  const FeatureMatrix& x_;
  std::span<const double> y_;
  std::size_t m_try_;
  std::size_t min_node_size_;
  Rng& rng_;
  std::vector<std::uint32_t> features_;
  std::vector<std::uint32_t> candidates_;
  std::vector<std::uint32_t> rows_;
  std::vector<TreeNode> nodes_;
  std::vector<std::pair<double, double>> pairs_;
};

Forest fit_forest(const FeatureMatrix& x, std::span<const double> y, const ForestParams& params) {
  if (x.rows == 0) throw ArgumentError("cannot fit a forest on an empty training set");
  if (x.cols == 0) throw ArgumentError("cannot fit a forest without features");
  if (y.size() != x.rows) throw ArgumentError("label count does not match feature rows");
  if (params.n_trees == 0) throw ArgumentError("forest needs at least one tree");
  if (x.rows > std::numeric_limits<std::uint32_t>::max())
    throw ArgumentError("training set too large");
  const std::size_t m_try = params.m_try == 0 ? default_m_try(x.cols) : params.m_try;
  if (m_try > x.cols)
    throw ArgumentError("m_try " + std::to_string(m_try) + " exceeds feature count " +
                        std::to_string(x.cols));
  for (double v : x.values)
    if (!std::isfinite(v)) throw ArgumentError("non-finite feature value");
  for (double v : y)
    if (!std::isfinite(v)) throw ArgumentError("non-finite label");

  std::vector<RegressionTree> trees(params.n_trees);
  parallel_for(params.n_trees, [&](std::size_t t) {
    Rng rng = make_rng(params.seed, {t});
    TreeBuilder builder(x, y, m_try, params.min_node_size, rng);
    trees[t] = builder.grow();
  });
  return Forest(std::move(trees), x.cols, m_try, params.min_node_size, params.seed, x.rows);
}

// ---------------------------------------------------------------------------
// Out-of-bag evaluation

namespace {

void check_training_match(const Forest& forest, const FeatureMatrix& x, std::span<const double> y) {
  if (x.cols != forest.features())
    throw ArgumentError("training matrix width does not match the forest");
  if (y.size() != x.rows) throw ArgumentError("label count does not match feature rows");
  if (x.rows != forest.training_rows())
    throw ArgumentError("OOB evaluation needs the forest's training set (" +
                        std::to_string(forest.training_rows()) + " rows), got " +
                        std::to_string(x.rows));
}

}  // namespace

std::vector<double> oob_mse_curve(const Forest& forest, const FeatureMatrix& x,
                                  std::span<const double> y) {
  check_training_match(forest, x, y);
  const auto& trees = forest.trees();
  std::vector<std::vector<double>> tree_pred(trees.size());
  parallel_for(trees.size(), [&](std::size_t t) {
    const auto& oob = trees[t].oob();
    tree_pred[t].resize(oob.size());
    for (std::size_t j = 0; j < oob.size(); ++j) tree_pred[t][j] = trees[t].predict(x.row(oob[j]));
  });

  std::vector<double> sum(x.rows, 0.0);
  std::vector<std::uint32_t> votes(x.rows, 0);
  std::vector<double> curve(trees.size());
  double sse = 0.0;
  std::size_t covered = 0;
  for (std::size_t t = 0; t < trees.size(); ++t) {
    const auto& oob = trees[t].oob();
    for (std::size_t j = 0; j < oob.size(); ++j) {
      const std::uint32_t r = oob[j];
      if (votes[r] > 0) {
        double e = sum[r] / votes[r] - y[r];
        sse -= e * e;
      } else {
        ++covered;
      }
      sum[r] += tree_pred[t][j];
      ++votes[r];
      double e = sum[r] / votes[r] - y[r];
      sse += e * e;
    }
    curve[t] = covered > 0 ? std::max(0.0, sse) / static_cast<double>(covered)
                           : std::numeric_limits<double>::quiet_NaN();
  }
  return curve;
}

std::vector<std::size_t> ImportanceReport::ranking_by_magnitude() const {
  std::vector<std::size_t> order(importance.size());
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(importance[a]) > std::abs(importance[b]);
  });
  return order;
}

ImportanceReport permutation_importance(const Forest& forest, const FeatureMatrix& x,
                                        std::span<const double> y, std::uint64_t seed) {
  check_training_match(forest, x, y);
  const auto& trees = forest.trees();
  const std::size_t n_trees = trees.size();
  const std::size_t m = forest.features();
  for (std::size_t t = 0; t < n_trees; ++t)
    if (trees[t].oob().empty())
      throw DegenerateBootstrapError("tree " + std::to_string(t) +
                                     " has no out-of-bag samples; refit with another seed");

  // delta[t * m + k] = MSE_t - MSE_t(k)
  std::vector<double> delta(n_trees * m, 0.0);
  parallel_for(n_trees, [&](std::size_t t) {
    const RegressionTree& tree = trees[t];
    const auto& oob = tree.oob();
    const double n_oob = static_cast<double>(oob.size());
    double base = 0.0;
    for (std::uint32_t r : oob) {
      double e = tree.predict(x.row(r)) - y[r];
      base += e * e;
    }
    base /= n_oob;

    std::vector<double> column(oob.size());
    std::vector<double> buffer(m);
    for (std::size_t k = 0; k < m; ++k) {
      for (std::size_t j = 0; j < oob.size(); ++j) column[j] = x(oob[j], k);
      Rng rng = make_rng(seed, {t, k});
      std::shuffle(column.begin(), column.end(), rng);
      double permuted = 0.0;
      for (std::size_t j = 0; j < oob.size(); ++j) {
        auto row = x.row(oob[j]);
        std::copy(row.begin(), row.end(), buffer.begin());
        buffer[k] = column[j];
        double e = tree.predict(buffer) - y[oob[j]];
        permuted += e * e;
      }
      delta[t * m + k] = base - permuted / n_oob;
    }
  });

  ImportanceReport report;
  report.n_trees = n_trees;
  report.importance.assign(m, 0.0);
  report.mean_delta_mse.assign(m, 0.0);
  report.standard_error.assign(m, 0.0);
  for (std::size_t k = 0; k < m; ++k) report.feature_names.push_back(x.column_name(k));
  const double n = static_cast<double>(n_trees);
  for (std::size_t k = 0; k < m; ++k) {
    double total = 0.0;
    for (std::size_t t = 0; t < n_trees; ++t) total += delta[t * m + k];
    const double mean = total / n;
    double ss = 0.0;
    for (std::size_t t = 0; t < n_trees; ++t) {
      double d = delta[t * m + k] - mean;
      ss += d * d;
    }
    const double se = std::sqrt(ss / n);
    report.mean_delta_mse[k] = mean;
    report.standard_error[k] = se;
    report.importance[k] = se > 0.0 ? total / (n * se) : 0.0;
  }
  return report;
}

// ---------------------------------------------------------------------------
// Serialization

void to_json(json& j, const Forest& forest) {
  json trees = json::array();
  for (const auto& tree : forest.trees()) {
    json nodes = json::array();
    for (const TreeNode& n : tree.nodes())
      nodes.push_back(json::array({n.feature, n.threshold, n.left, n.right, n.value, n.count}));
    trees.push_back(json{{"nodes", std::move(nodes)}, {"oob", tree.oob()}});
  }
  j = json{{"format", "alle-forest"},
           {"version", 1},
           {"features", forest.features()},
           {"m_try", forest.m_try()},
           {"min_node_size", forest.min_node_size()},
           {"seed", forest.seed()},
           {"training_rows", forest.training_rows()},
           {"trees", std::move(trees)}};
}

void from_json(const json& j, Forest& forest) {
  if (j.value("format", std::string()) != "alle-forest" || j.value("version", 0) != 1)
    throw DataError("not a version-1 forest dump");
  const auto features = j.at("features").get<std::size_t>();
  std::vector<RegressionTree> trees;
  for (const auto& t : j.at("trees")) {
    std::vector<TreeNode> nodes;
    for (const auto& rec : t.at("nodes")) {
      TreeNode n;
      n.feature = rec.at(0).get<std::int32_t>();
      n.threshold = rec.at(1).get<double>();
      n.left = rec.at(2).get<std::uint32_t>();
      n.right = rec.at(3).get<std::uint32_t>();
      n.value = rec.at(4).get<double>();
      n.count = rec.at(5).get<std::uint32_t>();
      if (!n.is_leaf() && (static_cast<std::size_t>(n.feature) >= features ||
                           n.left == 0 || n.right == 0))
        throw DataError("corrupt forest node");
      nodes.push_back(n);
    }
    if (nodes.empty()) throw DataError("forest dump contains an empty tree");
    for (const auto& n : nodes)
      if (!n.is_leaf() && (n.left >= nodes.size() || n.right >= nodes.size()))
        throw DataError("forest node child offset out of range");
    trees.emplace_back(std::move(nodes), t.at("oob").get<std::vector<std::uint32_t>>());
  }
  forest = Forest(std::move(trees), features, j.at("m_try").get<std::size_t>(),
                  j.at("min_node_size").get<std::size_t>(), j.at("seed").get<std::uint64_t>(),
                  j.at("training_rows").get<std::size_t>());
}

void to_json(json& j, const ImportanceReport& r) {
  j = json{{"features", r.feature_names},
           {"importance", r.importance},
           {"mean_delta_mse", r.mean_delta_mse},
           {"standard_error", r.standard_error},
           {"n_trees", r.n_trees}};
}

}  // namespace alle
