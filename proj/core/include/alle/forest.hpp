#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "alle/matrix.hpp"

namespace alle {

/// One node of a regression tree. Leaves have feature < 0.
struct TreeNode {
  std::int32_t feature = -1;
  double threshold = 0.0;  ///< go left when x[feature] <= threshold
  std::uint32_t left = 0;
  std::uint32_t right = 0;
  double value = 0.0;      ///< mean training label (leaves)
  std::uint32_t count = 0; ///< in-bag samples that reached the node

  bool is_leaf() const noexcept { return feature < 0; }
};

/// CART regression tree grown on one bootstrap sample.
class RegressionTree {
 public:
  RegressionTree() = default;
  RegressionTree(std::vector<TreeNode> nodes, std::vector<std::uint32_t> oob)
      : nodes_(std::move(nodes)), oob_(std::move(oob)) {}

  double predict(std::span<const double> x) const noexcept;
  /// Index of the leaf reached by x.
  std::size_t leaf_of(std::span<const double> x) const noexcept;

  const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
  /// Training rows drawn into the bootstrap (with repeats). Empty after reload.
  const std::vector<std::uint32_t>& bootstrap() const noexcept { return bootstrap_; }
  /// Training rows never drawn, sorted ascending.
  const std::vector<std::uint32_t>& oob() const noexcept { return oob_; }

 private:
  friend class TreeBuilder;
  std::vector<TreeNode> nodes_;
  std::vector<std::uint32_t> bootstrap_;
  std::vector<std::uint32_t> oob_;
};

struct ForestParams {
  std::size_t n_trees = 500;
  std::size_t m_try = 0;  ///< 0 selects default_m_try(M)
  std::size_t min_node_size = 5;
  std::uint64_t seed = 0;
};

/// max(1, round(M / 3)); M < 3 gives 1.
std::size_t default_m_try(std::size_t features) noexcept;

class Forest {
 public:
  Forest() = default;
  Forest(std::vector<RegressionTree> trees, std::size_t features, std::size_t m_try,
         std::size_t min_node_size, std::uint64_t seed, std::size_t training_rows)
      : trees_(std::move(trees)),
        features_(features),
        m_try_(m_try),
        min_node_size_(min_node_size),
        seed_(seed),
        training_rows_(training_rows) {}

  /// Mean of the tree predictions. Throws ArgumentError on a width mismatch.
  double predict(std::span<const double> x) const;

  const std::vector<RegressionTree>& trees() const noexcept { return trees_; }
  std::size_t size() const noexcept { return trees_.size(); }
  std::size_t features() const noexcept { return features_; }
  std::size_t m_try() const noexcept { return m_try_; }
  std::size_t min_node_size() const noexcept { return min_node_size_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::size_t training_rows() const noexcept { return training_rows_; }

 private:
  std::vector<RegressionTree> trees_;
  std::size_t features_ = 0;
  std::size_t m_try_ = 1;
  std::size_t min_node_size_ = 5;
  std::uint64_t seed_ = 0;
  std::size_t training_rows_ = 0;
};

/// Grows params.n_trees trees, each on its own bootstrap of size n. Tree i
/// draws from a stream seeded by (seed, i), so the forest is identical for any
/// worker count. At each node m_try features are drawn without replacement
/// and the split minimizing the children's summed squared error is taken.
Forest fit_forest(const FeatureMatrix& x, std::span<const double> y, const ForestParams& params);

/// Entry t is the OOB mean squared residual of the first t+1 trees. Samples
/// not yet out-of-bag for any of those trees are skipped; NaN when none is.
std::vector<double> oob_mse_curve(const Forest& forest, const FeatureMatrix& x,
                                  std::span<const double> y);

struct ImportanceReport {
  std::vector<double> importance;      ///< I_k
  std::vector<double> mean_delta_mse;  ///< mean_i (MSE_i - MSE_i(k))
  std::vector<double> standard_error;  ///< SE_k
  std::size_t n_trees = 0;
  std::vector<std::string> feature_names;

  /// Feature indices sorted by |I_k| descending, ties by index.
  std::vector<std::size_t> ranking_by_magnitude() const;
};

/// Permutation importance on each tree's OOB rows. The sign follows
/// dMSE = MSE_i - MSE_i(k), so an informative feature scores negative.
/// Throws DegenerateBootstrapError when a tree has no OOB rows.
ImportanceReport permutation_importance(const Forest& forest, const FeatureMatrix& x,
                                        std::span<const double> y, std::uint64_t seed);

void to_json(nlohmann::json& j, const Forest& forest);
void from_json(const nlohmann::json& j, Forest& forest);
void to_json(nlohmann::json& j, const ImportanceReport& report);

}  // namespace alle
