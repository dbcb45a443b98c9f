#ifndef ADSIEVE_FOREST_HPP_
#define ADSIEVE_FOREST_HPP_

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "adsieve/features.hpp"
#include "adsieve/filter.hpp"
#include "adsieve/rng.hpp"

namespace adsieve {

// Dense row-major training matrix; y is 1 for AD, 0 for NON-AD.
struct FeatureMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> x;
  std::vector<std::uint8_t> y;

  double at(std::size_t r, std::size_t c) const { return x[r * cols + c]; }
  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(x).subspan(r * cols, cols);
  }

  static FeatureMatrix FromDataset(const Dataset& data);
  static FeatureMatrix FromDataset(const Dataset& data, std::span<const std::size_t> row_ids);
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0;  // go left when value <= threshold
  int left = -1;
  int right = -1;
  std::uint32_t count[2] = {0, 0};  // NON-AD, AD training samples

  bool is_leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

class DecisionTree {
 public:
  DecisionTree() = default;
  explicit DecisionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}

  // 1 (AD) when the leaf holds strictly more AD samples.
  int Predict(std::span<const double> row) const;
  const std::vector<TreeNode>& nodes() const { return nodes_; }
  std::size_t depth() const;

  bool operator==(const DecisionTree&) const = default;

 private:
  std::vector<TreeNode> nodes_;
};

// Returns the feature subset for the next splittable node. Called once per
// node that holds more than one sample of both classes, in preorder.
using FeatureSampler = std::function<std::vector<std::size_t>()>;

// Greedy CART growth with Gini impurity on the (multi)set `sample` of row
// indices. A node becomes a leaf when pure, when it has one sample, or when
// no candidate split strictly lowers impurity. Candidate thresholds are
// midpoints between adjacent distinct values; ties keep the first
// candidate in (subset order, ascending threshold).
DecisionTree GrowTree(const FeatureMatrix& data, std::span<const std::uint32_t> sample,
                      const FeatureSampler& sampler);

// Random draws made while training one tree.
struct TreeTrace {
  std::vector<std::uint32_t> bootstrap;
  std::vector<std::vector<std::size_t>> subsets;  // preorder
};

// int(ln(M) + 1)
int DefaultFeaturesPerSplit(std::size_t feature_count);

// `k` distinct features out of `m` by partial Fisher-Yates.
std::vector<std::size_t> SampleFeatures(Rng& rng, std::size_t m, std::size_t k);

// Bootstrap resample of size n followed by tree growth, all randomness
// from `tree_seed`.
DecisionTree TrainTree(const FeatureMatrix& data, std::uint64_t tree_seed,
                       std::size_t features_per_split, TreeTrace* trace = nullptr);

struct ForestConfig {
  int n_trees = 10;
  int features_per_split = 0;  // 0 = int(ln M + 1)
  bool tie_to_ad = false;      // exactly half the votes
  int workers = 1;
};

struct Prediction {
  Label label = Label::kNonAd;
  double vote_fraction = 0;
};

class ForestModel {
 public:
  ForestModel() = default;

  // Tree i draws from DeriveSeed(seed, i), so worker count never changes
  // the result. Throws TrainingError on single-class input.
  static ForestModel Train(const FeatureMatrix& data, const ForestConfig& config,
                           std::uint64_t seed);
  static ForestModel Train(const Dataset& data, const ForestConfig& config,
                           std::uint64_t seed);

  Prediction Predict(std::span<const double> row) const;
  Prediction FromVotes(int ad_votes) const;

  const std::vector<DecisionTree>& trees() const { return trees_; }
  const ForestConfig& config() const { return config_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t feature_count() const { return feature_names_.size(); }
  int features_per_split() const { return features_per_split_; }
  const std::vector<std::string>& feature_names() const { return feature_names_; }
  const std::string& schema_version() const { return schema_version_; }

  std::string ToJson(std::string_view config_hash = {}) const;
  static ForestModel FromJson(std::string_view text);

  bool operator==(const ForestModel& o) const {
    return trees_ == o.trees_ && seed_ == o.seed_ && feature_names_ == o.feature_names_ &&
           features_per_split_ == o.features_per_split_ && config_.n_trees == o.config_.n_trees &&
           config_.tie_to_ad == o.config_.tie_to_ad;
  }

 private:
  std::vector<DecisionTree> trees_;
  ForestConfig config_;
  std::uint64_t seed_ = 0;
  int features_per_split_ = 0;
  std::vector<std::string> feature_names_;
  std::string schema_version_;
};

// Runs body(i) for i in [0, n) on up to `workers` threads.
void ParallelFor(std::size_t n, int workers, const std::function<void(std::size_t)>& body);

}  // namespace adsieve

#endif  // ADSIEVE_FOREST_HPP_
