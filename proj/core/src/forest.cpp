#include "adsieve/forest.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "adsieve/error.hpp"
#include "json.hpp"

namespace adsieve {
namespace {

__extension__ typedef __int128 Wide;

// Weighted Gini of a split is minimal when
//   (a^2 + b^2) / nL + (c^2 + d^2) / nR
// is maximal. Kept as an exact fraction num / den.
struct SplitScore {
  Wide num = 0;
  Wide den = 1;
};

bool Better(const SplitScore& a, const SplitScore& b) {
  return a.num * b.den > b.num * a.den;
}

SplitScore Score(std::uint64_t l0, std::uint64_t l1, std::uint64_t r0, std::uint64_t r1) {
  const Wide nl = l0 + l1;
  const Wide nr = r0 + r1;
  const Wide a = Wide(l0) * l0 + Wide(l1) * l1;
  const Wide c = Wide(r0) * r0 + Wide(r1) * r1;
  return {a * nr + c * nl, nl * nr};
}

double Midpoint(double lo, double hi) {
  double mid = lo + (hi - lo) / 2;
  if (!(mid < hi)) mid = lo;
  return mid;
}

struct Split {
  int feature = -1;
  double threshold = 0;
  SplitScore score;
};

Split BestSplit(const FeatureMatrix& data, const std::vector<std::uint32_t>& sample,
                const std::vector<std::size_t>& features, std::uint64_t n0, std::uint64_t n1) {
  Split best;
  // Parent score; a split must beat it strictly.
  const std::uint64_t n = n0 + n1;
  best.score = {Wide(n0) * n0 + Wide(n1) * n1, Wide(n)};
  std::vector<std::pair<double, std::uint8_t>> column(sample.size());
  for (std::size_t f : features) {
    for (std::size_t i = 0; i < sample.size(); ++i) {
      column[i] = {data.at(sample[i], f), data.y[sample[i]]};
    }
    std::sort(column.begin(), column.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::uint64_t l[2] = {0, 0};
    for (std::size_t i = 0; i + 1 < column.size(); ++i) {
      ++l[column[i].second];
      if (!(column[i].first < column[i + 1].first)) continue;
      SplitScore s = Score(l[0], l[1], n0 - l[0], n1 - l[1]);
      if (Better(s, best.score)) {
        best.feature = static_cast<int>(f);
        best.threshold = Midpoint(column[i].first, column[i + 1].first);
        best.score = s;
      }
    }
  }
  return best;
}

}  // namespace

FeatureMatrix FeatureMatrix::FromDataset(const Dataset& data) {
  FeatureMatrix m;
  m.rows = data.rows.size();
  m.cols = data.schema.size();
  m.x.reserve(m.rows * m.cols);
  m.y.reserve(m.rows);
  for (const DatasetRow& row : data.rows) {
    if (row.values.size() != m.cols) {
      throw DatasetError("row width " + std::to_string(row.values.size()) +
                         " does not match schema width " + std::to_string(m.cols));
    }
    m.x.insert(m.x.end(), row.values.begin(), row.values.end());
    m.y.push_back(row.label == Label::kAd ? 1 : 0);
  }
  return m;
}

FeatureMatrix FeatureMatrix::FromDataset(const Dataset& data,
                                         std::span<const std::size_t> row_ids) {
  FeatureMatrix m;
  m.rows = row_ids.size();
  m.cols = data.schema.size();
  m.x.reserve(m.rows * m.cols);
  for (std::size_t id : row_ids) {
    const DatasetRow& row = data.rows.at(id);
    if (row.values.size() != m.cols) throw DatasetError("row width does not match schema");
    m.x.insert(m.x.end(), row.values.begin(), row.values.end());
    m.y.push_back(row.label == Label::kAd ? 1 : 0);
  }
  return m;
}

int DecisionTree::Predict(std::span<const double> row) const {
  if (nodes_.empty()) return 0;
  const TreeNode* node = &nodes_[0];
  while (!node->is_leaf()) {
    node = &nodes_[row[node->feature] <= node->threshold ? node->left : node->right];
  }
  return node->count[1] > node->count[0] ? 1 : 0;
}

std::size_t DecisionTree::depth() const {
  if (nodes_.empty()) return 0;
  std::size_t best = 0;
  std::vector<std::pair<int, std::size_t>> stack{{0, 0}};
  while (!stack.empty()) {
    auto [id, d] = stack.back();
    stack.pop_back();
    best = std::max(best, d);
    if (!nodes_[id].is_leaf()) {
      stack.push_back({nodes_[id].left, d + 1});
      stack.push_back({nodes_[id].right, d + 1});
    }
  }
  return best;
}

DecisionTree GrowTree(const FeatureMatrix& data, std::span<const std::uint32_t> sample,
                      const FeatureSampler& sampler) {
  struct Pending {
    int parent;
    bool left;
    std::vector<std::uint32_t> sample;
  };
  std::vector<TreeNode> nodes;
  std::vector<Pending> stack;
  stack.push_back({-1, false, {sample.begin(), sample.end()}});
  while (!stack.empty()) {
    Pending p = std::move(stack.back());
    stack.pop_back();
    const int id = static_cast<int>(nodes.size());
    if (p.parent >= 0) (p.left ? nodes[p.parent].left : nodes[p.parent].right) = id;
    TreeNode node;
    for (std::uint32_t r : p.sample) ++node.count[data.y[r]];
    nodes.push_back(node);
    if (p.sample.size() <= 1 || node.count[0] == 0 || node.count[1] == 0) continue;

    Split split = BestSplit(data, p.sample, sampler(), node.count[0], node.count[1]);
    if (split.feature < 0) continue;
    nodes[id].feature = split.feature;
    nodes[id].threshold = split.threshold;
    std::vector<std::uint32_t> left, right;
    for (std::uint32_t r : p.sample) {
      (data.at(r, split.feature) <= split.threshold ? left : right).push_back(r);
    }
    stack.push_back({id, false, std::move(right)});
    stack.push_back({id, true, std::move(left)});
  }
  return DecisionTree(std::move(nodes));
}

int DefaultFeaturesPerSplit(std::size_t feature_count) {
  if (feature_count == 0) return 0;
  return static_cast<int>(std::log(static_cast<double>(feature_count)) + 1);
}

std::vector<std::size_t> SampleFeatures(Rng& rng, std::size_t m, std::size_t k) {
  k = std::min(k, m);
  std::vector<std::size_t> perm(m);
  for (std::size_t i = 0; i < m; ++i) perm[i] = i;
  for (std::size_t i = 0; i < k; ++i) {
    std::swap(perm[i], perm[i + rng.Below(m - i)]);
  }
  perm.resize(k);
  return perm;
}

DecisionTree TrainTree(const FeatureMatrix& data, std::uint64_t tree_seed,
                       std::size_t features_per_split, TreeTrace* trace) {
  Rng rng(tree_seed);
  std::vector<std::uint32_t> bootstrap(data.rows);
  for (auto& r : bootstrap) r = static_cast<std::uint32_t>(rng.Below(data.rows));
  if (trace) trace->bootstrap = bootstrap;
  FeatureSampler sampler = [&]() {
    auto subset = SampleFeatures(rng, data.cols, features_per_split);
    if (trace) trace->subsets.push_back(subset);
    return subset;
  };
  return GrowTree(data, bootstrap, sampler);
}

void ParallelFor(std::size_t n, int workers, const std::function<void(std::size_t)>& body) {
  const std::size_t threads =
      std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, workers)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(mu);
          if (!failure) failure = std::current_exception();
          next = n;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

ForestModel ForestModel::Train(const FeatureMatrix& data, const ForestConfig& config,
                               std::uint64_t seed) {
  if (config.n_trees < 1) throw ConfigError("n_trees must be at least 1");
  if (data.rows == 0) throw TrainingError("empty training set");
  if (data.cols == 0) throw TrainingError("no feature columns");
  if (data.rows > 0xffffffffULL) throw TrainingError("too many rows");
  std::size_t ad = 0;
  for (auto y : data.y) ad += y;
  if (ad == 0 || ad == data.rows) {
    throw TrainingError("single-class input (only " +
                        std::string(ad == 0 ? "NON-AD" : "AD") + " rows)");
  }
  ForestModel model;
  model.config_ = config;
  model.seed_ = seed;
  int k = config.features_per_split > 0 ? config.features_per_split
                                        : DefaultFeaturesPerSplit(data.cols);
  model.features_per_split_ = std::min<int>(k, static_cast<int>(data.cols));
  model.config_.features_per_split = model.features_per_split_;
  for (std::size_t i = 0; i < data.cols; ++i) model.feature_names_.push_back("f" + std::to_string(i));
  model.trees_.resize(static_cast<std::size_t>(config.n_trees));
  ParallelFor(model.trees_.size(), config.workers, [&](std::size_t t) {
    model.trees_[t] = TrainTree(data, DeriveSeed(seed, t), model.features_per_split_);
  });
  return model;
}

ForestModel ForestModel::Train(const Dataset& data, const ForestConfig& config,
                               std::uint64_t seed) {
  ForestModel model = Train(FeatureMatrix::FromDataset(data), config, seed);
  for (std::size_t i = 0; i < data.schema.size(); ++i) {
    model.feature_names_[i] = data.schema.features[i].name;
  }
  model.schema_version_ = data.schema.version;
  return model;
}

Prediction ForestModel::FromVotes(int ad_votes) const {
  const int n = static_cast<int>(trees_.size());
  Prediction p;
  p.vote_fraction = n == 0 ? 0.0 : static_cast<double>(ad_votes) / n;
  const bool ad = 2 * ad_votes > n || (config_.tie_to_ad && 2 * ad_votes == n);
  p.label = ad ? Label::kAd : Label::kNonAd;
  return p;
}

Prediction ForestModel::Predict(std::span<const double> row) const {
  if (row.size() != feature_count()) {
    throw DatasetError("row has " + std::to_string(row.size()) + " features, model expects " +
                       std::to_string(feature_count()));
  }
  int votes = 0;
  for (const DecisionTree& tree : trees_) votes += tree.Predict(row);
  return FromVotes(votes);
}

std::string ForestModel::ToJson(std::string_view config_hash) const {
  nlohmann::ordered_json j;
  j["format"] = "adsieve-forest";
  j["version"] = 1;
  j["schema_version"] = schema_version_;
  j["feature_names"] = feature_names_;
  j["n_trees"] = config_.n_trees;
  j["features_per_split"] = features_per_split_;
  j["tie_to_ad"] = config_.tie_to_ad;
  j["seed"] = seed_;
  if (!config_hash.empty()) j["config_hash"] = config_hash;
  auto& trees = j["trees"] = nlohmann::ordered_json::array();
  for (const DecisionTree& tree : trees_) {
    auto nodes = nlohmann::ordered_json::array();
    for (const TreeNode& n : tree.nodes()) {
      nodes.push_back({n.feature, n.threshold, n.left, n.right, n.count[0], n.count[1]});
    }
    trees.push_back(std::move(nodes));
  }
  return j.dump();
}

ForestModel ForestModel::FromJson(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("model: ") + e.what());
  }
  try {
    if (j.at("format") != "adsieve-forest") throw DataError("model: unknown format");
    ForestModel m;
    m.schema_version_ = j.at("schema_version").get<std::string>();
    m.feature_names_ = j.at("feature_names").get<std::vector<std::string>>();
    m.config_.n_trees = j.at("n_trees").get<int>();
    m.features_per_split_ = j.at("features_per_split").get<int>();
    m.config_.features_per_split = m.features_per_split_;
    m.config_.tie_to_ad = j.at("tie_to_ad").get<bool>();
    m.seed_ = j.at("seed").get<std::uint64_t>();
    const int width = static_cast<int>(m.feature_names_.size());
    for (const auto& jt : j.at("trees")) {
      std::vector<TreeNode> nodes;
      for (const auto& jn : jt) {
        TreeNode n;
        n.feature = jn.at(0).get<int>();
        n.threshold = jn.at(1).get<double>();
        n.left = jn.at(2).get<int>();
        n.right = jn.at(3).get<int>();
        n.count[0] = jn.at(4).get<std::uint32_t>();
        n.count[1] = jn.at(5).get<std::uint32_t>();
        nodes.push_back(n);
      }
      const int size = static_cast<int>(nodes.size());
      for (int i = 0; i < size; ++i) {
        const TreeNode& n = nodes[i];
        if (n.is_leaf()) continue;
        // Children always follow their parent in preorder.
        if (n.feature >= width || n.left <= i || n.left >= size || n.right <= i ||
            n.right >= size) {
          throw DataError("model: tree node out of range");
        }
      }
      m.trees_.emplace_back(std::move(nodes));
    }
    if (static_cast<int>(m.trees_.size()) != m.config_.n_trees) {
      throw DataError("model: tree count mismatch");
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("model: ") + e.what());
  }
}

}  // namespace adsieve
