#include "support.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <deque>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include <unistd.h>

#include <Eigen/Dense>

#include "adsieve/pageload.hpp"

#ifndef ADSIEVE_FIXTURE_DIR
#error "ADSIEVE_FIXTURE_DIR must be defined"
#endif

namespace adsieve::testing {

std::filesystem::path FixturePath(std::string_view name) {
  return std::filesystem::path(ADSIEVE_FIXTURE_DIR) / std::string(name);
}

std::string ReadText(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

PageGraph LoadFixtureGraph(std::string_view name) {
  return BuildGraph(ParseLog(ReadText(FixturePath(name))));
}

std::filesystem::path TempDir(std::string_view tag) {
  static std::atomic<int> counter{0};
  auto dir = std::filesystem::temp_directory_path() /
             ("adsieve-" + std::string(tag) + "-" + std::to_string(::getpid()) + "-" +
              std::to_string(counter++));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::optional<std::string> DiffTrees(const std::filesystem::path& a,
                                     const std::filesystem::path& b) {
  auto list = [](const std::filesystem::path& root) {
    std::set<std::string> files;
    for (const auto& e : std::filesystem::recursive_directory_iterator(root))
      if (e.is_regular_file()) files.insert(std::filesystem::relative(e.path(), root).string());
    return files;
  };
  const auto fa = list(a), fb = list(b);
  for (const auto& f : fa)
    if (!fb.count(f)) return "only in first tree: " + f;
  for (const auto& f : fb)
    if (!fa.count(f)) return "only in second tree: " + f;
  for (const auto& f : fa)
    if (ReadText(a / f) != ReadText(b / f)) return "contents differ: " + f;
  return std::nullopt;
}

Digraph RandomDigraph(Rng& rng, std::size_t max_nodes) {
  Digraph g;
  g.node_count = static_cast<std::size_t>(rng.Between(1, static_cast<std::int64_t>(max_nodes)));
  const auto n = static_cast<std::int64_t>(g.node_count);
  if (n < 2) return g;
  const std::int64_t m = rng.Between(0, 2 * n);
  for (std::int64_t i = 0; i < m; ++i) {
    auto s = static_cast<std::uint32_t>(rng.Below(g.node_count));
    auto d = static_cast<std::uint32_t>(rng.Below(g.node_count));
    if (s == d) continue;
    g.edges.emplace_back(s, d);
    if (rng.Bernoulli(0.1)) g.edges.emplace_back(s, d);
  }
  return g;
}

std::vector<double> KatzBySolve(const Digraph& g, double alpha, double beta) {
  const auto n = static_cast<Eigen::Index>(g.node_count);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (auto [s, d] : g.edges) a(s, d) = 1.0;
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n, n) - alpha * a.transpose();
  Eigen::VectorXd x = m.fullPivLu().solve(Eigen::VectorXd::Constant(n, beta));
  x /= x.norm();
  return {x.data(), x.data() + n};
}

std::vector<std::vector<int>> AllPairsDistances(const Digraph& g) {
  std::vector<std::set<std::uint32_t>> adj(g.node_count);
  for (auto [s, d] : g.edges) {
    if (s == d) continue;
    adj[s].insert(d);
    adj[d].insert(s);
  }
  std::vector<std::vector<int>> dist(g.node_count, std::vector<int>(g.node_count, -1));
  for (std::uint32_t src = 0; src < g.node_count; ++src) {
    std::deque<std::uint32_t> queue{src};
    dist[src][src] = 0;
    while (!queue.empty()) {
      auto u = queue.front();
      queue.pop_front();
      for (auto w : adj[u]) {
        if (dist[src][w] >= 0) continue;
        dist[src][w] = dist[src][u] + 1;
        queue.push_back(w);
      }
    }
  }
  return dist;
}

double ClosenessFromDistances(const std::vector<int>& dist) {
  long reachable = 0, total = 0;
  for (int d : dist) {
    if (d <= 0) continue;
    ++reachable;
    total += d;
  }
  return total == 0 ? 0.0 : static_cast<double>(reachable) / static_cast<double>(total);
}

double EccentricityFromDistances(const std::vector<int>& dist) {
  return static_cast<double>(*std::max_element(dist.begin(), dist.end()));
}

double MeanNeighbourDegree(const Digraph& g, std::uint32_t v) {
  std::vector<std::set<std::uint32_t>> adj(g.node_count);
  for (auto [s, d] : g.edges) {
    if (s == d) continue;
    adj[s].insert(d);
    adj[d].insert(s);
  }
  if (adj[v].empty()) return 0.0;
  double sum = 0;
  for (auto w : adj[v]) sum += static_cast<double>(adj[w].size());
  return sum / static_cast<double>(adj[v].size());
}

FeatureMatrix RandomMatrix(Rng& rng, std::size_t max_rows, std::size_t max_cols) {
  FeatureMatrix m;
  m.rows = static_cast<std::size_t>(rng.Between(2, static_cast<std::int64_t>(max_rows)));
  m.cols = static_cast<std::size_t>(rng.Between(1, static_cast<std::int64_t>(max_cols)));
  // Quarter steps keep midpoints exact, small ranges force ties.
  const std::int64_t levels = rng.Between(2, 12);
  for (std::size_t i = 0; i < m.rows * m.cols; ++i)
    m.x.push_back(static_cast<double>(rng.Between(0, levels)) / 4.0);
  for (std::size_t r = 0; r < m.rows; ++r) m.y.push_back(rng.Bernoulli(0.5) ? 1 : 0);
  m.y[0] = 0;
  m.y[1] = 1;
  return m;
}

namespace {

// Exact rational with positive denominator.
struct Ratio {
  long long num;
  long long den;
  bool operator>(const Ratio& o) const { return num * o.den > o.num * den; }
};

// Sum over children of (squared class counts / child size); larger is purer.
Ratio Purity(const std::vector<std::pair<long long, long long>>& children) {
  Ratio r{0, 1};
  for (auto [c0, c1] : children) {
    const long long n = c0 + c1;
    r = {r.num * n + (c0 * c0 + c1 * c1) * r.den, r.den * n};
    const long long g = std::gcd(r.num, r.den);
    r.num /= g;
    r.den /= g;
  }
  return r;
}

struct OracleGrower {
  const FeatureMatrix& data;
  const std::vector<std::vector<std::size_t>>& subsets;
  std::size_t next = 0;
  std::vector<TreeNode> nodes;

  int Grow(const std::vector<std::uint32_t>& sample) {
    const int id = static_cast<int>(nodes.size());
    nodes.emplace_back();
    long long c[2] = {0, 0};
    for (auto r : sample) ++c[data.y[r]];
    nodes[id].count[0] = static_cast<std::uint32_t>(c[0]);
    nodes[id].count[1] = static_cast<std::uint32_t>(c[1]);
    if (sample.size() < 2 || c[0] == 0 || c[1] == 0) return id;

    const auto& features = subsets.at(next++);
    Ratio best = Purity({{c[0], c[1]}});
    int best_feature = -1;
    double best_threshold = 0;
    for (std::size_t f : features) {
      std::set<double> values;
      for (auto r : sample) values.insert(data.at(r, f));
      for (auto it = values.begin(); std::next(it) != values.end(); ++it) {
        const double threshold = (*it + *std::next(it)) / 2;
        long long l[2] = {0, 0}, rr[2] = {0, 0};
        for (auto r : sample) ++(data.at(r, f) <= threshold ? l : rr)[data.y[r]];
        Ratio score = Purity({{l[0], l[1]}, {rr[0], rr[1]}});
        if (score > best) {
          best = score;
          best_feature = static_cast<int>(f);
          best_threshold = threshold;
        }
      }
    }
    if (best_feature < 0) return id;
    std::vector<std::uint32_t> left, right;
    for (auto r : sample)
      (data.at(r, static_cast<std::size_t>(best_feature)) <= best_threshold ? left : right)
          .push_back(r);
    nodes[id].feature = best_feature;
    nodes[id].threshold = best_threshold;
    const int l = Grow(left);
    nodes[id].left = l;
    const int r = Grow(right);
    nodes[id].right = r;
    return id;
  }
};

}  // namespace

DecisionTree OracleTree(const FeatureMatrix& data, const std::vector<std::uint32_t>& sample,
                        const std::vector<std::vector<std::size_t>>& subsets,
                        std::size_t* subsets_used) {
  OracleGrower grower{data, subsets};
  grower.Grow(sample);
  if (subsets_used) *subsets_used = grower.next;
  return DecisionTree(std::move(grower.nodes));
}

int OraclePredict(const DecisionTree& tree, std::span<const double> row) {
  const auto& nodes = tree.nodes();
  int id = 0;
  while (nodes[id].feature >= 0)
    id = row[nodes[id].feature] <= nodes[id].threshold ? nodes[id].left : nodes[id].right;
  return nodes[id].count[1] > nodes[id].count[0] ? 1 : 0;
}

std::vector<ConformanceRow> LoadConformanceTable() {
  std::istringstream in(ReadText(FixturePath("filter_conformance.tsv")));
  std::vector<ConformanceRow> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cols;
    std::stringstream fields(line);
    for (std::string col; std::getline(fields, col, '\t');) cols.push_back(col);
    if (cols.size() != 6) throw std::runtime_error("bad conformance line " + std::to_string(line_no));
    ConformanceRow row;
    row.line = line_no;
    for (std::size_t pos = 0;;) {
      std::size_t end = cols[0].find(" ;; ", pos);
      row.rules.push_back(cols[0].substr(pos, end == std::string::npos ? end : end - pos));
      if (end == std::string::npos) break;
      pos = end + 4;
    }
    row.url = cols[1];
    row.context.page_host = cols[2];
    row.context.is_third_party = cols[3] == "1";
    auto kind = ParseResourceKind(cols[4]);
    if (!kind) throw std::runtime_error("bad resource kind " + cols[4]);
    row.context.resource_kind = *kind;
    row.blocked = cols[5] == "1";
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace adsieve::testing
