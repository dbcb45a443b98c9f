#include "adsieve/centrality.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "adsieve/error.hpp"

namespace adsieve {

namespace {

// BFS distances from v; -1 for unreachable.
std::vector<int> Distances(const std::vector<std::vector<std::uint32_t>>& adj,
                           std::uint32_t v) {
  std::vector<int> dist(adj.size(), -1);
  std::queue<std::uint32_t> frontier;
  dist[v] = 0;
  frontier.push(v);
  while (!frontier.empty()) {
    std::uint32_t u = frontier.front();
    frontier.pop();
    for (std::uint32_t w : adj[u]) {
      if (dist[w] >= 0) continue;
      dist[w] = dist[u] + 1;
      frontier.push(w);
    }
  }
  return dist;
}

}  // namespace

Digraph Digraph::FromPage(const PageGraph& graph) {
  Digraph g;
  g.node_count = graph.size();
  g.edges.reserve(graph.edges().size());
  for (const Edge& e : graph.edges()) g.edges.emplace_back(e.src, e.dst);
  return g;
}

std::vector<double> KatzCentrality(const Digraph& g, const KatzOptions& options) {
  const std::size_t n = g.node_count;
  if (n == 0) throw CentralityError("empty graph");
  // Collapse parallel edges; predecessors lists drive x_i = a*sum x_j + b.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> simple = g.edges;
  std::sort(simple.begin(), simple.end());
  simple.erase(std::unique(simple.begin(), simple.end()), simple.end());
  std::vector<std::vector<std::uint32_t>> preds(n);
  for (auto [s, d] : simple) preds[d].push_back(s);

  std::vector<double> x(n, 0.0), next(n, 0.0);
  bool converged = false;
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    double delta = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double sum = 0.0;
      for (std::uint32_t j : preds[i]) sum += x[j];
      next[i] = options.alpha * sum + options.beta;
      delta = std::max(delta, std::abs(next[i] - x[i]));
    }
    x.swap(next);
    if (!std::isfinite(delta)) break;
    if (delta < options.tolerance) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw CentralityError("Katz iteration did not converge within " +
                          std::to_string(options.max_iterations) +
                          " iterations; use a smaller alpha");
  if (options.normalize) {
    double norm = 0.0;
    for (double v : x) norm += v * v;
    norm = std::sqrt(norm);
    if (norm > 0) {
      for (double& v : x) v /= norm;
    }
  }
  return x;
}

std::vector<std::vector<std::uint32_t>> UndirectedNeighbours(const Digraph& g) {
  std::vector<std::vector<std::uint32_t>> adj(g.node_count);
  for (auto [s, d] : g.edges) {
    if (s == d) continue;
    adj[s].push_back(d);
    adj[d].push_back(s);
  }
  for (auto& list : adj) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
  return adj;
}

double ClosenessCentrality(const std::vector<std::vector<std::uint32_t>>& adj,
                           std::uint32_t v) {
  const auto dist = Distances(adj, v);
  long reachable = 0, total = 0;
  for (std::size_t u = 0; u < dist.size(); ++u) {
    if (u == v || dist[u] < 0) continue;
    ++reachable;
    total += dist[u];
  }
  return reachable == 0 ? 0.0 : static_cast<double>(reachable) / static_cast<double>(total);
}

double Eccentricity(const std::vector<std::vector<std::uint32_t>>& adj, std::uint32_t v) {
  const auto dist = Distances(adj, v);
  return static_cast<double>(std::max(0, *std::max_element(dist.begin(), dist.end())));
}

double MeanDegreeConnectivity(const std::vector<std::vector<std::uint32_t>>& adj,
                              std::uint32_t v) {
  if (adj[v].empty()) return 0.0;
  double sum = 0.0;
  for (std::uint32_t w : adj[v]) sum += static_cast<double>(adj[w].size());
  return sum / static_cast<double>(adj[v].size());
}

std::size_t DescendantCount(const Digraph& g, std::uint32_t v) {
  std::vector<std::vector<std::uint32_t>> out(g.node_count);
  for (auto [s, d] : g.edges) out[s].push_back(d);
  std::vector<char> seen(g.node_count, 0);
  std::vector<std::uint32_t> stack{v};
  seen[v] = 1;
  std::size_t count = 0;
  while (!stack.empty()) {
    std::uint32_t u = stack.back();
    stack.pop_back();
    for (std::uint32_t w : out[u]) {
      if (seen[w]) continue;
      seen[w] = 1;
      ++count;
      stack.push_back(w);
    }
  }
  return count;
}

ConnectivityTable ComputeConnectivity(const Digraph& g, const KatzOptions& options) {
  ConnectivityTable table;
  if (g.node_count == 0) return table;
  table.katz = KatzCentrality(g, options);
  const auto adj = UndirectedNeighbours(g);
  table.closeness.resize(g.node_count);
  table.eccentricity.resize(g.node_count);
  table.mean_degree_connectivity.resize(g.node_count);
  for (std::uint32_t v = 0; v < g.node_count; ++v) {
    const auto dist = Distances(adj, v);
    long reachable = 0, total = 0;
    int farthest = 0;
    for (std::size_t u = 0; u < dist.size(); ++u) {
      if (u == v || dist[u] < 0) continue;
      ++reachable;
      total += dist[u];
      farthest = std::max(farthest, dist[u]);
    }
    table.closeness[v] =
        reachable == 0 ? 0.0 : static_cast<double>(reachable) / static_cast<double>(total);
    table.eccentricity[v] = farthest;
    table.mean_degree_connectivity[v] = MeanDegreeConnectivity(adj, v);
  }
  return table;
}

}  // namespace adsieve
