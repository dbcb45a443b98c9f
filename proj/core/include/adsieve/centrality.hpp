#ifndef ADSIEVE_CENTRALITY_HPP_
#define ADSIEVE_CENTRALITY_HPP_

#include <cstdint>
#include <utility>
#include <vector>

#include "adsieve/graph.hpp"

namespace adsieve {

// Bare directed multigraph used by the connectivity measures.
struct Digraph {
  std::size_t node_count = 0;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;

  static Digraph FromPage(const PageGraph& graph);
};

struct KatzOptions {
  double alpha = 0.05;
  double beta = 1.0;
  double tolerance = 1e-9;  // L-infinity change between iterates
  int max_iterations = 1000;
  bool normalize = true;    // L2
};

// Solves x = alpha * A^T x + beta * 1 by fixed-point iteration, with
// parallel edges collapsed to weight 1. Throws CentralityError when the
// iteration does not settle.
std::vector<double> KatzCentrality(const Digraph& g, const KatzOptions& options = {});

// Undirected, simple view: distinct neighbours, no self loops.
std::vector<std::vector<std::uint32_t>> UndirectedNeighbours(const Digraph& g);

// R / sum of shortest distances over the R nodes reachable from v
// (undirected); 0 when nothing is reachable.
double ClosenessCentrality(const std::vector<std::vector<std::uint32_t>>& adj,
                           std::uint32_t v);
// Largest shortest-path distance from v within its undirected component.
double Eccentricity(const std::vector<std::vector<std::uint32_t>>& adj, std::uint32_t v);
// Mean degree of v's distinct undirected neighbours; 0 without neighbours.
double MeanDegreeConnectivity(const std::vector<std::vector<std::uint32_t>>& adj,
                              std::uint32_t v);

// Nodes reachable from v along directed edges, v excluded.
std::size_t DescendantCount(const Digraph& g, std::uint32_t v);

// Per-graph cache shared by every node featurization of that graph.
struct ConnectivityTable {
  std::vector<double> katz;
  std::vector<double> closeness;
  std::vector<double> eccentricity;
  std::vector<double> mean_degree_connectivity;
};

ConnectivityTable ComputeConnectivity(const Digraph& g, const KatzOptions& options = {});

}  // namespace adsieve

#endif  // ADSIEVE_CENTRALITY_HPP_
