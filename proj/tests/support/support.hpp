#ifndef ADSIEVE_TESTS_SUPPORT_HPP_
#define ADSIEVE_TESTS_SUPPORT_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "adsieve/centrality.hpp"
#include "adsieve/filter.hpp"
#include "adsieve/forest.hpp"
#include "adsieve/graph.hpp"
#include "adsieve/rng.hpp"

namespace adsieve::testing {

std::filesystem::path FixturePath(std::string_view name);
std::string ReadText(const std::filesystem::path& path);
PageGraph LoadFixtureGraph(std::string_view name);

// Fresh empty directory under the system temp dir.
std::filesystem::path TempDir(std::string_view tag);

// First difference between two directory trees, or nullopt when every
// file is byte-identical and both trees hold the same paths.
std::optional<std::string> DiffTrees(const std::filesystem::path& a,
                                     const std::filesystem::path& b);

// Reference implementations, written independently of the library.

// Up to `max_nodes` nodes, sparse, with parallel edges but no self loops.
Digraph RandomDigraph(Rng& rng, std::size_t max_nodes);
// Dense solve of (I - alpha A^T) x = beta 1, parallel edges collapsed, L2-normalized.
std::vector<double> KatzBySolve(const Digraph& g, double alpha, double beta);
// Undirected hop distances; -1 when unreachable.
std::vector<std::vector<int>> AllPairsDistances(const Digraph& g);
double ClosenessFromDistances(const std::vector<int>& dist_from_v);
double EccentricityFromDistances(const std::vector<int>& dist_from_v);
double MeanNeighbourDegree(const Digraph& g, std::uint32_t v);

// Small random training set with both classes and coarse feature values.
FeatureMatrix RandomMatrix(Rng& rng, std::size_t max_rows, std::size_t max_cols);
// Recursive exhaustive greedy growth consuming `subsets` in preorder.
// Sets *subsets_used to the number of subsets consumed.
DecisionTree OracleTree(const FeatureMatrix& data, const std::vector<std::uint32_t>& sample,
                        const std::vector<std::vector<std::size_t>>& subsets,
                        std::size_t* subsets_used);
int OraclePredict(const DecisionTree& tree, std::span<const double> row);

struct ConformanceRow {
  std::size_t line = 0;
  std::vector<std::string> rules;
  std::string url;
  MatchContext context;
  bool blocked = false;
};
std::vector<ConformanceRow> LoadConformanceTable();

}  // namespace adsieve::testing

#endif  // ADSIEVE_TESTS_SUPPORT_HPP_
