#ifndef ADSIEVE_FEATURES_HPP_
#define ADSIEVE_FEATURES_HPP_

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "adsieve/centrality.hpp"
#include "adsieve/filter.hpp"
#include "adsieve/graph.hpp"

namespace adsieve {

enum class FeatureFamily { kDegree, kConnectivity, kDomain, kKeyword };
inline constexpr FeatureFamily kAllFamilies[] = {
    FeatureFamily::kDegree, FeatureFamily::kConnectivity, FeatureFamily::kDomain,
    FeatureFamily::kKeyword};

std::string_view ToString(FeatureFamily family);
std::optional<FeatureFamily> ParseFeatureFamily(std::string_view s);

struct FeatureSpec {
  std::string name;
  FeatureFamily family;
  std::string description;

  bool operator==(const FeatureSpec&) const = default;
};

struct FeatureSchema {
  std::string version;
  std::vector<FeatureSpec> features;

  std::size_t size() const { return features.size(); }
  std::optional<std::size_t> IndexOf(std::string_view name) const;
  // Column indices belonging to any of `families`, in schema order.
  std::vector<std::size_t> Columns(const std::set<FeatureFamily>& families) const;
  std::string ToJson() const;

  bool operator==(const FeatureSchema&) const = default;
};

// 20 degree + 4 connectivity + 8 domain + 6 keyword features.
const FeatureSchema& DefaultSchema();

struct KeywordConfig {
  std::vector<std::string> keywords{"advertise", "advert", "banner"};
  std::string special_chars = ";=/?&_-.";
  std::vector<std::string> screen_params{"screenheight", "screenwidth", "screendensity"};
};

struct FeatureOptions {
  KatzOptions katz;
  KeywordConfig keywords;
};

// Ordered (name, value) pairs from one feature family.
using PartialFeatures = std::vector<std::pair<std::string, double>>;
double Lookup(const PartialFeatures& features, std::string_view name);

// Per-graph feature computation. Connectivity measures are computed once
// on construction and looked up per node.
class GraphFeaturizer {
 public:
  explicit GraphFeaturizer(const PageGraph& graph, FeatureOptions options = {});

  PartialFeatures Degree(NodeId v) const;
  PartialFeatures Connectivity(NodeId v) const;
  PartialFeatures Domain(NodeId v) const;
  PartialFeatures Keyword(NodeId v) const;

  // All four families, in DefaultSchema() order.
  std::vector<double> Row(NodeId v) const;

  const ConnectivityTable& connectivity() const { return table_; }

 private:
  const PageGraph& graph_;
  FeatureOptions options_;
  Digraph digraph_;
  std::vector<std::vector<std::uint32_t>> out_adj_;
  ConnectivityTable table_;
};

PartialFeatures DegreeFeatures(const PageGraph& graph, NodeId v);
PartialFeatures DomainFeatures(const PageGraph& graph, NodeId v);
PartialFeatures KeywordFeatures(const ParsedUrl& url, const KeywordConfig& config = {});

struct DatasetRow {
  std::string page;
  NodeId node_id = 0;
  std::vector<double> values;
  Label label = Label::kNonAd;

  bool operator==(const DatasetRow&) const = default;
};

struct Dataset {
  FeatureSchema schema;
  std::vector<DatasetRow> rows;

  // Throws DatasetError when schemas differ.
  void Append(const Dataset& other);
  // Distinct page ids in first-appearance order.
  std::vector<std::string> Pages() const;
  // Same rows restricted to the columns of `families`.
  Dataset Select(const std::set<FeatureFamily>& families) const;

  bool operator==(const Dataset&) const = default;
};

// One row per labeled HTTP node, in node-id order.
Dataset FeaturizeGraph(const PageGraph& graph, const std::map<NodeId, Label>& labels,
                       std::string_view page_id, const FeatureOptions& options = {});

std::string DatasetToCsv(const Dataset& data, std::string_view config_hash = {});
Dataset DatasetFromCsv(std::string_view text);

// Shortest round-trip decimal form.
std::string FormatNumber(double v);

// Sorted values of one feature per label, with empirical CDF.
std::string CdfCsv(const Dataset& data, std::size_t column, Label label,
                   std::string_view config_hash = {});

}  // namespace adsieve

#endif  // ADSIEVE_FEATURES_HPP_
