#ifndef ADSIEVE_OBFUSCATION_HPP_
#define ADSIEVE_OBFUSCATION_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "adsieve/evaluation.hpp"
#include "adsieve/features.hpp"
#include "adsieve/filter.hpp"
#include "adsieve/forest.hpp"
#include "adsieve/graph.hpp"
#include "adsieve/rng.hpp"

namespace adsieve {

enum class ObfuscationMode { kHtmlAttrs, kQueryString, kDomain };

std::vector<std::string> DefaultThirdPartyPool();

struct ObfuscationConfig {
  std::set<ObfuscationMode> modes;
  std::uint64_t seed = 0;
  std::vector<std::string> third_party_pool = DefaultThirdPartyPool();
  int max_added_params = 3;
  double drop_probability = 0.5;
};

// Accepts html_attrs, query_string, domain and both_url (= query_string +
// domain), comma or '+' separated. Throws ConfigError otherwise.
std::set<ObfuscationMode> ParseObfuscationModes(std::string_view spec);
// Inverse of ParseObfuscationModes; {query_string, domain} prints as both_url.
std::string ModesToString(const std::set<ObfuscationMode>& modes);

struct QueryOps {
  bool rename = false;
  bool revalue = false;
  bool add = false;
  bool drop = false;
};

// Per-page rewriting state. Equal input tokens map to equal output tokens
// for the lifetime of the object.
class PageObfuscator {
 public:
  PageObfuscator(std::uint64_t seed, const ObfuscationConfig& config);

  // Fresh lowercase consonant token; never contains an ad keyword or a
  // digit.
  std::string Token(std::string_view original);

  ElementRecord ObfuscateElement(const ElementRecord& element);

  QueryOps DrawQueryOps();
  ParsedUrl ApplyQueryOps(const ParsedUrl& url, const QueryOps& ops);
  ParsedUrl ObfuscateQuery(const ParsedUrl& url);

  // First-party URLs only gain or change a subdomain label. Third-party
  // URLs get a base domain from the pool, never the first party's.
  ParsedUrl ObfuscateDomain(const ParsedUrl& url, std::string_view page_registrable_domain);

 private:
  Rng rng_;
  const ObfuscationConfig& config_;
  std::map<std::string, std::string, std::less<>> tokens_;
  std::map<std::string, std::string, std::less<>> hosts_;
};

PageGraph ObfuscateHtmlAttrs(const PageGraph& graph, std::uint64_t seed);
ParsedUrl ObfuscateQueryString(const ParsedUrl& url, std::uint64_t seed);
ParsedUrl ObfuscateDomain(const ParsedUrl& url, std::string_view page_registrable_domain,
                          std::uint64_t seed, const ObfuscationConfig& config = {});

// Applies every configured mode to one page. Node ids, kinds and edges
// are unchanged; payloads are rewritten.
PageGraph ObfuscateGraph(const PageGraph& graph, const ObfuscationConfig& config,
                         std::uint64_t page_seed);

// Stream for one page: DeriveSeed(config seed, StableHash(page id)).
std::uint64_t PageSeed(std::uint64_t seed, std::string_view page_id);

struct LabeledPage {
  std::string id;
  PageGraph graph;
  std::map<NodeId, Label> labels;  // clean ground truth
};

struct ObfuscationCounts {
  Confusion model_clean;
  Confusion model_obf;
  // Filter-list AD decisions on ground-truth AD nodes.
  std::uint64_t truth_ad = 0;
  std::uint64_t network_hits_clean = 0;
  std::uint64_t network_hits_obf = 0;
  std::uint64_t hiding_hits_clean = 0;
  std::uint64_t hiding_hits_obf = 0;

  ObfuscationCounts& operator+=(const ObfuscationCounts& o);
};

struct ObfuscationReport {
  std::string mode;
  ObfuscationCounts counts;

  double precision_clean() const { return counts.model_clean.precision(); }
  double precision_obf() const { return counts.model_obf.precision(); }
  double recall_clean() const { return counts.model_clean.recall(); }
  double recall_obf() const { return counts.model_obf.recall(); }
  double network_recall_clean() const;
  double network_recall_obf() const;

  std::string ToJson(std::string_view config_hash = {}) const;
};

// Ground-truth labels stay fixed; features and filter decisions are
// recomputed on the obfuscated graphs. `model` must have been trained on
// the columns of `families` (empty = all).
ObfuscationCounts EvaluateObfuscation(const std::vector<LabeledPage>& pages,
                                      const ForestModel& model, const FilterSet& filters,
                                      const ObfuscationConfig& config,
                                      const std::set<FeatureFamily>& families = {},
                                      const FeatureOptions& options = {}, int workers = 1);

ObfuscationReport RunObfuscationExperiment(const std::vector<LabeledPage>& pages,
                                           const ForestModel& model, const FilterSet& filters,
                                           const ObfuscationConfig& config,
                                           const std::set<FeatureFamily>& families = {},
                                           const FeatureOptions& options = {},
                                           int workers = 1);

}  // namespace adsieve

#endif  // ADSIEVE_OBFUSCATION_HPP_
