#ifndef ADSIEVE_FILTER_HPP_
#define ADSIEVE_FILTER_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "adsieve/graph.hpp"
#include "adsieve/pageload.hpp"
#include "adsieve/url.hpp"

namespace adsieve {

enum class Label { kAd, kNonAd };
std::string_view ToString(Label label);  // "AD" / "NON-AD"
std::optional<Label> ParseLabel(std::string_view s);

// Bit per ResourceKind.
using TypeMask = std::uint8_t;
constexpr TypeMask TypeBit(ResourceKind kind) {
  return static_cast<TypeMask>(1u << static_cast<unsigned>(kind));
}

struct NetworkRule {
  std::string pattern;  // body between anchors; '*' and '^' are special
  bool domain_anchor = false;  // ||
  bool start_anchor = false;   // |
  bool end_anchor = false;     // trailing |
  bool exception = false;      // @@
  std::optional<bool> third_party;
  std::vector<std::string> include_domains;
  std::vector<std::string> exclude_domains;
  TypeMask include_types = 0;  // 0 = any
  TypeMask exclude_types = 0;

  std::string Serialize() const;
  bool operator==(const NetworkRule&) const = default;
};

enum class SelectorKind { kId, kClass, kTag };

struct HidingRule {
  std::vector<std::string> include_domains;
  std::vector<std::string> exclude_domains;
  SelectorKind selector_kind = SelectorKind::kClass;
  std::string selector_value;

  std::string Serialize() const;
  bool operator==(const HidingRule&) const = default;
};

struct RuleDiagnostic {
  std::size_t line = 0;
  std::string source;
  std::string message;
};

struct ParseReport {
  std::size_t comments = 0;
  std::size_t skipped = 0;
  std::vector<RuleDiagnostic> diagnostics;
};

// Parsed network and element-hiding rules. Immutable once built; safe to
// share across threads.
class FilterSet {
 public:
  void Add(NetworkRule rule);
  void Add(HidingRule rule);
  // Union with another set; provenance lists are concatenated.
  void Merge(const FilterSet& other);

  const std::vector<NetworkRule>& network_rules() const { return network_; }
  const std::vector<HidingRule>& hiding_rules() const { return hiding_; }
  const std::vector<std::string>& provenance() const { return provenance_; }
  void AddProvenance(std::string name) { provenance_.push_back(std::move(name)); }

  // Canonical text of network rule i; the tie-break key for deciding rules.
  const std::string& network_key(std::size_t i) const { return network_keys_[i]; }

  bool empty() const { return network_.empty() && hiding_.empty(); }

 private:
  std::vector<NetworkRule> network_;
  std::vector<std::string> network_keys_;
  std::vector<std::string> network_hints_;  // lowercase literal prefilter
  std::vector<HidingRule> hiding_;
  std::vector<std::string> provenance_;

  friend struct NetworkMatcherAccess;
};

// Parses one rule. Returns nullopt for blanks, comments and unsupported
// syntax; `why` receives the reason for the latter.
std::optional<std::variant<NetworkRule, HidingRule>> ParseRule(
    std::string_view line, std::string* why = nullptr);

// Comments and unsupported constructs are skipped and counted.
FilterSet ParseRules(std::string_view text, std::string_view source_name = "inline",
                     ParseReport* report = nullptr);
FilterSet ReadFilterFile(const std::filesystem::path& path,
                         ParseReport* report = nullptr);

struct MatchContext {
  std::string page_host;
  bool is_third_party = false;
  ResourceKind resource_kind = ResourceKind::kOther;
};

struct MatchResult {
  bool blocked = false;
  // Index into network_rules() of the deciding rule: the block rule when
  // blocked, the exception that overrode a block otherwise.
  std::optional<std::size_t> matched_rule;
};

// Pattern, anchor and option test of one rule.
bool RuleMatches(const NetworkRule& rule, const ParsedUrl& url, const MatchContext& ctx);

// blocked = some block rule matches and no exception rule does.
MatchResult MatchNetwork(const ParsedUrl& url, const MatchContext& ctx,
                         const FilterSet& filters);

struct ElementView {
  std::string tag;
  std::string id;
  std::vector<std::string> classes;

  static ElementView FromRecord(const ElementRecord& rec);
};

bool MatchHiding(const ElementView& element, std::string_view page_host,
                 const FilterSet& filters);

// Per-rule trigger counts accumulated while labeling.
class RuleHitHistogram {
 public:
  explicit RuleHitHistogram(std::size_t rule_count = 0) : hits_(rule_count, 0) {}

  void Record(const MatchResult& result);
  void Merge(const RuleHitHistogram& other);
  std::uint64_t hits(std::size_t rule) const { return hits_.at(rule); }
  std::size_t rules_fired() const;
  std::size_t rule_count() const { return hits_.size(); }

 private:
  std::vector<std::uint64_t> hits_;
};

// Match context for an HTTP node of `graph`.
MatchContext ContextFor(const PageGraph& graph, const Node& node);

// Labels every HTTP URL node; other nodes are absent from the map.
std::map<NodeId, Label> LabelGraph(const PageGraph& graph, const FilterSet& filters,
                                   RuleHitHistogram* hits = nullptr);

// Number of HTML elements some hiding rule matches.
std::size_t CountHidingHits(const PageGraph& graph, const FilterSet& filters);

std::string LabelsToJson(const std::map<NodeId, Label>& labels,
                         std::string_view config_hash = {});
std::map<NodeId, Label> LabelsFromJson(std::string_view text);
std::string HistogramToJson(const RuleHitHistogram& hits, const FilterSet& filters,
                            std::string_view config_hash = {});

}  // namespace adsieve

#endif  // ADSIEVE_FILTER_HPP_
