#include "adsieve/features.hpp"

#include <algorithm>
#include <cctype>

#include "json.hpp"

#include "adsieve/error.hpp"

namespace adsieve {

namespace {

constexpr std::pair<EdgeKind, std::string_view> kEdgeFeatureNames[] = {
    {EdgeKind::kHttpToHtmlLoad, "http_to_html_load"},
    {EdgeKind::kHttpScriptToJsRef, "http_script_to_js_ref"},
    {EdgeKind::kHtmlToHttpElementSrc, "html_to_http_element_src"},
    {EdgeKind::kHtmlToScriptOccurrence, "html_to_script_occurrence"},
    {EdgeKind::kHtmlToHttpIframeUrl, "html_to_http_iframe_url"},
    {EdgeKind::kHtmlParentChild, "html_parent_child"},
    {EdgeKind::kJsToHtmlInteraction, "js_to_html_interaction"},
};

std::size_t EdgeIndex(EdgeKind kind) { return static_cast<std::size_t>(kind); }

std::string Lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

// True when `s` contains 2+ digits, 'x', 2+ digits (a 2-4 x 2-4 digit
// match exists whenever the runs are at least that long).
bool HasDimension(std::string_view s) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != 'x') continue;
    std::size_t before = 0;
    while (before < i && std::isdigit(static_cast<unsigned char>(s[i - 1 - before]))) ++before;
    std::size_t after = 0;
    while (i + 1 + after < s.size() &&
           std::isdigit(static_cast<unsigned char>(s[i + 1 + after])))
      ++after;
    if (before >= 2 && after >= 2) return true;
  }
  return false;
}

FeatureSchema BuildDefaultSchema() {
  FeatureSchema s;
  s.version = "adsieve-features-1";
  auto add = [&s](std::string name, FeatureFamily f, std::string desc) {
    s.features.push_back({std::move(name), f, std::move(desc)});
  };
  using F = FeatureFamily;
  add("in_degree", F::kDegree, "inbound edges, all kinds");
  add("out_degree", F::kDegree, "outbound edges, all kinds");
  for (const auto& [kind, name] : kEdgeFeatureNames)
    add("in_" + std::string(name), F::kDegree, "inbound " + std::string(ToString(kind)) + " edges");
  for (const auto& [kind, name] : kEdgeFeatureNames)
    add("out_" + std::string(name), F::kDegree, "outbound " + std::string(ToString(kind)) + " edges");
  add("descendants", F::kDegree, "nodes reachable along directed edges");
  add("script_insertions", F::kDegree, "DOM insertions by scripts this URL loads");
  add("script_attribute_modifications", F::kDegree,
      "attribute modifications and removals by scripts this URL loads");
  add("script_listener_attachments", F::kDegree,
      "event listeners attached by scripts this URL loads");
  add("katz_centrality", F::kConnectivity, "Katz centrality, L2-normalized");
  add("closeness_centrality", F::kConnectivity, "reachable count over distance sum (undirected)");
  add("eccentricity", F::kConnectivity, "largest distance in the undirected component");
  add("mean_degree_connectivity", F::kConnectivity, "mean neighbour degree (undirected)");
  add("domain_party", F::kDomain, "1 when third-party");
  add("is_subdomain_of_first_party", F::kDomain, "first-party registrable domain with subdomain labels");
  add("base_domain_in_query", F::kDomain, "page registrable domain inside a parameter value");
  add("same_base_and_request_domain", F::kDomain, "URL host equals the page registrable domain");
  add("node_category_script_url", F::kDomain, "HTTP subkind one-hot");
  add("node_category_source_url", F::kDomain, "HTTP subkind one-hot");
  add("node_category_iframe_url", F::kDomain, "HTTP subkind one-hot");
  add("node_category_element_url", F::kDomain, "HTTP subkind one-hot");
  add("ad_keyword_count", F::kKeyword, "ad keywords, longest non-overlapping match");
  add("ad_keyword_special_count", F::kKeyword, "ad keywords followed by a special character");
  add("semicolon_param_count", F::kKeyword, "query parameters introduced by ';'");
  add("valid_query_structure", F::kKeyword, "'?' then '&'-separated parameters");
  add("ad_dimension_in_query", F::kKeyword, "parameter value like 300x250");
  add("screen_dimension_in_query", F::kKeyword, "screen size parameter name present");
  return s;
}

}  // namespace

std::string_view ToString(FeatureFamily family) {
  switch (family) {
    case FeatureFamily::kDegree: return "degree";
    case FeatureFamily::kConnectivity: return "connectivity";
    case FeatureFamily::kDomain: return "domain";
    case FeatureFamily::kKeyword: return "keyword";
  }
  return "?";
}

std::optional<FeatureFamily> ParseFeatureFamily(std::string_view s) {
  for (FeatureFamily f : kAllFamilies)
    if (ToString(f) == s) return f;
  return std::nullopt;
}

std::optional<std::size_t> FeatureSchema::IndexOf(std::string_view name) const {
  for (std::size_t i = 0; i < features.size(); ++i)
    if (features[i].name == name) return i;
  return std::nullopt;
}

std::vector<std::size_t> FeatureSchema::Columns(const std::set<FeatureFamily>& families) const {
  std::vector<std::size_t> cols;
  for (std::size_t i = 0; i < features.size(); ++i)
    if (families.contains(features[i].family)) cols.push_back(i);
  return cols;
}

std::string FeatureSchema::ToJson() const {
  nlohmann::json doc;
  doc["version"] = version;
  doc["features"] = nlohmann::json::array();
  for (const auto& f : features)
    doc["features"].push_back(
        {{"name", f.name}, {"family", ToString(f.family)}, {"description", f.description}});
  return doc.dump(1) + "\n";
}

const FeatureSchema& DefaultSchema() {
  static const FeatureSchema schema = BuildDefaultSchema();
  return schema;
}

double Lookup(const PartialFeatures& features, std::string_view name) {
  for (const auto& [k, v] : features)
    if (k == name) return v;
  throw InternalError("no feature named " + std::string(name));
}

GraphFeaturizer::GraphFeaturizer(const PageGraph& graph, FeatureOptions options)
    : graph_(graph),
      options_(std::move(options)),
      digraph_(Digraph::FromPage(graph)),
      out_adj_(graph.size()) {
  for (auto [s, d] : digraph_.edges) out_adj_[s].push_back(d);
  if (graph.size() > 0) table_ = ComputeConnectivity(digraph_, options_.katz);
}

PartialFeatures GraphFeaturizer::Degree(NodeId v) const {
  std::array<double, kEdgeKindCount> in{}, out{};
  for (std::uint32_t ei : graph_.in_edges(v)) in[EdgeIndex(graph_.edges()[ei].kind)] += 1;
  for (std::uint32_t ei : graph_.out_edges(v)) out[EdgeIndex(graph_.edges()[ei].kind)] += 1;

  std::vector<char> seen(graph_.size(), 0);
  std::vector<std::uint32_t> stack{v};
  seen[v] = 1;
  double descendants = 0;
  while (!stack.empty()) {
    std::uint32_t u = stack.back();
    stack.pop_back();
    for (std::uint32_t w : out_adj_[u]) {
      if (seen[w]) continue;
      seen[w] = 1;
      descendants += 1;
      stack.push_back(w);
    }
  }

  double insertions = 0, modifications = 0, listeners = 0;
  for (std::uint32_t ei : graph_.out_edges(v)) {
    const Edge& load = graph_.edges()[ei];
    if (load.kind != EdgeKind::kHttpScriptToJsRef) continue;
    for (std::uint32_t ej : graph_.out_edges(load.dst)) {
      const Edge& act = graph_.edges()[ej];
      if (act.kind != EdgeKind::kJsToHtmlInteraction || !act.action) continue;
      switch (*act.action) {
        case InteractionAction::kInsertNode: insertions += 1; break;
        case InteractionAction::kModifyAttribute:
        case InteractionAction::kRemoveAttribute: modifications += 1; break;
        case InteractionAction::kAttachListener: listeners += 1; break;
      }
    }
  }

  PartialFeatures f;
  f.reserve(20);
  f.emplace_back("in_degree", static_cast<double>(graph_.in_edges(v).size()));
  f.emplace_back("out_degree", static_cast<double>(graph_.out_edges(v).size()));
  for (const auto& [kind, name] : kEdgeFeatureNames)
    f.emplace_back("in_" + std::string(name), in[EdgeIndex(kind)]);
  for (const auto& [kind, name] : kEdgeFeatureNames)
    f.emplace_back("out_" + std::string(name), out[EdgeIndex(kind)]);
  f.emplace_back("descendants", descendants);
  f.emplace_back("script_insertions", insertions);
  f.emplace_back("script_attribute_modifications", modifications);
  f.emplace_back("script_listener_attachments", listeners);
  return f;
}

PartialFeatures GraphFeaturizer::Connectivity(NodeId v) const {
  return {{"katz_centrality", table_.katz.at(v)},
          {"closeness_centrality", table_.closeness.at(v)},
          {"eccentricity", table_.eccentricity.at(v)},
          {"mean_degree_connectivity", table_.mean_degree_connectivity.at(v)}};
}

PartialFeatures GraphFeaturizer::Domain(NodeId v) const {
  const Node& node = graph_.node(v);
  const ParsedUrl* url = node.url();
  if (!url) throw InternalError("domain features need an HTTP node");
  const ParsedUrl& page = graph_.page();
  const bool first_party = url->registrable_domain == page.registrable_domain;
  bool in_query = false;
  const std::string base = Lower(page.registrable_domain);
  for (const QueryParam& p : url->query_params) {
    if (!base.empty() && Lower(p.value).find(base) != std::string::npos) {
      in_query = true;
      break;
    }
  }
  auto flag = [](bool b) { return b ? 1.0 : 0.0; };
  return {
      {"domain_party", flag(!first_party)},
      {"is_subdomain_of_first_party", flag(first_party && !url->subdomain_labels.empty())},
      {"base_domain_in_query", flag(in_query)},
      {"same_base_and_request_domain", flag(url->host == page.registrable_domain)},
      {"node_category_script_url", flag(node.kind == NodeKind::kScriptUrl)},
      {"node_category_source_url", flag(node.kind == NodeKind::kSourceUrl)},
      {"node_category_iframe_url", flag(node.kind == NodeKind::kIframeUrl)},
      {"node_category_element_url", flag(node.kind == NodeKind::kElementUrl)},
  };
}

PartialFeatures GraphFeaturizer::Keyword(NodeId v) const {
  const ParsedUrl* url = graph_.node(v).url();
  if (!url) throw InternalError("keyword features need an HTTP node");
  return KeywordFeatures(*url, options_.keywords);
}

std::vector<double> GraphFeaturizer::Row(NodeId v) const {
  std::vector<double> row;
  row.reserve(DefaultSchema().size());
  for (const PartialFeatures& part : {Degree(v), Connectivity(v), Domain(v), Keyword(v)})
    for (const auto& [name, value] : part) row.push_back(value);
  return row;
}

PartialFeatures DegreeFeatures(const PageGraph& graph, NodeId v) {
  return GraphFeaturizer(graph).Degree(v);
}

PartialFeatures DomainFeatures(const PageGraph& graph, NodeId v) {
  return GraphFeaturizer(graph).Domain(v);
}

PartialFeatures KeywordFeatures(const ParsedUrl& url, const KeywordConfig& config) {
  const std::string text = Lower(url.Serialize());
  double count = 0, special = 0;
  for (std::size_t i = 0; i < text.size();) {
    std::size_t best = 0;
    for (const std::string& kw : config.keywords) {
      if (kw.size() > best && text.compare(i, kw.size(), kw) == 0) best = kw.size();
    }
    if (best == 0) {
      ++i;
      continue;
    }
    count += 1;
    if (i + best < text.size() && config.special_chars.find(text[i + best]) != std::string::npos)
      special += 1;
    i += best;
  }

  const auto& params = url.query_params;
  const bool valid_structure =
      url.had_question_mark && !params.empty() &&
      std::all_of(params.begin() + 1, params.end(),
                  [](const QueryParam& p) { return p.separator == '&'; });
  bool dimension = false, screen = false;
  for (const QueryParam& p : params) {
    dimension = dimension || HasDimension(p.value);
    const std::string name = Lower(p.name);
    screen = screen || std::find(config.screen_params.begin(), config.screen_params.end(),
                                 name) != config.screen_params.end();
  }
  return {
      {"ad_keyword_count", count},
      {"ad_keyword_special_count", special},
      {"semicolon_param_count", static_cast<double>(url.SemicolonParamCount())},
      {"valid_query_structure", valid_structure ? 1.0 : 0.0},
      {"ad_dimension_in_query", dimension ? 1.0 : 0.0},
      {"screen_dimension_in_query", screen ? 1.0 : 0.0},
  };
}

Dataset FeaturizeGraph(const PageGraph& graph, const std::map<NodeId, Label>& labels,
                       std::string_view page_id, const FeatureOptions& options) {
  Dataset data;
  data.schema = DefaultSchema();
  if (labels.empty()) return data;
  GraphFeaturizer featurizer(graph, options);
  for (const auto& [id, label] : labels) {
    if (id >= graph.size() || LayerOf(graph.node(id).kind) != Layer::kHttp)
      throw DatasetError("label for non-HTTP node " + std::to_string(id));
    DatasetRow row;
    row.page = std::string(page_id);
    row.node_id = id;
    row.values = featurizer.Row(id);
    row.label = label;
    data.rows.push_back(std::move(row));
  }
  return data;
}

}  // namespace adsieve
