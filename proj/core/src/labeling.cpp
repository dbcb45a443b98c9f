#include <algorithm>

#include "json.hpp"

#include "adsieve/error.hpp"
#include "adsieve/filter.hpp"

namespace adsieve {

using nlohmann::json;

namespace {

ResourceKind InferResourceKind(const PageGraph& graph, const Node& node) {
  if (const auto* rec = std::get_if<HttpRecord>(&node.payload); rec && rec->request_kind)
    return *rec->request_kind;
  switch (node.kind) {
    case NodeKind::kScriptUrl: return ResourceKind::kScript;
    case NodeKind::kIframeUrl: return ResourceKind::kIframe;
    case NodeKind::kSourceUrl: return ResourceKind::kDocument;
    default: break;
  }
  for (std::uint32_t ei : graph.in_edges(node.id)) {
    const Edge& e = graph.edges()[ei];
    if (e.kind != EdgeKind::kHtmlToHttpElementSrc) continue;
    const Node& src = graph.node(e.src);
    if (src.kind == NodeKind::kImageElement) return ResourceKind::kImage;
    if (const auto* el = src.element()) {
      auto rel = el->attributes.find("rel");
      if (el->tag_name == "link" && rel != el->attributes.end() && rel->second == "stylesheet")
        return ResourceKind::kStylesheet;
    }
  }
  return ResourceKind::kOther;
}

}  // namespace

MatchContext ContextFor(const PageGraph& graph, const Node& node) {
  MatchContext ctx;
  ctx.page_host = graph.page().host;
  ctx.is_third_party = IsThirdParty(*node.url(), graph.page().registrable_domain);
  ctx.resource_kind = InferResourceKind(graph, node);
  return ctx;
}

std::map<NodeId, Label> LabelGraph(const PageGraph& graph, const FilterSet& filters,
                                   RuleHitHistogram* hits) {
  std::map<NodeId, Label> labels;
  for (const Node& node : graph.nodes()) {
    const ParsedUrl* url = node.url();
    if (!url) continue;
    MatchResult r = MatchNetwork(*url, ContextFor(graph, node), filters);
    labels[node.id] = r.blocked ? Label::kAd : Label::kNonAd;
    if (hits) hits->Record(r);
  }
  return labels;
}

std::size_t CountHidingHits(const PageGraph& graph, const FilterSet& filters) {
  if (filters.hiding_rules().empty()) return 0;
  std::size_t count = 0;
  for (const Node& node : graph.nodes()) {
    if (const ElementRecord* el = node.element()) {
      if (MatchHiding(ElementView::FromRecord(*el), graph.page().host, filters)) ++count;
    }
  }
  return count;
}

std::string LabelsToJson(const std::map<NodeId, Label>& labels,
                         std::string_view config_hash) {
  json out = json::object();
  for (const auto& [id, label] : labels) out[std::to_string(id)] = ToString(label);
  if (!config_hash.empty()) out["config_hash"] = config_hash;
  return out.dump(1) + "\n";
}

std::map<NodeId, Label> LabelsFromJson(std::string_view text) {
  std::map<NodeId, Label> labels;
  try {
    json doc = json::parse(text);
    for (const auto& [k, v] : doc.items()) {
      if (k == "config_hash") continue;
      auto label = ParseLabel(v.get<std::string>());
      if (!label) throw DataError("labels: unknown label '" + v.get<std::string>() + "'");
      labels[static_cast<NodeId>(std::stoul(k))] = *label;
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("labels: ") + e.what());
  } catch (const std::logic_error&) {
    throw DataError("labels: node ids must be integers");
  }
  return labels;
}

std::string HistogramToJson(const RuleHitHistogram& hits, const FilterSet& filters,
                            std::string_view config_hash) {
  json out;
  if (!config_hash.empty()) out["config_hash"] = config_hash;
  out["rules_total"] = filters.network_rules().size();
  out["rules_fired"] = hits.rules_fired();
  json rules = json::array();
  for (std::size_t i = 0; i < filters.network_rules().size(); ++i) {
    rules.push_back({{"rule", filters.network_key(i)}, {"hits", hits.hits(i)}});
  }
  out["rules"] = std::move(rules);
  return out.dump(1) + "\n";
}

}  // namespace adsieve
