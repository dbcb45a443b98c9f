#include "adsieve/graph.hpp"

#include <algorithm>
#include <set>
#include <tuple>

namespace adsieve {

namespace {

constexpr std::pair<NodeKind, std::string_view> kNodeKindNames[] = {
    {NodeKind::kIframeElement, "IframeElement"},
    {NodeKind::kImageElement, "ImageElement"},
    {NodeKind::kStyleElement, "StyleElement"},
    {NodeKind::kMiscElement, "MiscElement"},
    {NodeKind::kScriptUrl, "ScriptUrl"},
    {NodeKind::kSourceUrl, "SourceUrl"},
    {NodeKind::kIframeUrl, "IframeUrl"},
    {NodeKind::kElementUrl, "ElementUrl"},
    {NodeKind::kInlineSnippet, "InlineSnippet"},
    {NodeKind::kReferenceSnippet, "ReferenceSnippet"},
};

constexpr std::pair<EdgeKind, std::string_view> kEdgeKindNames[] = {
    {EdgeKind::kHttpToHtmlLoad, "HttpToHtmlLoad"},
    {EdgeKind::kHttpScriptToJsRef, "HttpScriptToJsRef"},
    {EdgeKind::kHtmlToHttpElementSrc, "HtmlToHttpElementSrc"},
    {EdgeKind::kHtmlToScriptOccurrence, "HtmlToScriptOccurrence"},
    {EdgeKind::kHtmlToHttpIframeUrl, "HtmlToHttpIframeUrl"},
    {EdgeKind::kHtmlParentChild, "HtmlParentChild"},
    {EdgeKind::kJsToHtmlInteraction, "JsToHtmlInteraction"},
};

bool IsHtml(NodeKind k) { return LayerOf(k) == Layer::kHtml; }
bool IsHttp(NodeKind k) { return LayerOf(k) == Layer::kHttp; }
bool IsJs(NodeKind k) { return LayerOf(k) == Layer::kJs; }

// Rank under the subkind precedence; higher wins.
int HttpRank(NodeKind k) {
  switch (k) {
    case NodeKind::kScriptUrl: return 4;
    case NodeKind::kIframeUrl: return 3;
    case NodeKind::kElementUrl: return 2;
    case NodeKind::kSourceUrl: return 1;
    default: return 0;
  }
}

// HTTP endpoint admitted when it carries the role itself or a role that
// outranks it.
bool HttpAtLeast(NodeKind k, NodeKind role) {
  return IsHttp(k) && HttpRank(k) >= HttpRank(role);
}

EdgeProvenance ProvenanceOf(EdgeKind kind) {
  switch (kind) {
    case EdgeKind::kHttpToHtmlLoad: return EdgeProvenance::kResourceLoad;
    case EdgeKind::kHttpScriptToJsRef: return EdgeProvenance::kScriptLoad;
    case EdgeKind::kHtmlToHttpElementSrc: return EdgeProvenance::kElementSource;
    case EdgeKind::kHtmlToScriptOccurrence: return EdgeProvenance::kScriptOccurrence;
    case EdgeKind::kHtmlToHttpIframeUrl: return EdgeProvenance::kIframeSource;
    case EdgeKind::kHtmlParentChild: return EdgeProvenance::kDomHierarchy;
    case EdgeKind::kJsToHtmlInteraction: return EdgeProvenance::kScriptInteraction;
  }
  return EdgeProvenance::kDomHierarchy;
}

std::string ProvenanceName(EdgeProvenance p) {
  switch (p) {
    case EdgeProvenance::kResourceLoad: return "resource-load";
    case EdgeProvenance::kScriptLoad: return "script-load";
    case EdgeProvenance::kElementSource: return "element-source";
    case EdgeProvenance::kScriptOccurrence: return "script-occurrence";
    case EdgeProvenance::kIframeSource: return "iframe-source";
    case EdgeProvenance::kDomHierarchy: return "dom-hierarchy";
    case EdgeProvenance::kScriptInteraction: return "script-interaction";
  }
  return "?";
}

}  // namespace

Layer LayerOf(NodeKind kind) {
  switch (kind) {
    case NodeKind::kIframeElement:
    case NodeKind::kImageElement:
    case NodeKind::kStyleElement:
    case NodeKind::kMiscElement:
      return Layer::kHtml;
    case NodeKind::kScriptUrl:
    case NodeKind::kSourceUrl:
    case NodeKind::kIframeUrl:
    case NodeKind::kElementUrl:
      return Layer::kHttp;
    case NodeKind::kInlineSnippet:
    case NodeKind::kReferenceSnippet:
      return Layer::kJs;
  }
  return Layer::kHtml;
}

std::string_view ToString(NodeKind kind) {
  for (const auto& [k, name] : kNodeKindNames)
    if (k == kind) return name;
  return "?";
}

std::string_view ToString(EdgeKind kind) {
  for (const auto& [k, name] : kEdgeKindNames)
    if (k == kind) return name;
  return "?";
}

std::optional<NodeKind> ParseNodeKind(std::string_view s) {
  for (const auto& [k, name] : kNodeKindNames)
    if (name == s) return k;
  return std::nullopt;
}

std::optional<EdgeKind> ParseEdgeKind(std::string_view s) {
  for (const auto& [k, name] : kEdgeKindNames)
    if (name == s) return k;
  return std::nullopt;
}

NodeKind ElementKindForTag(std::string_view tag_name) {
  std::string tag(tag_name);
  std::transform(tag.begin(), tag.end(), tag.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (tag == "iframe") return NodeKind::kIframeElement;
  if (tag == "img") return NodeKind::kImageElement;
  if (tag == "style") return NodeKind::kStyleElement;
  return NodeKind::kMiscElement;
}

const ParsedUrl* Node::url() const {
  const auto* r = std::get_if<HttpRecord>(&payload);
  return r ? &r->url : nullptr;
}

const ElementRecord* Node::element() const {
  return std::get_if<ElementRecord>(&payload);
}

const ScriptRecord* Node::script() const {
  return std::get_if<ScriptRecord>(&payload);
}

UnclassifiableEdgeError::UnclassifiableEdgeError(NodeKind src, NodeKind dst,
                                                 EdgeProvenance provenance)
    : InternalError("unclassifiable edge " + std::string(ToString(src)) +
                    " -> " + std::string(ToString(dst)) + " (" +
                    ProvenanceName(provenance) + ")"),
      src_(src),
      dst_(dst) {}

EdgeKind ClassifyEdge(NodeKind src, NodeKind dst, EdgeProvenance provenance) {
  switch (provenance) {
    case EdgeProvenance::kResourceLoad:
      if (dst == NodeKind::kIframeElement && HttpAtLeast(src, NodeKind::kIframeUrl))
        return EdgeKind::kHttpToHtmlLoad;
      if (IsHtml(dst) && dst != NodeKind::kIframeElement && IsHttp(src))
        return EdgeKind::kHttpToHtmlLoad;
      break;
    case EdgeProvenance::kScriptLoad:
      if (src == NodeKind::kScriptUrl && dst == NodeKind::kReferenceSnippet)
        return EdgeKind::kHttpScriptToJsRef;
      break;
    case EdgeProvenance::kElementSource:
      if (IsHtml(src) && src != NodeKind::kIframeElement &&
          HttpAtLeast(dst, NodeKind::kElementUrl))
        return EdgeKind::kHtmlToHttpElementSrc;
      break;
    case EdgeProvenance::kScriptOccurrence:
      if (IsHtml(src) &&
          (dst == NodeKind::kScriptUrl || dst == NodeKind::kInlineSnippet))
        return EdgeKind::kHtmlToScriptOccurrence;
      break;
    case EdgeProvenance::kIframeSource:
      if (IsHtml(src) && HttpAtLeast(dst, NodeKind::kIframeUrl))
        return EdgeKind::kHtmlToHttpIframeUrl;
      break;
    case EdgeProvenance::kDomHierarchy:
      if (IsHtml(src) && IsHtml(dst)) return EdgeKind::kHtmlParentChild;
      break;
    case EdgeProvenance::kScriptInteraction:
      if (IsJs(src) && IsHtml(dst)) return EdgeKind::kJsToHtmlInteraction;
      break;
  }
  throw UnclassifiableEdgeError(src, dst, provenance);
}

HttpClassification ClassifyHttpNode(std::span<const IncidentEdge> edges) {
  bool script = false, iframe = false, element = false, source = false;
  for (const IncidentEdge& e : edges) {
    switch (e.kind) {
      case EdgeKind::kHttpScriptToJsRef:
      case EdgeKind::kHtmlToScriptOccurrence:
        script = true;
        break;
      case EdgeKind::kHtmlToHttpIframeUrl:
        iframe = true;
        break;
      case EdgeKind::kHttpToHtmlLoad:
        if (e.other == NodeKind::kIframeElement) {
          iframe = true;
        } else {
          source = true;
        }
        break;
      case EdgeKind::kHtmlToHttpElementSrc:
        element = true;
        break;
      default:
        break;
    }
  }
  if (script) return {NodeKind::kScriptUrl, false};
  if (iframe) return {NodeKind::kIframeUrl, false};
  if (element) return {NodeKind::kElementUrl, false};
  if (source) return {NodeKind::kSourceUrl, false};
  return {NodeKind::kSourceUrl, true};
}

PageGraph::PageGraph(std::string page_url, std::vector<Node> nodes,
                     std::vector<Edge> edges)
    : page_url_(std::move(page_url)),
      page_(ParseUrl(page_url_)),
      nodes_(std::move(nodes)),
      edges_(std::move(edges)) {
  Index();
}

void PageGraph::Index() {
  out_.assign(nodes_.size(), {});
  in_.assign(nodes_.size(), {});
  elements_.clear();
  urls_.clear();
  scripts_.clear();
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].id != i) throw InternalError("node ids must be dense and ordered");
    if (const auto* e = nodes_[i].element()) elements_.emplace(e->elem_id, nodes_[i].id);
    if (const auto* u = nodes_[i].url()) urls_.emplace(u->Serialize(), nodes_[i].id);
    if (const auto* s = nodes_[i].script()) scripts_.emplace(s->script_id, nodes_[i].id);
  }
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    const Edge& e = edges_[i];
    if (e.src >= nodes_.size() || e.dst >= nodes_.size())
      throw InternalError("edge endpoint out of range");
    out_[e.src].push_back(static_cast<std::uint32_t>(i));
    in_[e.dst].push_back(static_cast<std::uint32_t>(i));
  }
}

std::optional<NodeId> PageGraph::FindElement(std::string_view elem_id) const {
  auto it = elements_.find(std::string(elem_id));
  if (it == elements_.end()) return std::nullopt;
  return it->second;
}

std::optional<NodeId> PageGraph::FindUrl(std::string_view serialized_url) const {
  auto it = urls_.find(std::string(serialized_url));
  if (it == urls_.end()) return std::nullopt;
  return it->second;
}

std::optional<NodeId> PageGraph::FindScript(std::string_view script_id) const {
  auto it = scripts_.find(std::string(script_id));
  if (it == scripts_.end()) return std::nullopt;
  return it->second;
}

std::vector<NodeId> PageGraph::HttpNodes() const {
  std::vector<NodeId> out;
  for (const Node& n : nodes_)
    if (LayerOf(n.kind) == Layer::kHttp) out.push_back(n.id);
  return out;
}

void PageGraph::SetPayload(NodeId id, NodePayload payload) {
  Node& n = nodes_.at(id);
  if (n.payload.index() != payload.index())
    throw InternalError("payload rewrite must keep the node layer");
  n.payload = std::move(payload);
  // URL identities may have changed.
  urls_.clear();
  elements_.clear();
  for (const Node& m : nodes_) {
    if (const auto* u = m.url()) urls_.emplace(u->Serialize(), m.id);
    if (const auto* e = m.element()) elements_.emplace(e->elem_id, m.id);
  }
}

namespace {

struct PendingEdge {
  NodeId src;
  NodeId dst;
  EdgeProvenance provenance;
  std::optional<InteractionAction> action;
};

class GraphBuilder {
 public:
  GraphBuilder(const PageLoadLog& log, const PublicSuffixList& psl)
      : log_(log), psl_(psl) {}

  PageGraph Build() {
    for (const Event& event : log_.events) {
      std::visit([this](const auto& e) { Handle(e); }, event.payload);
    }
    ClassifyHttpNodes();
    std::vector<Edge> edges;
    edges.reserve(pending_.size());
    for (const PendingEdge& p : pending_) {
      Edge e;
      e.src = p.src;
      e.dst = p.dst;
      e.kind = ClassifyEdge(nodes_[p.src].kind, nodes_[p.dst].kind, p.provenance);
      e.action = p.action;
      edges.push_back(e);
    }
    PageGraph graph(log_.page_url, std::move(nodes_), std::move(edges));
    for (auto& w : warnings_) graph.AddWarning(std::move(w));
    return graph;
  }

 private:
  NodeId AddNode(NodeKind kind, NodePayload payload) {
    Node n;
    n.id = static_cast<NodeId>(nodes_.size());
    n.kind = kind;
    n.payload = std::move(payload);
    nodes_.push_back(std::move(n));
    return nodes_.back().id;
  }

  std::optional<NodeId> AddUrl(const std::string& raw, const std::string& base,
                               std::optional<ResourceKind> request_kind) {
    ParsedUrl url;
    try {
      url = ParseUrl(raw, base, psl_);
    } catch (const UrlError& e) {
      warnings_.push_back(std::string("skipping url node: ") + e.what());
      return std::nullopt;
    }
    std::string key = url.Serialize();
    if (auto it = urls_.find(key); it != urls_.end()) {
      auto& rec = std::get<HttpRecord>(nodes_[it->second].payload);
      if (!rec.request_kind) rec.request_kind = request_kind;
      return it->second;
    }
    // Kind is provisional until every edge is known.
    NodeId id = AddNode(NodeKind::kSourceUrl, HttpRecord{std::move(url), request_kind});
    urls_.emplace(std::move(key), id);
    return id;
  }

  void AddEdge(NodeId src, NodeId dst, EdgeProvenance provenance,
               std::optional<InteractionAction> action = std::nullopt) {
    if (provenance != EdgeProvenance::kScriptInteraction) {
      auto key = std::make_tuple(src, dst, static_cast<int>(provenance));
      if (!seen_.insert(key).second) return;
    }
    pending_.push_back({src, dst, provenance, action});
  }

  // Iframe source chain: parent --iframe-url--> URL --load--> iframe.
  void LinkIframe(NodeId iframe, NodeId url) {
    const auto& rec = std::get<ElementRecord>(nodes_[iframe].payload);
    if (rec.parent_id) AddEdge(elements_.at(*rec.parent_id), url, EdgeProvenance::kIframeSource);
    AddEdge(url, iframe, EdgeProvenance::kResourceLoad);
  }

  void Handle(const DomNode& e) {
    NodeKind kind = ElementKindForTag(e.tag_name);
    NodeId id = AddNode(kind, ElementRecord{e.elem_id, e.tag_name, e.parent_id, e.attributes});
    elements_.emplace(e.elem_id, id);
    base_.emplace(e.elem_id, e.base_uri);
    if (e.parent_id) {
      AddEdge(elements_.at(*e.parent_id), id, EdgeProvenance::kDomHierarchy);
    } else if (auto doc = AddUrl(e.base_uri, log_.page_url, ResourceKind::kDocument)) {
      AddEdge(*doc, id, EdgeProvenance::kResourceLoad);
    }
    for (const char* attr : {"src", "href"}) {
      auto it = e.attributes.find(attr);
      if (it == e.attributes.end() || it->second.empty()) continue;
      if (kind == NodeKind::kIframeElement) {
        if (std::string_view(attr) != "src") continue;
        if (auto url = AddUrl(it->second, e.base_uri, std::nullopt))
          LinkIframe(id, *url);
      } else if (auto url = AddUrl(it->second, e.base_uri, std::nullopt)) {
        AddEdge(id, *url, EdgeProvenance::kElementSource);
      }
    }
  }

  void Handle(const HttpRequest& e) {
    std::string base = log_.page_url;
    if (e.initiator.type == Initiator::Type::kElement) base = base_.at(e.initiator.id);
    auto url = AddUrl(e.url, base, e.resource_kind);
    if (!url) return;
    if (e.initiator.type == Initiator::Type::kElement) {
      NodeId elem = elements_.at(e.initiator.id);
      if (nodes_[elem].kind == NodeKind::kIframeElement) {
        LinkIframe(elem, *url);
      } else {
        AddEdge(elem, *url, EdgeProvenance::kElementSource);
      }
    }
  }

  void Handle(const ScriptUnit& e) {
    NodeId host = elements_.at(e.attached_to);
    if (e.scope == ScriptScope::kReferenced) {
      auto url = AddUrl(*e.source_url, base_.at(e.attached_to), ResourceKind::kScript);
      std::optional<std::string> normalized;
      if (url) normalized = nodes_[*url].url()->Serialize();
      NodeId js = AddNode(NodeKind::kReferenceSnippet,
                          ScriptRecord{e.script_id, e.scope, normalized, e.attached_to});
      scripts_.emplace(e.script_id, js);
      if (url) {
        AddEdge(*url, js, EdgeProvenance::kScriptLoad);
        AddEdge(host, *url, EdgeProvenance::kScriptOccurrence);
      }
    } else {
      NodeId js = AddNode(NodeKind::kInlineSnippet,
                          ScriptRecord{e.script_id, e.scope, std::nullopt, e.attached_to});
      scripts_.emplace(e.script_id, js);
      AddEdge(host, js, EdgeProvenance::kScriptOccurrence);
    }
  }

  void Handle(const JsInteraction& e) {
    AddEdge(scripts_.at(e.script_id), elements_.at(e.target_elem),
            EdgeProvenance::kScriptInteraction, e.action);
  }

  static EdgeKind ProvisionalKind(const PendingEdge& p) {
    switch (p.provenance) {
      case EdgeProvenance::kResourceLoad: return EdgeKind::kHttpToHtmlLoad;
      case EdgeProvenance::kScriptLoad: return EdgeKind::kHttpScriptToJsRef;
      case EdgeProvenance::kElementSource: return EdgeKind::kHtmlToHttpElementSrc;
      case EdgeProvenance::kScriptOccurrence: return EdgeKind::kHtmlToScriptOccurrence;
      case EdgeProvenance::kIframeSource: return EdgeKind::kHtmlToHttpIframeUrl;
      case EdgeProvenance::kDomHierarchy: return EdgeKind::kHtmlParentChild;
      case EdgeProvenance::kScriptInteraction: return EdgeKind::kJsToHtmlInteraction;
    }
    return EdgeKind::kHtmlParentChild;
  }

  void ClassifyHttpNodes() {
    std::vector<std::vector<IncidentEdge>> incident(nodes_.size());
    for (const PendingEdge& p : pending_) {
      EdgeKind k = ProvisionalKind(p);
      if (IsHttp(nodes_[p.src].kind))
        incident[p.src].push_back({k, true, nodes_[p.dst].kind});
      if (IsHttp(nodes_[p.dst].kind))
        incident[p.dst].push_back({k, false, nodes_[p.src].kind});
    }
    for (Node& n : nodes_) {
      if (!IsHttp(n.kind)) continue;
      HttpClassification c = ClassifyHttpNode(incident[n.id]);
      n.kind = c.kind;
      if (c.orphan)
        warnings_.push_back("orphan request " + n.url()->Serialize() +
                            " classified SourceUrl");
    }
  }

  const PageLoadLog& log_;
  const PublicSuffixList& psl_;
  std::vector<Node> nodes_;
  std::vector<PendingEdge> pending_;
  std::set<std::tuple<NodeId, NodeId, int>> seen_;
  std::unordered_map<std::string, NodeId> elements_;
  std::unordered_map<std::string, NodeId> urls_;
  std::unordered_map<std::string, NodeId> scripts_;
  std::unordered_map<std::string, std::string> base_;
  std::vector<std::string> warnings_;
};

}  // namespace

PageGraph BuildGraph(const PageLoadLog& log, const PublicSuffixList& psl) {
  return GraphBuilder(log, psl).Build();
}

void CheckGraphConsistency(const PageGraph& graph) {
  for (const Edge& e : graph.edges()) {
    const NodeKind src = graph.node(e.src).kind;
    const NodeKind dst = graph.node(e.dst).kind;
    if (ClassifyEdge(src, dst, ProvenanceOf(e.kind)) != e.kind)
      throw InternalError("edge kind disagrees with classification");
    if ((e.kind == EdgeKind::kJsToHtmlInteraction) != e.action.has_value())
      throw InternalError("interaction action tag mismatch");
  }
  for (const Node& n : graph.nodes()) {
    if (const ElementRecord* rec = n.element()) {
      if (n.kind != ElementKindForTag(rec->tag_name))
        throw InternalError("element kind does not follow tag name");
      std::size_t parents = 0;
      for (std::uint32_t ei : graph.in_edges(n.id)) {
        const Edge& e = graph.edges()[ei];
        if (e.kind != EdgeKind::kHtmlParentChild) continue;
        ++parents;
        const ElementRecord* p = graph.node(e.src).element();
        if (!rec->parent_id || p->elem_id != *rec->parent_id)
          throw InternalError("DOM edge disagrees with parent_id of " + rec->elem_id);
      }
      if (parents != (rec->parent_id ? 1u : 0u))
        throw InternalError("element " + rec->elem_id + " has wrong parent count");
    }
    if (n.kind == NodeKind::kReferenceSnippet) {
      std::size_t loads = 0;
      for (std::uint32_t ei : graph.in_edges(n.id))
        if (graph.edges()[ei].kind == EdgeKind::kHttpScriptToJsRef) ++loads;
      if (loads != (n.script()->source_url ? 1u : 0u))
        throw InternalError("reference snippet " + n.script()->script_id +
                            " must have exactly one loading URL");
    }
  }
}

}  // namespace adsieve
