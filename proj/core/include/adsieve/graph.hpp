#ifndef ADSIEVE_GRAPH_HPP_
#define ADSIEVE_GRAPH_HPP_

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "adsieve/error.hpp"
#include "adsieve/pageload.hpp"
#include "adsieve/url.hpp"

namespace adsieve {

using NodeId = std::uint32_t;

enum class Layer { kHtml, kHttp, kJs };

enum class NodeKind {
  kIframeElement,
  kImageElement,
  kStyleElement,
  kMiscElement,
  kScriptUrl,
  kSourceUrl,
  kIframeUrl,
  kElementUrl,
  kInlineSnippet,
  kReferenceSnippet,
};

enum class EdgeKind {
  kHttpToHtmlLoad,
  kHttpScriptToJsRef,
  kHtmlToHttpElementSrc,
  kHtmlToScriptOccurrence,
  kHtmlToHttpIframeUrl,
  kHtmlParentChild,
  kJsToHtmlInteraction,
};

inline constexpr std::size_t kEdgeKindCount = 7;
inline constexpr std::array<EdgeKind, kEdgeKindCount> kAllEdgeKinds = {
    EdgeKind::kHttpToHtmlLoad,        EdgeKind::kHttpScriptToJsRef,
    EdgeKind::kHtmlToHttpElementSrc,  EdgeKind::kHtmlToScriptOccurrence,
    EdgeKind::kHtmlToHttpIframeUrl,   EdgeKind::kHtmlParentChild,
    EdgeKind::kJsToHtmlInteraction,
};

Layer LayerOf(NodeKind kind);
std::string_view ToString(NodeKind kind);
std::string_view ToString(EdgeKind kind);
std::optional<NodeKind> ParseNodeKind(std::string_view s);
std::optional<EdgeKind> ParseEdgeKind(std::string_view s);

// HTML subkind is a function of the tag name alone.
NodeKind ElementKindForTag(std::string_view tag_name);

struct ElementRecord {
  std::string elem_id;
  std::string tag_name;
  std::optional<std::string> parent_id;
  std::map<std::string, std::string> attributes;

  bool operator==(const ElementRecord&) const = default;
};

struct HttpRecord {
  ParsedUrl url;
  // Kind of the first logged request for this URL, if it was requested.
  std::optional<ResourceKind> request_kind;

  bool operator==(const HttpRecord&) const = default;
};

struct ScriptRecord {
  std::string script_id;
  ScriptScope scope = ScriptScope::kInline;
  std::optional<std::string> source_url;  // normalized
  std::string attached_to;

  bool operator==(const ScriptRecord&) const = default;
};

using NodePayload = std::variant<ElementRecord, HttpRecord, ScriptRecord>;

struct Node {
  NodeId id = 0;
  NodeKind kind = NodeKind::kMiscElement;
  NodePayload payload;

  const ParsedUrl* url() const;
  const ElementRecord* element() const;
  const ScriptRecord* script() const;

  bool operator==(const Node&) const = default;
};

struct Edge {
  NodeId src = 0;
  NodeId dst = 0;
  EdgeKind kind = EdgeKind::kHtmlParentChild;
  std::optional<InteractionAction> action;  // only for kJsToHtmlInteraction

  bool operator==(const Edge&) const = default;
};

// What produced an edge during construction; classify_edge maps it, with
// the endpoint kinds, to exactly one EdgeKind.
enum class EdgeProvenance {
  kResourceLoad,
  kScriptLoad,
  kElementSource,
  kScriptOccurrence,
  kIframeSource,
  kDomHierarchy,
  kScriptInteraction,
};

class UnclassifiableEdgeError : public InternalError {
 public:
  UnclassifiableEdgeError(NodeKind src, NodeKind dst, EdgeProvenance provenance);

  NodeKind src_kind() const { return src_; }
  NodeKind dst_kind() const { return dst_; }

 private:
  NodeKind src_;
  NodeKind dst_;
};

// Throws UnclassifiableEdgeError when no category admits the pair.
EdgeKind ClassifyEdge(NodeKind src, NodeKind dst, EdgeProvenance provenance);

// One edge incident on an HTTP node, seen from that node.
struct IncidentEdge {
  EdgeKind kind;
  bool outgoing;
  NodeKind other;
};

struct HttpClassification {
  NodeKind kind = NodeKind::kSourceUrl;
  bool orphan = false;  // no incident edges; kind defaults to SourceUrl
};

// Precedence Script > Iframe > Element > Source.
HttpClassification ClassifyHttpNode(std::span<const IncidentEdge> edges);

class PageGraph {
 public:
  PageGraph() = default;
  PageGraph(std::string page_url, std::vector<Node> nodes, std::vector<Edge> edges);

  const std::string& page_url() const { return page_url_; }
  const ParsedUrl& page() const { return page_; }
  std::span<const Node> nodes() const { return nodes_; }
  std::span<const Edge> edges() const { return edges_; }
  const Node& node(NodeId id) const { return nodes_.at(id); }
  std::size_t size() const { return nodes_.size(); }

  // Indices into edges() for edges leaving / entering `id`.
  std::span<const std::uint32_t> out_edges(NodeId id) const { return out_[id]; }
  std::span<const std::uint32_t> in_edges(NodeId id) const { return in_[id]; }

  std::optional<NodeId> FindElement(std::string_view elem_id) const;
  std::optional<NodeId> FindUrl(std::string_view serialized_url) const;
  std::optional<NodeId> FindScript(std::string_view script_id) const;

  std::vector<NodeId> HttpNodes() const;

  // Payload rewrite for transforms that keep topology; kinds are untouched.
  void SetPayload(NodeId id, NodePayload payload);

  // Non-fatal construction notes (skipped URLs, orphan requests).
  const std::vector<std::string>& warnings() const { return warnings_; }
  void AddWarning(std::string w) { warnings_.push_back(std::move(w)); }

  bool operator==(const PageGraph& other) const {
    return page_url_ == other.page_url_ && nodes_ == other.nodes_ &&
           edges_ == other.edges_;
  }

 private:
  void Index();

  std::string page_url_;
  ParsedUrl page_;
  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::uint32_t>> out_;
  std::vector<std::vector<std::uint32_t>> in_;
  std::unordered_map<std::string, NodeId> elements_;
  std::unordered_map<std::string, NodeId> urls_;
  std::unordered_map<std::string, NodeId> scripts_;
  std::vector<std::string> warnings_;
};

// Builds the three-layer graph. Node ids follow first appearance in the
// event stream, so equal logs give equal graphs.
PageGraph BuildGraph(const PageLoadLog& log,
                     const PublicSuffixList& psl = PublicSuffixList::Bundled());

// Re-checks every edge against ClassifyEdge and the DOM against the
// element records. Throws InternalError on violation.
void CheckGraphConsistency(const PageGraph& graph);

// {nodes:[{id, kind, url?, tag?, attrs?, ...}], edges:[{src, dst, kind, action?}]}
std::string GraphToJson(const PageGraph& graph, std::string_view config_hash = {});
PageGraph GraphFromJson(std::string_view text,
                        const PublicSuffixList& psl = PublicSuffixList::Bundled());
std::string GraphToDot(const PageGraph& graph);

}  // namespace adsieve

#endif  // ADSIEVE_GRAPH_HPP_
