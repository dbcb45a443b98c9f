#include <sstream>

#include "json.hpp"

#include "adsieve/graph.hpp"

namespace adsieve {

using nlohmann::json;

std::string GraphToJson(const PageGraph& graph, std::string_view config_hash) {
  json doc;
  if (!config_hash.empty()) doc["config_hash"] = config_hash;
  doc["page_url"] = graph.page_url();
  json nodes = json::array();
  for (const Node& n : graph.nodes()) {
    json j;
    j["id"] = n.id;
    j["kind"] = ToString(n.kind);
    if (const auto* rec = std::get_if<HttpRecord>(&n.payload)) {
      j["url"] = rec->url.Serialize();
      j["raw"] = rec->url.raw;
      if (rec->request_kind) j["request_kind"] = ToString(*rec->request_kind);
    } else if (const auto* el = n.element()) {
      j["elem_id"] = el->elem_id;
      j["tag"] = el->tag_name;
      if (el->parent_id) j["parent_id"] = *el->parent_id;
      j["attrs"] = json::object();
      for (const auto& [k, v] : el->attributes) j["attrs"][k] = v;
    } else if (const auto* s = n.script()) {
      j["script_id"] = s->script_id;
      j["scope"] = ToString(s->scope);
      if (s->source_url) j["source_url"] = *s->source_url;
      j["attached_to"] = s->attached_to;
    }
    nodes.push_back(std::move(j));
  }
  json edges = json::array();
  for (const Edge& e : graph.edges()) {
    json j;
    j["src"] = e.src;
    j["dst"] = e.dst;
    j["kind"] = ToString(e.kind);
    if (e.action) j["action"] = ToString(*e.action);
    edges.push_back(std::move(j));
  }
  doc["nodes"] = std::move(nodes);
  doc["edges"] = std::move(edges);
  return doc.dump(1) + "\n";
}

PageGraph GraphFromJson(std::string_view text, const PublicSuffixList& psl) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("graph json: ") + e.what());
  }
  try {
    std::vector<Node> nodes;
    for (const json& j : doc.at("nodes")) {
      Node n;
      n.id = j.at("id").get<NodeId>();
      auto kind = ParseNodeKind(j.at("kind").get<std::string>());
      if (!kind) throw DataError("graph json: unknown node kind");
      n.kind = *kind;
      switch (LayerOf(n.kind)) {
        case Layer::kHttp: {
          HttpRecord rec;
          rec.url = ParseUrl(j.at("url").get<std::string>(), {}, psl);
          rec.url.raw = j.value("raw", rec.url.Serialize());
          if (j.contains("request_kind"))
            rec.request_kind = ParseResourceKind(j["request_kind"].get<std::string>());
          n.payload = std::move(rec);
          break;
        }
        case Layer::kHtml: {
          ElementRecord rec;
          rec.elem_id = j.at("elem_id").get<std::string>();
          rec.tag_name = j.at("tag").get<std::string>();
          if (j.contains("parent_id")) rec.parent_id = j["parent_id"].get<std::string>();
          for (const auto& [k, v] : j.at("attrs").items())
            rec.attributes[k] = v.get<std::string>();
          n.payload = std::move(rec);
          break;
        }
        case Layer::kJs: {
          ScriptRecord rec;
          rec.script_id = j.at("script_id").get<std::string>();
          rec.scope = j.at("scope").get<std::string>() == "inline"
                          ? ScriptScope::kInline
                          : ScriptScope::kReferenced;
          if (j.contains("source_url")) rec.source_url = j["source_url"].get<std::string>();
          rec.attached_to = j.at("attached_to").get<std::string>();
          n.payload = std::move(rec);
          break;
        }
      }
      nodes.push_back(std::move(n));
    }
    std::vector<Edge> edges;
    for (const json& j : doc.at("edges")) {
      Edge e;
      e.src = j.at("src").get<NodeId>();
      e.dst = j.at("dst").get<NodeId>();
      auto kind = ParseEdgeKind(j.at("kind").get<std::string>());
      if (!kind) throw DataError("graph json: unknown edge kind");
      e.kind = *kind;
      if (j.contains("action")) {
        e.action = ParseInteractionAction(j["action"].get<std::string>());
        if (!e.action) throw DataError("graph json: unknown action");
      }
      edges.push_back(e);
    }
    return PageGraph(doc.at("page_url").get<std::string>(), std::move(nodes),
                     std::move(edges));
  } catch (const json::exception& e) {
    throw DataError(std::string("graph json: ") + e.what());
  }
}

namespace {

std::string DotEscape(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

const char* LayerColor(NodeKind kind) {
  switch (LayerOf(kind)) {
    case Layer::kHtml: return "gold";
    case Layer::kHttp: return "palegreen";
    case Layer::kJs: return "lightskyblue";
  }
  return "white";
}

const char* EdgeColor(EdgeKind kind) {
  switch (kind) {
    case EdgeKind::kHttpToHtmlLoad: return "black";
    case EdgeKind::kHttpScriptToJsRef: return "teal";
    case EdgeKind::kHtmlToHttpElementSrc: return "purple";
    case EdgeKind::kHtmlToScriptOccurrence: return "indigo";
    case EdgeKind::kHtmlToHttpIframeUrl: return "darkgray";
    case EdgeKind::kHtmlParentChild: return "gray";
    case EdgeKind::kJsToHtmlInteraction: return "orange";
  }
  return "black";
}

}  // namespace

std::string GraphToDot(const PageGraph& graph) {
  std::ostringstream out;
  out << "digraph page {\n  rankdir=TB;\n  node [style=filled];\n";
  for (const Node& n : graph.nodes()) {
    std::string label;
    if (const auto* u = n.url()) {
      label = u->Serialize();
    } else if (const auto* e = n.element()) {
      label = "<" + e->tag_name + ">";
      if (auto it = e->attributes.find("id"); it != e->attributes.end())
        label += " #" + it->second;
    } else if (const auto* s = n.script()) {
      label = "js:" + s->script_id;
    }
    out << "  n" << n.id << " [label=\"" << n.id << ": " << DotEscape(label)
        << "\\n" << ToString(n.kind) << "\", fillcolor=" << LayerColor(n.kind)
        << "];\n";
  }
  for (const Edge& e : graph.edges()) {
    out << "  n" << e.src << " -> n" << e.dst << " [color=" << EdgeColor(e.kind);
    if (e.action) out << ", label=\"" << ToString(*e.action) << "\"";
    out << "];\n";
  }
  out << "}\n";
  return out.str();
}

}  // namespace adsieve
